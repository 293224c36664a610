//! Finite element context: mesh + metric + DOF identification + cached
//! per-weight assemblies and factorizations.
//!
//! All integrals use the hyperbolic area form nu = rho dx dy and the
//! pointwise weight (rho/2)^{-(p+q)}, so the L2 product of (p,q)-fields is
//!   <f,g> = int f conj(g) (rho/2)^{-(p+q)} nu.

use super::dof::{DofMap, Weight};
use crate::geom::mesh::TriangulatedDomain;
use crate::geom::metric::{build_metric, dlog_rho_half, HyperbolicMetric};
use crate::geom::moebius::C;
use crate::geom::quad::N_SHAPE;
use crate::linalg::ldl::LdlFactor;
use crate::linalg::sparse::{Csr, Triplets};
use std::collections::HashMap;
use std::sync::{Arc, Mutex};

#[derive(Default)]
struct Caches {
    prolong: HashMap<Weight, Arc<Csr>>,
    mass: HashMap<Weight, Arc<Csr>>,
    mass_ldl: HashMap<Weight, Arc<LdlFactor>>,
    h1: HashMap<Weight, Arc<Csr>>,
    h1_ldl: HashMap<Weight, Arc<LdlFactor>>,
    dbar: HashMap<Weight, Arc<Csr>>,
    del: HashMap<Weight, Arc<Csr>>,
    dbar_dir: HashMap<Weight, Arc<Csr>>,
}

pub struct Fem {
    pub domain: Arc<TriangulatedDomain>,
    pub metric: HyperbolicMetric,
    pub dof: DofMap,
    caches: Mutex<Caches>,
}

impl Fem {
    pub fn new(domain: Arc<TriangulatedDomain>) -> Self {
        let metric = build_metric(&domain).expect("metric build");
        let dof = DofMap::new(&domain);
        Fem {
            domain,
            metric,
            dof,
            caches: Mutex::new(Caches::default()),
        }
    }

    pub fn n_dof(&self) -> usize {
        self.dof.n_dof
    }

    pub fn prolongation(&self, w: Weight) -> Arc<Csr> {
        let mut c = self.caches.lock().unwrap();
        if let Some(p) = c.prolong.get(&w) {
            return p.clone();
        }
        let p = Arc::new(self.dof.prolongation(w));
        c.prolong.insert(w, p.clone());
        p
    }

    /// quadrature measure nu-weighted with (rho/2)^{-tot}: w_euc * 2 (rho/2)^{1-tot}
    #[inline]
    pub fn qweight(&self, f: usize, q: usize, tot: f64) -> f64 {
        let rho2 = 0.5 * self.metric.faces[f].rho[q];
        self.metric.faces[f].w_euc[q] * 2.0 * rho2.powf(1.0 - tot)
    }

    fn mass_nodes(&self, tot: f64) -> Csr {
        let n = self.dof.n_nodes;
        let mut t = Triplets::new(n, n);
        for (fi, fq) in self.metric.faces.iter().enumerate() {
            let nodes = self.domain.face_nodes(fi);
            let mut local = [[0.0f64; N_SHAPE]; N_SHAPE];
            for q in 0..fq.len() {
                let w = self.qweight(fi, q, tot);
                let s = &fq.shp[q];
                for i in 0..N_SHAPE {
                    for j in 0..N_SHAPE {
                        local[i][j] += w * s[i] * s[j];
                    }
                }
            }
            for i in 0..N_SHAPE {
                for j in 0..N_SHAPE {
                    t.push(nodes[i], nodes[j], C::new(local[i][j], 0.0));
                }
            }
        }
        t.to_csr()
    }

    fn stiff_nodes(&self, tot: f64) -> Csr {
        let n = self.dof.n_nodes;
        let mut t = Triplets::new(n, n);
        for (fi, fq) in self.metric.faces.iter().enumerate() {
            let nodes = self.domain.face_nodes(fi);
            let mut local = [[0.0f64; N_SHAPE]; N_SHAPE];
            for q in 0..fq.len() {
                let rho2 = 0.5 * fq.rho[q];
                let w = fq.w_euc[q] * rho2.powf(-tot);
                let dz = fq.p3_dz(q);
                for i in 0..N_SHAPE {
                    for j in 0..N_SHAPE {
                        // grad.grad = 2(dz_i conj(dz_j) + dzbar_i conj(dzbar_j)) for real shapes
                        let g = 2.0 * (dz[i].0 * dz[j].0.conj() + dz[i].1 * dz[j].1.conj()).re;
                        local[i][j] += w * g;
                    }
                }
            }
            for i in 0..N_SHAPE {
                for j in 0..N_SHAPE {
                    t.push(nodes[i], nodes[j], C::new(local[i][j], 0.0));
                }
            }
        }
        t.to_csr()
    }

    /// weak d/dzbar: rows test in weight (p, 1), columns in (p, 0)
    fn dbar_nodes(&self, out_tot: f64) -> Csr {
        let n = self.dof.n_nodes;
        let mut t = Triplets::new(n, n);
        for (fi, fq) in self.metric.faces.iter().enumerate() {
            let nodes = self.domain.face_nodes(fi);
            let mut local = [[C::new(0.0, 0.0); N_SHAPE]; N_SHAPE];
            for q in 0..fq.len() {
                let w = self.qweight(fi, q, out_tot);
                let s = &fq.shp[q];
                let dz = fq.p3_dz(q);
                for i in 0..N_SHAPE {
                    for j in 0..N_SHAPE {
                        local[i][j] += w * s[i] * dz[j].1;
                    }
                }
            }
            for i in 0..N_SHAPE {
                for j in 0..N_SHAPE {
                    t.push(nodes[i], nodes[j], local[i][j]);
                }
            }
        }
        t.to_csr()
    }

    /// weak metric-covariant d/dz on weight (p, 0):
    /// (del f)(x) = df/dz - p dlog(rho/2) f; rows test in weight (p+1, 0).
    fn del_nodes(&self, p: f64, out_tot: f64) -> Csr {
        let n = self.dof.n_nodes;
        let mut t = Triplets::new(n, n);
        for (fi, fq) in self.metric.faces.iter().enumerate() {
            let nodes = self.domain.face_nodes(fi);
            let mut local = [[C::new(0.0, 0.0); N_SHAPE]; N_SHAPE];
            for q in 0..fq.len() {
                let w = self.qweight(fi, q, out_tot);
                let s = &fq.shp[q];
                let dz = fq.p3_dz(q);
                let r = dlog_rho_half(fq.pts[q]);
                for i in 0..N_SHAPE {
                    for j in 0..N_SHAPE {
                        local[i][j] += w * s[i] * (dz[j].0 - p * r * s[j]);
                    }
                }
            }
            for i in 0..N_SHAPE {
                for j in 0..N_SHAPE {
                    t.push(nodes[i], nodes[j], local[i][j]);
                }
            }
        }
        t.to_csr()
    }

    /// L2 Gram on DOFs for weight w (hermitian positive definite).
    pub fn mass(&self, w: Weight) -> Arc<Csr> {
        if let Some(m) = self.caches.lock().unwrap().mass.get(&w) {
            return m.clone();
        }
        let p = self.prolongation(w);
        let mn = self.mass_nodes(w.total());
        let m = Arc::new(p.herm().matmul(&mn).matmul(&p).symmetrize());
        self.caches.lock().unwrap().mass.insert(w, m.clone());
        m
    }

    pub fn mass_ldl(&self, w: Weight) -> Arc<LdlFactor> {
        if let Some(f) = self.caches.lock().unwrap().mass_ldl.get(&w) {
            return f.clone();
        }
        let m = self.mass(w);
        let f = Arc::new(LdlFactor::new(&m).expect("mass LDL"));
        self.caches.lock().unwrap().mass_ldl.insert(w, f.clone());
        f
    }

    /// H1 Gram (mass + Dirichlet) on DOFs for weight w.
    pub fn h1(&self, w: Weight) -> Arc<Csr> {
        if let Some(m) = self.caches.lock().unwrap().h1.get(&w) {
            return m.clone();
        }
        let p = self.prolongation(w);
        let kn = self.stiff_nodes(w.total());
        let k = p.herm().matmul(&kn).matmul(&p);
        let m = self.mass(w);
        let s = Arc::new(k.add(&m, C::new(1.0, 0.0)).symmetrize());
        self.caches.lock().unwrap().h1.insert(w, s.clone());
        s
    }

    pub fn h1_ldl(&self, w: Weight) -> Arc<LdlFactor> {
        if let Some(f) = self.caches.lock().unwrap().h1_ldl.get(&w) {
            return f.clone();
        }
        let s = self.h1(w);
        let f = Arc::new(LdlFactor::new(&s).expect("H1 LDL"));
        self.caches.lock().unwrap().h1_ldl.insert(w, f.clone());
        f
    }

    /// weak dbar on DOFs: (p,0) -> functional on (p,1) test space.
    pub fn dbar_weak(&self, w: Weight) -> Arc<Csr> {
        assert_eq!(w.q2, 0, "dbar needs a (p,0) field");
        if let Some(m) = self.caches.lock().unwrap().dbar.get(&w) {
            return m.clone();
        }
        let wout = Weight::raw(w.p2, 1);
        let pin = self.prolongation(w);
        let pout = self.prolongation(wout);
        let bn = self.dbar_nodes(wout.total());
        let b = Arc::new(pout.herm().matmul(&bn).matmul(&pin));
        self.caches.lock().unwrap().dbar.insert(w, b.clone());
        b
    }

    /// weak del_covariant on DOFs: (p,0) -> functional on (p+1,0) tests.
    pub fn del_weak(&self, w: Weight) -> Arc<Csr> {
        assert_eq!(w.q2, 0, "del_covariant needs a (p,0) field");
        if let Some(m) = self.caches.lock().unwrap().del.get(&w) {
            return m.clone();
        }
        let wout = Weight::raw(w.p2 + 2, 0);
        let pin = self.prolongation(w);
        let pout = self.prolongation(wout);
        let bn = self.del_nodes(w.p(), wout.total());
        let b = Arc::new(pout.herm().matmul(&bn).matmul(&pin));
        self.caches.lock().unwrap().del.insert(w, b.clone());
        b
    }

    /// Scalar Laplacian (weight 0) in weak form: Dirichlet matrix on DOFs.
    /// Symmetric positive semidefinite; kernel is spanned by constants.
    pub fn scalar_laplacian(&self) -> Csr {
        let p = self.prolongation(Weight::new(0, 0));
        let kn = self.stiff_nodes(0.0);
        p.herm().matmul(&kn).matmul(&p).symmetrize()
    }

    /// Dirichlet form of dbar on weight (p,0): A[f,g] = <dbar f, dbar g>
    /// with the facewise strong derivative and the (p,1) pointwise norm.
    /// Sparse, hermitian positive semidefinite; its null space is the
    /// numerical kernel of dbar.
    pub fn dbar_dirichlet(&self, w: Weight) -> Arc<Csr> {
        assert_eq!(w.q2, 0);
        if let Some(m) = self.caches.lock().unwrap().dbar_dir.get(&w) {
            return m.clone();
        }
        let out_tot = w.total() + 1.0;
        let n = self.dof.n_nodes;
        let mut t = Triplets::new(n, n);
        for (fi, fq) in self.metric.faces.iter().enumerate() {
            let nodes = self.domain.face_nodes(fi);
            let mut local = [[C::new(0.0, 0.0); N_SHAPE]; N_SHAPE];
            for q in 0..fq.len() {
                let wq = self.qweight(fi, q, out_tot);
                let dz = fq.p3_dz(q);
                for i in 0..N_SHAPE {
                    for j in 0..N_SHAPE {
                        local[i][j] += wq * dz[i].1.conj() * dz[j].1;
                    }
                }
            }
            for i in 0..N_SHAPE {
                for j in 0..N_SHAPE {
                    t.push(nodes[i], nodes[j], local[i][j]);
                }
            }
        }
        let an = t.to_csr();
        let p = self.prolongation(w);
        let a = Arc::new(p.herm().matmul(&an).matmul(&p).symmetrize());
        self.caches.lock().unwrap().dbar_dir.insert(w, a.clone());
        a
    }

    /// Public access to the raw del assembly (used for forms with q = 1).
    pub fn del_nodes_pub(&self, p: f64, out_tot: f64) -> Csr {
        self.del_nodes(p, out_tot)
    }

    /// Node values (length n_nodes) of a DOF vector in weight w.
    pub fn node_values(&self, w: Weight, dofs: &[C]) -> Vec<C> {
        self.prolongation(w).mul(dofs)
    }
}
