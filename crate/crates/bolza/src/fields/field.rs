//! Automorphic weighted fields: sections of K^p (x) Kbar^q stored by
//! master-DOF coefficients in the global disk coordinate.

use super::dof::{aut_factor, Weight};
use super::space::Fem;
use crate::error::FieldError;
use crate::geom::metric::rho_at;
use crate::geom::moebius::C;
use crate::geom::quad::p3_shapes;

#[derive(Clone, Debug)]
pub struct WeightedField {
    pub weight: Weight,
    pub dofs: Vec<C>,
}

impl WeightedField {
    pub fn zeros(fem: &Fem, weight: Weight) -> Self {
        Self {
            weight,
            dofs: vec![C::new(0.0, 0.0); fem.n_dof()],
        }
    }

    /// Sample an arbitrary coefficient function at the master nodes.
    /// The caller is responsible for automorphy of the sampled function.
    pub fn from_fn(fem: &Fem, weight: Weight, f: impl Fn(C) -> C) -> Self {
        let dofs = fem
            .dof
            .master_nodes
            .iter()
            .map(|&n| f(fem.domain.node_pos(n)))
            .collect();
        Self { weight, dofs }
    }

    pub fn scale(&self, s: C) -> Self {
        Self {
            weight: self.weight,
            dofs: self.dofs.iter().map(|v| v * s).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.weight, other.weight);
        Self {
            weight: self.weight,
            dofs: self
                .dofs
                .iter()
                .zip(other.dofs.iter())
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(C::new(-1.0, 0.0)))
    }

    /// Pointwise product; the weights add.
    pub fn mul_pointwise(&self, other: &Self) -> Self {
        Self {
            weight: Weight::half(self.weight.p2 + other.weight.p2, self.weight.q2 + other.weight.q2),
            dofs: self
                .dofs
                .iter()
                .zip(other.dofs.iter())
                .map(|(a, b)| a * b)
                .collect(),
        }
    }

    /// Complex conjugate field; weight (p,q) -> (q,p).
    pub fn conj_field(&self) -> Self {
        Self {
            weight: self.weight.conj(),
            dofs: self.dofs.iter().map(|v| v.conj()).collect(),
        }
    }

    /// Multiply by (rho/2)^{-k}: raises/lowers both indices by k.
    pub fn metric_dual(&self, fem: &Fem, k: i32) -> Self {
        let dofs = self
            .dofs
            .iter()
            .zip(fem.dof.master_nodes.iter())
            .map(|(v, &n)| {
                let r2 = 0.5 * rho_at(fem.domain.node_pos(n));
                v * r2.powi(-k)
            })
            .collect();
        Self {
            weight: Weight::half(self.weight.p2 - 2 * k, self.weight.q2 - 2 * k),
            dofs,
        }
    }

    /// L2 inner product <self, other>, conjugate-linear in `other`.
    pub fn l2_inner(&self, fem: &Fem, other: &Self) -> Result<C, FieldError> {
        if self.weight != other.weight {
            return Err(FieldError::WeightMismatch {
                expected: self.weight.to_string(),
                got: other.weight.to_string(),
            });
        }
        let m = fem.mass(self.weight);
        // <a,b> = sum conj(b) M a
        Ok(m.quad_form(&other.dofs, &self.dofs))
    }

    pub fn l2_norm(&self, fem: &Fem) -> f64 {
        self.l2_inner(fem, self).unwrap().re.max(0.0).sqrt()
    }

    /// Evaluate the interpolant at barycentric coordinates of a given face.
    pub fn eval_in_face(&self, fem: &Fem, face: usize, bary: [f64; 3]) -> C {
        let nodes = fem.domain.face_nodes(face);
        let nv = fem.node_values(self.weight, &self.dofs);
        let s = p3_shapes(bary);
        let mut out = C::new(0.0, 0.0);
        for i in 0..10 {
            out += s[i] * nv[nodes[i]];
        }
        out
    }

    /// Worst-case automorphy defect sampled on slave boundary edges:
    /// |f(gamma z) - factor * f(z)| relative to the field scale.
    pub fn automorphy_residual(&self, fem: &Fem) -> f64 {
        let nv = fem.node_values(self.weight, &self.dofs);
        let domain = &fem.domain;
        let scale = self
            .dofs
            .iter()
            .map(|v| v.norm())
            .fold(0.0f64, f64::max)
            .max(1e-300);
        // face adjacency for boundary edges
        let mut edge_face = vec![usize::MAX; domain.n_edges()];
        for (fi, fe) in domain.face_edges.iter().enumerate() {
            for &e in fe {
                edge_face[e] = fi;
            }
        }
        let mut worst = 0.0f64;
        for (ei, &(a, b)) in domain.edges.iter().enumerate() {
            let side = match domain.edge_side(a, b) {
                Some(s) if s >= 4 => s,
                _ => continue,
            };
            let j = side - 4;
            let g = domain.group.gens[j]; // maps slave points to master points
            let face_s = edge_face[ei];
            for &t in &[0.3, 0.7] {
                let zs = domain.verts[a] * (1.0 - t) + domain.verts[b] * t;
                let zm = g.apply(zs);
                let (fm, bm) = locate(fem, zm);
                let bs = barycentric_of(domain, face_s, zs);
                let val_s = eval_nodal(fem, &nv, face_s, bs);
                let val_m = eval_nodal(fem, &nv, fm, bm);
                // f(zs) = f(g^{-1} zm): factor for gamma = g^{-1} at zm
                let c = aut_factor(&g.inverse(), zm, self.weight);
                worst = worst.max((val_s - c * val_m).norm() / scale);
            }
        }
        worst
    }
}

fn eval_nodal(fem: &Fem, node_vals: &[C], face: usize, bary: [f64; 3]) -> C {
    let nodes = fem.domain.face_nodes(face);
    let s = p3_shapes(bary);
    let mut out = C::new(0.0, 0.0);
    for i in 0..10 {
        out += s[i] * node_vals[nodes[i]];
    }
    out
}

fn barycentric_of(domain: &crate::geom::mesh::TriangulatedDomain, face: usize, z: C) -> [f64; 3] {
    let [a, b, c] = domain.faces[face];
    let (p0, p1, p2) = (domain.verts[a], domain.verts[b], domain.verts[c]);
    let det = (p1 - p0).re * (p2 - p0).im - (p1 - p0).im * (p2 - p0).re;
    let l1 = ((z - p0).re * (p2 - p0).im - (z - p0).im * (p2 - p0).re) / det;
    let l2 = ((p1 - p0).re * (z - p0).im - (p1 - p0).im * (z - p0).re) / det;
    [1.0 - l1 - l2, l1, l2]
}

/// Locate the face containing z (best barycentric fit). Linear scan; used
/// only in diagnostics.
fn locate(fem: &Fem, z: C) -> (usize, [f64; 3]) {
    let mut best = (0usize, [0.0; 3], f64::MAX);
    for f in 0..fem.domain.n_faces() {
        let b = barycentric_of(&fem.domain, f, z);
        let neg = b.iter().map(|&x| (-x).max(0.0)).sum::<f64>();
        if neg < best.2 {
            best = (f, b, neg);
            if neg == 0.0 {
                break;
            }
        }
    }
    (best.0, best.1)
}
