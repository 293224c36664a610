//! Infinitesimal simplicity: the dimension of endomorphism sections killed
//! by both dbar_A and ad_Phi, extracted from the smallest eigenvalues of the
//! Dirichlet form
//!   A[s,t] = <dbar_A s, dbar_A t> + <[Phi, s], [Phi, t]>
//! over all (not just trace-free) endomorphisms. A stable state has a
//! one-dimensional kernel spanned by the identity, which the discretization
//! reproduces to machine precision.

use super::mat::Mat;
use super::solve::metric_values;
use super::state::{HiggsState, MatrixKind};
use crate::error::{FieldError, SolveError};
use crate::fields::space::Fem;
use crate::linalg::ldl::cg_solve;
use crate::linalg::sparse::{Csr, Triplets};
use num_complex::Complex64 as C;

/// Assembled pencil (A, M) on the endomorphism section space, with entry
/// pairings taken in the state's hermitian metric.
pub struct SimplicityPencil {
    pub a: Csr,
    pub m: Csr,
    pub n_entries: usize,
}

pub fn assemble_pencil(fem: &Fem, state: &HiggsState) -> SimplicityPencil {
    let n = state.n();
    let ne = n * n;
    let nn = fem.dof.n_nodes;
    let mv = metric_values(fem, state);
    let phi_t = state.phi.node_tables(fem);
    let a_t = state.a01.node_tables(fem);
    let mut ta = Triplets::new(ne * nn, ne * nn);
    let mut tm = Triplets::new(ne * nn, ne * nn);
    let kscale = state.shape.kappa_scale();
    for (f, fq) in fem.metric.faces.iter().enumerate() {
        let nodes = fem.domain.face_nodes(f);
        for q in 0..fq.len() {
            let h = mv.h_at(fem, state, f, q);
            let hinv = h.inverse();
            let am = a_t.at_quad(fem, f, q);
            let phim = phi_t.at_quad(fem, f, q);
            let dz = fq.p3_dz(q);
            let r2 = 0.5 * fq.rho[q];
            // one-form pairing weight (rho/2)^{-1} nu = 2 dxdy
            let w1 = fq.w_euc[q] * 2.0 * kscale;
            let wm = fq.w_euc[q] * 2.0 * r2 * kscale; // section mass: nu = rho dxdy
            // local operator: for basis X = E_{ij} N_s:
            //   O1(X) = dzbar N_s E_{ij} + N_s [a, E_{ij}]   (0,1)-forms
            //   O2(X) = N_s [phi, E_{ij}]                    (1,0)-forms
            // pairing <A, B>_h-pointwise = tr(A h^{-1} B^H h)
            // accumulate the 60x60-ish local hermitian form; exploit that
            // tr(E_{ij} h^{-1} E_{kl}^H h) = (h^{-1})_{jl} h_{ki}
            let g = |i: usize, j: usize, k: usize, l: usize| -> C {
                hinv[(j, l)] * h[(k, i)]
            };
            // bracket images: [a, E_{ij}] = sum_r a_{ri}? compute entries:
            // ([M, E_{ij}])_{pq} = M_{pi} d_{jq} - d_{pi} M_{jq}
            let bracket_pair = |m1: &Mat,
                                i: usize,
                                j: usize,
                                m2: &Mat,
                                k: usize,
                                l: usize|
             -> C {
                // tr([m1,E_ij] h^{-1} [m2,E_kl]^H h)
                let mut s = C::new(0.0, 0.0);
                for p in 0..n {
                    for qq in 0..n {
                        let x = if qq == j { m1[(p, i)] } else { C::new(0.0, 0.0) }
                            - if p == i { m1[(j, qq)] } else { C::new(0.0, 0.0) };
                        if x == C::new(0.0, 0.0) {
                            continue;
                        }
                        for r in 0..n {
                            for t in 0..n {
                                let y = if t == l { m2[(r, k)] } else { C::new(0.0, 0.0) }
                                    - if r == k { m2[(l, t)] } else { C::new(0.0, 0.0) };
                                if y == C::new(0.0, 0.0) {
                                    continue;
                                }
                                // tr(E_pq-valued x h^{-1} (E_rt y)^H h)
                                s += x * y.conj() * hinv[(qq, t)] * h[(r, p)];
                            }
                        }
                    }
                }
                s
            };
            let mixed_pair = |i: usize, j: usize, m2: &Mat, k: usize, l: usize| -> C {
                // tr(E_ij h^{-1} [m2, E_kl]^H h)
                let mut s = C::new(0.0, 0.0);
                for r in 0..n {
                    for t in 0..n {
                        let y = if t == l { m2[(r, k)] } else { C::new(0.0, 0.0) }
                            - if r == k { m2[(l, t)] } else { C::new(0.0, 0.0) };
                        if y != C::new(0.0, 0.0) {
                            s += y.conj() * hinv[(j, t)] * h[(r, i)];
                        }
                    }
                }
                s
            };
            for i in 0..n {
                for j in 0..n {
                    let e1 = i * n + j;
                    for k in 0..n {
                        for l in 0..n {
                            let e2 = k * n + l;
                            let gij = g(i, j, k, l);
                            let br_aa = bracket_pair(&am, i, j, &am, k, l);
                            let br_pp = bracket_pair(&phim, i, j, &phim, k, l);
                            let mx_a = mixed_pair(i, j, &am, k, l);
                            let mx_a2 = mixed_pair(k, l, &am, i, j).conj();
                            for s1 in 0..10 {
                                for s2 in 0..10 {
                                    // dbar part: (dzbar N1 E1 + N1 [a,E1]) vs same
                                    let v = dz[s1].1 * dz[s2].1.conj() * gij
                                        + dz[s1].1 * fq.shp[q][s2] * mx_a.conj()
                                        + fq.shp[q][s1] * dz[s2].1.conj() * mx_a2.conj()
                                        + fq.shp[q][s1] * fq.shp[q][s2] * (br_aa + br_pp);
                                    if v != C::new(0.0, 0.0) {
                                        ta.push(
                                            e1 * nn + nodes[s1],
                                            e2 * nn + nodes[s2],
                                            w1 * v,
                                        );
                                    }
                                    let mval = fq.shp[q][s1] * fq.shp[q][s2] * gij;
                                    if mval != C::new(0.0, 0.0) {
                                        tm.push(
                                            e1 * nn + nodes[s1],
                                            e2 * nn + nodes[s2],
                                            wm * mval,
                                        );
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    // project through the block prolongation
    let nd = fem.n_dof();
    let mut bt = Triplets::new(ne * nn, ne * nd);
    for e in 0..ne {
        let (i, j) = (e / n, e % n);
        let w = MatrixKind::Section.weight(&state.shape, i, j);
        let p = fem.prolongation(w);
        for row in 0..nn {
            for pp in p.indptr[row]..p.indptr[row + 1] {
                bt.push(e * nn + row, e * nd + p.indices[pp] as usize, p.data[pp]);
            }
        }
    }
    let bp = bt.to_csr();
    let a = bp.herm().matmul(&ta.to_csr()).matmul(&bp).symmetrize();
    let m = bp.herm().matmul(&tm.to_csr()).matmul(&bp).symmetrize();
    SimplicityPencil {
        a,
        m,
        n_entries: ne,
    }
}

/// Count the numerical kernel of the simplicity operator. Returns
/// (dimension, singular values, gap).
pub fn simplicity_check(
    fem: &Fem,
    state: &HiggsState,
    gap_required: f64,
) -> Result<(usize, Vec<f64>, f64), SolveError> {
    let pencil = assemble_pencil(fem, state);
    let n = pencil.a.nrows;
    let block = 6.min(n);
    // shifted inverse iteration with CG solves and a block-scalar
    // preconditioner
    let shift = {
        let tr_a: f64 = (0..n)
            .map(|r| {
                (pencil.a.indptr[r]..pencil.a.indptr[r + 1])
                    .find(|&p| pencil.a.indices[p] as usize == r)
                    .map(|p| pencil.a.data[p].re)
                    .unwrap_or(0.0)
            })
            .sum();
        let tr_m: f64 = (0..n)
            .map(|r| {
                (pencil.m.indptr[r]..pencil.m.indptr[r + 1])
                    .find(|&p| pencil.m.indices[p] as usize == r)
                    .map(|p| pencil.m.data[p].re)
                    .unwrap_or(0.0)
            })
            .sum();
        1e-4 * tr_a / tr_m.max(1e-300)
    };
    let shifted = pencil.a.add(&pencil.m, C::new(shift, 0.0));
    // per-entry scalar preconditioner
    let ne = pencil.n_entries;
    let nd = fem.n_dof();
    let nsmall = state.n();
    let pre: Vec<_> = (0..ne)
        .map(|e| {
            let (i, j) = (e / nsmall, e % nsmall);
            let w = MatrixKind::Section.weight(&state.shape, i, j);
            fem.h1_ldl(w)
        })
        .collect();
    let precond = |x: &[C]| -> Vec<C> {
        let mut out = vec![C::new(0.0, 0.0); x.len()];
        for e in 0..ne {
            let seg = &x[e * nd..(e + 1) * nd];
            let sol = pre[e].solve(seg);
            out[e * nd..(e + 1) * nd].copy_from_slice(&sol);
        }
        out
    };
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(77);
    let mut xs: Vec<Vec<C>> = (0..block)
        .map(|_| {
            (0..n)
                .map(|_| C::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
                .collect()
        })
        .collect();
    // seed the identity section into the block for fast kernel capture
    {
        let mut id = vec![C::new(0.0, 0.0); n];
        for i in 0..nsmall {
            let e = i * nsmall + i;
            for d in 0..nd {
                id[e * nd + d] = C::new(1.0, 0.0);
            }
        }
        xs[0] = id;
    }
    for _round in 0..3 {
        let mut ys = Vec::with_capacity(block);
        for x in &xs {
            let rhs = pencil.m.mul(x);
            let (y, _, _) = cg_solve(
                &|v| shifted.mul(v),
                &precond,
                &rhs,
                None,
                1e-10,
                600,
            )?;
            ys.push(y);
        }
        // orthonormalize in M-metric (Gram-Schmidt)
        for i in 0..block {
            for j in 0..i {
                let mj = pencil.m.mul(&ys[j]);
                let c: C = mj.iter().zip(ys[i].iter()).map(|(a, b)| a.conj() * b).sum();
                let yj = ys[j].clone();
                for k in 0..n {
                    ys[i][k] -= c * yj[k];
                }
            }
            let mi = pencil.m.mul(&ys[i]);
            let nm: f64 = mi
                .iter()
                .zip(ys[i].iter())
                .map(|(a, b)| (a.conj() * b).re)
                .sum::<f64>()
                .max(1e-300)
                .sqrt();
            for k in 0..n {
                ys[i][k] /= nm;
            }
        }
        xs = ys;
    }
    // Rayleigh-Ritz
    use crate::linalg::dense::{hermitian_eigen, CMat};
    let ax: Vec<Vec<C>> = xs.iter().map(|x| pencil.a.mul(x)).collect();
    let h = CMat::from_fn(block, block, |r, c| {
        xs[r].iter().zip(ax[c].iter()).map(|(a, b)| a.conj() * b).sum()
    });
    let (vals, _) = hermitian_eigen(&h);
    let sigmas: Vec<f64> = vals.iter().map(|v| v.max(0.0).sqrt()).collect();
    let mut dim = 0;
    let mut best = 0.0;
    for i in 0..sigmas.len() - 1 {
        let ratio = sigmas[i + 1] / sigmas[i].max(1e-300);
        if ratio > best {
            best = ratio;
            dim = i + 1;
        }
    }
    if best < gap_required {
        return Err(SolveError::Field(FieldError::GapFailure {
            required: gap_required,
            got: best,
        }));
    }
    Ok((dim, sigmas, best))
}
