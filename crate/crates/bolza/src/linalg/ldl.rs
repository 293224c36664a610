//! Sparse LDL^H factorization for Hermitian positive definite systems,
//! with reverse Cuthill-McKee preordering. Simplicial up-looking variant.

use super::sparse::{rcm_order, Csr};
#[cfg(test)]
use super::sparse::Triplets;
use crate::error::SolveError;
use num_complex::Complex64 as C;

pub struct LdlFactor {
    n: usize,
    #[allow(dead_code)]
    perm: Vec<usize>,
    iperm: Vec<usize>,
    lp: Vec<usize>,
    li: Vec<u32>,
    lx: Vec<C>,
    d: Vec<f64>,
}

impl LdlFactor {
    /// Factor a Hermitian positive definite matrix given in full CSR form.
    pub fn new(a: &Csr) -> Result<Self, SolveError> {
        assert_eq!(a.nrows, a.ncols);
        let n = a.nrows;
        let perm = rcm_order(n, a);
        let mut iperm = vec![0usize; n];
        for (i, &p) in perm.iter().enumerate() {
            iperm[p] = i;
        }
        // permuted upper triangle by columns: for column k (new index), entries
        // (i_new <= k, value A[old(i), old(k)])
        let mut cols: Vec<Vec<(u32, C)>> = vec![Vec::new(); n];
        for r_old in 0..n {
            let r_new = iperm[r_old];
            for p in a.indptr[r_old]..a.indptr[r_old + 1] {
                let c_old = a.indices[p] as usize;
                let c_new = iperm[c_old];
                // keep upper triangle of the permuted matrix: row <= col
                if r_new <= c_new {
                    cols[c_new].push((r_new as u32, a.data[p]));
                }
            }
        }
        for col in cols.iter_mut() {
            col.sort_unstable_by_key(|&(i, _)| i);
        }

        // Up-looking LDL^H (Davis), complex Hermitian: A = L D L^H, unit L.
        let mut lp = vec![0usize; n + 1];
        let mut parent = vec![usize::MAX; n];
        let mut lnz = vec![0usize; n];
        let mut flag = vec![usize::MAX; n];
        // symbolic pass: elimination tree and column counts
        for k in 0..n {
            flag[k] = k;
            for &(i_u, _) in &cols[k] {
                let mut i = i_u as usize;
                if i >= k {
                    continue;
                }
                while flag[i] != k {
                    if parent[i] == usize::MAX {
                        parent[i] = k;
                    }
                    lnz[i] += 1;
                    flag[i] = k;
                    i = parent[i];
                }
            }
        }
        for k in 0..n {
            lp[k + 1] = lp[k] + lnz[k];
        }
        let nnz = lp[n];
        let mut li = vec![0u32; nnz];
        let mut lx = vec![C::new(0.0, 0.0); nnz];
        let mut d = vec![0.0f64; n];
        let mut y = vec![C::new(0.0, 0.0); n];
        let mut pattern = vec![0usize; n];
        let mut lnz_cur = vec![0usize; n];
        let mut flag = vec![usize::MAX; n];
        for k in 0..n {
            // scatter column k of A (upper part) into y, collect pattern
            let mut top = n;
            flag[k] = k;
            let mut dk = 0.0f64;
            for &(i_u, v) in &cols[k] {
                let i0 = i_u as usize;
                if i0 == k {
                    dk += v.re;
                    continue;
                }
                // y[i] accumulates A[i,k] for i < k
                y[i0] += v;
                let mut len = 0usize;
                let mut i = i0;
                while flag[i] != k {
                    pattern[len] = i;
                    len += 1;
                    flag[i] = k;
                    i = parent[i];
                }
                while len > 0 {
                    len -= 1;
                    top -= 1;
                    pattern[top] = pattern[len];
                }
            }
            // pattern[top..n] lists the row indices of L[k, :] in etree order;
            // they are ascending? Davis guarantees monotone etree traversal order
            // suitable for the triangular solve.
            let mut s = top;
            while s < n {
                let i = pattern[s];
                let yi = y[i];
                y[i] = C::new(0.0, 0.0);
                // update y with column i of L: y[r] -= conj(L[k,i]-to-be) ... standard:
                // solving L(0:k,0:k) D (L[k,0:k])^H = A(0:k,k):
                // y currently holds the partially reduced right-hand side.
                let p2 = lp[i] + lnz_cur[i];
                for p in lp[i]..p2 {
                    y[li[p] as usize] -= lx[p] * yi;
                }
                let lki_conj = yi / d[i]; // this equals conj(L[k,i]) * d[i] / d[i]
                dk -= (lki_conj * lki_conj.conj()).re * d[i];
                // store L[k,i]: column i gains entry at row k with value conj(lki_conj)...
                li[p2] = k as u32;
                lx[p2] = lki_conj.conj();
                lnz_cur[i] += 1;
                s += 1;
            }
            if !(dk > 0.0) || !dk.is_finite() {
                return Err(SolveError::Linear(format!(
                    "LDL^H pivot {k} nonpositive ({dk:.3e}); matrix not positive definite"
                )));
            }
            d[k] = dk;
        }
        Ok(Self {
            n,
            perm,
            iperm,
            lp,
            li,
            lx,
            d,
        })
    }

    pub fn nnz_l(&self) -> usize {
        self.lx.len()
    }

    /// Solve A x = b.
    pub fn solve(&self, b: &[C]) -> Vec<C> {
        let n = self.n;
        let mut x = vec![C::new(0.0, 0.0); n];
        // permute
        for i in 0..n {
            x[self.iperm[i]] = b[i];
        }
        // L y = b (unit lower, stored by columns: li/lx hold rows k > i of column i)
        for i in 0..n {
            let xi = x[i];
            for p in self.lp[i]..self.lp[i + 1] {
                x[self.li[p] as usize] -= self.lx[p] * xi;
            }
        }
        // D z = y
        for i in 0..n {
            x[i] /= self.d[i];
        }
        // L^H x = z
        for i in (0..n).rev() {
            let mut acc = x[i];
            for p in self.lp[i]..self.lp[i + 1] {
                acc -= self.lx[p].conj() * x[self.li[p] as usize];
            }
            x[i] = acc;
        }
        let mut out = vec![C::new(0.0, 0.0); n];
        for i in 0..n {
            out[i] = x[self.iperm[i]];
        }
        out
    }
}

/// Preconditioned conjugate gradient for Hermitian positive definite systems.
/// `apply_a` computes A x; `precond` approximates A^{-1}.
pub fn cg_solve(
    apply_a: &dyn Fn(&[C]) -> Vec<C>,
    precond: &dyn Fn(&[C]) -> Vec<C>,
    b: &[C],
    x0: Option<&[C]>,
    rtol: f64,
    max_iter: usize,
) -> Result<(Vec<C>, usize, f64), SolveError> {
    let n = b.len();
    let dot = |u: &[C], v: &[C]| -> C { u.iter().zip(v).map(|(a, b)| a.conj() * b).sum() };
    let nrm = |u: &[C]| -> f64 { dot(u, u).re.sqrt() };
    let bnorm = nrm(b).max(1e-300);
    let mut x = match x0 {
        Some(x0) => x0.to_vec(),
        None => vec![C::new(0.0, 0.0); n],
    };
    let mut r = b.to_vec();
    if x0.is_some() {
        let ax = apply_a(&x);
        for i in 0..n {
            r[i] -= ax[i];
        }
    }
    let mut z = precond(&r);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut res = nrm(&r) / bnorm;
    if res <= rtol {
        return Ok((x, 0, res));
    }
    for it in 1..=max_iter {
        let ap = apply_a(&p);
        let pap = dot(&p, &ap);
        if pap.re <= 0.0 {
            return Err(SolveError::Linear(format!(
                "CG: operator not positive definite (p^H A p = {:.3e})",
                pap.re
            )));
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        res = nrm(&r) / bnorm;
        if res <= rtol {
            return Ok((x, it, res));
        }
        z = precond(&r);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(SolveError::NonConvergence {
        iters: max_iter,
        residual: res,
    })
}

/// Build a CSR Hermitian matrix from its action on basis vectors (testing only).
#[cfg(test)]
pub fn dense_to_csr(n: usize, entries: &[(usize, usize, C)]) -> Csr {
    let mut t = Triplets::new(n, n);
    for &(r, c, v) in entries {
        t.push(r, c, v);
    }
    t.to_csr()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_hpd(n: usize, seed: u64) -> Csr {
        // A = B^H B + n I with sparse-ish random B
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut t = Triplets::new(n, n);
        for r in 0..n {
            for c in 0..n {
                if rng.gen::<f64>() < 0.2 {
                    t.push(r, c, C::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5));
                }
            }
        }
        let b = t.to_csr();
        let bh = b.herm();
        let mut a = bh.matmul(&b);
        let mut diag = Triplets::new(n, n);
        for i in 0..n {
            diag.push(i, i, C::new(n as f64 * 0.05 + 1.0, 0.0));
        }
        a = a.add(&diag.to_csr(), C::new(1.0, 0.0));
        a.symmetrize()
    }

    #[test]
    fn ldl_solves() {
        let n = 60;
        let a = random_hpd(n, 7);
        let f = LdlFactor::new(&a).unwrap();
        let b: Vec<C> = (0..n).map(|i| C::new(i as f64, -(i as f64) * 0.3)).collect();
        let x = f.solve(&b);
        let ax = a.mul(&x);
        let err: f64 = ax
            .iter()
            .zip(b.iter())
            .map(|(u, v)| (u - v).norm_sqr())
            .sum::<f64>()
            .sqrt();
        assert!(err < 1e-9, "residual {err}");
    }

    #[test]
    fn cg_matches_ldl() {
        let n = 50;
        let a = random_hpd(n, 13);
        let f = LdlFactor::new(&a).unwrap();
        let b: Vec<C> = (0..n).map(|i| C::new(1.0 / (i as f64 + 1.0), 0.2)).collect();
        let x1 = f.solve(&b);
        let (x2, _, _) = cg_solve(
            &|v| a.mul(v),
            &|v| v.to_vec(),
            &b,
            None,
            1e-12,
            500,
        )
        .unwrap();
        let err: f64 = x1
            .iter()
            .zip(x2.iter())
            .map(|(u, v)| (u - v).norm_sqr())
            .sum::<f64>()
            .sqrt();
        assert!(err < 1e-8, "{err}");
    }
}
