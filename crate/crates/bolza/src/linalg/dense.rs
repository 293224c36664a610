//! Small dense complex matrices: just enough for Ritz blocks, Gram matrices
//! and hermitian eigendecompositions via cyclic Jacobi.

use num_complex::Complex64 as C;

#[derive(Clone, Debug)]
pub struct CMat {
    pub nrows: usize,
    pub ncols: usize,
    /// column-major storage
    pub a: Vec<C>,
}

impl CMat {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            a: vec![C::new(0.0, 0.0); nrows * ncols],
        }
    }

    pub fn eye(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(nrows: usize, ncols: usize, mut f: impl FnMut(usize, usize) -> C) -> Self {
        let mut m = Self::zeros(nrows, ncols);
        for c in 0..ncols {
            for r in 0..nrows {
                m[(r, c)] = f(r, c);
            }
        }
        m
    }

    pub fn mul(&self, other: &CMat) -> CMat {
        assert_eq!(self.ncols, other.nrows);
        let mut out = CMat::zeros(self.nrows, other.ncols);
        for c in 0..other.ncols {
            for k in 0..self.ncols {
                let b = other[(k, c)];
                if b.re == 0.0 && b.im == 0.0 {
                    continue;
                }
                for r in 0..self.nrows {
                    out[(r, c)] += self[(r, k)] * b;
                }
            }
        }
        out
    }

    pub fn herm(&self) -> CMat {
        CMat::from_fn(self.ncols, self.nrows, |r, c| self[(c, r)].conj())
    }

    /// Cholesky factor R (upper) with A = R^H R; fails on nonpositive pivots.
    pub fn cholesky_upper(&self) -> Option<CMat> {
        assert_eq!(self.nrows, self.ncols);
        let n = self.nrows;
        let mut r = CMat::zeros(n, n);
        for j in 0..n {
            let mut d = self[(j, j)].re;
            for k in 0..j {
                d -= r[(k, j)].norm_sqr();
            }
            if d <= 0.0 || !d.is_finite() {
                return None;
            }
            let dj = d.sqrt();
            r[(j, j)] = C::new(dj, 0.0);
            for i in (j + 1)..n {
                let mut s = self[(j, i)];
                for k in 0..j {
                    s -= r[(k, j)].conj() * r[(k, i)];
                }
                r[(j, i)] = s / dj;
            }
        }
        Some(r)
    }

    /// Solve R x = b for upper triangular R.
    pub fn solve_upper(&self, b: &[C]) -> Vec<C> {
        let n = self.nrows;
        let mut x = b.to_vec();
        for i in (0..n).rev() {
            for k in (i + 1)..n {
                let t = self[(i, k)] * x[k];
                x[i] -= t;
            }
            x[i] /= self[(i, i)];
        }
        x
    }

    /// Solve R^H x = b for upper triangular R.
    pub fn solve_upper_herm(&self, b: &[C]) -> Vec<C> {
        let n = self.nrows;
        let mut x = b.to_vec();
        for i in 0..n {
            for k in 0..i {
                let t = self[(k, i)].conj() * x[k];
                x[i] -= t;
            }
            x[i] /= self[(i, i)].conj();
        }
        x
    }
}

impl std::ops::Index<(usize, usize)> for CMat {
    type Output = C;
    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &C {
        &self.a[c * self.nrows + r]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMat {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C {
        &mut self.a[c * self.nrows + r]
    }
}

/// Eigendecomposition of a hermitian matrix by cyclic Jacobi rotations.
/// Returns (eigenvalues ascending, unitary V with A = V diag V^H).
pub fn hermitian_eigen(h: &CMat) -> (Vec<f64>, CMat) {
    assert_eq!(h.nrows, h.ncols);
    let n = h.nrows;
    let mut a = h.clone();
    // enforce exact hermiticity
    for c in 0..n {
        for r in 0..n {
            let m = 0.5 * (a[(r, c)] + a[(c, r)].conj());
            a[(r, c)] = m;
            a[(c, r)] = m.conj();
        }
        a[(c, c)] = C::new(a[(c, c)].re, 0.0);
    }
    let mut v = CMat::eye(n);
    let off = |a: &CMat| -> f64 {
        let mut s = 0.0;
        for c in 0..n {
            for r in 0..n {
                if r != c {
                    s += a[(r, c)].norm_sqr();
                }
            }
        }
        s.sqrt()
    };
    let scale = {
        let mut s = 0.0f64;
        for c in 0..n {
            s = s.max(a[(c, c)].re.abs());
        }
        for c in 0..n {
            for r in 0..n {
                s = s.max(a[(r, c)].norm());
            }
        }
        s.max(1e-300)
    };
    for _sweep in 0..100 {
        if off(&a) <= 1e-14 * scale * (n as f64) {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq.norm() <= 1e-300 {
                    continue;
                }
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                // unitary 2x2: [c, -conj(s); s, c] diagonalizing
                // [app, apq; conj(apq), aqq]
                let phase = apq / apq.norm();
                let tau = (app - aqq) / (2.0 * apq.norm());
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let cth = 1.0 / (1.0 + t * t).sqrt();
                let sth = t * cth;
                let (cr, sr) = (C::new(cth, 0.0), phase.conj() * sth);
                // A <- J^H A J where J acts on columns p,q:
                // col_p' = c col_p + s col_q ; col_q' = -conj(s) col_p + c col_q
                for r in 0..n {
                    let xp = a[(r, p)];
                    let xq = a[(r, q)];
                    a[(r, p)] = cr * xp + sr * xq;
                    a[(r, q)] = -sr.conj() * xp + cr * xq;
                }
                for cidx in 0..n {
                    let xp = a[(p, cidx)];
                    let xq = a[(q, cidx)];
                    a[(p, cidx)] = cr.conj() * xp + sr.conj() * xq;
                    a[(q, cidx)] = -sr * xp + cr * xq;
                }
                for r in 0..n {
                    let xp = v[(r, p)];
                    let xq = v[(r, q)];
                    v[(r, p)] = cr * xp + sr * xq;
                    v[(r, q)] = -sr.conj() * xp + cr * xq;
                }
            }
        }
    }
    // sort ascending
    let mut idx: Vec<usize> = (0..n).collect();
    let evals: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    idx.sort_by(|&i, &j| evals[i].partial_cmp(&evals[j]).unwrap());
    let vals: Vec<f64> = idx.iter().map(|&i| evals[i]).collect();
    let vecs = CMat::from_fn(n, n, |r, c| v[(r, idx[c])]);
    (vals, vecs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jacobi_diagonalizes() {
        let n = 8;
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let b = CMat::from_fn(n, n, |_, _| C::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5));
        let h = {
            let bh = b.herm();
            bh.mul(&b)
        };
        let (vals, v) = hermitian_eigen(&h);
        // check A v_i = lambda_i v_i
        for i in 0..n {
            let vi: Vec<C> = (0..n).map(|r| v[(r, i)]).collect();
            let mut hv = vec![C::new(0.0, 0.0); n];
            for c in 0..n {
                for r in 0..n {
                    hv[r] += h[(r, c)] * vi[c];
                }
            }
            let err: f64 = hv
                .iter()
                .zip(vi.iter())
                .map(|(a, b)| (a - b * C::new(vals[i], 0.0)).norm_sqr())
                .sum::<f64>()
                .sqrt();
            assert!(err < 1e-10, "eigenpair {i}: {err}");
            assert!(vals[i] >= -1e-12);
        }
        // ascending
        for i in 1..n {
            assert!(vals[i] >= vals[i - 1]);
        }
    }

    #[test]
    fn cholesky_roundtrip() {
        let n = 6;
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let b = CMat::from_fn(n, n, |_, _| C::new(rng.gen::<f64>(), rng.gen::<f64>()));
        let mut h = b.herm().mul(&b);
        for i in 0..n {
            h[(i, i)] += C::new(1.0, 0.0);
        }
        let r = h.cholesky_upper().unwrap();
        let rr = r.herm().mul(&r);
        let mut err = 0.0f64;
        for c in 0..n {
            for row in 0..n {
                err += (rr[(row, c)] - h[(row, c)]).norm_sqr();
            }
        }
        assert!(err.sqrt() < 1e-10);
    }
}
