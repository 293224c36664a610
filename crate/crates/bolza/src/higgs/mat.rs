//! Small stack-allocated complex matrices (n = 2 or 3) for pointwise work.

use num_complex::Complex64 as C;

pub const ZERO: C = C::new(0.0, 0.0);

#[derive(Clone, Copy, Debug)]
pub struct Mat {
    pub n: usize,
    pub a: [C; 9],
}

impl Mat {
    pub fn zeros(n: usize) -> Self {
        Self { n, a: [ZERO; 9] }
    }

    pub fn eye(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = C::new(1.0, 0.0);
        }
        m
    }

    pub fn diag(n: usize, d: &[C]) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = d[i];
        }
        m
    }

    pub fn mul(&self, o: &Mat) -> Mat {
        let n = self.n;
        let mut r = Mat::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let v = self[(i, k)];
                if v == ZERO {
                    continue;
                }
                for j in 0..n {
                    r[(i, j)] += v * o[(k, j)];
                }
            }
        }
        r
    }

    pub fn add(&self, o: &Mat) -> Mat {
        let mut r = *self;
        for i in 0..9 {
            r.a[i] += o.a[i];
        }
        r
    }

    pub fn sub(&self, o: &Mat) -> Mat {
        let mut r = *self;
        for i in 0..9 {
            r.a[i] -= o.a[i];
        }
        r
    }

    pub fn scale(&self, s: C) -> Mat {
        let mut r = *self;
        for i in 0..9 {
            r.a[i] *= s;
        }
        r
    }

    pub fn conj_t(&self) -> Mat {
        let n = self.n;
        let mut r = Mat::zeros(n);
        for i in 0..n {
            for j in 0..n {
                r[(i, j)] = self[(j, i)].conj();
            }
        }
        r
    }

    pub fn commutator(&self, o: &Mat) -> Mat {
        self.mul(o).sub(&o.mul(self))
    }

    pub fn trace(&self) -> C {
        let mut t = ZERO;
        for i in 0..self.n {
            t += self[(i, i)];
        }
        t
    }

    /// Frobenius inner product tr(A B^H).
    pub fn frob_inner(&self, o: &Mat) -> C {
        let mut t = ZERO;
        for i in 0..self.n {
            for j in 0..self.n {
                t += self[(i, j)] * o[(i, j)].conj();
            }
        }
        t
    }

    pub fn frob_norm_sqr(&self) -> f64 {
        self.frob_inner(self).re
    }

    /// Inverse for n = 2, 3 by cofactors.
    pub fn inverse(&self) -> Mat {
        let n = self.n;
        let mut r = Mat::zeros(n);
        match n {
            1 => r[(0, 0)] = 1.0 / self[(0, 0)],
            2 => {
                let det = self[(0, 0)] * self[(1, 1)] - self[(0, 1)] * self[(1, 0)];
                r[(0, 0)] = self[(1, 1)] / det;
                r[(1, 1)] = self[(0, 0)] / det;
                r[(0, 1)] = -self[(0, 1)] / det;
                r[(1, 0)] = -self[(1, 0)] / det;
            }
            3 => {
                let m = |i: usize, j: usize| self[(i, j)];
                let det = m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1))
                    - m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0))
                    + m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
                let cof = |i: usize, j: usize| -> C {
                    let (a, b) = ((i + 1) % 3, (i + 2) % 3);
                    let (c, d) = ((j + 1) % 3, (j + 2) % 3);
                    m(a, c) * m(b, d) - m(a, d) * m(b, c)
                };
                for i in 0..3 {
                    for j in 0..3 {
                        r[(j, i)] = cof(i, j) / det;
                    }
                }
            }
            _ => panic!("unsupported size"),
        }
        r
    }

    /// Matrix exponential by scaling and squaring with a Taylor core.
    pub fn expm(&self) -> Mat {
        let n = self.n;
        let norm = self.frob_norm_sqr().sqrt();
        let k = if norm > 0.5 {
            (norm / 0.5).log2().ceil() as i32
        } else {
            0
        };
        let s = self.scale(C::new(0.5f64.powi(k), 0.0));
        let mut term = Mat::eye(n);
        let mut sum = Mat::eye(n);
        for j in 1..=16 {
            term = term.mul(&s).scale(C::new(1.0 / j as f64, 0.0));
            sum = sum.add(&term);
        }
        let mut r = sum;
        for _ in 0..k {
            r = r.mul(&r);
        }
        r
    }

    /// h-adjoint of this matrix: h^{-1} A^H h.
    pub fn star_h(&self, h: &Mat) -> Mat {
        h.inverse().mul(&self.conj_t()).mul(h)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.sub(&self.conj_t()).frob_norm_sqr().sqrt() <= tol * (1.0 + self.frob_norm_sqr().sqrt())
    }
}

impl std::ops::Index<(usize, usize)> for Mat {
    type Output = C;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C {
        &self.a[i * 3 + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Mat {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C {
        &mut self.a[i * 3 + j]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_roundtrip() {
        let mut m = Mat::zeros(3);
        let vals = [
            [2.0, 0.3, -0.1],
            [0.1, 1.5, 0.2],
            [-0.2, 0.4, 1.8],
        ];
        for i in 0..3 {
            for j in 0..3 {
                m[(i, j)] = C::new(vals[i][j], 0.1 * (i as f64 - j as f64));
            }
        }
        let p = m.mul(&m.inverse());
        assert!(p.sub(&Mat::eye(3)).frob_norm_sqr().sqrt() < 1e-12);
    }

    #[test]
    fn expm_matches_diagonal() {
        let d = Mat::diag(2, &[C::new(0.3, 0.1), C::new(-0.2, 0.4)]);
        let e = d.expm();
        assert!((e[(0, 0)] - C::new(0.3, 0.1).exp()).norm() < 1e-12);
        assert!((e[(1, 1)] - C::new(-0.2, 0.4).exp()).norm() < 1e-12);
    }
}
