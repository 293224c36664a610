//! Block preconditioned eigensolver (LOBPCG-style) for hermitian pencils
//! (A, M) with A given by its action, M sparse positive definite.
//!
//! Used to extract numerical kernels: the smallest eigenvalues of pencils
//! like (B^H S^{-1} B, M) whose sqrt are the reported singular values.

use super::dense::{hermitian_eigen, CMat};
use crate::error::SolveError;
use num_complex::Complex64 as C;

pub struct EigOptions {
    pub block: usize,
    pub max_iter: usize,
    /// residual tolerance relative to the spectral scale of the block
    pub tol: f64,
}

impl Default for EigOptions {
    fn default() -> Self {
        Self {
            block: 12,
            max_iter: 150,
            tol: 1e-9,
        }
    }
}

pub struct EigResult {
    /// ascending eigenvalues of the pencil
    pub values: Vec<f64>,
    /// eigenvectors as columns (M-orthonormal)
    pub vectors: Vec<Vec<C>>,
    pub iterations: usize,
    pub residuals: Vec<f64>,
}

fn dot(u: &[C], v: &[C]) -> C {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

/// M-orthonormalize the columns of basis in place (modified Gram-Schmidt,
/// two passes), dropping near-dependent columns. Returns retained columns.
fn m_orthonormalize(
    basis: &mut Vec<Vec<C>>,
    apply_m: &dyn Fn(&[C]) -> Vec<C>,
) -> Vec<Vec<C>> {
    let mut kept: Vec<Vec<C>> = Vec::new();
    let mut kept_m: Vec<Vec<C>> = Vec::new();
    for mut v in basis.drain(..) {
        for _pass in 0..2 {
            for (u, mu) in kept.iter().zip(kept_m.iter()) {
                let c = dot(mu, &v);
                for i in 0..v.len() {
                    v[i] -= c * u[i];
                }
            }
        }
        let mv = apply_m(&v);
        let nrm = dot(&mv, &v).re;
        if nrm > 1e-24 {
            let s = 1.0 / nrm.sqrt();
            let vn: Vec<C> = v.iter().map(|x| x * s).collect();
            let mvn: Vec<C> = mv.iter().map(|x| x * s).collect();
            kept.push(vn);
            kept_m.push(mvn);
        }
    }
    kept
}

/// Compute the `block` smallest eigenpairs of (A, M).
pub fn lobpcg_smallest(
    apply_a: &dyn Fn(&[C]) -> Vec<C>,
    apply_m: &dyn Fn(&[C]) -> Vec<C>,
    precond: &dyn Fn(&[C]) -> Vec<C>,
    n: usize,
    opts: &EigOptions,
    seed: u64,
) -> Result<EigResult, SolveError> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let b = opts.block.min(n);
    let mut x: Vec<Vec<C>> = (0..b)
        .map(|_| {
            (0..n)
                .map(|_| C::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
                .collect()
        })
        .collect();
    x = m_orthonormalize(&mut x, apply_m);
    let mut prev_dir: Vec<Vec<C>> = Vec::new();
    let mut lambda = vec![0.0f64; b];
    let mut res_norms = vec![f64::MAX; b];
    let mut iterations = 0;

    for it in 0..opts.max_iter {
        iterations = it + 1;
        // Rayleigh-Ritz over [X, W, P]
        let ax: Vec<Vec<C>> = x.iter().map(|v| apply_a(v)).collect();
        let mx: Vec<Vec<C>> = x.iter().map(|v| apply_m(v)).collect();
        // current Ritz values and residuals
        for i in 0..x.len() {
            let num = dot(&x[i], &ax[i]).re;
            lambda[i] = num;
        }
        let scale = lambda
            .iter()
            .fold(1e-300f64, |a, &v| a.max(v.abs()))
            .max(1e-300);
        let mut w: Vec<Vec<C>> = Vec::new();
        let mut worst = 0.0f64;
        for i in 0..x.len() {
            let mut r: Vec<C> = (0..n)
                .map(|k| ax[i][k] - C::new(lambda[i], 0.0) * mx[i][k])
                .collect();
            let rn = dot(&r, &r).re.sqrt();
            res_norms[i] = rn / scale;
            worst = worst.max(res_norms[i]);
            if res_norms[i] > opts.tol * 0.01 {
                r = precond(&r);
                w.push(r);
            }
        }
        if worst <= opts.tol {
            break;
        }
        // assemble trial basis
        let mut basis: Vec<Vec<C>> = Vec::new();
        basis.extend(x.iter().cloned());
        basis.extend(w.into_iter());
        basis.extend(prev_dir.iter().cloned());
        let z = {
            let mut bz = basis;
            m_orthonormalize(&mut bz, apply_m)
        };
        let m = z.len();
        if m == 0 {
            return Err(SolveError::Linear("eigensolver basis collapsed".into()));
        }
        let az: Vec<Vec<C>> = z.iter().map(|v| apply_a(v)).collect();
        let h = CMat::from_fn(m, m, |r, c| dot(&z[r], &az[c]));
        let (_vals, vecs) = hermitian_eigen(&h);
        let keep = b.min(m);
        let mut xn: Vec<Vec<C>> = Vec::with_capacity(keep);
        for j in 0..keep {
            let mut col = vec![C::new(0.0, 0.0); n];
            for (r, zr) in z.iter().enumerate() {
                let c = vecs[(r, j)];
                if c.norm() > 0.0 {
                    for k in 0..n {
                        col[k] += c * zr[k];
                    }
                }
            }
            xn.push(col);
        }
        // implicit P: difference between new and old spans
        prev_dir = x
            .iter()
            .zip(xn.iter())
            .map(|(old, new)| {
                (0..n)
                    .map(|k| new[k] - old[k])
                    .collect::<Vec<C>>()
            })
            .collect();
        x = xn;
    }
    // final Rayleigh-Ritz cleanup
    let ax: Vec<Vec<C>> = x.iter().map(|v| apply_a(v)).collect();
    let m = x.len();
    let h = CMat::from_fn(m, m, |r, c| dot(&x[r], &ax[c]));
    let (vals, vecs) = hermitian_eigen(&h);
    let mut vectors = Vec::with_capacity(m);
    for j in 0..m {
        let mut col = vec![C::new(0.0, 0.0); n];
        for r in 0..m {
            let c = vecs[(r, j)];
            for k in 0..n {
                col[k] += c * x[r][k];
            }
        }
        vectors.push(col);
    }
    // residuals of the final pairs
    let mut residuals = Vec::with_capacity(m);
    for j in 0..m {
        let av = apply_a(&vectors[j]);
        let mv = apply_m(&vectors[j]);
        let r: f64 = (0..n)
            .map(|k| (av[k] - C::new(vals[j], 0.0) * mv[k]).norm_sqr())
            .sum::<f64>()
            .sqrt();
        residuals.push(r);
    }
    Ok(EigResult {
        values: vals,
        vectors,
        iterations,
        residuals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::sparse::Triplets;

    #[test]
    fn finds_smallest_of_laplacian() {
        // 1D periodic Laplacian, smallest eigenvalue 0 with constant vector
        let n = 80;
        let mut t = Triplets::new(n, n);
        for i in 0..n {
            t.push(i, i, C::new(2.0, 0.0));
            t.push(i, (i + 1) % n, C::new(-1.0, 0.0));
            t.push(i, (i + n - 1) % n, C::new(-1.0, 0.0));
        }
        let a = t.to_csr();
        let opts = EigOptions {
            block: 5,
            max_iter: 200,
            tol: 1e-10,
        };
        let res = lobpcg_smallest(
            &|v| a.mul(v),
            &|v| v.to_vec(),
            &|v| v.to_vec(),
            n,
            &opts,
            42,
        )
        .unwrap();
        assert!(res.values[0].abs() < 1e-9, "{}", res.values[0]);
        let expect = 2.0 - 2.0 * (2.0 * std::f64::consts::PI / n as f64).cos();
        assert!(
            (res.values[1] - expect).abs() < 1e-7,
            "{} vs {expect}",
            res.values[1]
        );
    }
}
