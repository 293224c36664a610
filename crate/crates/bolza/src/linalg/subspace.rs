//! Shifted inverse subspace iteration for hermitian pencils (A, M) with
//! sparse positive semidefinite A and positive definite M. Factoring
//! A + delta M once gives geometric convergence to the smallest eigenpairs
//! with ratio (lambda_i + delta)/(lambda_{b+1} + delta).

use super::dense::{hermitian_eigen, CMat};
use super::ldl::LdlFactor;
use super::sparse::Csr;
use crate::error::SolveError;
use num_complex::Complex64 as C;

pub struct PencilEigs {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<C>>,
}

fn dot(u: &[C], v: &[C]) -> C {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

/// Smallest `block` eigenpairs of (A, M).
pub fn smallest_eigs(
    a: &Csr,
    m: &Csr,
    block: usize,
    iters: usize,
    seed: u64,
) -> Result<PencilEigs, SolveError> {
    let n = a.nrows;
    let block = block.min(n);
    // spectral scale for the shift
    let tr_a: f64 = (0..n)
        .map(|r| {
            (a.indptr[r]..a.indptr[r + 1])
                .find(|&p| a.indices[p] as usize == r)
                .map(|p| a.data[p].re)
                .unwrap_or(0.0)
        })
        .sum();
    let tr_m: f64 = (0..n)
        .map(|r| {
            (m.indptr[r]..m.indptr[r + 1])
                .find(|&p| m.indices[p] as usize == r)
                .map(|p| m.data[p].re)
                .unwrap_or(0.0)
        })
        .sum();
    let delta = 1e-10 * (tr_a / tr_m.max(1e-300)).max(1e-300);
    let shifted = a.add(m, C::new(delta, 0.0));
    let f = LdlFactor::new(&shifted)?;

    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut x: Vec<Vec<C>> = (0..block)
        .map(|_| {
            (0..n)
                .map(|_| C::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
                .collect()
        })
        .collect();
    for _ in 0..iters {
        // Y = (A + dM)^{-1} M X
        let mut y: Vec<Vec<C>> = x.iter().map(|v| f.solve(&m.mul(v))).collect();
        // M-orthonormalize by the Gram Cholesky
        let g = CMat::from_fn(block, block, |r, c| dot(&y[r], &m.mul(&y[c])));
        if let Some(rch) = g.cholesky_upper() {
            // X = Y R^{-1}: columns x_j = sum_i y_i * (R^{-1})[i, j]
            let mut xn: Vec<Vec<C>> = Vec::with_capacity(block);
            for j in 0..block {
                let mut e = vec![C::new(0.0, 0.0); block];
                e[j] = C::new(1.0, 0.0);
                // solve R^T? we need R^{-1} e_j with Y as row-collection:
                // x_j = sum_i y_i inv(R)[i,j]; inv(R) column j solves R v = e_j
                let v = rch.solve_upper(&e);
                let mut col = vec![C::new(0.0, 0.0); n];
                for i in 0..block {
                    if v[i].norm() > 0.0 {
                        for k in 0..n {
                            col[k] += v[i] * y[i][k];
                        }
                    }
                }
                xn.push(col);
            }
            x = xn;
        } else {
            // fall back to re-randomizing dependent directions
            for v in y.iter_mut() {
                let nv = dot(v, v).re.sqrt();
                if nv < 1e-30 {
                    for t in v.iter_mut() {
                        *t = C::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
                    }
                }
            }
            x = y;
        }
    }
    // Rayleigh-Ritz with respect to (A, M)
    let ax: Vec<Vec<C>> = x.iter().map(|v| a.mul(v)).collect();
    let mx: Vec<Vec<C>> = x.iter().map(|v| m.mul(v)).collect();
    let ha = CMat::from_fn(block, block, |r, c| dot(&x[r], &ax[c]));
    let hm = CMat::from_fn(block, block, |r, c| dot(&x[r], &mx[c]));
    let rch = hm
        .cholesky_upper()
        .ok_or_else(|| SolveError::Linear("subspace Gram not positive".into()))?;
    // solve R^{-H} Ha R^{-1} eigen
    let mut hred = CMat::zeros(block, block);
    for c in 0..block {
        let col: Vec<C> = (0..block).map(|r| ha[(r, c)]).collect();
        let t = rch.solve_upper_herm(&col);
        for r in 0..block {
            hred[(r, c)] = t[r];
        }
    }
    // right-solve: Hred = T R^{-1}: rows scaled; do via transpose trick
    let mut hred2 = CMat::zeros(block, block);
    for r in 0..block {
        let row: Vec<C> = (0..block).map(|c| hred[(r, c)].conj()).collect();
        let t = rch.solve_upper_herm(&row);
        for c in 0..block {
            hred2[(r, c)] = t[c].conj();
        }
    }
    let (vals, vecs) = hermitian_eigen(&hred2);
    // eigenvectors: x_new_j = X R^{-1} vecs[:,j]
    let mut vectors = Vec::with_capacity(block);
    for j in 0..block {
        let col: Vec<C> = (0..block).map(|r| vecs[(r, j)]).collect();
        let v = rch.solve_upper(&col);
        let mut out = vec![C::new(0.0, 0.0); n];
        for i in 0..block {
            for k in 0..n {
                out[k] += v[i] * x[i][k];
            }
        }
        vectors.push(out);
    }
    Ok(PencilEigs {
        values: vals,
        vectors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::sparse::Triplets;

    #[test]
    fn periodic_laplacian_modes() {
        let n = 60;
        let mut ta = Triplets::new(n, n);
        let mut tm = Triplets::new(n, n);
        for i in 0..n {
            ta.push(i, i, C::new(2.0, 0.0));
            ta.push(i, (i + 1) % n, C::new(-1.0, 0.0));
            ta.push(i, (i + n - 1) % n, C::new(-1.0, 0.0));
            tm.push(i, i, C::new(1.0, 0.0));
        }
        let a = ta.to_csr();
        let m = tm.to_csr();
        let res = smallest_eigs(&a, &m, 4, 6, 3).unwrap();
        assert!(res.values[0].abs() < 1e-10);
        let expect = 2.0 - 2.0 * (2.0 * std::f64::consts::PI / n as f64).cos();
        assert!((res.values[1] - expect).abs() < 1e-8);
        assert!((res.values[2] - expect).abs() < 1e-8);
    }
}
