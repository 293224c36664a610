//! Sparse complex matrices in CSR form with a triplet builder.

use num_complex::Complex64 as C;

#[derive(Clone, Debug)]
pub struct Triplets {
    pub nrows: usize,
    pub ncols: usize,
    entries: Vec<(u32, u32, C)>,
}

impl Triplets {
    pub fn new(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            entries: Vec::new(),
        }
    }

    #[inline]
    pub fn push(&mut self, r: usize, c: usize, v: C) {
        if v.re != 0.0 || v.im != 0.0 {
            self.entries.push((r as u32, c as u32, v));
        }
    }

    pub fn to_csr(mut self) -> Csr {
        self.entries
            .sort_unstable_by_key(|&(r, c, _)| ((r as u64) << 32) | c as u64);
        let mut indices = Vec::with_capacity(self.entries.len());
        let mut data: Vec<C> = Vec::with_capacity(self.entries.len());
        let mut rows: Vec<u32> = Vec::with_capacity(self.entries.len());
        for &(r, c, v) in &self.entries {
            if let (Some(&lr), Some(&lc)) = (rows.last(), indices.last()) {
                if lr == r && lc == c {
                    *data.last_mut().unwrap() += v;
                    continue;
                }
            }
            rows.push(r);
            indices.push(c);
            data.push(v);
        }
        let mut indptr = vec![0usize; self.nrows + 1];
        for &r in &rows {
            indptr[r as usize + 1] += 1;
        }
        for r in 0..self.nrows {
            indptr[r + 1] += indptr[r];
        }
        Csr {
            nrows: self.nrows,
            ncols: self.ncols,
            indptr,
            indices,
            data,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Csr {
    pub nrows: usize,
    pub ncols: usize,
    pub indptr: Vec<usize>,
    pub indices: Vec<u32>,
    pub data: Vec<C>,
}

impl Csr {
    pub fn nnz(&self) -> usize {
        self.data.len()
    }

    pub fn matvec(&self, x: &[C], y: &mut [C]) {
        debug_assert_eq!(x.len(), self.ncols);
        debug_assert_eq!(y.len(), self.nrows);
        for r in 0..self.nrows {
            let mut acc = C::new(0.0, 0.0);
            for p in self.indptr[r]..self.indptr[r + 1] {
                acc += self.data[p] * x[self.indices[p] as usize];
            }
            y[r] = acc;
        }
    }

    pub fn mul(&self, x: &[C]) -> Vec<C> {
        let mut y = vec![C::new(0.0, 0.0); self.nrows];
        self.matvec(x, &mut y);
        y
    }

    /// y = A^H x (conjugate transpose product).
    pub fn mul_herm(&self, x: &[C]) -> Vec<C> {
        debug_assert_eq!(x.len(), self.nrows);
        let mut y = vec![C::new(0.0, 0.0); self.ncols];
        for r in 0..self.nrows {
            let xr = x[r];
            for p in self.indptr[r]..self.indptr[r + 1] {
                y[self.indices[p] as usize] += self.data[p].conj() * xr;
            }
        }
        y
    }

    /// Explicit conjugate transpose.
    pub fn herm(&self) -> Csr {
        let mut t = Triplets::new(self.ncols, self.nrows);
        for r in 0..self.nrows {
            for p in self.indptr[r]..self.indptr[r + 1] {
                t.push(self.indices[p] as usize, r, self.data[p].conj());
            }
        }
        t.to_csr()
    }

    /// C = A * B (both CSR).
    pub fn matmul(&self, other: &Csr) -> Csr {
        assert_eq!(self.ncols, other.nrows);
        let mut t = Triplets::new(self.nrows, other.ncols);
        let mut accum: Vec<C> = vec![C::new(0.0, 0.0); other.ncols];
        let mut touched: Vec<u32> = Vec::new();
        for r in 0..self.nrows {
            for p in self.indptr[r]..self.indptr[r + 1] {
                let k = self.indices[p] as usize;
                let v = self.data[p];
                for q in other.indptr[k]..other.indptr[k + 1] {
                    let c = other.indices[q] as usize;
                    if accum[c].re == 0.0 && accum[c].im == 0.0 {
                        touched.push(c as u32);
                    }
                    accum[c] += v * other.data[q];
                }
            }
            touched.sort_unstable();
            for &c in &touched {
                t.push(r, c as usize, accum[c as usize]);
                accum[c as usize] = C::new(0.0, 0.0);
            }
            touched.clear();
        }
        t.to_csr()
    }

    /// Hermitian symmetrization (A + A^H)/2.
    pub fn symmetrize(&self) -> Csr {
        let ah = self.herm();
        let mut t = Triplets::new(self.nrows, self.ncols);
        for r in 0..self.nrows {
            for p in self.indptr[r]..self.indptr[r + 1] {
                t.push(r, self.indices[p] as usize, 0.5 * self.data[p]);
            }
            for p in ah.indptr[r]..ah.indptr[r + 1] {
                t.push(r, ah.indices[p] as usize, 0.5 * ah.data[p]);
            }
        }
        t.to_csr()
    }

    pub fn scale(&mut self, s: C) {
        for v in &mut self.data {
            *v *= s;
        }
    }

    pub fn add(&self, other: &Csr, alpha: C) -> Csr {
        assert_eq!(self.nrows, other.nrows);
        assert_eq!(self.ncols, other.ncols);
        let mut t = Triplets::new(self.nrows, self.ncols);
        for r in 0..self.nrows {
            for p in self.indptr[r]..self.indptr[r + 1] {
                t.push(r, self.indices[p] as usize, self.data[p]);
            }
            for p in other.indptr[r]..other.indptr[r + 1] {
                t.push(r, other.indices[p] as usize, alpha * other.data[p]);
            }
        }
        t.to_csr()
    }

    /// Hermitian-form value x^H A y.
    pub fn quad_form(&self, x: &[C], y: &[C]) -> C {
        let ay = self.mul(y);
        x.iter().zip(ay.iter()).map(|(a, b)| a.conj() * b).sum()
    }
}

/// Reverse Cuthill-McKee ordering of a symmetric sparsity pattern.
pub fn rcm_order(n: usize, adj: &Csr) -> Vec<usize> {
    let degree = |v: usize| adj.indptr[v + 1] - adj.indptr[v];
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut nodes: Vec<usize> = (0..n).collect();
    nodes.sort_unstable_by_key(|&v| degree(v));
    for &start in &nodes {
        if visited[start] {
            continue;
        }
        let mut queue = std::collections::VecDeque::new();
        queue.push_back(start);
        visited[start] = true;
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut nbrs: Vec<usize> = (adj.indptr[v]..adj.indptr[v + 1])
                .map(|p| adj.indices[p] as usize)
                .filter(|&u| !visited[u])
                .collect();
            nbrs.sort_unstable_by_key(|&u| degree(u));
            for u in nbrs {
                visited[u] = true;
                queue.push_back(u);
            }
        }
    }
    order.reverse();
    order
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builder_merges_duplicates() {
        let mut t = Triplets::new(2, 2);
        t.push(0, 0, C::new(1.0, 0.0));
        t.push(0, 0, C::new(2.0, 0.0));
        t.push(1, 1, C::new(3.0, 0.0));
        let a = t.to_csr();
        assert_eq!(a.nnz(), 2);
        let y = a.mul(&[C::new(1.0, 0.0), C::new(1.0, 0.0)]);
        assert_eq!(y[0], C::new(3.0, 0.0));
        assert_eq!(y[1], C::new(3.0, 0.0));
    }

    #[test]
    fn herm_product_matches() {
        let mut t = Triplets::new(2, 3);
        t.push(0, 1, C::new(1.0, 2.0));
        t.push(1, 2, C::new(-1.0, 0.5));
        let a = t.to_csr();
        let x = vec![C::new(1.0, -1.0), C::new(0.5, 0.25)];
        let y1 = a.mul_herm(&x);
        let y2 = a.herm().mul(&x);
        for (u, v) in y1.iter().zip(y2.iter()) {
            assert!((u - v).norm() < 1e-14);
        }
    }
}
