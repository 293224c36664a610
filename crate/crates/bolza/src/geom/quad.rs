//! Reference-triangle quadrature and cubic Lagrange shape functions.
//!
//! Element layout (10 nodes): corners 0,1,2; two nodes per edge, grouped by
//! the edge opposite each corner, nearest endpoint first in cyclic order;
//! one interior node at the centroid.

use super::moebius::C;

/// Dunavant 12-point rule, positive weights, exact to degree 6.
pub const QUAD12: [([f64; 3], f64); 12] = [
    (
        [0.873821971016996, 0.063089014491502, 0.063089014491502],
        0.050844906370207,
    ),
    (
        [0.063089014491502, 0.873821971016996, 0.063089014491502],
        0.050844906370207,
    ),
    (
        [0.063089014491502, 0.063089014491502, 0.873821971016996],
        0.050844906370207,
    ),
    (
        [0.501426509658179, 0.249286745170910, 0.249286745170911],
        0.116786275726379,
    ),
    (
        [0.249286745170910, 0.501426509658179, 0.249286745170911],
        0.116786275726379,
    ),
    (
        [0.249286745170910, 0.249286745170911, 0.501426509658179],
        0.116786275726379,
    ),
    (
        [0.636502499121399, 0.310352451033785, 0.053145049844816],
        0.082851075618374,
    ),
    (
        [0.636502499121399, 0.053145049844816, 0.310352451033785],
        0.082851075618374,
    ),
    (
        [0.310352451033785, 0.636502499121399, 0.053145049844816],
        0.082851075618374,
    ),
    (
        [0.310352451033785, 0.053145049844816, 0.636502499121399],
        0.082851075618374,
    ),
    (
        [0.053145049844816, 0.636502499121399, 0.310352451033785],
        0.082851075618374,
    ),
    (
        [0.053145049844816, 0.310352451033785, 0.636502499121399],
        0.082851075618374,
    ),
];

pub const N_SHAPE: usize = 10;

/// Cubic Lagrange shapes at barycentric l. Node order:
/// [v0, v1, v2, e12@v1, e12@v2, e20@v2, e20@v0, e01@v0, e01@v1, center].
pub fn p3_shapes(l: [f64; 3]) -> [f64; N_SHAPE] {
    let [l0, l1, l2] = l;
    let v = |a: f64| 0.5 * a * (3.0 * a - 1.0) * (3.0 * a - 2.0);
    let e = |a: f64, b: f64| 4.5 * a * b * (3.0 * a - 1.0);
    [
        v(l0),
        v(l1),
        v(l2),
        e(l1, l2),
        e(l2, l1),
        e(l2, l0),
        e(l0, l2),
        e(l0, l1),
        e(l1, l0),
        27.0 * l0 * l1 * l2,
    ]
}

/// Barycentric gradients (d/dl0, d/dl1, d/dl2) of the cubic shapes.
pub fn p3_shape_grads(l: [f64; 3]) -> [[f64; 3]; N_SHAPE] {
    let [l0, l1, l2] = l;
    let dv = |a: f64| (27.0 * a * a - 18.0 * a + 2.0) / 2.0;
    // e(a,b) = 4.5 a b (3a - 1): de/da = 4.5 b (6a - 1), de/db = 4.5 a (3a - 1)
    let dea = |a: f64, b: f64| 4.5 * b * (6.0 * a - 1.0);
    let deb = |a: f64| 4.5 * a * (3.0 * a - 1.0);
    [
        [dv(l0), 0.0, 0.0],
        [0.0, dv(l1), 0.0],
        [0.0, 0.0, dv(l2)],
        [0.0, dea(l1, l2), deb(l1)],
        [0.0, deb(l2), dea(l2, l1)],
        [deb(l2), 0.0, dea(l2, l0)],
        [dea(l0, l2), 0.0, deb(l0)],
        [dea(l0, l1), deb(l0), 0.0],
        [deb(l1), dea(l1, l0), 0.0],
        [27.0 * l1 * l2, 27.0 * l0 * l2, 27.0 * l0 * l1],
    ]
}

/// Geometry of one straight triangle: maps barycentric derivatives to
/// z / zbar derivatives in the global coordinate.
#[derive(Clone, Copy, Debug)]
pub struct TriGeom {
    pub p: [C; 3],
    /// dl_i/dx and dl_i/dy for the affine barycentric map.
    pub grad_l: [[f64; 2]; 3],
    /// Euclidean area.
    pub area: f64,
}

impl TriGeom {
    pub fn new(p0: C, p1: C, p2: C) -> Self {
        let x = [p0.re, p1.re, p2.re];
        let y = [p0.im, p1.im, p2.im];
        let det = (x[1] - x[0]) * (y[2] - y[0]) - (x[2] - x[0]) * (y[1] - y[0]);
        let area = 0.5 * det;
        let mut grad_l = [[0.0; 2]; 3];
        for i in 0..3 {
            let j = (i + 1) % 3;
            let k = (i + 2) % 3;
            grad_l[i][0] = (y[j] - y[k]) / det;
            grad_l[i][1] = (x[k] - x[j]) / det;
        }
        Self {
            p: [p0, p1, p2],
            grad_l,
            area,
        }
    }

    pub fn point(&self, l: [f64; 3]) -> C {
        self.p[0] * l[0] + self.p[1] * l[1] + self.p[2] * l[2]
    }

    /// (d/dz, d/dzbar) of each cubic shape at barycentric l.
    pub fn p3_dz(&self, l: [f64; 3]) -> [(C, C); N_SHAPE] {
        let g = p3_shape_grads(l);
        let mut out = [(C::new(0.0, 0.0), C::new(0.0, 0.0)); N_SHAPE];
        for s in 0..N_SHAPE {
            let mut dx = 0.0;
            let mut dy = 0.0;
            for i in 0..3 {
                dx += g[s][i] * self.grad_l[i][0];
                dy += g[s][i] * self.grad_l[i][1];
            }
            out[s] = (C::new(dx / 2.0, -dy / 2.0), C::new(dx / 2.0, dy / 2.0));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shapes_partition_unity_and_interpolate() {
        let l = [0.22, 0.47, 0.31];
        let s = p3_shapes(l);
        let sum: f64 = s.iter().sum();
        assert!((sum - 1.0).abs() < 1e-13);
        // Kronecker property at the nodes
        let nodes: [[f64; 3]; 10] = [
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 0.0, 1.0],
            [0.0, 2.0 / 3.0, 1.0 / 3.0],
            [0.0, 1.0 / 3.0, 2.0 / 3.0],
            [1.0 / 3.0, 0.0, 2.0 / 3.0],
            [2.0 / 3.0, 0.0, 1.0 / 3.0],
            [2.0 / 3.0, 1.0 / 3.0, 0.0],
            [1.0 / 3.0, 2.0 / 3.0, 0.0],
            [1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0],
        ];
        for (i, ln) in nodes.iter().enumerate() {
            let sn = p3_shapes(*ln);
            for (j, &v) in sn.iter().enumerate() {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((v - expect).abs() < 1e-12, "shape {j} at node {i}: {v}");
            }
        }
    }

    #[test]
    fn grads_match_finite_differences() {
        let l = [0.3, 0.45, 0.25];
        let g = p3_shape_grads(l);
        let h = 1e-6;
        for s in 0..N_SHAPE {
            for i in 0..3 {
                let mut lp = l;
                let mut lm = l;
                lp[i] += h;
                lm[i] -= h;
                let fd = (p3_shapes(lp)[s] - p3_shapes(lm)[s]) / (2.0 * h);
                assert!((fd - g[s][i]).abs() < 1e-8, "shape {s} dl{i}");
            }
        }
    }

    #[test]
    fn quad_exact_to_degree_six() {
        let exact = |a: u64, b: u64, c: u64| -> f64 {
            let fact = |n: u64| (1..=n).product::<u64>() as f64;
            fact(a) * fact(b) * fact(c) / fact(a + b + c + 2)
        };
        for (a, b, c) in [(6, 0, 0), (3, 3, 0), (2, 2, 2), (4, 1, 1), (5, 1, 0)] {
            let mut num = 0.0;
            for (l, w) in QUAD12 {
                num += w * l[0].powi(a as i32) * l[1].powi(b as i32) * l[2].powi(c as i32);
            }
            num *= 0.5;
            assert!(
                (num - exact(a, b, c)).abs() < 1e-14,
                "monomial ({a},{b},{c}): {num} vs {}",
                exact(a, b, c)
            );
        }
    }

    #[test]
    fn dz_of_cubic_function() {
        let g = TriGeom::new(C::new(0.1, 0.0), C::new(1.0, 0.2), C::new(0.3, 1.1));
        // nodal values of f(z) = z^3 (cubic: exactly representable)
        let node_bary: [[f64; 3]; 10] = [
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 0.0, 1.0],
            [0.0, 2.0 / 3.0, 1.0 / 3.0],
            [0.0, 1.0 / 3.0, 2.0 / 3.0],
            [1.0 / 3.0, 0.0, 2.0 / 3.0],
            [2.0 / 3.0, 0.0, 1.0 / 3.0],
            [2.0 / 3.0, 1.0 / 3.0, 0.0],
            [1.0 / 3.0, 2.0 / 3.0, 0.0],
            [1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0],
        ];
        let l = [0.25, 0.4, 0.35];
        let d = g.p3_dz(l);
        let mut dz = C::new(0.0, 0.0);
        let mut dzb = C::new(0.0, 0.0);
        for s in 0..N_SHAPE {
            let zn = g.point(node_bary[s]);
            let f = zn * zn * zn;
            dz += d[s].0 * f;
            dzb += d[s].1 * f;
        }
        let z = g.point(l);
        assert!((dz - 3.0 * z * z).norm() < 1e-11, "{dz}");
        assert!(dzb.norm() < 1e-11, "{dzb}");
    }
}
