//! Hyperbolic metric data and quadrature caches on a triangulated domain.
//!
//! Conventions: ds^2 = rho |dz|^2 with rho(z) = 4/(1-|z|^2)^2, area form
//! nu = rho dx dy, and d dbar log rho = rho/2 exactly.
//!
//! Boundary faces carry isoparametric cubic geometry whose curved edge
//! interpolates the exact geodesic octagon side, so the identified mesh
//! tiles the true fundamental domain to the element order. Curved faces use
//! a compounded quadrature rule to keep their integration error far below
//! the seam signal.

use super::mesh::TriangulatedDomain;
use super::moebius::C;
use super::quad::{p3_shape_grads, p3_shapes, N_SHAPE, QUAD12};
use crate::error::GeomError;

pub fn rho_at(z: C) -> f64 {
    let d = 1.0 - z.norm_sqr();
    4.0 / (d * d)
}

/// d/dz of log(rho/2) = 2 zbar / (1 - |z|^2), exact for the Poincare metric.
pub fn dlog_rho_half(z: C) -> C {
    2.0 * z.conj() / (1.0 - z.norm_sqr())
}

/// Subdivision depth of the compound quadrature on curved faces.
const CURVED_QUAD_DEPTH: u32 = 2;

#[derive(Clone, Debug)]
pub struct FaceQuad {
    /// quadrature points in the global coordinate
    pub pts: Vec<C>,
    /// quadrature weights including the geometric Jacobian (dx dy measure)
    pub w_euc: Vec<f64>,
    /// rho at the quadrature points
    pub rho: Vec<f64>,
    /// barycentric coordinates of the points
    pub bary: Vec<[f64; 3]>,
    /// (d lambda_i / dx, d lambda_i / dy) at each quadrature point
    pub grad_l: Vec<[[f64; 2]; 3]>,
    /// cubic shape values at each quadrature point
    pub shp: Vec<[f64; N_SHAPE]>,
}

impl FaceQuad {
    #[inline]
    pub fn len(&self) -> usize {
        self.pts.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.pts.is_empty()
    }

    /// (d/dz, d/dzbar) of each cubic shape at quadrature point q.
    pub fn p3_dz(&self, q: usize) -> [(C, C); N_SHAPE] {
        let g = p3_shape_grads(self.bary[q]);
        let gl = &self.grad_l[q];
        let mut out = [(C::new(0.0, 0.0), C::new(0.0, 0.0)); N_SHAPE];
        for s in 0..N_SHAPE {
            let mut dx = 0.0;
            let mut dy = 0.0;
            for i in 0..3 {
                dx += g[s][i] * gl[i][0];
                dy += g[s][i] * gl[i][1];
            }
            out[s] = (C::new(dx / 2.0, -dy / 2.0), C::new(dx / 2.0, dy / 2.0));
        }
        out
    }
}

#[derive(Clone, Debug)]
pub struct HyperbolicMetric {
    /// conformal factor at mesh vertices
    pub rho_vertex: Vec<f64>,
    pub faces: Vec<FaceQuad>,
}

/// Barycentric rule points for a reference triangle subdivided `depth` times,
/// with the matching weight scale 1/4^depth.
fn compound_rule(depth: u32) -> Vec<([f64; 3], f64)> {
    let mut tris: Vec<[[f64; 3]; 3]> =
        vec![[[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]];
    for _ in 0..depth {
        let mut next = Vec::with_capacity(4 * tris.len());
        for t in &tris {
            let m01 = mid(t[0], t[1]);
            let m12 = mid(t[1], t[2]);
            let m20 = mid(t[2], t[0]);
            next.push([t[0], m01, m20]);
            next.push([m01, t[1], m12]);
            next.push([m20, m12, t[2]]);
            next.push([m01, m12, m20]);
        }
        tris = next;
    }
    let scale = 0.25f64.powi(depth as i32);
    let mut out = Vec::with_capacity(tris.len() * QUAD12.len());
    for t in &tris {
        for (l, w) in QUAD12 {
            let mut lp = [0.0; 3];
            for i in 0..3 {
                for k in 0..3 {
                    lp[k] += l[i] * t[i][k];
                }
            }
            out.push((lp, w * scale));
        }
    }
    out
}

fn mid(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        0.5 * (a[0] + b[0]),
        0.5 * (a[1] + b[1]),
        0.5 * (a[2] + b[2]),
    ]
}

pub fn build_metric(domain: &TriangulatedDomain) -> Result<HyperbolicMetric, GeomError> {
    let rho_vertex = domain.verts.iter().map(|&z| rho_at(z)).collect();
    let base_rule: Vec<([f64; 3], f64)> = QUAD12.to_vec();
    let curved_rule = compound_rule(CURVED_QUAD_DEPTH);
    let mut faces = Vec::with_capacity(domain.n_faces());
    for f in 0..domain.n_faces() {
        let vs = domain.faces[f];
        let curved = domain.face_boundary[f].is_some();
        let rule = if curved { &curved_rule } else { &base_rule };
        let n = rule.len();
        let mut fq = FaceQuad {
            pts: Vec::with_capacity(n),
            w_euc: Vec::with_capacity(n),
            rho: Vec::with_capacity(n),
            bary: Vec::with_capacity(n),
            grad_l: Vec::with_capacity(n),
            shp: Vec::with_capacity(n),
        };
        if !curved {
            let (p0, p1, p2) = (
                domain.verts[vs[0]],
                domain.verts[vs[1]],
                domain.verts[vs[2]],
            );
            let det = (p1 - p0).re * (p2 - p0).im - (p1 - p0).im * (p2 - p0).re;
            if det <= 0.0 {
                return Err(GeomError::MeshDegeneracy("nonpositive face area".into()));
            }
            let x = [p0.re, p1.re, p2.re];
            let y = [p0.im, p1.im, p2.im];
            let mut gl = [[0.0; 2]; 3];
            for i in 0..3 {
                let j = (i + 1) % 3;
                let k = (i + 2) % 3;
                gl[i][0] = (y[j] - y[k]) / det;
                gl[i][1] = (x[k] - x[j]) / det;
            }
            for &(l, w) in rule {
                let z = p0 * l[0] + p1 * l[1] + p2 * l[2];
                fq.pts.push(z);
                fq.w_euc.push(w * det / 2.0);
                fq.rho.push(rho_at(z));
                fq.bary.push(l);
                fq.grad_l.push(gl);
                fq.shp.push(p3_shapes(l));
            }
        } else {
            let xs = domain.geom_nodes(f);
            for &(l, w) in rule {
                let sh = p3_shapes(l);
                let sg = p3_shape_grads(l);
                let mut z = C::new(0.0, 0.0);
                let mut f1 = C::new(0.0, 0.0);
                let mut f2 = C::new(0.0, 0.0);
                for i in 0..N_SHAPE {
                    z += xs[i] * sh[i];
                    f1 += xs[i] * (sg[i][1] - sg[i][0]);
                    f2 += xs[i] * (sg[i][2] - sg[i][0]);
                }
                let det = f1.re * f2.im - f1.im * f2.re;
                if det <= 0.0 {
                    return Err(GeomError::MeshDegeneracy(
                        "curved boundary face with nonpositive Jacobian".into(),
                    ));
                }
                let (dl1_dx, dl1_dy) = (f2.im / det, -f2.re / det);
                let (dl2_dx, dl2_dy) = (-f1.im / det, f1.re / det);
                let mut gl = [[0.0; 2]; 3];
                gl[1] = [dl1_dx, dl1_dy];
                gl[2] = [dl2_dx, dl2_dy];
                gl[0] = [-dl1_dx - dl2_dx, -dl1_dy - dl2_dy];
                fq.pts.push(z);
                fq.w_euc.push(w * det / 2.0);
                fq.rho.push(rho_at(z));
                fq.bary.push(l);
                fq.grad_l.push(gl);
                fq.shp.push(sh);
            }
        }
        faces.push(fq);
    }
    Ok(HyperbolicMetric { rho_vertex, faces })
}

/// Total hyperbolic area by quadrature; Gauss-Bonnet gives 4 pi for genus 2.
pub fn total_area(metric: &HyperbolicMetric) -> f64 {
    metric
        .faces
        .iter()
        .map(|f| {
            f.w_euc
                .iter()
                .zip(f.rho.iter())
                .map(|(w, r)| w * r)
                .sum::<f64>()
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::mesh::{mesh_domain_level, refine_mesh};
    use std::f64::consts::PI;

    #[test]
    fn rho_matches_poincare() {
        let z = C::new(0.3, -0.2);
        let expect = 4.0 / (1.0 - z.norm_sqr()).powi(2);
        assert!((rho_at(z) - expect).abs() < 1e-12);
    }

    #[test]
    fn area_converges_to_four_pi() {
        let m2 = mesh_domain_level(2).unwrap();
        let a2 = total_area(&build_metric(&m2).unwrap());
        let m3 = refine_mesh(&m2).unwrap();
        let a3 = total_area(&build_metric(&m3).unwrap());
        let e2 = (a2 - 4.0 * PI).abs() / (4.0 * PI);
        let e3 = (a3 - 4.0 * PI).abs() / (4.0 * PI);
        assert!(e2 < 1e-5, "level2 error {e2}");
        assert!(
            e3 < e2 / 2.0,
            "refinement must shrink the error: {e2} -> {e3}"
        );
    }

    #[test]
    fn curved_faces_cover_boundary() {
        // the isoparametric boundary edge passes through the geodesic nodes
        let m = mesh_domain_level(2).unwrap();
        let f = m
            .face_boundary
            .iter()
            .position(|b| b.is_some())
            .expect("boundary face");
        let (apex, _) = m.face_boundary[f].unwrap();
        let mut l = [0.0; 3];
        l[(apex + 1) % 3] = 2.0 / 3.0;
        l[(apex + 2) % 3] = 1.0 / 3.0;
        let z = m.map_face(f, l);
        let vs = m.faces[f];
        let pb = m.verts[vs[(apex + 1) % 3]];
        let pc = m.verts[vs[(apex + 2) % 3]];
        let geo = crate::geom::moebius::hyp_interp(pb, pc, 1.0 / 3.0);
        assert!((z - geo).norm() < 1e-13, "{}", (z - geo).norm());
        let chord = pb * (2.0 / 3.0) + pc / 3.0;
        assert!(
            (z - chord).norm() > 1e-9,
            "curved edge must differ from chord"
        );
    }
}
