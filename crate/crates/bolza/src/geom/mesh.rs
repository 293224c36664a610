//! Triangulation of the fundamental octagon with paired boundary.
//!
//! The octagon is split into 16 macro triangles (center, side midpoint,
//! corner) and uniformly subdivided by hyperbolic edge midpoints. Boundary
//! vertices carry exact dyadic side parameters, so the vertex on slave side
//! S_{j+4} at parameter t matches the master vertex on S_j at parameter 1-t
//! under the pairing translation g_j.

use super::group::{build_genus2_group, FuchsianGroup};
use super::moebius::{hyp_dist, hyp_midpoint, MoebiusMap, C};
use crate::error::GeomError;
use std::collections::hash_map::DefaultHasher;
use std::collections::HashMap;
use std::hash::{Hash, Hasher};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum VertTag {
    Interior,
    /// On open side `side` (0..8) at dyadic parameter t in (0,1).
    Side { side: usize, t: f64 },
    /// Octagon corner V_k.
    Corner { k: usize },
}

/// Identification of a mesh vertex with its master DOF representative.
#[derive(Clone, Debug)]
pub enum VertOwner {
    Master,
    /// Slave vertex v with master m and map v = gamma(m).
    Slave { master: usize, gamma: MoebiusMap },
}

#[derive(Clone, Debug)]
pub struct TriangulatedDomain {
    pub group: FuchsianGroup,
    pub verts: Vec<C>,
    pub tags: Vec<VertTag>,
    /// CCW vertex triples.
    pub faces: Vec<[usize; 3]>,
    /// Unique undirected edges as (lo, hi) vertex pairs, sorted.
    pub edges: Vec<(usize, usize)>,
    /// Edge index opposite each local vertex: face_edges[f][i] joins the
    /// two face vertices other than i.
    pub face_edges: Vec<[usize; 3]>,
    pub vert_owner: Vec<VertOwner>,
    /// per face: Some((apex local index, side)) when the edge opposite the
    /// apex lies on an octagon side; such faces use the curved cone map so
    /// that the boundary follows the exact geodesic.
    pub face_boundary: Vec<Option<(usize, usize)>>,
    pub level: u32,
}

fn edge_key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

struct Builder {
    verts: Vec<C>,
    tags: Vec<VertTag>,
    faces: Vec<[usize; 3]>,
}

impl Builder {
    fn midpoint_tag(&self, a: usize, b: usize) -> VertTag {
        use VertTag::*;
        let side_param = |tag: &VertTag, side: usize| -> Option<f64> {
            match *tag {
                Side { side: s, t } if s == side => Some(t),
                Corner { k } if k == side => Some(0.0),
                Corner { k } if k == (side + 1) % 8 => Some(1.0),
                _ => None,
            }
        };
        // Find the common side, if any.
        for side in 0..8 {
            if let (Some(ta), Some(tb)) = (
                side_param(&self.tags[a], side),
                side_param(&self.tags[b], side),
            ) {
                return Side {
                    side,
                    t: 0.5 * (ta + tb),
                };
            }
        }
        Interior
    }

    fn subdivide(&mut self) {
        let mut cache: HashMap<(usize, usize), usize> = HashMap::new();
        let old_faces = std::mem::take(&mut self.faces);
        let mut mid = |slf: &mut Builder, a: usize, b: usize| -> usize {
            let key = edge_key(a, b);
            if let Some(&m) = cache.get(&key) {
                return m;
            }
            let tag = slf.midpoint_tag(a, b);
            let z = hyp_midpoint(slf.verts[key.0], slf.verts[key.1]);
            slf.verts.push(z);
            slf.tags.push(tag);
            let idx = slf.verts.len() - 1;
            cache.insert(key, idx);
            idx
        };
        for [a, b, c] in old_faces {
            let mab = mid(self, a, b);
            let mbc = mid(self, b, c);
            let mca = mid(self, c, a);
            self.faces.push([a, mab, mca]);
            self.faces.push([mab, b, mbc]);
            self.faces.push([mca, mbc, c]);
            self.faces.push([mab, mbc, mca]);
        }
    }
}

/// Build the mesh by `level` uniform subdivisions of the 16 macro triangles.
pub fn mesh_domain_level(level: u32) -> Result<TriangulatedDomain, GeomError> {
    let group = build_genus2_group()?;
    let mut b = Builder {
        verts: vec![C::new(0.0, 0.0)],
        tags: vec![VertTag::Interior],
        faces: Vec::new(),
    };
    // corners and side midpoints
    let mut vidx = [0usize; 8];
    let mut midx = [0usize; 8];
    for k in 0..8 {
        b.verts.push(group.corners[k]);
        b.tags.push(VertTag::Corner { k });
        vidx[k] = b.verts.len() - 1;
    }
    for j in 0..8 {
        b.verts
            .push(hyp_midpoint(group.corners[j], group.corners[(j + 1) % 8]));
        b.tags.push(VertTag::Side { side: j, t: 0.5 });
        midx[j] = b.verts.len() - 1;
    }
    for j in 0..8 {
        b.faces.push([0, vidx[j], midx[j]]);
        b.faces.push([0, midx[j], vidx[(j + 1) % 8]]);
    }
    for _ in 0..level {
        b.subdivide();
    }
    finish(group, b, level)
}

/// Choose the subdivision level so the longest edge is at most `target_h`
/// (hyperbolic length), then build. target_h must lie in (0, 0.3].
pub fn mesh_domain(target_h: f64) -> Result<TriangulatedDomain, GeomError> {
    if !(target_h > 0.0 && target_h <= 0.3) {
        return Err(GeomError::Construction(format!(
            "target_h {target_h} outside (0, 0.3]"
        )));
    }
    let cot8 = 1.0 / (std::f64::consts::PI / 8.0).tan();
    let max_macro_edge = (cot8 * cot8).acosh(); // center-to-corner edge
    let mut level = 0u32;
    while max_macro_edge / f64::powi(2.0, level as i32) > target_h {
        level += 1;
    }
    mesh_domain_level(level)
}

/// Uniform 1->4 refinement preserving boundary pairings.
pub fn refine_mesh(domain: &TriangulatedDomain) -> Result<TriangulatedDomain, GeomError> {
    let mut b = Builder {
        verts: domain.verts.clone(),
        tags: domain.tags.clone(),
        faces: domain.faces.clone(),
    };
    b.subdivide();
    finish(domain.group.clone(), b, domain.level + 1)
}

fn finish(
    group: FuchsianGroup,
    b: Builder,
    level: u32,
) -> Result<TriangulatedDomain, GeomError> {
    // Edge table.
    let mut edge_map: HashMap<(usize, usize), usize> = HashMap::new();
    let mut edges = Vec::new();
    let mut face_edges = Vec::with_capacity(b.faces.len());
    for f in &b.faces {
        let mut fe = [0usize; 3];
        for i in 0..3 {
            let key = edge_key(f[(i + 1) % 3], f[(i + 2) % 3]);
            let idx = *edge_map.entry(key).or_insert_with(|| {
                edges.push(key);
                edges.len() - 1
            });
            fe[i] = idx;
        }
        face_edges.push(fe);
    }

    // Orientation and quality.
    for (fi, f) in b.faces.iter().enumerate() {
        let (p, q, r) = (b.verts[f[0]], b.verts[f[1]], b.verts[f[2]]);
        let cross = (q - p).re * (r - p).im - (q - p).im * (r - p).re;
        if cross <= 0.0 {
            return Err(GeomError::MeshDegeneracy(format!(
                "face {fi} not counterclockwise"
            )));
        }
    }
    let min_angle = min_face_angle(&b.verts, &b.faces);
    if min_angle < 20.0_f64.to_radians() {
        return Err(GeomError::MeshDegeneracy(format!(
            "minimum face angle {:.2} deg below quality bound",
            min_angle.to_degrees()
        )));
    }

    // Boundary identification.
    let mut owner = vec![VertOwner::Master; b.verts.len()];
    let mut corner0 = None;
    // master lookup: (side, t-bits) -> vertex
    let mut master_lookup: HashMap<(usize, u64), usize> = HashMap::new();
    for (i, tag) in b.tags.iter().enumerate() {
        match *tag {
            VertTag::Side { side, t } if side < 4 => {
                master_lookup.insert((side, t.to_bits()), i);
            }
            VertTag::Corner { k } if k == 0 => corner0 = Some(i),
            _ => {}
        }
    }
    let corner0 = corner0.ok_or_else(|| GeomError::Construction("missing corner V0".into()))?;
    for (i, tag) in b.tags.iter().enumerate() {
        match *tag {
            VertTag::Side { side, t } if side >= 4 => {
                let j = side - 4;
                let tm = 1.0 - t; // exact for dyadic t
                let master = *master_lookup.get(&(j, tm.to_bits())).ok_or_else(|| {
                    GeomError::Construction(format!("unmatched boundary vertex on side {side}"))
                })?;
                // slave = g_j^{-1}(master)
                let gamma = group.gens[j].inverse();
                let img = gamma.apply(b.verts[master]);
                if (img - b.verts[i]).norm() > 1e-9 {
                    return Err(GeomError::Construction(format!(
                        "pairing image misses slave vertex by {:.3e}",
                        (img - b.verts[i]).norm()
                    )));
                }
                owner[i] = VertOwner::Slave { master, gamma };
            }
            VertTag::Corner { k } if k != 0 => {
                owner[i] = VertOwner::Slave {
                    master: corner0,
                    gamma: group.corner_words[k],
                };
            }
            _ => {}
        }
    }

    let domain = TriangulatedDomain {
        group,
        verts: b.verts,
        tags: b.tags,
        faces: b.faces,
        edges,
        face_edges,
        vert_owner: owner,
        face_boundary: Vec::new(),
        level,
    };
    let mut face_boundary = Vec::with_capacity(domain.n_faces());
    for f in 0..domain.n_faces() {
        let vs = domain.faces[f];
        let mut found = None;
        for k in 0..3 {
            let (a, b2) = (vs[(k + 1) % 3], vs[(k + 2) % 3]);
            if let Some(side) = domain.edge_side(a, b2) {
                if found.is_some() {
                    return Err(GeomError::MeshDegeneracy(
                        "face with two boundary edges".into(),
                    ));
                }
                found = Some((k, side));
            }
        }
        face_boundary.push(found);
    }
    let mut domain = domain;
    domain.face_boundary = face_boundary;
    Ok(domain)
}

pub fn min_face_angle(verts: &[C], faces: &[[usize; 3]]) -> f64 {
    let mut min_angle = f64::MAX;
    for f in faces {
        for i in 0..3 {
            let p = verts[f[i]];
            let q = verts[f[(i + 1) % 3]];
            let r = verts[f[(i + 2) % 3]];
            let u = q - p;
            let v = r - p;
            let dot = u.re * v.re + u.im * v.im;
            let ang = (dot / (u.norm() * v.norm())).clamp(-1.0, 1.0).acos();
            min_angle = min_angle.min(ang);
        }
    }
    min_angle
}

impl TriangulatedDomain {
    pub fn n_verts(&self) -> usize {
        self.verts.len()
    }
    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }
    pub fn n_faces(&self) -> usize {
        self.faces.len()
    }

    /// Number of cubic Lagrange nodes: vertices, two per edge, one per face.
    pub fn n_nodes(&self) -> usize {
        self.n_verts() + 2 * self.n_edges() + self.n_faces()
    }

    pub fn node_pos(&self, n: usize) -> C {
        let nv = self.n_verts();
        let ne = self.n_edges();
        if n < nv {
            self.verts[n]
        } else if n < nv + 2 * ne {
            let e = (n - nv) / 2;
            let (a, b) = self.edges[e];
            let t = if (n - nv) % 2 == 0 { 1.0 / 3.0 } else { 2.0 / 3.0 };
            if self.edge_side(a, b).is_some() {
                // boundary nodes sit on the exact geodesic side
                crate::geom::moebius::hyp_interp(self.verts[a], self.verts[b], t)
            } else {
                self.verts[a] * (1.0 - t) + self.verts[b] * t
            }
        } else {
            let f = n - nv - 2 * ne;
            self.map_face(f, [1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0])
        }
    }

    /// Geometric nodes of a face for the isoparametric cubic map: mesh node
    /// positions, with boundary-edge nodes on the exact geodesic and the
    /// interior node blended toward the curved edge.
    pub fn geom_nodes(&self, f: usize) -> [C; 10] {
        let nodes = self.face_nodes(f);
        let mut out = [C::new(0.0, 0.0); 10];
        for (i, &n) in nodes.iter().enumerate().take(9) {
            out[i] = self.node_pos(n);
        }
        // interior node: affine centroid plus the edge sagitta blend
        let vs = self.faces[f];
        let centroid =
            (self.verts[vs[0]] + self.verts[vs[1]] + self.verts[vs[2]]) / 3.0;
        out[9] = match self.face_boundary[f] {
            None => centroid,
            Some((apex, _)) => {
                let pb = self.verts[vs[(apex + 1) % 3]];
                let pc = self.verts[vs[(apex + 2) % 3]];
                let sag = crate::geom::moebius::hyp_midpoint(pb, pc) - 0.5 * (pb + pc);
                // blend weight s = lb + lc = 2/3 at the centroid
                centroid + sag * (2.0 / 3.0)
            }
        };
        out
    }

    /// Geometric map of a face: affine for interior faces, isoparametric
    /// cubic (polynomial) for boundary faces, whose curved edge interpolates
    /// the exact geodesic side at the four edge nodes.
    pub fn map_face(&self, f: usize, l: [f64; 3]) -> C {
        let vs = self.faces[f];
        match self.face_boundary[f] {
            None => {
                self.verts[vs[0]] * l[0] + self.verts[vs[1]] * l[1] + self.verts[vs[2]] * l[2]
            }
            Some(_) => {
                let xs = self.geom_nodes(f);
                let sh = crate::geom::quad::p3_shapes(l);
                let mut z = C::new(0.0, 0.0);
                for i in 0..10 {
                    z += xs[i] * sh[i];
                }
                z
            }
        }
    }

    /// The ten cubic node ids of a face, matching the reference layout:
    /// corners, then per edge opposite each corner the node nearest the
    /// cyclically-next corner first, then the interior node.
    pub fn face_nodes(&self, f: usize) -> [usize; 10] {
        let nv = self.n_verts();
        let ne = self.n_edges();
        let vs = self.faces[f];
        let fe = self.face_edges[f];
        let mut out = [0usize; 10];
        out[0] = vs[0];
        out[1] = vs[1];
        out[2] = vs[2];
        for k in 0..3 {
            let near = vs[(k + 1) % 3];
            let e = fe[k];
            let (lo, _hi) = self.edges[e];
            let (n_near, n_far) = if lo == near {
                (nv + 2 * e, nv + 2 * e + 1)
            } else {
                (nv + 2 * e + 1, nv + 2 * e)
            };
            out[3 + 2 * k] = n_near;
            out[3 + 2 * k + 1] = n_far;
        }
        out[9] = nv + 2 * ne + f;
        out
    }

    /// Euler characteristic of the identified closed surface.
    pub fn identified_euler_characteristic(&self) -> i64 {
        let nv = self.n_verts();
        let mut boundary_side_verts = 0usize;
        let mut corners = 0usize;
        for t in &self.tags {
            match t {
                VertTag::Side { .. } => boundary_side_verts += 1,
                VertTag::Corner { .. } => corners += 1,
            _ => {}
            }
        }
        // boundary edges: edges with both endpoints on the same side
        let mut boundary_edges = 0usize;
        for &(a, b) in &self.edges {
            if self.edge_side(a, b).is_some() {
                boundary_edges += 1;
            }
        }
        let v = (nv - boundary_side_verts / 2 - (corners - 1)) as i64;
        let e = (self.n_edges() - boundary_edges / 2) as i64;
        let f = self.n_faces() as i64;
        v - e + f
    }

    /// If the edge (a, b) lies on an octagon side, return the side index.
    pub fn edge_side(&self, a: usize, b: usize) -> Option<usize> {
        let on = |v: usize, side: usize| -> bool {
            match self.tags[v] {
                VertTag::Side { side: s, .. } => s == side,
                VertTag::Corner { k } => k == side || k == (side + 1) % 8,
                _ => false,
            }
        };
        (0..8).find(|&s| on(a, s) && on(b, s))
    }

    /// Worst distance between the pairing image of a slave vertex and its
    /// master vertex.
    pub fn pairing_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, o) in self.vert_owner.iter().enumerate() {
            if let VertOwner::Slave { master, gamma } = o {
                let img = gamma.apply(self.verts[*master]);
                worst = worst.max((img - self.verts[i]).norm());
            }
        }
        worst
    }

    /// Longest edge in hyperbolic length.
    pub fn max_edge_hyp(&self) -> f64 {
        self.edges
            .iter()
            .map(|&(a, b)| hyp_dist(self.verts[a], self.verts[b]))
            .fold(0.0, f64::max)
    }

    /// Hash of the mesh geometry and combinatorics, for provenance blocks.
    pub fn mesh_hash(&self) -> u64 {
        let mut h = DefaultHasher::new();
        self.level.hash(&mut h);
        for v in &self.verts {
            v.re.to_bits().hash(&mut h);
            v.im.to_bits().hash(&mut h);
        }
        for f in &self.faces {
            f.hash(&mut h);
        }
        h.finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn euler_characteristic_is_minus_two() {
        for level in [1u32, 2, 3] {
            let m = mesh_domain_level(level).unwrap();
            assert_eq!(m.identified_euler_characteristic(), -2, "level {level}");
        }
    }

    #[test]
    fn pairing_residual_tiny() {
        let m = mesh_domain_level(3).unwrap();
        assert!(m.pairing_residual() < 1e-11, "{}", m.pairing_residual());
    }

    #[test]
    fn refine_combinatorics() {
        let m = mesh_domain_level(2).unwrap();
        let r = refine_mesh(&m).unwrap();
        assert_eq!(r.n_faces(), 4 * m.n_faces());
        assert_eq!(r.n_verts(), m.n_verts() + m.n_edges());
        assert_eq!(r.n_edges(), 2 * m.n_edges() + 3 * m.n_faces());
        assert_eq!(r.identified_euler_characteristic(), -2);
    }

    #[test]
    fn target_h_scaling() {
        let coarse = mesh_domain(0.2).unwrap();
        let fine = mesh_domain(0.1).unwrap();
        let ratio = fine.n_verts() as f64 / coarse.n_verts() as f64;
        assert!(ratio > 3.0 && ratio < 5.0, "ratio {ratio}");
        assert!(fine.max_edge_hyp() <= 0.1 + 1e-12);
    }

    #[test]
    fn quality_bound_holds() {
        let m = mesh_domain_level(3).unwrap();
        let worst = min_face_angle(&m.verts, &m.faces);
        assert!(worst >= 20.0f64.to_radians(), "{}", worst.to_degrees());
    }
}
