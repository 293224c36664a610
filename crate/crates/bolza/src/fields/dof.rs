//! Degree-of-freedom identification for automorphic fields.
//!
//! Cubic Lagrange nodes: mesh vertices, two nodes per edge at the reference
//! third-points, one node per face. Nodes in the interior and on master
//! sides S_0..S_3 carry degrees of freedom; nodes on slave sides S_4..S_7
//! and the seven non-representative corners are expressed through the master
//! DOFs with automorphy factors baked into a sparse prolongation matrix, one
//! matrix per weight.
//!
//! A slave vertex v = gamma(m) contributes the single row
//!   f(v) = gamma'(m)^{-p} conj(gamma'(m))^{-q} f(m).
//! The two interior nodes of a slave boundary edge are fixed by the L2
//! projection, along the edge, of the transported master trace
//!   T(t) = factor(t) * (master trace)(t_m(t)):
//! the edge trace jump is then orthogonal to the interior cubic modes, which
//! keeps the automorphy defect of the identified space at the element order
//! instead of the nodal-interpolation order of the factor.

use crate::geom::mesh::{TriangulatedDomain, VertOwner, VertTag};
use crate::geom::moebius::{hyp_dist, hyp_interp, MoebiusMap, C};
use crate::linalg::sparse::{Csr, Triplets};
use std::collections::HashMap;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Weight {
    /// twice the holomorphic exponent p (half-integers allowed)
    pub p2: i32,
    /// twice the antiholomorphic exponent q (half-integers allowed; the
    /// public field type uses q in {0,1}, i.e. q2 in {0,2})
    pub q2: i32,
}

impl Weight {
    pub fn new(p2: i32, q: i32) -> Self {
        assert!(q == 0 || q == 1, "form degree q must be 0 or 1, got {q}");
        Self { p2, q2: 2 * q }
    }
    /// Internal constructor for intermediates (conjugates, metric duals,
    /// unitary-frame phases); q is the honest exponent, possibly negative.
    pub fn raw(p2: i32, q: i32) -> Self {
        Self { p2, q2: 2 * q }
    }
    /// Fully general constructor with doubled exponents.
    pub fn half(p2: i32, q2: i32) -> Self {
        Self { p2, q2 }
    }
    pub fn p(&self) -> f64 {
        self.p2 as f64 / 2.0
    }
    pub fn q(&self) -> f64 {
        self.q2 as f64 / 2.0
    }
    /// q as an integer form degree; panics when called on a phase weight.
    pub fn q_int(&self) -> i32 {
        assert!(self.q2 % 2 == 0);
        self.q2 / 2
    }
    /// total conformal exponent p + q entering the pointwise norm
    pub fn total(&self) -> f64 {
        self.p() + self.q()
    }
    pub fn conj(&self) -> Weight {
        Weight::half(self.q2, self.p2)
    }
}

impl std::fmt::Display for Weight {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}/2, {}/2)", self.p2, self.q2)
    }
}

/// Automorphy factor gamma'(z)^{-p} conj(gamma'(z))^{-q} using the matrix
/// lift's square root branch for half-integer exponents.
pub fn aut_factor(gamma: &MoebiusMap, z: C, w: Weight) -> C {
    let s = gamma.sqrt_deriv(z); // sqrt(gamma'(z)), branch fixed by the lift
    let gp = s.powi(-w.p2);
    let gq = s.conj().powi(-w.q2);
    gp * gq
}

/// 1D cubic Lagrange basis on {0, 1/3, 2/3, 1}.
fn lag4(t: f64) -> [f64; 4] {
    let (a, b, c) = (t - 1.0 / 3.0, t - 2.0 / 3.0, t - 1.0);
    [
        -4.5 * a * b * c,
        13.5 * t * b * c,
        -13.5 * t * a * c,
        4.5 * t * a * b,
    ]
}

/// 8-point Gauss-Legendre rule on [0, 1].
const GAUSS8: [(f64, f64); 8] = [
    (0.019855071751232, 0.050614268145188),
    (0.101666761293187, 0.111190517226687),
    (0.237233795041836, 0.156853322938944),
    (0.408282678752175, 0.181341891689181),
    (0.591717321247825, 0.181341891689181),
    (0.762766204958164, 0.156853322938944),
    (0.898333238706813, 0.111190517226687),
    (0.980144928248768, 0.050614268145188),
];

#[derive(Clone, Debug)]
enum NodeRole {
    Master {
        dof: usize,
    },
    SlaveVert {
        master_node: usize,
        gamma: MoebiusMap,
        master_pos: C,
    },
    /// Interior node `which` (0 at t=1/3, 1 at t=2/3) of slave edge `edge`.
    SlaveEdgeNode {
        edge: usize,
        which: usize,
    },
}

/// Transport data of one slave boundary edge.
#[derive(Clone, Debug)]
struct SlaveEdgeData {
    /// slave = gamma(master point)
    gamma: MoebiusMap,
    /// master trace nodes in edge order [t_m=0 vertex, t_m=1/3, t_m=2/3, t_m=1 vertex]
    master_nodes4: [usize; 4],
    /// slave endpoint vertex nodes at t_s = 0 and 1
    slave_verts: [usize; 2],
    /// per Gauss point: (t_s, weight, zeta = master point, t_m from master lo)
    gauss: Vec<(f64, f64, C, f64)>,
}

pub struct DofMap {
    pub n_nodes: usize,
    pub n_dof: usize,
    /// node id of each master DOF
    pub master_nodes: Vec<usize>,
    roles: Vec<NodeRole>,
    slave_edges: Vec<SlaveEdgeData>,
}

impl DofMap {
    pub fn new(domain: &TriangulatedDomain) -> Self {
        let nv = domain.n_verts();
        let n_nodes = domain.n_nodes();
        let mut roles: Vec<Option<NodeRole>> = vec![None; n_nodes];
        let mut n_dof = 0usize;
        let mut master_nodes: Vec<usize> = Vec::new();
        // vertex nodes
        for v in 0..nv {
            match &domain.vert_owner[v] {
                VertOwner::Master => {
                    roles[v] = Some(NodeRole::Master { dof: n_dof });
                    master_nodes.push(v);
                    n_dof += 1;
                }
                VertOwner::Slave { master, gamma } => {
                    roles[v] = Some(NodeRole::SlaveVert {
                        master_node: *master,
                        gamma: *gamma,
                        master_pos: domain.verts[*master],
                    });
                }
            }
        }
        // master boundary edge lookup by side parameters
        let side_param = |v: usize, side: usize| -> Option<f64> {
            match domain.tags[v] {
                VertTag::Side { side: s, t } if s == side => Some(t),
                VertTag::Corner { k } if k == side => Some(0.0),
                VertTag::Corner { k } if k == (side + 1) % 8 => Some(1.0),
                _ => None,
            }
        };
        let mut master_edge: HashMap<(usize, u64, u64), usize> = HashMap::new();
        for (ei, &(a, b)) in domain.edges.iter().enumerate() {
            if let Some(s) = domain.edge_side(a, b) {
                if s < 4 {
                    let ta = side_param(a, s).unwrap();
                    let tb = side_param(b, s).unwrap();
                    let (lo, hi) = if ta < tb { (ta, tb) } else { (tb, ta) };
                    master_edge.insert((s, lo.to_bits(), hi.to_bits()), ei);
                }
            }
        }
        // edge nodes
        let mut slave_edges: Vec<SlaveEdgeData> = Vec::new();
        for (ei, &(a, b)) in domain.edges.iter().enumerate() {
            let side = domain.edge_side(a, b);
            match side {
                Some(s) if s >= 4 => {
                    let j = s - 4;
                    let gamma = domain.group.gens[j].inverse(); // slave = gamma(master)
                    let ta = side_param(a, s).unwrap();
                    let tb = side_param(b, s).unwrap();
                    let (lo, hi) = {
                        let (x, y) = (1.0 - ta, 1.0 - tb);
                        if x < y {
                            (x, y)
                        } else {
                            (y, x)
                        }
                    };
                    let me = *master_edge
                        .get(&(j, lo.to_bits(), hi.to_bits()))
                        .expect("paired master edge must exist");
                    let (m_lo, m_hi) = domain.edges[me];
                    let master_nodes4 = [
                        m_lo,
                        nv + 2 * me,
                        nv + 2 * me + 1,
                        m_hi,
                    ];
                    let d_all = hyp_dist(domain.verts[m_lo], domain.verts[m_hi]);
                    let mut gauss = Vec::with_capacity(GAUSS8.len());
                    for (t, w) in GAUSS8 {
                        let zs = hyp_interp(domain.verts[a], domain.verts[b], t);
                        let zeta = domain.group.gens[j].apply(zs);
                        let tm = hyp_dist(domain.verts[m_lo], zeta) / d_all;
                        gauss.push((t, w, zeta, tm));
                    }
                    let idx = slave_edges.len();
                    slave_edges.push(SlaveEdgeData {
                        gamma,
                        master_nodes4,
                        slave_verts: [a, b],
                        gauss,
                    });
                    roles[nv + 2 * ei] = Some(NodeRole::SlaveEdgeNode { edge: idx, which: 0 });
                    roles[nv + 2 * ei + 1] =
                        Some(NodeRole::SlaveEdgeNode { edge: idx, which: 1 });
                }
                _ => {
                    for k in 0..2 {
                        let node = nv + 2 * ei + k;
                        roles[node] = Some(NodeRole::Master { dof: n_dof });
                        master_nodes.push(node);
                        n_dof += 1;
                    }
                }
            }
        }
        // face nodes are always interior masters
        for fi in 0..domain.n_faces() {
            let node = nv + 2 * domain.n_edges() + fi;
            roles[node] = Some(NodeRole::Master { dof: n_dof });
            master_nodes.push(node);
            n_dof += 1;
        }
        DofMap {
            n_nodes,
            n_dof,
            master_nodes,
            roles: roles.into_iter().map(Option::unwrap).collect(),
            slave_edges,
        }
    }

    pub fn dof_of_node(&self, node: usize) -> Option<usize> {
        match self.roles[node] {
            NodeRole::Master { dof } => Some(dof),
            _ => None,
        }
    }

    /// Row of the prolongation for a master or slave-vertex node.
    fn vert_row(&self, node: usize, w: Weight) -> Vec<(usize, C)> {
        match &self.roles[node] {
            NodeRole::Master { dof } => vec![(*dof, C::new(1.0, 0.0))],
            NodeRole::SlaveVert {
                master_node,
                gamma,
                master_pos,
            } => {
                let c = aut_factor(gamma, *master_pos, w);
                self.vert_row(*master_node, w)
                    .into_iter()
                    .map(|(d, v)| (d, c * v))
                    .collect()
            }
            NodeRole::SlaveEdgeNode { .. } => {
                unreachable!("edge node treated as vertex")
            }
        }
    }

    /// Rows for the two interior nodes of a slave boundary edge: L2-project
    /// the transported master trace onto the slave edge cubic, with the two
    /// endpoint values pinned to the slave vertex rows.
    fn slave_edge_rows(&self, data: &SlaveEdgeData, w: Weight) -> [Vec<(usize, C)>; 2] {
        // Gram of the interior 1D basis functions L1, L2 on [0,1]
        let mut g11 = 0.0;
        let mut g12 = 0.0;
        let mut g22 = 0.0;
        // moments of the transported trace against L1, L2, as rows
        let mut m1: HashMap<usize, C> = HashMap::new();
        let mut m2: HashMap<usize, C> = HashMap::new();
        let y_rows: Vec<Vec<(usize, C)>> = data
            .master_nodes4
            .iter()
            .map(|&n| match &self.roles[n] {
                NodeRole::Master { dof } => vec![(*dof, C::new(1.0, 0.0))],
                NodeRole::SlaveVert { .. } => self.vert_row(n, w),
                NodeRole::SlaveEdgeNode { .. } => unreachable!("master edge node is a master"),
            })
            .collect();
        let x_rows: [Vec<(usize, C)>; 2] = [
            self.vert_row(data.slave_verts[0], w),
            self.vert_row(data.slave_verts[1], w),
        ];
        for &(t, gw, zeta, tm) in &data.gauss {
            let l = lag4(t);
            g11 += gw * l[1] * l[1];
            g12 += gw * l[1] * l[2];
            g22 += gw * l[2] * l[2];
            let fac = aut_factor(&data.gamma, zeta, w);
            let lm = lag4(tm);
            // T(t) = fac * sum_k y_k lm[k]; subtract the pinned endpoint part
            for (k, row) in y_rows.iter().enumerate() {
                for &(d, v) in row {
                    let c = fac * lm[k] * v;
                    *m1.entry(d).or_insert(C::new(0.0, 0.0)) += gw * l[1] * c;
                    *m2.entry(d).or_insert(C::new(0.0, 0.0)) += gw * l[2] * c;
                }
            }
            for (which, row) in x_rows.iter().enumerate() {
                let le = if which == 0 { l[0] } else { l[3] };
                for &(d, v) in row {
                    *m1.entry(d).or_insert(C::new(0.0, 0.0)) -= gw * l[1] * le * v;
                    *m2.entry(d).or_insert(C::new(0.0, 0.0)) -= gw * l[2] * le * v;
                }
            }
        }
        let det = g11 * g22 - g12 * g12;
        let mut row1: Vec<(usize, C)> = Vec::new();
        let mut row2: Vec<(usize, C)> = Vec::new();
        let mut keys: Vec<usize> = m1.keys().chain(m2.keys()).copied().collect();
        keys.sort_unstable();
        keys.dedup();
        for d in keys {
            let a = m1.get(&d).copied().unwrap_or(C::new(0.0, 0.0));
            let b = m2.get(&d).copied().unwrap_or(C::new(0.0, 0.0));
            let v1 = (a * g22 - b * g12) / det;
            let v2 = (b * g11 - a * g12) / det;
            if v1.norm() > 0.0 {
                row1.push((d, v1));
            }
            if v2.norm() > 0.0 {
                row2.push((d, v2));
            }
        }
        [row1, row2]
    }

    /// Prolongation matrix (nodes x dofs) for the given weight.
    pub fn prolongation(&self, w: Weight) -> Csr {
        let mut t = Triplets::new(self.n_nodes, self.n_dof);
        // cache slave-edge projection rows by edge index
        let mut edge_rows: Vec<Option<[Vec<(usize, C)>; 2]>> =
            vec![None; self.slave_edges.len()];
        for node in 0..self.n_nodes {
            match &self.roles[node] {
                NodeRole::Master { dof } => t.push(node, *dof, C::new(1.0, 0.0)),
                NodeRole::SlaveVert { .. } => {
                    for (dof, c) in self.vert_row(node, w) {
                        t.push(node, dof, c);
                    }
                }
                NodeRole::SlaveEdgeNode { edge, which } => {
                    if edge_rows[*edge].is_none() {
                        edge_rows[*edge] =
                            Some(self.slave_edge_rows(&self.slave_edges[*edge], w));
                    }
                    for (dof, c) in &edge_rows[*edge].as_ref().unwrap()[*which] {
                        t.push(node, *dof, *c);
                    }
                }
            }
        }
        t.to_csr()
    }
}
