//! Higgs bundle states on a fixed direct sum of powers of the canonical
//! bundle: E = K^{w_1} (+) ... (+) K^{w_n} with sum w_i = 0.
//!
//! The background hermitian metric is diag(b_i (rho/2)^{-w_i}) with the
//! constants b_i calibrated so that the zero correction solves the Hitchin
//! equation of the principal (Hitchin-section) state at vanishing
//! differentials. Metric corrections are carried either by a diagonal
//! exponent vector u (det-1: sum u_i = 0) or a full hermitian log-correction
//! in the background-unitary frame.

use super::mat::Mat;
use crate::error::FieldError;
use crate::fields::dof::Weight;
use crate::fields::field::WeightedField;
use crate::fields::space::Fem;
use crate::geom::metric::rho_at;
use num_complex::Complex64 as C;

#[derive(Clone, Debug, PartialEq)]
pub struct BundleShape {
    pub n: usize,
    /// twice the weights, descending, sum zero
    pub w2: Vec<i32>,
    /// background scale constants, product 1
    pub b: Vec<f64>,
}

impl BundleShape {
    /// Hitchin-section shape: w_i = (n + 1 - 2i)/2 with unit subdiagonal
    /// conventions; b_i chosen so u = 0 solves the principal equation.
    pub fn hitchin(n: usize) -> Self {
        let w2: Vec<i32> = (1..=n).map(|i| (n as i32 + 1 - 2 * i as i32)).collect();
        // d_i = 2 sum_{k<=i} w2_k must equal |c_i|^2 b_{i+1}/b_i with c_i = 1
        let mut b = vec![1.0f64; n];
        let mut acc = 0i32;
        for i in 0..n - 1 {
            acc += w2[i];
            let d = 2.0 * acc as f64;
            b[i + 1] = b[i] * d;
        }
        let prod: f64 = b.iter().product();
        let scale = prod.powf(-1.0 / n as f64);
        for v in &mut b {
            *v *= scale;
        }
        Self { n, w2, b }
    }

    /// Trivial shape (all weights zero), used by the zero-Higgs states.
    pub fn trivial(n: usize) -> Self {
        Self {
            n,
            w2: vec![0; n],
            b: vec![1.0; n],
        }
    }

    pub fn a01_weight(&self, i: usize, j: usize) -> Weight {
        Weight::half(self.w2[i] - self.w2[j], 2)
    }

    pub fn phi_weight(&self, i: usize, j: usize) -> Weight {
        Weight::half(self.w2[i] - self.w2[j] + 2, 0)
    }

    pub fn section_weight(&self, i: usize, j: usize) -> Weight {
        Weight::half(self.w2[i] - self.w2[j], 0)
    }

    /// Background metric diagonal at a point.
    pub fn background_at(&self, z: C) -> Vec<f64> {
        let r2 = 0.5 * rho_at(z);
        (0..self.n)
            .map(|i| self.b[i] * r2.powf(-(self.w2[i] as f64) / 2.0))
            .collect()
    }

    /// Killing form scale: kappa(X, Y) = 2n tr(XY).
    pub fn kappa_scale(&self) -> f64 {
        2.0 * self.n as f64
    }
}

/// Which entry-weight rule a matrix of fields follows.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MatrixKind {
    /// (0,1)-potential: entry (i,j) of weight (w_i - w_j, 1)
    A01,
    /// Higgs field dz-coefficient: entry (i,j) of weight (w_i - w_j + 1, 0)
    Phi,
    /// endomorphism section: entry (i,j) of weight (w_i - w_j, 0)
    Section,
    /// (1,0)-form valued endomorphism (same weights as Phi)
    OneFormZ,
    /// dz wedge dzbar coefficient: entry weight (w_i - w_j + 1, 1)
    TwoForm,
}

impl MatrixKind {
    pub fn weight(&self, shape: &BundleShape, i: usize, j: usize) -> Weight {
        let d = shape.w2[i] - shape.w2[j];
        match self {
            MatrixKind::A01 => Weight::half(d, 2),
            MatrixKind::Phi | MatrixKind::OneFormZ => Weight::half(d + 2, 0),
            MatrixKind::Section => Weight::half(d, 0),
            MatrixKind::TwoForm => Weight::half(d + 2, 2),
        }
    }
}

/// n x n array of weighted fields following an entry-weight rule.
#[derive(Clone, Debug)]
pub struct MatrixField {
    pub n: usize,
    pub kind: MatrixKind,
    pub entries: Vec<WeightedField>,
}

impl MatrixField {
    pub fn zeros(fem: &Fem, shape: &BundleShape, kind: MatrixKind) -> Self {
        let n = shape.n;
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                entries.push(WeightedField::zeros(fem, kind.weight(shape, i, j)));
            }
        }
        Self { n, kind, entries }
    }

    pub fn entry(&self, i: usize, j: usize) -> &WeightedField {
        &self.entries[i * self.n + j]
    }

    pub fn entry_mut(&mut self, i: usize, j: usize) -> &mut WeightedField {
        &mut self.entries[i * self.n + j]
    }

    /// Value matrix at a master DOF index.
    pub fn at_dof(&self, d: usize) -> Mat {
        let mut m = Mat::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                m[(i, j)] = self.entries[i * self.n + j].dofs[d];
            }
        }
        m
    }

    pub fn set_dof(&mut self, d: usize, m: &Mat) {
        let n = self.n;
        for i in 0..n {
            for j in 0..n {
                self.entries[i * n + j].dofs[d] = m[(i, j)];
            }
        }
    }

    pub fn scale(&self, s: C) -> Self {
        Self {
            n: self.n,
            kind: self.kind,
            entries: self.entries.iter().map(|e| e.scale(s)).collect(),
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        Self {
            n: self.n,
            kind: self.kind,
            entries: self
                .entries
                .iter()
                .zip(o.entries.iter())
                .map(|(a, b)| a.add(b))
                .collect(),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(C::new(-1.0, 0.0)))
    }

    /// Node-value tables per entry, for quadrature evaluation.
    pub fn node_tables(&self, fem: &Fem) -> MatrixNodes {
        MatrixNodes {
            n: self.n,
            vals: self
                .entries
                .iter()
                .map(|e| fem.node_values(e.weight, &e.dofs))
                .collect(),
        }
    }

    pub fn trace_field(&self, fem: &Fem) -> WeightedField {
        let mut t = self.entry(0, 0).clone();
        for i in 1..self.n {
            t = t.add(self.entry(i, i));
        }
        let _ = fem;
        t
    }
}

/// Cached node values of a matrix field.
pub struct MatrixNodes {
    pub n: usize,
    pub vals: Vec<Vec<C>>,
}

impl MatrixNodes {
    /// Value matrix at quadrature point q of face f.
    pub fn at_quad(&self, fem: &Fem, f: usize, q: usize) -> Mat {
        let nodes = fem.domain.face_nodes(f);
        let sh = &fem.metric.faces[f].shp[q];
        let mut m = Mat::zeros(self.n);
        for e in 0..self.n * self.n {
            let tbl = &self.vals[e];
            let mut v = C::new(0.0, 0.0);
            for s in 0..10 {
                v += sh[s] * tbl[nodes[s]];
            }
            m.a[(e / self.n) * 3 + (e % self.n)] = v;
        }
        m
    }

    /// (d/dz, d/dzbar) value matrices at quadrature point q of face f.
    pub fn dz_at_quad(&self, fem: &Fem, f: usize, q: usize) -> (Mat, Mat) {
        let nodes = fem.domain.face_nodes(f);
        let dz = fem.metric.faces[f].p3_dz(q);
        let mut mz = Mat::zeros(self.n);
        let mut mzb = Mat::zeros(self.n);
        for e in 0..self.n * self.n {
            let tbl = &self.vals[e];
            let mut vz = C::new(0.0, 0.0);
            let mut vzb = C::new(0.0, 0.0);
            for s in 0..10 {
                vz += dz[s].0 * tbl[nodes[s]];
                vzb += dz[s].1 * tbl[nodes[s]];
            }
            mz.a[(e / self.n) * 3 + (e % self.n)] = vz;
            mzb.a[(e / self.n) * 3 + (e % self.n)] = vzb;
        }
        (mz, mzb)
    }
}

/// Metric correction relative to the calibrated background.
///
/// The full variant stores the relative endomorphism H (Section entry
/// weights) with h = B H; H is B-hermitian positive with unit determinant,
/// so h is a hermitian metric of the same determinant as the background.
#[derive(Clone, Debug)]
pub enum MetricField {
    /// h_i = b_i e^{u_i} (rho/2)^{-w_i}, with sum_i u_i = 0 pointwise.
    Diagonal { u: Vec<Vec<f64>> },
    /// h = B H with nodal relative endomorphism H.
    Full { h_rel: MatrixField },
}

impl MetricField {
    pub fn diagonal_zero(fem: &Fem, n: usize) -> Self {
        MetricField::Diagonal {
            u: vec![vec![0.0; fem.n_dof()]; n],
        }
    }

    pub fn full_identity(fem: &Fem, shape: &BundleShape) -> Self {
        let mut h = MatrixField::zeros(fem, shape, MatrixKind::Section);
        for i in 0..shape.n {
            for v in h.entry_mut(i, i).dofs.iter_mut() {
                *v = C::new(1.0, 0.0);
            }
        }
        MetricField::Full { h_rel: h }
    }

    pub fn is_diagonal(&self) -> bool {
        matches!(self, MetricField::Diagonal { .. })
    }

    /// Full metric matrix at an arbitrary point given interpolated values
    /// of u (diagonal) or H (full).
    pub fn h_from_values(&self, shape: &BundleShape, z: C, vals: &Mat) -> Mat {
        let bg = shape.background_at(z);
        let mut h = Mat::zeros(shape.n);
        match self {
            MetricField::Diagonal { .. } => {
                for i in 0..shape.n {
                    h[(i, i)] = C::new(bg[i] * vals[(i, i)].re.exp(), 0.0);
                }
            }
            MetricField::Full { .. } => {
                for i in 0..shape.n {
                    for j in 0..shape.n {
                        h[(i, j)] = bg[i] * vals[(i, j)];
                    }
                }
            }
        }
        h
    }
}

#[derive(Clone, Debug)]
pub struct HiggsState {
    pub shape: BundleShape,
    pub a01: MatrixField,
    pub phi: MatrixField,
    pub metric: MetricField,
}

impl HiggsState {
    /// Hitchin-section state: unit subdiagonal, q_k in the principal slots,
    /// zero (0,1)-potential, background metric.
    ///
    /// q2 goes to the first superdiagonal, q3 (n = 3) to the corner. Inputs
    /// are projected onto the holomorphic spans by the caller when needed.
    pub fn hitchin_section(
        fem: &Fem,
        n: usize,
        q2: Option<&WeightedField>,
        q3: Option<&WeightedField>,
    ) -> Result<Self, FieldError> {
        let shape = BundleShape::hitchin(n);
        let a01 = MatrixField::zeros(fem, &shape, MatrixKind::A01);
        let mut phi = MatrixField::zeros(fem, &shape, MatrixKind::Phi);
        let one = C::new(1.0, 0.0);
        for i in 1..n {
            // subdiagonal entries are the constant 1 (weight (0,0))
            for v in phi.entry_mut(i, i - 1).dofs.iter_mut() {
                *v = one;
            }
        }
        if let Some(q) = q2 {
            if q.weight != Weight::new(4, 0) {
                return Err(FieldError::WeightMismatch {
                    expected: "(2, 0)".into(),
                    got: q.weight.to_string(),
                });
            }
            for i in 0..n - 1 {
                let w = phi.entry(i, i + 1).weight;
                phi.entry_mut(i, i + 1).dofs = q.dofs.clone();
                phi.entry_mut(i, i + 1).weight = w;
                debug_assert_eq!(w, Weight::new(4, 0));
            }
        }
        if let Some(q) = q3 {
            assert_eq!(n, 3, "cubic differential needs SL(3)");
            if q.weight != Weight::new(6, 0) {
                return Err(FieldError::WeightMismatch {
                    expected: "(3, 0)".into(),
                    got: q.weight.to_string(),
                });
            }
            let w = phi.entry(0, 2).weight;
            phi.entry_mut(0, 2).dofs = q.dofs.clone();
            phi.entry_mut(0, 2).weight = w;
            debug_assert_eq!(w, Weight::new(6, 0));
        }
        Ok(Self {
            shape,
            a01,
            phi,
            metric: MetricField::diagonal_zero(fem, n),
        })
    }

    pub fn n(&self) -> usize {
        self.shape.n
    }

    /// Pointwise h-adjoint of the Higgs field: (phi*)_{ij} = h_i^{-1}
    /// conj(phi_{ji}) h_j at master nodes; output carries (0,1) entries.
    pub fn adjoint_phi(&self, fem: &Fem) -> MatrixField {
        let n = self.n();
        let mut out = MatrixField::zeros(fem, &self.shape, MatrixKind::A01);
        for (d, &node) in fem.dof.master_nodes.iter().enumerate() {
            let z = fem.domain.node_pos(node);
            let h = self.metric_at_dof(fem, d, z);
            let phi = self.phi.at_dof(d);
            let star = phi.star_h(&h);
            out.set_dof(d, &star);
        }
        out
    }

    /// Metric matrix at master dof d located at z.
    pub fn metric_at_dof(&self, _fem: &Fem, d: usize, z: C) -> Mat {
        let n = self.n();
        let mut vals = Mat::zeros(n);
        match &self.metric {
            MetricField::Diagonal { u } => {
                for i in 0..n {
                    vals[(i, i)] = C::new(u[i][d], 0.0);
                }
            }
            MetricField::Full { h_rel } => {
                vals = h_rel.at_dof(d);
            }
        }
        self.metric.h_from_values(&self.shape, z, &vals)
    }

    /// Scale the Higgs field by lambda (the C* action on the fiber data).
    pub fn cstar(&self, lambda: C) -> Self {
        let mut s = self.clone();
        s.phi = s.phi.scale(lambda);
        s
    }
}
