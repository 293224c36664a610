//! Operator calculus on weighted fields: Dolbeault and metric-covariant
//! derivatives, adjoints, the contraction Lambda, and kernel bases.

use super::dof::Weight;
use super::field::WeightedField;
use super::space::Fem;
use crate::error::FieldError;
use crate::linalg::subspace::smallest_eigs;
use num_complex::Complex64 as C;

/// dbar: (p,0) -> (p,1), weak form projected back through the mass matrix.
pub fn dbar(fem: &Fem, f: &WeightedField) -> Result<WeightedField, FieldError> {
    if f.weight.q2 != 0 {
        return Err(FieldError::WeightMismatch {
            expected: format!("({}, 0)", f.weight.p2 as f64 / 2.0),
            got: f.weight.to_string(),
        });
    }
    let b = fem.dbar_weak(f.weight);
    let wout = Weight::raw(f.weight.p2, 1);
    let rhs = b.mul(&f.dofs);
    let sol = fem.mass_ldl(wout).solve(&rhs);
    Ok(WeightedField {
        weight: wout,
        dofs: sol,
    })
}

/// Adjoint of dbar: (p,1) -> (p,0) through the discrete inner products,
/// exact adjointness by construction.
pub fn dbar_adj(fem: &Fem, g: &WeightedField) -> Result<WeightedField, FieldError> {
    if g.weight.q2 != 2 {
        return Err(FieldError::WeightMismatch {
            expected: "(*, 1)".into(),
            got: g.weight.to_string(),
        });
    }
    let win = Weight::raw(g.weight.p2, 0);
    let b = fem.dbar_weak(win);
    let rhs = b.mul_herm(&g.dofs);
    let sol = fem.mass_ldl(win).solve(&rhs);
    Ok(WeightedField {
        weight: win,
        dofs: sol,
    })
}

/// Metric-covariant del: (p,q) -> (p+1,q) with the K^p Chern connection.
pub fn del_cov(fem: &Fem, f: &WeightedField) -> Result<WeightedField, FieldError> {
    if f.weight.q2 != 0 {
        return Err(FieldError::WeightMismatch {
            expected: "(*, 0)".into(),
            got: f.weight.to_string(),
        });
    }
    let b = fem.del_weak(f.weight);
    let wout = Weight::raw(f.weight.p2 + 2, 0);
    let rhs = b.mul(&f.dofs);
    let sol = fem.mass_ldl(wout).solve(&rhs);
    Ok(WeightedField {
        weight: wout,
        dofs: sol,
    })
}

/// del on (p,1)-forms (same holomorphic connection; the Kbar factor is
/// inert), producing the (1,1)-density slot of weight (p+1,1).
pub fn del_cov_form(fem: &Fem, f: &WeightedField) -> Result<WeightedField, FieldError> {
    if f.weight.q2 != 2 {
        return Err(FieldError::WeightMismatch {
            expected: "(*, 1)".into(),
            got: f.weight.to_string(),
        });
    }
    // assemble through the q=0 kernel with shifted totals: reuse del_weak on
    // the (p,1) prolongations
    let win = f.weight;
    let wout = Weight::raw(f.weight.p2 + 2, 1);
    let pin = fem.prolongation(win);
    let pout = fem.prolongation(wout);
    let bn = fem.del_nodes_pub(f.weight.p(), wout.total());
    let b = pout.herm().matmul(&bn).matmul(&pin);
    let rhs = b.mul(&f.dofs);
    let sol = fem.mass_ldl(wout).solve(&rhs);
    Ok(WeightedField {
        weight: wout,
        dofs: sol,
    })
}

/// Lambda: contract a (1,1)-density (weight (p+1,q+1) with p,q >= 0) against
/// the area form: Lambda(f dz wedge dzbar) = -i f (rho/2)^{-1}.
pub fn lambda_contract(fem: &Fem, f: &WeightedField) -> WeightedField {
    f.metric_dual(fem, 1).scale(C::new(0.0, -1.0))
}

/// Numerical kernel of dbar on weight-(m,0) fields via the singular pencil
///   B^H S^{-1} B x = sigma^2 M x,
/// where B is the weak dbar, S the H1 Gram of the output space and M the
/// input mass. Returns the L2-orthonormal kernel basis and the singular
/// values; fails unless a 10^3 gap separates the kernel.
pub struct KernelReport {
    pub basis: Vec<WeightedField>,
    pub sigmas: Vec<f64>,
    pub gap: f64,
}

pub fn dbar_kernel(fem: &Fem, m2: i32, expected: usize, gap_required: f64) -> Result<KernelReport, FieldError> {
    let w = Weight::raw(m2, 0);
    let a = fem.dbar_dirichlet(w);
    let m = fem.mass(w);
    let block = (2 * expected + 4).min(fem.n_dof());
    let res = smallest_eigs(&a, &m, block, 8, 1234)
        .map_err(|e| FieldError::Dimension(format!("eigensolver: {e}")))?;
    let sigmas: Vec<f64> = res.values.iter().map(|&v| v.max(0.0).sqrt()).collect();
    // locate the kernel split by the largest ratio jump among plausible sizes
    let mut k = 0usize;
    let mut best_ratio = 0.0;
    for i in 0..sigmas.len().saturating_sub(1) {
        let ratio = sigmas[i + 1] / sigmas[i].max(1e-300);
        if ratio > best_ratio {
            best_ratio = ratio;
            k = i + 1;
        }
    }
    if best_ratio < gap_required {
        return Err(FieldError::GapFailure {
            required: gap_required,
            got: best_ratio,
        });
    }
    let basis = res.vectors[..k]
        .iter()
        .map(|v| WeightedField {
            weight: w,
            dofs: v.clone(),
        })
        .collect();
    Ok(KernelReport {
        basis,
        sigmas,
        gap: best_ratio,
    })
}

/// Orthonormal basis of holomorphic m-differentials (m = 1, 2, 3) with the
/// default 1e3 singular-value gap requirement.
pub fn holomorphic_basis(fem: &Fem, m: i32) -> Result<KernelReport, FieldError> {
    holomorphic_basis_with_gap(fem, m, 1e3)
}

/// Same with a caller-chosen gap threshold (unit tests at coarse meshes).
pub fn holomorphic_basis_with_gap(
    fem: &Fem,
    m: i32,
    gap: f64,
) -> Result<KernelReport, FieldError> {
    assert!((1..=3).contains(&m), "supported weights are 1, 2, 3");
    // Riemann-Roch dimensions at genus 2: 2, 3, 5
    let expected = match m {
        1 => 2,
        2 => 3,
        _ => 5,
    };
    let mut rep = dbar_kernel(fem, 2 * m, expected, gap)?;
    gram_schmidt(fem, &mut rep.basis);
    Ok(rep)
}

/// L2 Gram-Schmidt in place (deterministic input order).
pub fn gram_schmidt(fem: &Fem, fields: &mut [WeightedField]) {
    for i in 0..fields.len() {
        for j in 0..i {
            let c = fields[i].l2_inner(fem, &fields[j]).unwrap();
            let fj = fields[j].scale(c);
            fields[i] = fields[i].sub(&fj);
        }
        let n = fields[i].l2_norm(fem);
        fields[i] = fields[i].scale(C::new(1.0 / n, 0.0));
    }
}

/// Harmonic Beltrami differentials mu = (2/rho) conj(q), q in H^0(K^2),
/// h_WP-orthonormalized.
pub fn harmonic_beltrami_basis(fem: &Fem) -> Result<Vec<WeightedField>, FieldError> {
    let hol = holomorphic_basis(fem, 2)?;
    let mut mus: Vec<WeightedField> = hol
        .basis
        .iter()
        .map(|q| q.conj_field().metric_dual(fem, 1))
        .collect();
    for mu in &mus {
        debug_assert_eq!(mu.weight, Weight::raw(-2, 1));
    }
    gram_schmidt(fem, &mut mus);
    Ok(mus)
}

/// Relative Kaehler identity residual ||dbar^* a + i Lambda del a|| / ||a||.
pub fn kaehler_residual(fem: &Fem, a: &WeightedField) -> Result<f64, FieldError> {
    let lhs = dbar_adj(fem, a)?;
    let da = del_cov_form(fem, a)?;
    let lam = lambda_contract(fem, &da);
    let total = lhs.add(&lam.scale(C::new(0.0, 1.0)));
    Ok(total.l2_norm(fem) / a.l2_norm(fem).max(1e-300))
}
