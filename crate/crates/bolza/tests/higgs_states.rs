//! Oracle tests for Higgs states: the calibrated Fuchsian point, energy
//! constants, companion-matrix identities, the Hitchin map and C*-action.

use bolza::fields::{holomorphic_basis_with_gap, Fem};
use bolza::higgs::{
    energy, hitchin_map, hitchin_residual_norm, simplicity_check, solve_hitchin_diag, HiggsState,
    MetricField, SolveOpts,
};
use num_complex::Complex64 as C;
use std::f64::consts::PI;
use std::sync::Arc;

fn fem(level: u32) -> Fem {
    Fem::new(Arc::new(
        bolza::geom::mesh_domain_level(level).unwrap(),
    ))
}

#[test]
fn fuchsian_point_is_exact() {
    let fem = fem(3);
    let mut state = HiggsState::hitchin_section(&fem, 2, None, None).unwrap();
    // residual at u = 0 must vanish identically by calibration
    let r0 = hitchin_residual_norm(&fem, &state).unwrap();
    assert!(r0 < 1e-10, "calibrated residual {r0}");
    // the solver must not move
    let rn = solve_hitchin_diag(&fem, &mut state, &SolveOpts::default()).unwrap();
    assert!(rn < 1e-10);
    if let MetricField::Diagonal { u } = &state.metric {
        let umax = u
            .iter()
            .flat_map(|ui| ui.iter())
            .fold(0.0f64, |a, &b| a.max(b.abs()));
        assert!(umax <= 1e-6, "solver moved: {umax}");
    } else {
        panic!("diagonal metric expected");
    }
    // energy = c2 * 4 pi with c2 = 2n * sum_i d_i = 8 for SL(2)
    let e = energy(&fem, &state);
    let expect = 8.0 * 4.0 * PI;
    assert!(
        (e - expect).abs() < 1e-4 * expect,
        "energy {e} vs {expect}"
    );
}

#[test]
fn fuchsian_sl3_energy_constant() {
    let fem = fem(3);
    let state = HiggsState::hitchin_section(&fem, 3, None, None).unwrap();
    let r0 = hitchin_residual_norm(&fem, &state).unwrap();
    assert!(r0 < 1e-10, "calibrated residual {r0}");
    // c2 = 2n sum d_i = 6 * 8 = 48
    let e = energy(&fem, &state);
    let expect = 48.0 * 4.0 * PI;
    assert!((e - expect).abs() < 1e-4 * expect, "energy {e} vs {expect}");
}

#[test]
fn sl2_small_q2_solves_and_energy_grows() {
    let fem = fem(3);
    let h2 = holomorphic_basis_with_gap(&fem, 2, 1e2).unwrap();
    let q2 = h2.basis[0].scale(C::new(0.1, 0.05));
    let mut state = HiggsState::hitchin_section(&fem, 2, Some(&q2), None).unwrap();
    let opts = SolveOpts::default();
    let rn = solve_hitchin_diag(&fem, &mut state, &opts).unwrap();
    assert!(rn <= opts.tol, "residual {rn}");
    let e = energy(&fem, &state);
    let e_fuchs = 8.0 * 4.0 * PI;
    assert!(e > e_fuchs, "energy must grow: {e} vs {e_fuchs}");
    // tr Phi^2 = 2 q2 for the companion form
    let map = hitchin_map(&fem, &state, &h2.basis, None);
    // p2 = (n/2) tr Phi^2 = 2 q2; coefficient against basis[0] = 2*(0.1+0.05i)
    let c = map.p2.coeffs[0];
    let expect = C::new(0.2, 0.1);
    assert!((c - expect).norm() < 1e-8, "p2 coeff {c}");
    assert!(map.p2.residual < 1e-8, "projection residual {}", map.p2.residual);
    // homogeneity p_k(lambda Phi) = lambda^k p_k
    let lam = C::from_polar(1.3, 0.7);
    let scaled = state.cstar(lam);
    let map2 = hitchin_map(&fem, &scaled, &h2.basis, None);
    let ratio = map2.p2.coeffs[0] / map.p2.coeffs[0];
    assert!((ratio - lam * lam).norm() < 1e-10, "homogeneity {ratio}");
}

#[test]
fn sl3_cyclic_state_solves() {
    let fem = fem(3);
    let h3 = holomorphic_basis_with_gap(&fem, 3, 50.0).unwrap();
    let q3 = h3.basis[0].scale(C::new(0.07, 0.0));
    let mut state = HiggsState::hitchin_section(&fem, 3, None, Some(&q3)).unwrap();
    let opts = SolveOpts::default();
    let rn = solve_hitchin_diag(&fem, &mut state, &opts).unwrap();
    assert!(rn <= opts.tol, "residual {rn}");
    // diag metric keeps det = 1: sum u_i = 0 pointwise
    if let MetricField::Diagonal { u } = &state.metric {
        for d in 0..fem.n_dof() {
            let s: f64 = (0..3).map(|i| u[i][d]).sum();
            assert!(s.abs() < 1e-10, "sum u = {s}");
        }
    }
    // tr Phi^2 = 0 identically (3-cyclic)
    let h2 = holomorphic_basis_with_gap(&fem, 2, 1e2).unwrap();
    let map = hitchin_map(&fem, &state, &h2.basis, Some(&h3.basis));
    let p2_norm: f64 = map.p2.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    assert!(p2_norm < 1e-12 && map.p2.residual < 1e-12, "p2 {p2_norm}");
    // p3 = tr Phi^3 = 3 q3
    let c3 = map.p3.as_ref().unwrap().coeffs[0];
    assert!((c3 - C::new(0.21, 0.0)).norm() < 1e-8, "p3 coeff {c3}");
    // cyclic invariance: e^{2 pi i/3} Phi conjugated by diag(a,1,1/a) with
    // a = e^{-2 pi i/3} returns the same Phi
    let omega = C::from_polar(1.0, 2.0 * PI / 3.0);
    let scaled = state.cstar(omega);
    let a = C::from_polar(1.0, 2.0 * PI / 3.0);
    let mut worst = 0.0f64;
    for d in 0..fem.n_dof() {
        let m = scaled.phi.at_dof(d);
        let g = bolza::higgs::Mat::diag(3, &[a, C::new(1.0, 0.0), 1.0 / a]);
        let back = g.mul(&m).mul(&g.inverse());
        let orig = state.phi.at_dof(d);
        worst = worst.max(back.sub(&orig).frob_norm_sqr().sqrt());
    }
    assert!(worst < 1e-12, "cyclic gauge invariance defect {worst}");
}

#[test]
fn adjoint_involution_and_isometry() {
    let fem = fem(3);
    let h2 = holomorphic_basis_with_gap(&fem, 2, 1e2).unwrap();
    let q2 = h2.basis[1].scale(C::new(0.12, -0.03));
    let mut state = HiggsState::hitchin_section(&fem, 2, Some(&q2), None).unwrap();
    solve_hitchin_diag(&fem, &mut state, &SolveOpts::default()).unwrap();
    let star = state.adjoint_phi(&fem);
    // (Phi*)* = Phi pointwise at dofs
    let mut worst = 0.0f64;
    for d in 0..fem.n_dof() {
        let z = fem.domain.node_pos(fem.dof.master_nodes[d]);
        let h = state.metric_at_dof(&fem, d, z);
        let back = star.at_dof(d).star_h(&h);
        let orig = state.phi.at_dof(d);
        worst = worst.max(back.sub(&orig).frob_norm_sqr().sqrt());
    }
    assert!(worst < 1e-10, "involution defect {worst}");
    // residual invariance under unit-modulus C* action
    let r1 = hitchin_residual_norm(&fem, &state).unwrap();
    let rotated = state.cstar(C::from_polar(1.0, 1.1));
    let r2 = hitchin_residual_norm(&fem, &rotated).unwrap();
    assert!((r1 - r2).abs() < 1e-12 * (1.0 + r1), "{r1} vs {r2}");
}

#[test]
fn simplicity_of_hitchin_section() {
    let fem = fem(2);
    let h2 = holomorphic_basis_with_gap(&fem, 2, 10.0).unwrap();
    let q2 = h2.basis[0].scale(C::new(0.1, 0.0));
    let mut state = HiggsState::hitchin_section(&fem, 2, Some(&q2), None).unwrap();
    solve_hitchin_diag(&fem, &mut state, &SolveOpts::default()).unwrap();
    let (dim, sigmas, gap) = simplicity_check(&fem, &state, 1e3).unwrap();
    assert_eq!(dim, 1, "sigmas {sigmas:?} gap {gap}");
}
