//! The genus-2 Fuchsian group of the regular hyperbolic octagon with
//! opposite sides identified (the Bolza surface).
//!
//! Vertices sit at angle 2 pi k/8, k = 0..7, at hyperbolic distance
//! arccosh(3 + 2 sqrt 2) from the origin. Side S_j joins V_j to V_{j+1};
//! the generator g_j (j = 0..3) is the hyperbolic translation through the
//! midpoint of S_j carrying S_{j+4} onto S_j. All eight vertices project
//! to a single point of the surface with cone angle 2 pi.

use super::moebius::{hyp_interp, MoebiusMap, C};
use crate::error::GeomError;
use std::f64::consts::PI;

/// Number of octagon sides.
pub const SIDES: usize = 8;

#[derive(Clone, Debug)]
pub struct FuchsianGroup {
    /// Translations g_0..g_3; side j is paired with side j+4 via g_j.
    pub gens: [MoebiusMap; 4],
    /// Octagon corner positions V_0..V_7.
    pub corners: [C; 8],
    /// Words w_k with V_k = w_k(V_0), used to identify corner DOFs.
    pub corner_words: [MoebiusMap; 8],
    /// Euclidean radius of the corners.
    pub vertex_radius: f64,
    pub genus: usize,
}

impl FuchsianGroup {
    /// Side-pairing map carrying side `j+4` onto side `j` for j = 0..3,
    /// and side `j-4` onto side `j` (the inverse lift) for j = 4..7.
    pub fn pairing(&self, j: usize) -> MoebiusMap {
        if j < 4 {
            self.gens[j]
        } else {
            self.gens[j - 4].inverse()
        }
    }

    /// The relator word as indices into (generator, inverted) pairs,
    /// rightmost factor first (order of application to a point).
    pub fn relator_word() -> [(usize, bool); 8] {
        // g3^-1 g2 g1^-1 g0 g3 g2^-1 g1 g0^-1 applied right to left
        [
            (0, true),
            (1, false),
            (2, true),
            (3, false),
            (0, false),
            (1, true),
            (2, false),
            (3, true),
        ]
    }

    /// Product of the relator word in the matrix lift.
    pub fn relator(&self) -> MoebiusMap {
        let mut m = MoebiusMap::identity();
        for (j, inv) in Self::relator_word() {
            let g = if inv {
                self.gens[j].inverse()
            } else {
                self.gens[j]
            };
            m = g.compose(&m);
        }
        m
    }

    /// Residual of the relator against the identity (PSL distance).
    pub fn relator_residual(&self) -> f64 {
        self.relator().dist_to_identity()
    }

    /// Residual of the relator in the matrix lift; small iff the generator
    /// lifts define a consistent spin structure for half-integer weights.
    pub fn spin_relator_residual(&self) -> f64 {
        self.relator().lift_dist_to_identity()
    }

    /// Point at dyadic parameter t in [0,1] along side j (from V_j to V_{j+1}).
    pub fn side_point(&self, j: usize, t: f64) -> C {
        hyp_interp(self.corners[j], self.corners[(j + 1) % 8], t)
    }
}

/// Construct the Bolza group.
///
/// The corner angle sum must be 2 pi and the relator must close; both are
/// checked and a construction failure is reported otherwise.
pub fn build_genus2_group() -> Result<FuchsianGroup, GeomError> {
    // Regular octagon with interior angle pi/4:
    //   cosh(d_OV) = cot^2(pi/8),  cosh(d_OM) = cot(pi/8).
    let cot8 = 1.0 / (PI / 8.0).tan();
    let d_ov = (cot8 * cot8).acosh();
    let d_om = cot8.acosh();
    let r_v = (d_ov / 2.0).tanh();
    let len = 2.0 * d_om;

    let mut gens = [MoebiusMap::identity(); 4];
    for (j, g) in gens.iter_mut().enumerate() {
        let phi = 2.0 * PI * (j as f64) / 8.0 + PI / 8.0;
        *g = MoebiusMap::translation(phi, len);
    }

    let mut corners = [C::new(0.0, 0.0); 8];
    for (k, v) in corners.iter_mut().enumerate() {
        let ang = 2.0 * PI * (k as f64) / 8.0;
        *v = C::from_polar(r_v, ang);
    }

    // Corner identification words found by walking the single vertex cycle:
    //   V5 = g0^-1 V0, V2 = g1 V5, V7 = g2^-1 V2, V4 = g3 V7,
    //   V1 = g0 V4, V6 = g1^-1 V1, V3 = g2 V6.
    let id = MoebiusMap::identity();
    let w5 = gens[0].inverse();
    let w2 = gens[1].compose(&w5);
    let w7 = gens[2].inverse().compose(&w2);
    let w4 = gens[3].compose(&w7);
    let w1 = gens[0].compose(&w4);
    let w6 = gens[1].inverse().compose(&w1);
    let w3 = gens[2].compose(&w6);
    let corner_words = [id, w1, w2, w3, w4, w5, w6, w7];

    let group = FuchsianGroup {
        gens,
        corners,
        corner_words,
        vertex_radius: r_v,
        genus: 2,
    };

    // Sanity: generators map the disk to itself and have unit determinant.
    for g in &group.gens {
        if (g.det() - C::new(1.0, 0.0)).norm() > 1e-12 {
            return Err(GeomError::Construction("generator determinant != 1".into()));
        }
        for s in 0..16 {
            let z = C::from_polar(0.93, s as f64 * 0.5);
            if g.apply(z).norm() >= 1.0 {
                return Err(GeomError::Construction(
                    "generator does not preserve the disk".into(),
                ));
            }
        }
    }

    // Corner words must actually send V0 to V_k.
    for k in 0..8 {
        let img = group.corner_words[k].apply(corners[0]);
        if (img - corners[k]).norm() > 1e-10 {
            return Err(GeomError::Construction(format!(
                "corner word {k} misses corner by {:.3e}",
                (img - corners[k]).norm()
            )));
        }
    }

    let res = group.relator_residual();
    if res > 1e-9 {
        return Err(GeomError::Construction(format!(
            "relator residual {res:.3e} exceeds 1e-9"
        )));
    }
    Ok(group)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relator_closes() {
        let g = build_genus2_group().unwrap();
        assert!(g.relator_residual() < 1e-9, "{}", g.relator_residual());
    }

    #[test]
    fn spin_lift_consistent() {
        // The relator must lift to +Id so half-integer automorphy factors
        // are single-valued around the cone point.
        let g = build_genus2_group().unwrap();
        assert!(
            g.spin_relator_residual() < 1e-9,
            "relator lifts to -Id: residual {}",
            g.spin_relator_residual()
        );
    }

    #[test]
    fn translation_lengths_equal() {
        let g = build_genus2_group().unwrap();
        let l0 = g.gens[0].translation_length();
        for gen in &g.gens {
            assert!((gen.translation_length() - l0).abs() < 1e-12);
        }
        // 2 arccosh(1 + sqrt 2)
        let expect = 2.0 * (1.0 + 2.0f64.sqrt()).acosh();
        assert!((l0 - expect).abs() < 1e-12, "{l0} vs {expect}");
    }

    #[test]
    fn pairing_maps_sides() {
        let g = build_genus2_group().unwrap();
        for j in 0..4 {
            // g_j carries V_{j+4} -> V_{j+1} and V_{j+5} -> V_j.
            let img_a = g.gens[j].apply(g.corners[(j + 4) % 8]);
            let img_b = g.gens[j].apply(g.corners[(j + 5) % 8]);
            assert!((img_a - g.corners[(j + 1) % 8]).norm() < 1e-12);
            assert!((img_b - g.corners[j]).norm() < 1e-12);
            // generic side point at parameter t maps to parameter 1-t
            let t = 0.3;
            let zs = g.side_point(j + 4, t);
            let zm = g.side_point(j, 1.0 - t);
            assert!((g.gens[j].apply(zs) - zm).norm() < 1e-12);
        }
    }

    #[test]
    fn corner_angles_sum_to_two_pi() {
        let g = build_genus2_group().unwrap();
        // interior angle at each corner of the regular octagon is pi/4;
        // measure the angle at V_0 between the two adjacent sides in the
        // hyperbolic metric (conformal, so the Euclidean angle between
        // tangent directions equals the hyperbolic angle).
        let v = g.corners[0];
        let d = 1e-6;
        let to_prev = hyp_interp(v, g.corners[7], d);
        let to_next = hyp_interp(v, g.corners[1], d);
        let a1 = (to_prev - v).arg();
        let a2 = (to_next - v).arg();
        let mut ang = (a1 - a2).abs();
        if ang > PI {
            ang = 2.0 * PI - ang;
        }
        assert!((ang - PI / 4.0).abs() < 1e-4, "corner angle {ang}");
    }
}
