//! Moebius transformations of the unit disk, stored as SL(2,C) matrices.
//!
//! A disk automorphism is represented by a matrix with unit determinant so
//! that derivatives have the closed form gamma'(z) = 1/(c z + d)^2 and the
//! square root branch sqrt(gamma') = +-1/(c z + d) is globally consistent.
//! The sign of the matrix lift is meaningful: it encodes the spin structure
//! used for half-integer automorphy weights.

use num_complex::Complex64;

pub type C = Complex64;

/// Moebius map z -> (a z + b) / (c z + d) with a d - b c = 1.
#[derive(Clone, Copy, Debug)]
pub struct MoebiusMap {
    pub a: C,
    pub b: C,
    pub c: C,
    pub d: C,
}

impl MoebiusMap {
    pub fn identity() -> Self {
        Self {
            a: C::new(1.0, 0.0),
            b: C::new(0.0, 0.0),
            c: C::new(0.0, 0.0),
            d: C::new(1.0, 0.0),
        }
    }

    /// Normalize so det = 1. Chooses the root with Re >= 0 (ties by Im >= 0).
    pub fn normalized(a: C, b: C, c: C, d: C) -> Self {
        let det = a * d - b * c;
        let mut s = det.sqrt();
        if s.re < 0.0 || (s.re == 0.0 && s.im < 0.0) {
            s = -s;
        }
        Self {
            a: a / s,
            b: b / s,
            c: c / s,
            d: d / s,
        }
    }

    /// Hyperbolic translation along the diameter in direction angle `phi`
    /// by hyperbolic length `len` (positive direction e^{i phi}).
    pub fn translation(phi: f64, len: f64) -> Self {
        let ch = (len / 2.0).cosh();
        let sh = (len / 2.0).sinh();
        let e = C::from_polar(1.0, phi);
        // R_phi * [[ch, sh], [sh, ch]] * R_phi^{-1} with R_phi = diag(e^{i phi/2}, e^{-i phi/2})
        Self {
            a: C::new(ch, 0.0),
            b: sh * e,
            c: sh * e.conj(),
            d: C::new(ch, 0.0),
        }
    }

    pub fn apply(&self, z: C) -> C {
        (self.a * z + self.b) / (self.c * z + self.d)
    }

    /// Derivative gamma'(z) = 1/(c z + d)^2.
    pub fn deriv(&self, z: C) -> C {
        let w = self.c * z + self.d;
        1.0 / (w * w)
    }

    /// The canonical square root of the derivative fixed by the matrix lift:
    /// sqrt(gamma')(z) = 1/(c z + d). Flipping the lift sign flips this branch.
    pub fn sqrt_deriv(&self, z: C) -> C {
        1.0 / (self.c * z + self.d)
    }

    pub fn det(&self) -> C {
        self.a * self.d - self.b * self.c
    }

    pub fn inverse(&self) -> Self {
        // inverse of det-1 matrix [[a,b],[c,d]] is [[d,-b],[-c,a]]
        Self {
            a: self.d,
            b: -self.b,
            c: -self.c,
            d: self.a,
        }
    }

    /// Matrix lift negation (same disk map, opposite spin branch).
    pub fn neg(&self) -> Self {
        Self {
            a: -self.a,
            b: -self.b,
            c: -self.c,
            d: -self.d,
        }
    }

    pub fn compose(&self, other: &Self) -> Self {
        // (self o other)(z) = self(other(z))
        Self {
            a: self.a * other.a + self.b * other.c,
            b: self.a * other.b + self.b * other.d,
            c: self.c * other.a + self.d * other.c,
            d: self.c * other.b + self.d * other.d,
        }
    }

    pub fn trace(&self) -> C {
        self.a + self.d
    }

    /// Frobenius distance of the underlying matrix to +-identity (PSL distance).
    pub fn dist_to_identity(&self) -> f64 {
        let one = C::new(1.0, 0.0);
        let dp = (self.a - one).norm_sqr()
            + self.b.norm_sqr()
            + self.c.norm_sqr()
            + (self.d - one).norm_sqr();
        let dm = (self.a + one).norm_sqr()
            + self.b.norm_sqr()
            + self.c.norm_sqr()
            + (self.d + one).norm_sqr();
        dp.min(dm).sqrt()
    }

    /// Distance to +identity in the matrix lift (spin-sensitive).
    pub fn lift_dist_to_identity(&self) -> f64 {
        let one = C::new(1.0, 0.0);
        ((self.a - one).norm_sqr()
            + self.b.norm_sqr()
            + self.c.norm_sqr()
            + (self.d - one).norm_sqr())
        .sqrt()
    }

    /// Hyperbolic translation length 2 arccosh(|tr|/2) for a hyperbolic element.
    pub fn translation_length(&self) -> f64 {
        let t = self.trace().norm() / 2.0;
        if t <= 1.0 {
            0.0
        } else {
            2.0 * t.acosh()
        }
    }
}

/// Hyperbolic distance between two points of the unit disk.
pub fn hyp_dist(z: C, w: C) -> f64 {
    let num = (z - w).norm();
    let den = (1.0 - (z * w.conj()).norm_sqr()).max(f64::EPSILON);
    let q = (z - w).norm_sqr() / ((1.0 - z.norm_sqr()) * (1.0 - w.norm_sqr()));
    let _ = (num, den);
    2.0 * q.sqrt().asinh()
}

/// Hyperbolic midpoint of z and w.
///
/// Implemented by moving z to the origin with T(u) = (u - z)/(1 - conj(z) u),
/// halving the radial coordinate in hyperbolic length, and mapping back.
/// The formula commutes exactly with u -> -u in IEEE arithmetic, which the
/// mesher relies on for exact boundary pairing.
pub fn hyp_midpoint(z: C, w: C) -> C {
    let t = (w - z) / (1.0 - z.conj() * w);
    let r = t.norm();
    if r == 0.0 {
        return z;
    }
    // half the hyperbolic distance from 0 to r: tanh(atanh(r)/2)
    let half = (r.atanh() / 2.0).tanh();
    let t2 = t * (half / r);
    (t2 + z) / (1.0 + z.conj() * t2)
}

/// Point at parameter s in [0,1] along the geodesic from z to w.
pub fn hyp_interp(z: C, w: C, s: f64) -> C {
    let t = (w - z) / (1.0 - z.conj() * w);
    let r = t.norm();
    if r == 0.0 {
        return z;
    }
    let part = (r.atanh() * s).tanh();
    let t2 = t * (part / r);
    (t2 + z) / (1.0 + z.conj() * t2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn translation_moves_origin() {
        let g = MoebiusMap::translation(0.0, 1.0);
        let img = g.apply(C::new(0.0, 0.0));
        assert!((img.re - (0.5f64).tanh()).abs() < 1e-14);
        assert!(img.im.abs() < 1e-15);
        assert!((g.det() - C::new(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn midpoint_is_equidistant() {
        let z = C::new(0.3, 0.1);
        let w = C::new(-0.2, 0.4);
        let m = hyp_midpoint(z, w);
        let d1 = hyp_dist(z, m);
        let d2 = hyp_dist(m, w);
        assert!((d1 - d2).abs() < 1e-12, "{d1} vs {d2}");
    }

    #[test]
    fn midpoint_odd_symmetry_exact() {
        let z = C::new(0.312, -0.177);
        let w = C::new(-0.205, 0.441);
        let m1 = hyp_midpoint(z, w);
        let m2 = hyp_midpoint(-z, -w);
        assert_eq!(m1.re, -m2.re);
        assert_eq!(m1.im, -m2.im);
    }

    #[test]
    fn deriv_matches_finite_difference() {
        let g = MoebiusMap::translation(0.7, 1.3);
        let z = C::new(0.2, -0.3);
        let h = 1e-6;
        let fd = (g.apply(z + C::new(h, 0.0)) - g.apply(z - C::new(h, 0.0))) / (2.0 * h);
        assert!((fd - g.deriv(z)).norm() < 1e-9);
        let s = g.sqrt_deriv(z);
        assert!((s * s - g.deriv(z)).norm() < 1e-14);
    }
}
