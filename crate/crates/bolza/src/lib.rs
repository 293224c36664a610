//! Numerical laboratory for the joint moduli space of SL(n,C)-Higgs bundles
//! over Teichmueller space, discretized on the Bolza surface (genus 2).
//!
//! The crate builds a genus-2 hyperbolic surface as a fundamental octagon
//! with paired sides, represents automorphic tensor fields by quadratic
//! finite elements with automorphy-aware degree-of-freedom identification,
//! solves the Hitchin equations, and computes the deformation-theoretic
//! objects attached to a solution: the Simpson operators D', D'', harmonic
//! and semiharmonic tangent representatives, horizontal and isomonodromic
//! lifts, the section Theta, the hermitian forms h_s, the Hitchin map, and
//! the energy function along isomonodromic leaves.

pub mod error;
pub mod fields;
pub mod geom;
pub mod higgs;
pub mod linalg;

pub use error::{FieldError, GeomError, SolveError};
