//! Higgs bundle states for SL(2,C) and SL(3,C): the configuration data
//! (holomorphic structure, Higgs field, hermitian metric), the Hitchin
//! equation solvers, energy, adjoints, the Hitchin map, the C*-action and
//! the simplicity check.

pub mod hym;
pub mod mat;
pub mod simplicity;
pub mod solve;
pub mod state;

pub use mat::Mat;
pub use simplicity::simplicity_check;
pub use solve::{
    energy, hitchin_map, hitchin_residual_norm, metric_values, solve_hitchin_diag,
    HitchinMapReport, SolveOpts,
};
pub use state::{BundleShape, HiggsState, MatrixField, MatrixKind, MetricField};
