//! Error types shared across the crate.

use thiserror::Error;

#[derive(Error, Debug)]
pub enum GeomError {
    #[error("construction failure: {0}")]
    Construction(String),
    #[error("mesh degeneracy: {0}")]
    MeshDegeneracy(String),
    #[error("io failure: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse failure: {0}")]
    Parse(String),
}

#[derive(Error, Debug)]
pub enum FieldError {
    #[error("weight mismatch: expected {expected}, got {got}")]
    WeightMismatch { expected: String, got: String },
    #[error("no singular-value gap >= {required:.1e} separating kernel candidates (got {got:.3e})")]
    GapFailure { required: f64, got: f64 },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

#[derive(Error, Debug)]
pub enum SolveError {
    #[error("linear solver failure: {0}")]
    Linear(String),
    #[error("nonconvergence after {iters} iterations (residual {residual:.3e})")]
    NonConvergence { iters: usize, residual: f64 },
    #[error("positivity loss during line search")]
    PositivityLoss,
    #[error("state is not simple (endomorphism kernel dimension {dim})")]
    SimplicityFailure { dim: usize },
    #[error("solver singularity: {0}")]
    Singularity(String),
    #[error("stale operator: state changed after assembly")]
    StaleOperator,
    #[error("representative violates semiharmonicity beyond tolerance ({0:.3e})")]
    RepresentativeViolation(f64),
    #[error("domain violation: {0}")]
    DomainViolation(String),
    #[error("open path: loop fails to close combinatorially")]
    OpenPath,
    #[error("noise domination in finite-difference stencil ({0:.3e})")]
    NoiseDomination(f64),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Geom(#[from] GeomError),
}
