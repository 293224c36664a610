//! Sparse and small-dense linear algebra used by the field calculus.

pub mod dense;
pub mod eig;
pub mod ldl;
pub mod sparse;
pub mod subspace;

pub use dense::{hermitian_eigen, CMat};
pub use eig::{lobpcg_smallest, EigOptions, EigResult};
pub use ldl::{cg_solve, LdlFactor};
pub use sparse::{Csr, Triplets};
pub use subspace::smallest_eigs;
