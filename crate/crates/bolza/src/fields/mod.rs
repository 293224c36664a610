//! Automorphic weighted fields and their operator calculus.

pub mod dof;
pub mod field;
pub mod ops;
pub mod space;

pub use dof::{aut_factor, DofMap, Weight};
pub use field::WeightedField;
pub use ops::{
    dbar, dbar_adj, dbar_kernel, del_cov, del_cov_form, gram_schmidt, harmonic_beltrami_basis,
    holomorphic_basis, holomorphic_basis_with_gap, kaehler_residual, lambda_contract, KernelReport,
};
pub use space::Fem;
