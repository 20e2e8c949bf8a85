//! Deterministic linear algebra, quadrature and random streams shared by the
//! analysis modules.
//!
//! Everything here is single-threaded and reproducible: the same inputs give
//! bitwise-identical outputs regardless of how callers schedule work.

mod cg;
mod dense;
mod profile;
mod quadrature;
mod random;
mod sum;

pub use cg::{conjugate_gradient, CgOutcome, SymmetricOperator};
pub use dense::{
    inverse_spd, min_eigen_spd, rayleigh, solve_spd, symmetric_eigen, Cholesky, DenseMatrix,
};
pub use profile::{ProfileCholesky, ProfileMatrix};
pub use quadrature::{integrate, Integral};
pub use random::{normal_samples, RandomSource};
pub use sum::{neumaier_sum, NeumaierSum};
