//! Numerical and symbolic realization of truncated t-free Fock spaces.
//!
//! * [`fock`]: finite-window basis, the t-weighted inner product and the
//!   creation, annihilation, position and level-projection operators.
//! * [`wick`]: symbolic monomials, normal ordering, the shift-fixed-point
//!   conditional expectation and shift-invariant states.
//! * [`spectral`]: Chebyshev and Jacobi machinery, the vacuum measure,
//!   Cauchy transforms and spectra of the position operator.
//! * [`ergodic`]: Cesàro shift averages, norm estimates, mean-square limits
//!   and irreducibility checks.

pub mod ergodic;
pub mod error;
pub mod fock;
pub mod linalg;
pub mod spectral;
pub mod wick;

pub use error::{Error, Result};
pub use fock::{FockVector, FockWord, ModelParams, SparseOperator};
pub use num_complex::Complex64;
pub use wick::{Generator, Monomial, NormalForm};

/// Amplitudes below this magnitude are treated as structural zeros.
pub const PRUNE_EPS: f64 = 1e-14;
