//! Vacuum spectral measures, Cauchy transforms and spectra of the position
//! operator.

pub mod cauchy;
pub mod chebyshev;
pub mod measure;
pub mod spectrum;

pub use cauchy::{cauchy_cfrac, cauchy_cfrac_truncated, cauchy_hierarchy, cauchy_rational};
pub use measure::{
    jacobi_matrix, truncated_measure, truncated_measure_report, Atom, DiscreteMeasure, JacobiParams,
};
pub use spectrum::{spectrum_full, spectrum_truncated, verify_spectrum, SpectrumSet};
