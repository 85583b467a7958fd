//! Matrix elements of real powers `W^alpha` of infinite, sparse, bounded,
//! Hermitian matrices, approximated by finite sections with corner
//! corrections and certified by an a-priori bound.
//!
//! The pipeline for one element `(m, n)`:
//!
//! 1. [`truncate`] the infinite matrix to a window `[-P, Q]`,
//! 2. [`validate_truncation`] that its spectrum stays in `[c, w]`,
//! 3. take the element of the finite power ([`finite_power_element`]),
//! 4. compute the exactness depth ([`truncation_depth`]) and
//!    [`certify`] the value with the binomial tail bound.
//!
//! [`approximate_element`] repeats this on growing windows until the bound
//! drops below a tolerance.

pub mod certificate;
pub mod config;
pub mod driver;
pub mod error;
pub mod lattice;
pub mod matrix;
pub mod series;
pub mod spectral;

pub use certificate::{certify, full_series_sum, tail_bound, Certificate, CertificateRecord};
pub use driver::{
    approximate_element, convergence_table, evaluate_window, growth_schedule, local_solve,
    BoundaryPolicy, CornerBoundary, DriverLimits, SolveEntry, TableRow, ZeroBoundary,
};
pub use error::{Error, Result};
pub use lattice::{
    circulant_eigenvalues, circulant_power_element, dispersion_integral_element, lattice_spec,
    periodic_boundary, LatticeModelParams, PeriodicBoundary,
};
pub use matrix::{
    entry, truncate, validate_truncation, BoundarySpec, FiniteHermitian, InfiniteMatrixSpec,
    RowSource, SpectralEnvelope, ValidationReport, Window,
};
pub use series::{
    banded_depth_closed_form, integer_power_element, integer_power_element_with_budget,
    truncation_depth, TruncationDepth,
};
pub use spectral::{
    binomial_coefficient, finite_power, finite_power_element, finite_power_series,
    finite_power_with, PowerOptions,
};

pub use num_complex::Complex64;
