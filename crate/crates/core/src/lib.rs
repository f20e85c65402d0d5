//! Data-driven reconstruction of unknown inputs to discrete-time LTI MIMO
//! systems.
//!
//! The crate is organised bottom-up:
//!
//! * [`linalg`]: dense kernels (truncated pseudoinverse, nullspace bases,
//!   spectra) on top of `nalgebra`.
//! * [`lti`]: state-space models, simulation, model-based left inversion
//!   and invariant-zero analysis. Used both to generate data and as an
//!   oracle.
//! * [`hankel`]: block Hankel matrices, persistency of excitation and the
//!   past/future partitioning of offline data.
//! * [`estimator`]: the autoregressive input estimator built from Hankel
//!   data only, and its convergence certificate.

pub mod error;
pub mod estimator;
pub mod hankel;
pub mod linalg;
pub mod lti;

pub use error::{Error, Result};
pub use estimator::{
    build_gains, convergence_certificate, error_matrix, run, solve_constrained_ls, step,
    ConstrainedSolution, ConvergenceCertificate, EstimationRun, EstimatorDims, EstimatorGains,
    EstimatorState,
};
pub use hankel::{
    block_hankel, is_persistently_exciting, partition_data, require_persistent_excitation,
    HankelBundle,
};
pub use linalg::ToleranceSet;
pub use lti::{
    classify_zeros, invariant_zeros, simulate, ExampleSystem, InverseSystemModel, StateSpaceModel,
    Trajectory, ZeroCategory, ZeroClassification,
};

pub use nalgebra::{DMatrix, DVector};
pub use num_complex::Complex64;
