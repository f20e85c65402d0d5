//! State-space models, simulation and model-based left inversion.
//!
//! These routines generate the truth data used by experiments and act as
//! an oracle for the data-driven estimator in [`crate::estimator`].

mod inversion;
mod model;
mod systems;
mod zeros;

pub use inversion::{
    inherent_delay, inverse_system, invertibility_matrix, left_inverse_gain,
    model_based_reconstruct, observability_matrix, output_nulling_gain,
    stacked_output_identity_check, stacked_output_residual, strong_observability_check,
    strong_observability_delay, InverseSystemModel,
};
pub use model::{simulate, StateSpaceModel, Trajectory};
pub use systems::ExampleSystem;
pub use zeros::{
    classify_zeros, classify_zeros_with, invariant_zeros, invariant_zeros_with, is_minimal,
    rosenbrock_min_singular_value, ZeroCategory, ZeroClassification, ZeroOptions,
};
