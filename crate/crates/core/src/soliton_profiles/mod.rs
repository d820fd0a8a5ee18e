//! Rotating and self-similar soliton constructions.

mod build;
mod profile;
mod series;
mod self_similar;

pub use build::{build_rotated_rotator, build_singular_rotator, build_singular_rotator_with, SingularOptions};
pub use profile::{
    ode_residual, rotator_profile, rotator_profile_with, series_coefficients, ProfileSolution, DEFAULT_S0,
    SERIES_DEGREE,
};
pub use self_similar::{self_similar_residual_order, Polynomial, SelfSimilarOrder};
