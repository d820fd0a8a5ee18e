//! Numerical machinery for Lagrangian mean curvature type potential equations
//! `sum_i arctan(lambda_i(D^2 u)) = psi(x, u, Du)`.

pub mod error;
pub mod convex_transform;
pub mod diagnostics;
pub mod grid_core;
pub mod phase_models;
pub mod soliton_profiles;
pub mod verify;
pub mod viscosity_solver;

pub use error::{Error, ErrorKind, Result};
pub use grid_core::{GridFunction, GridSpec, Spectrum, SymmetricMatrix};
pub use phase_models::{eval_phase, PhaseSpec, PhaseTable};
