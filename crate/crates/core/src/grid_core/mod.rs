//! Uniform grids, finite differences, small symmetric eigenproblems and the
//! Lagrangian angle operator.

mod csv;
mod grid;
mod stencil;
mod symmetric;

pub use csv::{
    fmt_f64, grid_header, grid_to_string, parse_grid, parse_grid_header, parse_grid_lines,
    parse_kv_tokens, read_grid_file, write_grid, write_grid_file, GridDocument,
};
pub use grid::{GridFunction, GridSpec, MAX_DIM, MIN_POINTS};
pub use stencil::{gradient_central, hessian_central};
pub(crate) use stencil::{gradient_at_flat, hessian_at_flat};
pub use symmetric::{eigen_sym, eigenvalues, lagrangian_angle, Spectrum, SymmetricMatrix};
