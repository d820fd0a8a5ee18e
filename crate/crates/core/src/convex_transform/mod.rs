//! Discrete Legendre–Fenchel transform, convex envelopes and the pi/4 rotation
//! of convex potentials.

mod envelope;
mod legendre;
mod rotation;

pub use envelope::{convex_envelope, convexity_check, convexity_check_where, ConvexityReport};
pub use legendre::{
    check_dual_covers, conjugate_at, conjugate_brute, conjugate_with_argmax, covering_dual_spec,
    legendre_transform, legendre_transform_brute, refine_conjugate, refined_conjugate, slope_range,
    Conjugate,
};
pub(crate) use legendre::refined_conjugate_inside;
pub use rotation::{
    auxiliary_potential, common_nodes, inverse_rotate, inverse_rotate_with, lewy_yuan_rotate,
    lewy_yuan_rotate_with, rotated_auxiliary, InverseOptions, RotateOptions, RotatedPotential, COS,
    SIN,
};
