use super::profile::ProfileSolution;
use crate::convex_transform::{inverse_rotate_with, rotated_auxiliary, slope_range, InverseOptions, RotatedPotential};
use crate::error::{Error, Result};
use crate::grid_core::{GridFunction, GridSpec};

fn half_norm2(x: &[f64]) -> f64 {
    0.5 * x.iter().map(|v| v * v).sum::<f64>()
}

/// `ubar(xbar) = f(|xbar|^2 / 2)` on `grid`.
pub fn build_rotated_rotator(p: &ProfileSolution, grid: &GridSpec) -> Result<GridFunction> {
    let corner: Vec<f64> = (0..grid.dim()).map(|a| grid.lo()[a].abs().max(grid.hi(a).abs())).collect();
    let need = half_norm2(&corner);
    if need > p.s_max() * (1.0 + 1e-12) {
        return Err(Error::OutOfProfileRange { needed: need, available: p.s_max() });
    }
    let values = (0..grid.len())
        .map(|j| p.eval(half_norm2(&grid.point_of(j))).map(|t| t.0))
        .collect::<Result<Vec<f64>>>()?;
    GridFunction::new(grid.clone(), values)
}

#[derive(Debug, Clone)]
pub struct SingularOptions {
    /// Nodes per axis of the primal grid; defaults to the rotated grid's.
    pub primal_points: Option<usize>,
    /// Rotated nodes within this many spacings of the origin skip the strict-convexity test.
    pub exclude_cells: f64,
}

impl Default for SingularOptions {
    fn default() -> Self {
        Self { primal_points: None, exclude_cells: 0.5 }
    }
}

/// Primal potential `u` of the rotator whose rotated profile is `p`, via the inverse rotation.
pub fn build_singular_rotator(p: &ProfileSolution, grid: &GridSpec) -> Result<GridFunction> {
    build_singular_rotator_with(p, grid, &SingularOptions::default())
}

pub fn build_singular_rotator_with(p: &ProfileSolution, grid: &GridSpec, opts: &SingularOptions) -> Result<GridFunction> {
    if p.a >= 0.0 {
        return Err(Error::UnsupportedSign(p.a));
    }
    if p.n != grid.dim() {
        return Err(Error::DimensionMismatch { expected: p.n, got: grid.dim() });
    }
    let ubar = build_rotated_rotator(p, grid)?;
    let width = slope_range(&rotated_auxiliary(&ubar))
        .iter()
        .map(|(lo, hi)| hi - lo)
        .fold(0.0f64, f64::max);
    let m = opts.primal_points.unwrap_or(grid.points_per_axis());
    if m < 6 {
        return Err(Error::InvalidParams(format!("primal grid needs at least 6 points, got {m}")));
    }
    // covering_dual_spec pads two cells per side
    let hp = width / (m - 5) as f64;
    let r = RotatedPotential { points: Vec::new(), values: Vec::new(), grid: ubar };
    let inv = InverseOptions {
        floor: Some(0.0),
        exclude_radius: opts.exclude_cells * grid.spacing(),
        primal_spacing: Some(hp),
    };
    inverse_rotate_with(&r, &inv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convex_transform::{auxiliary_potential, convexity_check_where};
    use crate::phase_models::PhaseSpec;
    use crate::soliton_profiles::rotator_profile;
    use crate::viscosity_solver::{rotated_residual_field, sup_where};
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn flat_profile_gives_half_square() {
        let p = rotator_profile(2, 0.0, 0.25, 50).unwrap();
        let g = GridSpec::centered(2, 0.5, 21).unwrap();
        let ubar = build_rotated_rotator(&p, &g).unwrap();
        let phase = PhaseSpec::rotator(2.0 * FRAC_PI_2, 0.0).unwrap();
        let res = rotated_residual_field(&ubar, &phase).unwrap();
        assert!(sup_where(&res, |_| true) < 1e-10);
    }

    #[test]
    fn out_of_range_grid() {
        let p = rotator_profile(2, -0.5, 0.125, 50).unwrap();
        let g = GridSpec::centered(2, 0.5, 21).unwrap();
        assert!(matches!(build_rotated_rotator(&p, &g), Err(Error::OutOfProfileRange { .. })));
    }

    #[test]
    fn rotated_residual_is_small() {
        let (n, a) = (2usize, -0.5);
        let p = rotator_profile(n, a, 0.25, 2000).unwrap();
        let phase = PhaseSpec::rotator(n as f64 * FRAC_PI_2, a).unwrap();
        let mut prev = f64::INFINITY;
        for m in [21, 41] {
            let g = GridSpec::centered(n, 0.5, m).unwrap();
            let res = rotated_residual_field(&build_rotated_rotator(&p, &g).unwrap(), &phase).unwrap();
            let sup = sup_where(&res, |_| true);
            assert!(sup < 0.05 * g.spacing(), "m = {m}: {sup}");
            assert!(sup < prev);
            prev = sup;
        }
    }

    #[test]
    fn singular_rotator_is_convex_and_flat_at_origin() {
        let p = rotator_profile(1, -1.0, 0.125, 2000).unwrap();
        let g = GridSpec::centered(1, 0.3, 121).unwrap();
        let u = build_singular_rotator(&p, &g).unwrap();
        let big = auxiliary_potential(&u);
        let rep = convexity_check_where(&big, 1e-9, |_| true);
        assert!(rep.passes, "{rep:?}");
        assert!(u.spec().contains(&[0.0], 0.0));
    }
}
