use std::f64::consts::FRAC_PI_4;

use rayon::prelude::*;

use super::stencil::central_angle_at;
use crate::convex_transform::{lewy_yuan_rotate, COS, SIN};
use crate::error::{Error, Result};
use crate::grid_core::GridFunction;
use crate::phase_models::{eval_phase, PhaseSpec};

/// Rotates `u` and returns the residual of the rotated equation on the rotated grid.
pub fn rotated_equation_residual(u: &GridFunction, spec: &PhaseSpec) -> Result<GridFunction> {
    spec.validate(u.dim())?;
    let r = lewy_yuan_rotate(u)?;
    rotated_residual_field(&r.grid, spec)
}

/// Residual of `sum arctan(lambda(D^2 ubar)) = psi(x, u, y) - n pi/4` where
/// `x = c xbar - s Dubar`, `y = s xbar + c Dubar` and `u` is recovered from `ubar`.
pub fn rotated_residual_field(ubar: &GridFunction, spec: &PhaseSpec) -> Result<GridFunction> {
    spec.validate(ubar.dim())?;
    rotated_residual_field_with(ubar, |x, u, y| eval_phase(spec, x, u, y))
}

pub fn rotated_residual_field_with<F>(ubar: &GridFunction, phase: F) -> Result<GridFunction>
where
    F: Fn(&[f64], f64, &[f64]) -> Result<f64> + Sync,
{
    let grid = ubar.spec();
    let n = grid.dim();
    let shift = n as f64 * FRAC_PI_4;
    let values = (0..grid.len())
        .into_par_iter()
        .map(|j| {
            let idx = grid.multi_index(j);
            if !grid.is_interior(&idx, 1) {
                return Ok(0.0);
            }
            let mut g = [0.0f64; 4];
            let angle = central_angle_at(ubar, j, &mut g[..n]);
            let xb = grid.point(&idx);
            let x: Vec<f64> = (0..n).map(|a| COS * xb[a] - SIN * g[a]).collect();
            let y: Vec<f64> = (0..n).map(|a| SIN * xb[a] + COS * g[a]).collect();
            let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(s, t)| s * t).sum::<f64>();
            let u = (dot(&x, &xb) - 0.5 * COS * dot(&xb, &xb) + SIN * ubar.at_flat(j) - 0.5 * COS * dot(&x, &x)) / SIN;
            Ok(angle - (phase(&x, u, &y)? - shift))
        })
        .collect::<Result<Vec<f64>>>()?;
    GridFunction::new(grid.clone(), values).map_err(|_| Error::BlowUp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid_core::GridSpec;
    use crate::viscosity_solver::sup_where;

    #[test]
    fn half_square_rotates_to_zero() {
        for n in 1..=3 {
            let g = GridSpec::centered(n, 1.0, if n == 3 { 15 } else { 31 }).unwrap();
            let u = GridFunction::from_fn(g, |x| 0.5 * x.iter().map(|v| v * v).sum::<f64>()).unwrap();
            let c = n as f64 * FRAC_PI_4;
            let r = rotated_equation_residual(&u, &PhaseSpec::constant(c).unwrap()).unwrap();
            assert!(sup_where(&r, |_| true) < 1e-10, "n = {n}");
        }
    }

    #[test]
    fn recovers_primal_value_and_point() {
        // u = x^2 (1D): U = s x^2 + c x^2/2, ubar is quadratic with known second derivative
        let g = GridSpec::centered(1, 1.0, 41).unwrap();
        let u = GridFunction::from_fn(g, |x| x[0] * x[0]).unwrap();
        let r = crate::convex_transform::lewy_yuan_rotate(&u).unwrap();
        let res = rotated_residual_field_with(&r.grid, |x, v, y| {
            assert!((v - x[0] * x[0]).abs() < 1e-8, "u({}) = {v}", x[0]);
            assert!((y[0] - 2.0 * x[0]).abs() < 1e-8);
            Ok(2f64.atan())
        })
        .unwrap();
        assert!(sup_where(&res, |_| true) < 1e-8);
    }
}
