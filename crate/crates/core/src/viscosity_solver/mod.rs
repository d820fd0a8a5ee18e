//! Dirichlet problems for `sum_i arctan(lambda_i(D^2 u)) = psi(x, u, Du)` by explicit
//! parabolic relaxation `u_t = sum_i arctan(lambda_i) - psi`.

mod rotated;
mod stencil;

pub use rotated::{rotated_equation_residual, rotated_residual_field, rotated_residual_field_with};
pub use stencil::{Stencil, WideStencil};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid_core::{GridFunction, GridSpec};
use crate::phase_models::{eval_phase, PhaseSpec};
use stencil::central_angle_at;

#[derive(Debug, Clone, PartialEq)]
pub struct SolveParams {
    pub dt: f64,
    pub max_iters: usize,
    /// Stop when the sup-norm update of one step is at most this.
    pub tol: f64,
    pub stencil: Stencil,
}

impl SolveParams {
    /// `dt = h^2 / (4n)`, central stencil.
    pub fn for_grid(spec: &GridSpec) -> Self {
        Self { dt: default_dt(spec), max_iters: 200_000, tol: 1e-10, stencil: Stencil::Central }
    }

    /// Rejects a non-positive `dt`, a `dt` above `h^2 / (2n)`, and a stencil of the wrong dimension.
    pub fn validate(&self, spec: &GridSpec) -> Result<()> {
        let bound = stability_bound(spec);
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParams(format!("dt must be positive, got {}", self.dt)));
        }
        if self.dt > bound * (1.0 + 1e-12) {
            return Err(Error::InvalidParams(format!(
                "dt = {} exceeds the explicit stability bound h^2/(2n) = {bound}",
                self.dt
            )));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidParams(format!("tol must be positive, got {}", self.tol)));
        }
        if let Stencil::Wide(w) = &self.stencil {
            if w.dim() != spec.dim() {
                return Err(Error::DimensionMismatch { expected: spec.dim(), got: w.dim() });
            }
        }
        Ok(())
    }
}

pub fn default_dt(spec: &GridSpec) -> f64 {
    0.5 * stability_bound(spec)
}

/// `h^2 / (2n)`.
pub fn stability_bound(spec: &GridSpec) -> f64 {
    spec.spacing() * spec.spacing() / (2.0 * spec.dim() as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub iterations: usize,
    pub final_update: f64,
    /// Sup of the residual over the updated (interior) nodes.
    pub residual_sup: f64,
    pub converged: bool,
}

/// Angle minus phase at interior nodes, zero on the boundary.
pub fn residual_field(u: &GridFunction, spec: &PhaseSpec) -> Result<GridFunction> {
    residual_field_stencil(u, spec, &Stencil::Central)
}

pub fn residual_field_stencil(u: &GridFunction, spec: &PhaseSpec, stencil: &Stencil) -> Result<GridFunction> {
    spec.validate(u.dim())?;
    residual_field_with(u, stencil, |x, v, p| eval_phase(spec, x, v, p))
}

/// Residual against an arbitrary right-hand side `phase(x, u, p)`.
pub fn residual_field_with<F>(u: &GridFunction, stencil: &Stencil, phase: F) -> Result<GridFunction>
where
    F: Fn(&[f64], f64, &[f64]) -> Result<f64> + Sync,
{
    let plan = Plan::new(u.spec());
    let res = plan.residuals(u, stencil, &phase)?;
    let mut values = vec![0.0; u.spec().len()];
    for (k, &j) in plan.nodes.iter().enumerate() {
        values[j] = res[k];
    }
    GridFunction::new(u.spec().clone(), values).map_err(|_| Error::BlowUp)
}

/// Interior nodes and their coordinates, computed once per grid.
struct Plan {
    n: usize,
    nodes: Vec<usize>,
    points: Vec<f64>,
}

impl Plan {
    fn new(spec: &GridSpec) -> Self {
        let nodes = spec.interior_indices(1);
        let points = nodes.iter().flat_map(|&j| spec.point_of(j)).collect();
        Self { n: spec.dim(), nodes, points }
    }

    fn residuals<F>(&self, u: &GridFunction, stencil: &Stencil, phase: &F) -> Result<Vec<f64>>
    where
        F: Fn(&[f64], f64, &[f64]) -> Result<f64> + Sync,
    {
        let n = self.n;
        self.nodes
            .par_iter()
            .enumerate()
            .map(|(k, &j)| {
                let mut grad = [0.0f64; 4];
                let central = central_angle_at(u, j, &mut grad[..n]);
                let angle = match stencil {
                    Stencil::Central => central,
                    Stencil::Wide(w) => w.angle_at(u, j),
                };
                Ok(angle - phase(&self.points[k * n..(k + 1) * n], u.at_flat(j), &grad[..n])?)
            })
            .collect()
    }

    /// One explicit step; returns the new field and its sup-norm update.
    fn step<F>(&self, u: &GridFunction, params: &SolveParams, phase: &F) -> Result<(GridFunction, f64)>
    where
        F: Fn(&[f64], f64, &[f64]) -> Result<f64> + Sync,
    {
        let res = self.residuals(u, &params.stencil, phase)?;
        let mut values = u.values().to_vec();
        let mut update = 0.0f64;
        for (k, &j) in self.nodes.iter().enumerate() {
            let d = params.dt * res[k];
            if !d.is_finite() {
                return Err(Error::BlowUp);
            }
            values[j] += d;
            update = update.max(d.abs());
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::BlowUp);
        }
        Ok((GridFunction::new(u.spec().clone(), values)?, update))
    }
}

/// One explicit step `u + dt * residual` on interior nodes.
pub fn flow_step(u: &GridFunction, spec: &PhaseSpec, params: &SolveParams) -> Result<GridFunction> {
    params.validate(u.spec())?;
    spec.validate(u.dim())?;
    let plan = Plan::new(u.spec());
    plan.step(u, params, &|x: &[f64], v: f64, p: &[f64]| eval_phase(spec, x, v, p)).map(|(next, _)| next)
}

/// Relaxes `initial` to a steady state with the boundary values of `boundary`.
///
/// The boundary nodes of `initial` are overwritten with those of `boundary`.
/// Running out of iterations is reported through `converged = false`.
pub fn solve_dirichlet(
    boundary: &GridFunction,
    initial: &GridFunction,
    spec: &PhaseSpec,
    params: &SolveParams,
) -> Result<(GridFunction, SolveReport)> {
    spec.validate(boundary.dim())?;
    solve_dirichlet_with(boundary, initial, params, |x, v, p| eval_phase(spec, x, v, p))
}

pub fn solve_dirichlet_with<F>(
    boundary: &GridFunction,
    initial: &GridFunction,
    params: &SolveParams,
    phase: F,
) -> Result<(GridFunction, SolveReport)>
where
    F: Fn(&[f64], f64, &[f64]) -> Result<f64> + Sync,
{
    let grid = boundary.spec();
    if !grid.same_shape(initial.spec()) {
        return Err(Error::InvalidGrid("initial guess and boundary data live on different grids".into()));
    }
    params.validate(grid)?;
    let mut values = initial.values().to_vec();
    for (j, v) in values.iter_mut().enumerate() {
        if grid.is_boundary(&grid.multi_index(j)) {
            *v = boundary.at_flat(j);
        }
    }
    let mut u = GridFunction::new(grid.clone(), values)?;
    let plan = Plan::new(grid);
    let mut report = SolveReport { iterations: 0, final_update: f64::INFINITY, residual_sup: f64::NAN, converged: false };
    while report.iterations < params.max_iters {
        let (next, update) = plan.step(&u, params, &phase)?;
        u = next;
        report.iterations += 1;
        report.final_update = update;
        if update <= params.tol {
            report.converged = true;
            break;
        }
    }
    let res = residual_field_with(&u, &params.stencil, &phase)?;
    report.residual_sup = sup_where(&res, |_| true);
    Ok((u, report))
}

/// Sup of `|f|` over interior nodes whose point satisfies `keep`.
pub fn sup_where(f: &GridFunction, keep: impl Fn(&[f64]) -> bool) -> f64 {
    let spec = f.spec();
    spec.interior_indices(1)
        .into_iter()
        .filter(|&j| keep(&spec.point_of(j)))
        .fold(0.0f64, |m, j| m.max(f.at_flat(j).abs()))
}

/// Sup of `|f|` over interior nodes at distance at least `radius` from the origin.
pub fn sup_outside(f: &GridFunction, radius: f64) -> f64 {
    sup_where(f, |x| x.iter().map(|v| v * v).sum::<f64>().sqrt() >= radius)
}
