use std::f64::consts::FRAC_PI_2;

use super::{eval_phase, PhaseSpec};
use crate::error::{Error, Result};
use crate::grid_core::{eigen_sym, hessian_at_flat, GridFunction, GridSpec};

#[derive(Debug, Clone)]
pub struct ConvexityOptions {
    /// Fixed tolerance; `None` means `1e-8 + c_h2 * h^2`.
    pub tol: Option<f64>,
    pub c_h2: f64,
    /// Only nodes with `r_min <= |p| <= r_max` are tested.
    pub p_radius: Option<(f64, f64)>,
}

impl Default for ConvexityOptions {
    fn default() -> Self {
        Self { tol: None, c_h2: 1.0, p_radius: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PartialConvexityReport {
    pub min_eigenvalue: f64,
    /// Sample index and gradient where the minimum occurs.
    pub worst_sample: usize,
    pub worst_p: Vec<f64>,
    pub nodes_checked: usize,
    pub tol: f64,
    pub passes: bool,
}

/// Convexity of `p -> psi(x, u, p)` for each frozen sample `(x, u)`, by finite
/// differences on the interior nodes of `p_grid`.
pub fn partial_convexity_check(
    spec: &PhaseSpec,
    samples: &[(Vec<f64>, f64)],
    p_grid: &GridSpec,
) -> Result<PartialConvexityReport> {
    partial_convexity_check_with(spec, samples, p_grid, &ConvexityOptions::default())
}

pub fn partial_convexity_check_with(
    spec: &PhaseSpec,
    samples: &[(Vec<f64>, f64)],
    p_grid: &GridSpec,
    opts: &ConvexityOptions,
) -> Result<PartialConvexityReport> {
    let n = p_grid.dim();
    let h = p_grid.spacing();
    let tol = opts.tol.unwrap_or(1e-8 + opts.c_h2 * h * h);
    let centers: Vec<usize> = p_grid
        .interior_indices(1)
        .into_iter()
        .filter(|&j| match opts.p_radius {
            Some((lo, hi)) => {
                let r = p_grid.point_of(j).iter().map(|v| v * v).sum::<f64>().sqrt();
                r >= lo && r <= hi
            }
            None => true,
        })
        .collect();
    let mut report = PartialConvexityReport {
        min_eigenvalue: f64::INFINITY,
        worst_sample: 0,
        worst_p: vec![0.0; n],
        nodes_checked: 0,
        tol,
        passes: true,
    };
    for (s, (x, u)) in samples.iter().enumerate() {
        if x.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: x.len() });
        }
        let mut vals = Vec::with_capacity(p_grid.len());
        for j in 0..p_grid.len() {
            vals.push(eval_phase(spec, x, *u, &p_grid.point_of(j))?);
        }
        let psi = GridFunction::new(p_grid.clone(), vals)?;
        for &j in &centers {
            let lam = eigen_sym(&hessian_at_flat(&psi, j))?.min();
            report.nodes_checked += 1;
            if lam < report.min_eigenvalue {
                report.min_eigenvalue = lam;
                report.worst_sample = s;
                report.worst_p = p_grid.point_of(j);
            }
        }
    }
    report.passes = report.nodes_checked > 0 && report.min_eigenvalue >= -tol;
    Ok(report)
}

/// A point `(x, u, p)` at which to evaluate a phase.
#[derive(Debug, Clone, PartialEq)]
pub struct PhasePoint {
    pub x: Vec<f64>,
    pub u: f64,
    pub p: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseRangeReport {
    pub min: f64,
    pub max: f64,
    /// `n pi/2`.
    pub upper: f64,
    pub below: usize,
    pub above: usize,
    pub in_range: bool,
}

/// Min and max of `psi` over the samples against `[0, n pi/2]`.
pub fn phase_range_check(spec: &PhaseSpec, points: &[PhasePoint]) -> Result<PhaseRangeReport> {
    let n = points.first().map_or(0, |p| p.x.len());
    let upper = n as f64 * FRAC_PI_2;
    let mut r = PhaseRangeReport {
        min: f64::INFINITY,
        max: f64::NEG_INFINITY,
        upper,
        below: 0,
        above: 0,
        in_range: true,
    };
    let slack = 1e-12 * (1.0 + upper);
    for pt in points {
        let v = eval_phase(spec, &pt.x, pt.u, &pt.p)?;
        r.min = r.min.min(v);
        r.max = r.max.max(v);
        if v < -slack {
            r.below += 1;
        }
        if v > upper + slack {
            r.above += 1;
        }
    }
    r.in_range = r.below == 0 && r.above == 0;
    Ok(r)
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|t| t * t).sum::<f64>().sqrt()
}

/// Lipschitz constant of `(x, u, p) -> psi` on `|x|, |u|, |p| <= radius`
/// (Euclidean in the joint variable), restricted to `|p| >= p_min` for the
/// singular family. Infinite when no finite bound holds.
pub fn lipschitz_bound(spec: &PhaseSpec, radius: f64, p_min: f64) -> f64 {
    match spec {
        PhaseSpec::Constant { .. } => 0.0,
        PhaseSpec::SelfSimilar { b, .. } => b.abs() * (2.0 * radius * radius + 4.0).sqrt(),
        PhaseSpec::Translator { k, l, .. } => (norm(k).powi(2) + norm(l).powi(2)).sqrt(),
        PhaseSpec::Rotator { a, .. } => a.abs() * radius * 2f64.sqrt(),
        PhaseSpec::SingularFamily { n, beta } => {
            if p_min <= 0.0 {
                return f64::INFINITY;
            }
            let q = 1.0 / beta - 1.0;
            let hi = radius.max(p_min);
            // d/dr arctan(c r^q) = c q r^(q-1) / (1 + c^2 r^2q) <= min(c q r^(q-1), q / (2r))
            let term = |c: f64| {
                let power = c * q * hi.powf(q - 1.0).max(p_min.powf(q - 1.0));
                power.min(q / (2.0 * p_min))
            };
            (*n as f64 - 1.0) * term(1.0) + term(1.0 / beta)
        }
        PhaseSpec::Tabulated { table } => norm(&table.axis_slopes()),
    }
}
