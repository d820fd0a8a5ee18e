//! Rotation of a convex potential's gradient graph by -pi/4, realized through
//! the Legendre transform, and its inverse.

use std::f64::consts::FRAC_1_SQRT_2;

use super::envelope::{convexity_check, convexity_check_where};
use super::legendre::{
    conjugate_with_argmax, covering_dual_spec, gradient_and_value, refine_conjugate, refined_conjugate, Conjugate,
};
use crate::error::{Error, Result};
use crate::grid_core::{GridFunction, GridSpec};

/// `cos(pi/4)`.
pub const COS: f64 = FRAC_1_SQRT_2;
/// `sin(pi/4)`.
pub const SIN: f64 = FRAC_1_SQRT_2;

fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

#[derive(Debug, Clone)]
pub struct RotateOptions {
    /// Fraction of the primal box whose image is kept for the resampled grid.
    pub shrink: f64,
    /// Dual grid spacing; defaults to the primal spacing.
    pub dual_spacing: Option<f64>,
    /// Convexity tolerance for the input.
    pub convexity_tol: f64,
}

impl Default for RotateOptions {
    fn default() -> Self {
        Self { shrink: 0.8, dual_spacing: None, convexity_tol: 1e-8 }
    }
}

/// Rotated potential `ubar(xbar)`.
#[derive(Debug, Clone)]
pub struct RotatedPotential {
    /// Rotated points `c x + s y`, one per interior primal node, `y` its gradient sample.
    pub points: Vec<Vec<f64>>,
    /// `ubar` at `points`.
    pub values: Vec<f64>,
    /// `ubar` on an axis-aligned box inside the image of the shrunk primal box.
    pub grid: GridFunction,
}

impl RotatedPotential {
    pub fn dim(&self) -> usize {
        self.grid.dim()
    }
}

/// `U = s u + (c/2)|x|^2`.
pub fn auxiliary_potential(u: &GridFunction) -> GridFunction {
    u.map(|x, v| SIN * v + 0.5 * COS * norm2(x)).expect("finite")
}

/// `Ubar = (c/2)|xbar|^2 - s ubar`.
pub fn rotated_auxiliary(ubar: &GridFunction) -> GridFunction {
    ubar.map(|x, v| 0.5 * COS * norm2(x) - SIN * v).expect("finite")
}

pub fn lewy_yuan_rotate(u: &GridFunction) -> Result<RotatedPotential> {
    lewy_yuan_rotate_with(u, &RotateOptions::default())
}

pub fn lewy_yuan_rotate_with(u: &GridFunction, opts: &RotateOptions) -> Result<RotatedPotential> {
    let report = convexity_check(u, opts.convexity_tol);
    if !report.passes {
        return Err(Error::NotConvex {
            node: report.violations[0].clone(),
            min_eigenvalue: report.min_eigenvalue,
        });
    }
    let spec = u.spec();
    let n = spec.dim();
    let h = spec.spacing();
    let aux = auxiliary_potential(u);
    let dual = covering_dual_spec(&aux, opts.dual_spacing.unwrap_or(h))?;
    let conj = conjugate_with_argmax(&aux, &dual)?;

    // Dual nodes whose maximizer lies in the shrunk primal box.
    let center: Vec<f64> = (0..n).map(|a| 0.5 * (spec.lo()[a] + spec.hi(a))).collect();
    let half = 0.5 * (spec.points_per_axis() - 1) as f64 * h;
    let inside = |flat: usize| {
        let idx = spec.multi_index(flat);
        spec.is_interior(&idx, 2)
            && spec
                .point(&idx)
                .iter()
                .zip(&center)
                .all(|(x, c)| (x - c).abs() <= opts.shrink * half + 1e-12 * half)
    };
    let marked: Vec<bool> = conj.argmax.iter().map(|&j| inside(j)).collect();
    let mut seed = None;
    let mut best = f64::INFINITY;
    for (k, &ok) in marked.iter().enumerate() {
        if ok {
            let d = norm2(
                &spec
                    .point_of(conj.argmax[k])
                    .iter()
                    .zip(&center)
                    .map(|(x, c)| x - c)
                    .collect::<Vec<_>>(),
            );
            if d < best {
                best = d;
                seed = Some(k);
            }
        }
    }
    let seed = seed.ok_or(Error::RotatedDomainTooSmall)?;
    let kc = dual.multi_index(seed);
    let md = dual.points_per_axis();
    let cube_ok = |r: usize| -> bool {
        if kc.iter().any(|&k| k < r || k + r >= md) {
            return false;
        }
        let side = 2 * r + 1;
        (0..side.pow(n as u32)).all(|off| {
            let mut rem = off;
            let mut idx = vec![0; n];
            for a in (0..n).rev() {
                idx[a] = kc[a] - r + rem % side;
                rem /= side;
            }
            marked[dual.flat(&idx)]
        })
    };
    let mut r = 0;
    while cube_ok(r + 1) {
        r += 1;
    }
    if 2 * r + 1 < crate::grid_core::MIN_POINTS {
        return Err(Error::RotatedDomainTooSmall);
    }
    let start: Vec<usize> = kc.iter().map(|k| k - r).collect();
    let sub = conj.values.restrict(&start, 2 * r + 1)?;
    let argmax = (0..sub.spec().len())
        .map(|f| {
            let idx: Vec<usize> = sub.spec().multi_index(f).iter().zip(&start).map(|(i, s)| i + s).collect();
            conj.argmax[dual.flat(&idx)]
        })
        .collect();
    let refined = refine_conjugate(&aux, &Conjugate { values: sub, argmax });
    let grid = refined.map(|xb, v| COS / (2.0 * SIN) * norm2(xb) - v / SIN)?;

    let mut points = Vec::new();
    let mut values = Vec::new();
    for flat in spec.interior_indices(1) {
        let x = spec.point_of(flat);
        let (y, _) = gradient_and_value(u, flat);
        let xbar: Vec<f64> = x.iter().zip(&y).map(|(xi, yi)| COS * xi + SIN * yi).collect();
        let dot: f64 = x.iter().zip(&xbar).map(|(a, b)| a * b).sum();
        let conj_val = dot - aux.at_flat(flat);
        values.push(COS / (2.0 * SIN) * norm2(&xbar) - conj_val / SIN);
        points.push(xbar);
    }
    Ok(RotatedPotential { points, values, grid })
}

#[derive(Debug, Clone, Default)]
pub struct InverseOptions {
    /// Strict-convexity floor for `Ubar`; defaults to `10 h`.
    pub floor: Option<f64>,
    /// Nodes of the rotated grid within this radius of the origin skip the convexity test.
    pub exclude_radius: f64,
    /// Primal grid spacing; defaults to the rotated grid spacing.
    pub primal_spacing: Option<f64>,
}

pub fn inverse_rotate(r: &RotatedPotential) -> Result<GridFunction> {
    inverse_rotate_with(r, &InverseOptions::default())
}

/// Recovers `u = (Ubar* - (c/2)|x|^2) / s` on a primal box covering the slopes of `Ubar`.
pub fn inverse_rotate_with(r: &RotatedPotential, opts: &InverseOptions) -> Result<GridFunction> {
    let ubar = &r.grid;
    let h = ubar.spec().spacing();
    let big = rotated_auxiliary(ubar);
    let floor = opts.floor.unwrap_or(10.0 * h);
    let rad2 = opts.exclude_radius * opts.exclude_radius;
    let report = convexity_check_where(&big, -floor, |x| norm2(x) >= rad2);
    // `-floor` as tolerance flags every node with min eigenvalue below `floor`.
    if !(report.min_eigenvalue > floor) {
        return Err(Error::NotInvertible {
            node: report.min_node,
            min_eigenvalue: report.min_eigenvalue,
            floor,
        });
    }
    let primal = covering_dual_spec(&big, opts.primal_spacing.unwrap_or(h))?;
    let big_u = refined_conjugate(&big, &primal)?.values;
    big_u.map(|x, v| (v - 0.5 * COS * norm2(x)) / SIN)
}

/// Primal box shared by `a` and `b`, sampled with `a`'s nodes strictly inside `b`.
pub fn common_nodes(a: &GridSpec, b: &GridSpec, margin: f64) -> Vec<usize> {
    (0..a.len())
        .filter(|&f| {
            let x = a.point_of(f);
            (0..a.dim()).all(|ax| x[ax] >= b.lo()[ax] + margin && x[ax] <= b.hi(ax) - margin)
        })
        .collect()
}
