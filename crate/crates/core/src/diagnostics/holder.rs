use super::linear_fit;
use crate::error::{Error, Result};
use crate::grid_core::GridFunction;

#[derive(Debug, Clone, PartialEq)]
pub struct HolderFit {
    pub point: Vec<f64>,
    pub radii: Vec<f64>,
    /// Sup of `|u - affine|` on each ball.
    pub oscillations: Vec<f64>,
    pub exponent: f64,
    pub constant: f64,
    /// RMS residual of the log-log regression.
    pub residual: f64,
}

/// `count` radii `r_max, r_max / ratio, ...`.
pub fn geometric_radii(r_max: f64, ratio: f64, count: usize) -> Vec<f64> {
    (0..count).map(|i| r_max / ratio.powi(i as i32)).collect()
}

fn solve_small(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))?;
        if a[p][c].abs() < 1e-300 {
            return None;
        }
        a.swap(c, p);
        b.swap(c, p);
        for r in (c + 1)..n {
            let f = a[r][c] / a[c][c];
            for k in c..n {
                a[r][k] -= f * a[c][k];
            }
            b[r] -= f * b[c];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        x[r] = (b[r] - ((r + 1)..n).map(|k| a[r][k] * x[k]).sum::<f64>()) / a[r][r];
    }
    Some(x)
}

/// Oscillation of `u` about its least-squares affine fit on the grid ball, or
/// `None` when the ball leaves the grid or holds too few nodes.
fn ball_oscillation(u: &GridFunction, point: &[f64], r: f64) -> Option<f64> {
    let spec = u.spec();
    let n = spec.dim();
    let h = spec.spacing();
    if (0..n).any(|a| point[a] - r < spec.lo()[a] - 1e-12 * h || point[a] + r > spec.hi(a) + 1e-12 * h) {
        return None;
    }
    let mut lo_idx = vec![0usize; n];
    let mut hi_idx = vec![0usize; n];
    for a in 0..n {
        lo_idx[a] = (((point[a] - r - spec.lo()[a]) / h).ceil().max(0.0)) as usize;
        hi_idx[a] = (((point[a] + r - spec.lo()[a]) / h).floor() as usize).min(spec.points_per_axis() - 1);
        if lo_idx[a] > hi_idx[a] {
            return None;
        }
    }
    let mut pts: Vec<(Vec<f64>, f64)> = Vec::new();
    let mut idx = lo_idx.clone();
    'nodes: loop {
        let x = spec.point(&idx);
        let d2: f64 = x.iter().zip(point).map(|(a, b)| (a - b).powi(2)).sum();
        if d2 <= r * r * (1.0 + 1e-12) {
            let rel: Vec<f64> = x.iter().zip(point).map(|(a, b)| a - b).collect();
            pts.push((rel, u.at(&idx)));
        }
        for a in (0..n).rev() {
            if idx[a] < hi_idx[a] {
                idx[a] += 1;
                continue 'nodes;
            }
            idx[a] = lo_idx[a];
        }
        break;
    }
    if pts.len() < 2 * (n + 1) {
        return None;
    }
    // normal equations for v ~ c0 + g.x
    let k = n + 1;
    let mut ata = vec![vec![0.0; k]; k];
    let mut atb = vec![0.0; k];
    for (x, v) in &pts {
        let row: Vec<f64> = std::iter::once(1.0).chain(x.iter().map(|t| t / r)).collect();
        for i in 0..k {
            atb[i] += row[i] * v;
            for j in 0..k {
                ata[i][j] += row[i] * row[j];
            }
        }
    }
    let coef = solve_small(ata, atb)?;
    let osc = pts
        .iter()
        .map(|(x, v)| {
            let aff = coef[0] + x.iter().zip(&coef[1..]).map(|(t, g)| g * t / r).sum::<f64>();
            (v - aff).abs()
        })
        .fold(0.0f64, f64::max);
    Some(osc)
}

/// Fits `sup_{|x - point| <= r} |u - affine_r| ~ C r^gamma` over the given radii.
///
/// The affine part is a least-squares fit over each ball. Radii whose ball leaves
/// the grid, holds too few nodes, or has zero oscillation are skipped; at least
/// four must remain, and the radii must be geometrically spaced.
pub fn holder_exponent_fit(u: &GridFunction, point: &[f64], radii: &[f64]) -> Result<HolderFit> {
    let n = u.dim();
    if point.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: point.len() });
    }
    if radii.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
        return Err(Error::InvalidRadii("radii must be positive and finite".into()));
    }
    if radii.len() >= 3 {
        let q0 = (radii[1] / radii[0]).ln();
        for w in radii.windows(2) {
            let q = (w[1] / w[0]).ln();
            if q == 0.0 || (q - q0).abs() > 1e-6 * q0.abs() {
                return Err(Error::InvalidRadii("radii must be geometrically spaced".into()));
            }
        }
    }
    let mut used = Vec::new();
    let mut osc = Vec::new();
    for &r in radii {
        if let Some(o) = ball_oscillation(u, point, r) {
            if o > 0.0 {
                used.push(r);
                osc.push(o);
            }
        }
    }
    if used.len() < 4 {
        return Err(Error::TooFewRadii { usable: used.len() });
    }
    let pts: Vec<(f64, f64)> = used.iter().zip(&osc).map(|(r, o)| (r.ln(), o.ln())).collect();
    let (exponent, icpt, residual) = linear_fit(&pts);
    Ok(HolderFit { point: point.to_vec(), radii: used, oscillations: osc, exponent, constant: icpt.exp(), residual })
}
