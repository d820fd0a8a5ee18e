//! Regularity diagnostics on sampled potentials.

mod dual;
mod holder;
mod rank;
mod vmo;

pub use dual::{dual_convexity_check, dual_convexity_check_with, DualCheckOptions, DualConvexityReport, DualVerdict};
pub use holder::{geometric_radii, holder_exponent_fit, HolderFit};
pub use rank::{rank_field, rank_field_default, RankReport};
pub use vmo::{vmo_modulus, HessianField, VmoPoint};

/// Least-squares line through `(x, y)`: `(slope, intercept, rms residual)`.
pub fn linear_fit(pts: &[(f64, f64)]) -> (f64, f64, f64) {
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { f64::NAN };
    let icpt = my - slope * mx;
    let rms = (pts.iter().map(|p| (p.1 - icpt - slope * p.0).powi(2)).sum::<f64>() / k).sqrt();
    (slope, icpt, rms)
}
