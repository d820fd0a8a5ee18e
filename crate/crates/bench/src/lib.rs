//! Inputs shared by the kernel benchmarks.

use lmcflow_core::{GridFunction, GridSpec, SymmetricMatrix};

/// Strictly convex, non-separable potential on `[-1, 1]^n`.
pub fn convex_potential(n: usize, m: usize) -> GridFunction {
    let spec = GridSpec::centered(n, 1.0, m).expect("valid grid");
    GridFunction::from_fn(spec, |x| {
        let q: f64 = x.iter().enumerate().map(|(a, v)| (0.5 + 0.25 * a as f64) * v * v).sum();
        q + 0.05 * (x[0] + 0.5).powi(4) + (1.0 + (x[0] - x[n - 1]).exp()).ln()
    })
    .expect("finite")
}

/// Dense symmetric test matrix with well separated eigenvalues.
pub fn test_matrix(n: usize) -> SymmetricMatrix {
    SymmetricMatrix::from_fn(n, |i, j| if i == j { 1.0 + i as f64 } else { 0.3 / (1.0 + (i + j) as f64) })
}

pub fn power(n: usize, m: usize, p: f64) -> GridFunction {
    let spec = GridSpec::centered(n, 1.0, m).expect("valid grid");
    GridFunction::from_fn(spec, |x| x.iter().map(|v| v * v).sum::<f64>().sqrt().powf(p) / p).expect("finite")
}
