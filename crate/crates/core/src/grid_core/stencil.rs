use super::grid::GridFunction;
use super::symmetric::SymmetricMatrix;
use crate::error::{Error, Result};

fn check_interior(u: &GridFunction, idx: &[usize]) -> Result<usize> {
    let spec = u.spec();
    if idx.len() != spec.dim() {
        return Err(Error::DimensionMismatch { expected: spec.dim(), got: idx.len() });
    }
    if !spec.is_interior(idx, 1) {
        return Err(Error::IndexNotInterior(idx.to_vec()));
    }
    Ok(spec.flat(idx))
}

/// Central-difference gradient at an interior node.
pub fn gradient_central(u: &GridFunction, idx: &[usize]) -> Result<Vec<f64>> {
    let flat = check_interior(u, idx)?;
    Ok(gradient_at_flat(u, flat))
}

/// Central-difference Hessian at an interior node: second central differences on the
/// diagonal and the 4-point cross difference off it.
pub fn hessian_central(u: &GridFunction, idx: &[usize]) -> Result<SymmetricMatrix> {
    let flat = check_interior(u, idx)?;
    Ok(hessian_at_flat(u, flat))
}

/// Unchecked variants for hot loops; callers guarantee the node is interior.
pub(crate) fn gradient_at_flat(u: &GridFunction, flat: usize) -> Vec<f64> {
    let spec = u.spec();
    let v = u.values();
    let inv = 1.0 / (2.0 * spec.spacing());
    (0..spec.dim())
        .map(|a| {
            let s = spec.stride(a);
            (v[flat + s] - v[flat - s]) * inv
        })
        .collect()
}

pub(crate) fn hessian_at_flat(u: &GridFunction, flat: usize) -> SymmetricMatrix {
    let spec = u.spec();
    let v = u.values();
    let n = spec.dim();
    let h2 = spec.spacing() * spec.spacing();
    let mut m = SymmetricMatrix::zeros(n);
    for a in 0..n {
        let sa = spec.stride(a);
        m.set(a, a, (v[flat + sa] - 2.0 * v[flat] + v[flat - sa]) / h2);
        for b in (a + 1)..n {
            let sb = spec.stride(b);
            let cross = v[flat + sa + sb] - v[flat + sa - sb] - v[flat - sa + sb] + v[flat - sa - sb];
            m.set(a, b, cross / (4.0 * h2));
        }
    }
    m
}
