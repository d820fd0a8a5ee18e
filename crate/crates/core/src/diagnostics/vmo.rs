use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid_core::{hessian_at_flat, GridFunction, GridSpec, SymmetricMatrix};

/// Symmetric-matrix samples on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct HessianField {
    spec: GridSpec,
    mats: Vec<SymmetricMatrix>,
}

impl HessianField {
    pub fn new(spec: GridSpec, mats: Vec<SymmetricMatrix>) -> Result<Self> {
        if mats.len() != spec.len() {
            return Err(Error::InvalidGrid(format!("field has {} samples, grid has {}", mats.len(), spec.len())));
        }
        if mats.iter().any(|m| m.dim() != spec.dim()) {
            return Err(Error::InvalidGrid("matrix size differs from grid dimension".into()));
        }
        if mats.iter().any(|m| !m.is_finite()) {
            return Err(Error::NonFinite("hessian field"));
        }
        Ok(Self { spec, mats })
    }

    pub fn from_fn(spec: GridSpec, f: impl Fn(&[f64]) -> SymmetricMatrix) -> Result<Self> {
        let mats = (0..spec.len()).map(|j| f(&spec.point_of(j))).collect();
        Self::new(spec, mats)
    }

    /// Central Hessians of `u` on its interior nodes.
    pub fn from_potential(u: &GridFunction) -> Result<Self> {
        let spec = u.spec();
        let inner = spec.sub_grid(&vec![1; spec.dim()], spec.points_per_axis() - 2)?;
        let mats = (0..inner.len())
            .map(|j| {
                let idx: Vec<usize> = inner.multi_index(j).iter().map(|i| i + 1).collect();
                hessian_at_flat(u, spec.flat(&idx))
            })
            .collect();
        Self::new(inner, mats)
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn mats(&self) -> &[SymmetricMatrix] {
        &self.mats
    }

    pub fn scale(&self, t: f64) -> Self {
        Self { spec: self.spec.clone(), mats: self.mats.iter().map(|m| m.scale(t)).collect() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VmoPoint {
    pub radius: f64,
    /// Sup over centers of the mean Frobenius deviation from the ball average;
    /// `NaN` when no ball of this radius fits.
    pub modulus: f64,
    pub centers: usize,
}

/// Discrete VMO modulus: for each radius, the largest mean oscillation
/// `avg_{B_r(x0)} |H - avg_{B_r(x0)} H|` over centers whose whole ball lies in the grid.
pub fn vmo_modulus(field: &HessianField, radii: &[f64]) -> Vec<VmoPoint> {
    let spec = &field.spec;
    let n = spec.dim();
    let h = spec.spacing();
    radii
        .iter()
        .map(|&r| {
            let k = (r / h + 1e-9).floor() as i64;
            let mut offsets: Vec<i64> = Vec::new();
            let side = 2 * k + 1;
            for code in 0..side.pow(n as u32) {
                let mut c = code;
                let mut off = 0i64;
                let mut d2 = 0i64;
                for a in 0..n {
                    let o = c % side - k;
                    c /= side;
                    d2 += o * o;
                    off += o * spec.stride(a) as i64;
                }
                if (d2 as f64) * h * h <= r * r * (1.0 + 1e-12) {
                    offsets.push(off);
                }
            }
            let centers = spec.interior_indices(k as usize);
            if centers.is_empty() {
                return VmoPoint { radius: r, modulus: f64::NAN, centers: 0 };
            }
            let cnt = offsets.len() as f64;
            let modulus = centers
                .par_iter()
                .map(|&c| {
                    let mut avg = SymmetricMatrix::zeros(n);
                    for &o in &offsets {
                        avg = avg.add(&field.mats[(c as i64 + o) as usize]);
                    }
                    let avg = avg.scale(1.0 / cnt);
                    offsets.iter().map(|&o| field.mats[(c as i64 + o) as usize].sub(&avg).frobenius()).sum::<f64>() / cnt
                })
                .reduce(|| 0.0, f64::max);
            VmoPoint { radius: r, modulus, centers: centers.len() }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::linear_fit;

    #[test]
    fn constant_field_has_zero_modulus() {
        let spec = GridSpec::centered(2, 1.0, 21).unwrap();
        let f = HessianField::from_fn(spec, |_| SymmetricMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 3.0]])).unwrap();
        for p in vmo_modulus(&f, &[0.1, 0.2, 0.4]) {
            assert!(p.modulus.abs() < 1e-14 && p.centers > 0);
        }
    }

    #[test]
    fn jump_is_not_vmo() {
        let spec = GridSpec::centered(2, 1.0, 81).unwrap();
        let f = HessianField::from_fn(spec, |x| SymmetricMatrix::diagonal(&[x[0].signum(), 0.0])).unwrap();
        // a ball centred on the jump is two halves of +-1 around a zero column
        let m = vmo_modulus(&f, &[0.05, 0.1, 0.2, 0.4]);
        for p in &m {
            assert!(p.modulus > 0.6, "{p:?}");
        }
        assert!(m[3].modulus >= m[0].modulus);
    }

    #[test]
    fn power_field_decays_at_its_rate() {
        let spec = GridSpec::centered(2, 1.0, 201).unwrap();
        let f = HessianField::from_fn(spec, |x| {
            let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
            SymmetricMatrix::identity(2).scale(r.powf(0.3))
        })
        .unwrap();
        let radii = [0.05, 0.1, 0.2, 0.4];
        let pts: Vec<(f64, f64)> = vmo_modulus(&f, &radii).iter().map(|p| (p.radius.ln(), p.modulus.ln())).collect();
        let (slope, _, _) = linear_fit(&pts);
        assert!((slope - 0.3).abs() < 0.05, "{slope}");
    }

    #[test]
    fn scale_is_linear() {
        let spec = GridSpec::centered(1, 1.0, 41).unwrap();
        let f = HessianField::from_fn(spec, |x| SymmetricMatrix::diagonal(&[x[0].abs().sqrt()])).unwrap();
        let a = vmo_modulus(&f, &[0.2]);
        let b = vmo_modulus(&f.scale(3.5), &[0.2]);
        assert!((b[0].modulus - 3.5 * a[0].modulus).abs() < 1e-13);
    }
}
