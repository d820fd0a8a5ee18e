use crate::error::{Error, Result};

pub const MAX_DIM: usize = 4;
pub const MIN_POINTS: usize = 5;

/// Uniform tensor grid with the same spacing and point count on every axis.
///
/// Node values are stored in lexicographic order with axis 0 varying slowest.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    n: usize,
    lo: Vec<f64>,
    h: f64,
    m: usize,
}

impl GridSpec {
    pub fn new(lo: Vec<f64>, h: f64, m: usize) -> Result<Self> {
        let n = lo.len();
        if n == 0 || n > MAX_DIM {
            return Err(Error::InvalidGrid(format!("dimension {n} outside 1..={MAX_DIM}")));
        }
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::InvalidGrid(format!("spacing {h} must be finite and positive")));
        }
        if m < MIN_POINTS {
            return Err(Error::InvalidGrid(format!("{m} points per axis, need at least {MIN_POINTS}")));
        }
        if lo.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidGrid("lower corner not finite".into()));
        }
        m.checked_pow(n as u32)
            .filter(|t| t.checked_mul(std::mem::size_of::<f64>()).is_some())
            .ok_or_else(|| Error::InvalidGrid(format!("{m}^{n} nodes overflow memory")))?;
        Ok(Self { n, lo, h, m })
    }

    /// Grid on the cube `[-half_width, half_width]^n` with `m` points per axis.
    pub fn centered(n: usize, half_width: f64, m: usize) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidGrid(format!("{m} points per axis")));
        }
        Self::new(vec![-half_width; n], 2.0 * half_width / (m - 1) as f64, m)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn points_per_axis(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.m.pow(self.n as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn hi(&self, axis: usize) -> f64 {
        self.coord(axis, self.m - 1)
    }

    #[inline]
    pub fn coord(&self, axis: usize, i: usize) -> f64 {
        self.lo[axis] + i as f64 * self.h
    }

    /// Coordinates of every node along `axis`.
    pub fn axis_coords(&self, axis: usize) -> Vec<f64> {
        (0..self.m).map(|i| self.coord(axis, i)).collect()
    }

    #[inline]
    pub fn stride(&self, axis: usize) -> usize {
        self.m.pow((self.n - 1 - axis) as u32)
    }

    pub fn flat(&self, idx: &[usize]) -> usize {
        idx.iter().fold(0, |acc, &i| acc * self.m + i)
    }

    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.n];
        for axis in (0..self.n).rev() {
            idx[axis] = flat % self.m;
            flat /= self.m;
        }
        idx
    }

    pub fn point(&self, idx: &[usize]) -> Vec<f64> {
        idx.iter().enumerate().map(|(a, &i)| self.coord(a, i)).collect()
    }

    pub fn point_of(&self, flat: usize) -> Vec<f64> {
        self.point(&self.multi_index(flat))
    }

    /// True when every component is at least `reach` nodes away from both faces.
    pub fn is_interior(&self, idx: &[usize], reach: usize) -> bool {
        idx.iter().all(|&i| i >= reach && i + reach < self.m)
    }

    pub fn is_boundary(&self, idx: &[usize]) -> bool {
        !self.is_interior(idx, 1)
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        x.len() == self.n
            && (0..self.n).all(|a| x[a] >= self.lo[a] - tol && x[a] <= self.hi(a) + tol)
    }

    /// Index of the node closest to `x`, clamped to the grid.
    pub fn nearest(&self, x: &[f64]) -> Vec<usize> {
        (0..self.n)
            .map(|a| {
                let t = ((x[a] - self.lo[a]) / self.h).round();
                t.clamp(0.0, (self.m - 1) as f64) as usize
            })
            .collect()
    }

    /// Flat indices of nodes at least `reach` away from every face.
    pub fn interior_indices(&self, reach: usize) -> Vec<usize> {
        (0..self.len())
            .filter(|&f| self.is_interior(&self.multi_index(f), reach))
            .collect()
    }

    /// Sub-grid with the same spacing, starting at `start` and with `m` points per axis.
    pub fn sub_grid(&self, start: &[usize], m: usize) -> Result<Self> {
        if start.len() != self.n || start.iter().any(|&s| s + m > self.m) {
            return Err(Error::InvalidGrid("sub-grid does not fit".into()));
        }
        Self::new(self.point(start), self.h, m)
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.n == other.n
            && self.m == other.m
            && self.h == other.h
            && self.lo == other.lo
    }
}

/// Scalar samples on a [`GridSpec`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    spec: GridSpec,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(spec: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != spec.len() {
            return Err(Error::InvalidGrid(format!(
                "{} values for {} nodes",
                values.len(),
                spec.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("grid function values"));
        }
        Ok(Self { spec, values })
    }

    pub fn from_fn(spec: GridSpec, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let mut x = vec![0.0; spec.dim()];
        let values = (0..spec.len())
            .map(|flat| {
                let idx = spec.multi_index(flat);
                for (a, &i) in idx.iter().enumerate() {
                    x[a] = spec.coord(a, i);
                }
                f(&x)
            })
            .collect();
        Self::new(spec, values)
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn dim(&self) -> usize {
        self.spec.dim()
    }

    #[inline]
    pub fn at(&self, idx: &[usize]) -> f64 {
        self.values[self.spec.flat(idx)]
    }

    #[inline]
    pub fn at_flat(&self, flat: usize) -> f64 {
        self.values[flat]
    }

    /// Nodewise map over (point, value).
    pub fn map(&self, f: impl Fn(&[f64], f64) -> f64) -> Result<Self> {
        let values = (0..self.spec.len())
            .map(|flat| f(&self.spec.point_of(flat), self.values[flat]))
            .collect();
        Self::new(self.spec.clone(), values)
    }

    /// Multilinear interpolation; points outside the box (beyond rounding) are rejected.
    pub fn interpolate(&self, x: &[f64]) -> Result<f64> {
        let spec = &self.spec;
        let n = spec.dim();
        if x.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: x.len() });
        }
        let tol = 1e-12 * (1.0 + spec.h * spec.m as f64);
        if !spec.contains(x, tol) {
            return Err(Error::InvalidGrid(format!("point {x:?} outside grid")));
        }
        let mut base = vec![0usize; n];
        let mut frac = vec![0.0; n];
        for a in 0..n {
            let t = ((x[a] - spec.lo[a]) / spec.h).clamp(0.0, (spec.m - 1) as f64);
            let i = (t.floor() as usize).min(spec.m - 2);
            base[a] = i;
            frac[a] = t - i as f64;
        }
        let mut acc = 0.0;
        let mut corner = vec![0usize; n];
        for mask in 0..(1usize << n) {
            let mut w = 1.0;
            for a in 0..n {
                let bit = (mask >> a) & 1;
                corner[a] = base[a] + bit;
                w *= if bit == 1 { frac[a] } else { 1.0 - frac[a] };
            }
            if w != 0.0 {
                acc += w * self.at(&corner);
            }
        }
        Ok(acc)
    }

    /// Resample onto another grid by multilinear interpolation.
    pub fn resample(&self, target: &GridSpec) -> Result<Self> {
        let values = (0..target.len())
            .map(|flat| self.interpolate(&target.point_of(flat)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(target.clone(), values)
    }

    /// Restriction to a sub-grid sharing this grid's nodes.
    pub fn restrict(&self, start: &[usize], m: usize) -> Result<Self> {
        let sub = self.spec.sub_grid(start, m)?;
        let values = (0..sub.len())
            .map(|flat| {
                let idx: Vec<usize> = sub
                    .multi_index(flat)
                    .iter()
                    .zip(start)
                    .map(|(i, s)| i + s)
                    .collect();
                self.at(&idx)
            })
            .collect();
        Self::new(sub, values)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}
