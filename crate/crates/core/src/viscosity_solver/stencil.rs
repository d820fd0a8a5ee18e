use crate::error::{Error, Result};
use crate::grid_core::{lagrangian_angle, GridFunction, SymmetricMatrix};

/// Hessian discretization used for the angle `sum_i arctan(lambda_i)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum Stencil {
    /// Central second differences; second order, not monotone.
    #[default]
    Central,
    /// Directional second differences; monotone, first order in the direction resolution.
    Wide(WideStencil),
}

impl Stencil {
    pub fn wide(n: usize) -> Self {
        Stencil::Wide(WideStencil::default_for(n))
    }
}

/// Direction set and its orthogonal frames.
///
/// The angle at a node is the minimum over frames `F` of
/// `sum_{d in F} arctan(D_d u / (|d|^2 h^2))`, with `D_d` the second difference
/// along `d`. Every term is non-decreasing in the neighbour values, so the scheme
/// is monotone. The minimum reproduces the angle when the Hessian is positive
/// semidefinite and an eigenframe is present in the set.
#[derive(Debug, Clone, PartialEq)]
pub struct WideStencil {
    n: usize,
    directions: Vec<Vec<i64>>,
    frames: Vec<Vec<usize>>,
    reach: usize,
}

impl WideStencil {
    /// Nonzero vectors of `{-1, 0, 1}^n` up to sign.
    pub fn default_for(n: usize) -> Self {
        let mut dirs = Vec::new();
        let total = 3usize.pow(n as u32);
        for code in 0..total {
            let mut c = code;
            let d: Vec<i64> = (0..n)
                .map(|_| {
                    let v = (c % 3) as i64 - 1;
                    c /= 3;
                    v
                })
                .collect();
            dirs.push(d);
        }
        Self::new(n, dirs.into_iter().filter(|d| d.iter().any(|&v| v != 0)).collect())
            .expect("default direction set spans axes and diagonals")
    }

    pub fn new(n: usize, directions: Vec<Vec<i64>>) -> Result<Self> {
        let mut dirs: Vec<Vec<i64>> = Vec::new();
        for d in directions {
            if d.len() != n {
                return Err(Error::InvalidParams(format!("direction {d:?} is not {n}-dimensional")));
            }
            let Some(&lead) = d.iter().find(|&&v| v != 0) else {
                return Err(Error::InvalidParams("zero direction".into()));
            };
            let d: Vec<i64> = if lead < 0 { d.iter().map(|v| -v).collect() } else { d };
            if !dirs.contains(&d) {
                dirs.push(d);
            }
        }
        let unit = |a: usize, b: Option<(usize, i64)>| {
            let mut e = vec![0i64; n];
            e[a] = 1;
            if let Some((b, s)) = b {
                e[b] = s;
            }
            e
        };
        for a in 0..n {
            if !dirs.contains(&unit(a, None)) {
                return Err(Error::InvalidParams(format!("direction set misses axis {a}")));
            }
            for b in (a + 1)..n {
                for s in [1, -1] {
                    if !dirs.contains(&unit(a, Some((b, s)))) {
                        return Err(Error::InvalidParams(format!(
                            "direction set misses diagonal e{a} {} e{b}",
                            if s > 0 { '+' } else { '-' }
                        )));
                    }
                }
            }
        }
        // Axis frame first so it is always available as a fallback.
        dirs.sort_by_key(|d| (d.iter().filter(|&&v| v != 0).count(), d.iter().map(|v| v.abs()).sum::<i64>()));
        let mut axis_first: Vec<Vec<i64>> = (0..n).map(|a| unit(a, None)).collect();
        axis_first.extend(dirs.into_iter().filter(|d| d.iter().filter(|&&v| v != 0).count() > 1 || d.iter().any(|v| v.abs() > 1)));
        let dirs = axis_first;
        let mut frames = Vec::new();
        let mut cur = Vec::new();
        collect_frames(&dirs, n, 0, &mut cur, &mut frames);
        let reach = dirs.iter().flatten().map(|v| v.unsigned_abs() as usize).max().unwrap_or(1);
        Ok(Self { n, directions: dirs, frames, reach })
    }

    pub fn directions(&self) -> &[Vec<i64>] {
        &self.directions
    }

    pub fn frames(&self) -> &[Vec<usize>] {
        &self.frames
    }

    pub fn reach(&self) -> usize {
        self.reach
    }

    /// Angle at an interior node; frames that leave the grid are skipped.
    pub(crate) fn angle_at(&self, u: &GridFunction, flat: usize) -> f64 {
        let spec = u.spec();
        let v = u.values();
        let h2 = spec.spacing() * spec.spacing();
        let idx = spec.multi_index(flat);
        let m = spec.points_per_axis();
        let mut second = vec![f64::NAN; self.directions.len()];
        for (k, d) in self.directions.iter().enumerate() {
            let fits = d.iter().zip(&idx).all(|(&da, &ia)| {
                let r = da.unsigned_abs() as usize;
                ia >= r && ia + r < m
            });
            if fits {
                let off: i64 = d.iter().enumerate().map(|(a, &da)| da * spec.stride(a) as i64).sum();
                let plus = v[(flat as i64 + off) as usize];
                let minus = v[(flat as i64 - off) as usize];
                let len2: i64 = d.iter().map(|x| x * x).sum();
                second[k] = (plus - 2.0 * v[flat] + minus) / (len2 as f64 * h2);
            }
        }
        let mut best = f64::INFINITY;
        for f in &self.frames {
            if f.iter().all(|&k| !second[k].is_nan()) {
                best = best.min(f.iter().map(|&k| second[k].atan()).sum());
            }
        }
        debug_assert!(best.is_finite() || v[flat].is_nan());
        best
    }

    pub fn dim(&self) -> usize {
        self.n
    }
}

fn collect_frames(dirs: &[Vec<i64>], n: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if cur.len() == n {
        out.push(cur.clone());
        return;
    }
    for k in start..dirs.len() {
        let ok = cur.iter().all(|&j| dirs[j].iter().zip(&dirs[k]).map(|(a, b)| a * b).sum::<i64>() == 0);
        if ok {
            cur.push(k);
            collect_frames(dirs, n, k + 1, cur, out);
            cur.pop();
        }
    }
}

/// Angle from the central Hessian at an interior node, plus the central gradient into `grad`.
pub(crate) fn central_angle_at(u: &GridFunction, flat: usize, grad: &mut [f64]) -> f64 {
    let spec = u.spec();
    let v = u.values();
    let n = spec.dim();
    let h = spec.spacing();
    let h2 = h * h;
    let mut m = [[0.0f64; 4]; 4];
    for a in 0..n {
        let sa = spec.stride(a);
        grad[a] = (v[flat + sa] - v[flat - sa]) / (2.0 * h);
        m[a][a] = (v[flat + sa] - 2.0 * v[flat] + v[flat - sa]) / h2;
        for b in (a + 1)..n {
            let sb = spec.stride(b);
            let cross = v[flat + sa + sb] - v[flat + sa - sb] - v[flat - sa + sb] + v[flat - sa - sb];
            m[a][b] = cross / (4.0 * h2);
            m[b][a] = m[a][b];
        }
    }
    match n {
        1 => m[0][0].atan(),
        2 => (m[0][0] + m[1][1]).atan2(1.0 - (m[0][0] * m[1][1] - m[0][1] * m[0][1])),
        _ => {
            let s = SymmetricMatrix::from_fn(n, |i, j| m[i][j]);
            lagrangian_angle(&s).unwrap_or(f64::NAN)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid_core::GridSpec;

    #[test]
    fn default_frames() {
        let w = WideStencil::default_for(2);
        assert_eq!(w.directions().len(), 4);
        assert_eq!(w.frames().len(), 2);
        assert_eq!(w.frames()[0], vec![0, 1]);
        let w3 = WideStencil::default_for(3);
        assert_eq!(w3.directions().len(), 13);
        assert!(w3.frames().len() >= 4);
        for f in w3.frames() {
            assert_eq!(f.len(), 3);
        }
    }

    #[test]
    fn rejects_incomplete_sets() {
        assert!(WideStencil::new(2, vec![vec![1, 0], vec![0, 1]]).is_err());
        assert!(WideStencil::new(2, vec![vec![1, 0], vec![0, 1], vec![1, 1], vec![0, 0]]).is_err());
        assert!(WideStencil::new(2, vec![vec![1, 0], vec![0, -1], vec![-1, -1], vec![1, -1]]).is_ok());
    }

    #[test]
    fn exact_on_diagonal_and_rotated_quadratics() {
        let spec = GridSpec::centered(2, 1.0, 11).unwrap();
        let w = WideStencil::default_for(2);
        // eigenframe along the axes
        let u = GridFunction::from_fn(spec.clone(), |x| 0.5 * x[0] * x[0] + 1.5 * x[1] * x[1]).unwrap();
        let a = w.angle_at(&u, spec.flat(&[5, 5]));
        assert!((a - (1f64.atan() + 3f64.atan())).abs() < 1e-12);
        // eigenframe along the diagonals: D^2 u has eigenvalues 1 and 3
        let u = GridFunction::from_fn(spec.clone(), |x| x[0] * x[0] + x[1] * x[1] + x[0] * x[1]).unwrap();
        let a = w.angle_at(&u, spec.flat(&[4, 6]));
        assert!((a - (1f64.atan() + 3f64.atan())).abs() < 1e-12);
    }
}
