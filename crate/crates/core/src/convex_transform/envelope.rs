use rayon::prelude::*;

use crate::error::Result;
use crate::grid_core::{eigen_sym, hessian_at_flat, GridFunction, GridSpec};

/// Outcome of [`convexity_check`].
#[derive(Debug, Clone)]
pub struct ConvexityReport {
    /// Smallest Hessian eigenvalue over the checked interior nodes.
    pub min_eigenvalue: f64,
    /// Node achieving `min_eigenvalue`.
    pub min_node: Vec<usize>,
    /// Nodes whose smallest eigenvalue is below `-tol`, in lexicographic order.
    pub violations: Vec<Vec<usize>>,
    pub tol: f64,
    pub passes: bool,
}

/// Checks `lambda_min(D^2 u) >= -tol` at every interior node.
pub fn convexity_check(u: &GridFunction, tol: f64) -> ConvexityReport {
    convexity_check_where(u, tol, |_| true)
}

/// Like [`convexity_check`] restricted to interior nodes whose coordinates satisfy `include`.
pub fn convexity_check_where(
    u: &GridFunction,
    tol: f64,
    include: impl Fn(&[f64]) -> bool + Sync,
) -> ConvexityReport {
    let spec = u.spec();
    let mins: Vec<(usize, f64)> = spec
        .interior_indices(1)
        .into_par_iter()
        .filter(|&f| include(&spec.point_of(f)))
        .map(|f| {
            let lmin = eigen_sym(&hessian_at_flat(u, f)).map(|s| s.min()).unwrap_or(f64::NAN);
            (f, lmin)
        })
        .collect();
    let mut min_eigenvalue = f64::INFINITY;
    let mut min_flat = 0;
    let mut violations = Vec::new();
    for &(f, l) in &mins {
        if l < min_eigenvalue || l.is_nan() {
            min_eigenvalue = l;
            min_flat = f;
        }
        if !(l >= -tol) {
            violations.push(spec.multi_index(f));
        }
    }
    ConvexityReport {
        min_eigenvalue,
        min_node: spec.multi_index(min_flat),
        passes: violations.is_empty(),
        violations,
        tol,
    }
}

/// Lower convex hull of `(x_j, f_j)` evaluated at every `x_j` (x ascending).
fn lower_hull_1d(xs: &[f64], f: &[f64]) -> Vec<f64> {
    let mut hull: Vec<usize> = Vec::with_capacity(xs.len());
    for j in 0..xs.len() {
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            let cross = (xs[b] - xs[a]) * (f[j] - f[a]) - (f[b] - f[a]) * (xs[j] - xs[a]);
            if cross <= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(j);
    }
    let mut out = vec![0.0; xs.len()];
    for w in hull.windows(2) {
        let (a, b) = (w[0], w[1]);
        for j in a..=b {
            let t = (xs[j] - xs[a]) / (xs[b] - xs[a]);
            out[j] = f[a] + t * (f[b] - f[a]);
        }
    }
    if hull.len() == 1 {
        out[hull[0]] = f[hull[0]];
    }
    out
}

/// Solves the dense system `a x = b` by Gaussian elimination with partial pivoting.
fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in (col + 1)..n {
            let f = a[row][col] / a[col][col];
            if f != 0.0 {
                for k in col..n {
                    a[row][k] -= f * a[col][k];
                }
                b[row] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = ((row + 1)..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Some(x)
}

const MAX_PIVOTS: usize = 10_000;

/// Value at node `j` of the lower convex hull of `(x_i, f_i)`:
/// `min sum l_i f_i` subject to `sum l_i x_i = x_j`, `sum l_i = 1`, `l >= 0`,
/// by revised simplex from the degenerate basis made of `j` and its forward neighbours.
/// The optimal duals are the supporting affine minorant, so the optimum is the
/// biconjugate over all slopes.
fn lower_hull_at(spec: &GridSpec, xs: &[Vec<f64>], f: &[f64], j: usize) -> f64 {
    let n = spec.dim();
    let rows = n + 1;
    let column = |i: usize| -> Vec<f64> {
        let mut c = xs[i].clone();
        c.push(1.0);
        c
    };
    let idx = spec.multi_index(j);
    let mut basis: Vec<usize> = vec![j];
    for a in 0..n {
        let mut nb = idx.clone();
        if nb[a] + 1 < spec.points_per_axis() {
            nb[a] += 1;
        } else {
            nb[a] -= 1;
        }
        basis.push(spec.flat(&nb));
    }
    let rhs = column(j);
    let scale = 1.0 + f.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let tol = 1e-12 * scale;
    let mut degenerate = 0usize;
    for _ in 0..MAX_PIVOTS {
        // B^T y = c_B
        let bt: Vec<Vec<f64>> = (0..rows)
            .map(|r| basis.iter().map(|&i| if r < n { xs[i][r] } else { 1.0 }).collect())
            .collect();
        let bmat: Vec<Vec<f64>> = (0..rows)
            .map(|r| (0..rows).map(|c| bt[c][r]).collect())
            .collect();
        let Some(y) = solve_dense(bmat.clone(), basis.iter().map(|&i| f[i]).collect()) else {
            break;
        };
        let Some(lam) = solve_dense(bt.clone(), rhs.clone()) else { break };
        let reduced = |i: usize| {
            let mut s = y[n];
            for a in 0..n {
                s += y[a] * xs[i][a];
            }
            f[i] - s
        };
        let bland = degenerate > 4 * rows;
        let mut entering = None;
        let mut most = -tol;
        for i in 0..xs.len() {
            let r = reduced(i);
            if r < most {
                entering = Some(i);
                if bland {
                    break;
                }
                most = r;
            }
        }
        let Some(e) = entering else {
            let val: f64 = lam.iter().zip(&basis).map(|(l, &i)| l * f[i]).sum();
            return val;
        };
        let Some(d) = solve_dense(bt, column(e)) else { break };
        let mut leave = None;
        let mut ratio = f64::INFINITY;
        for k in 0..rows {
            if d[k] > 1e-12 {
                let t = lam[k].max(0.0) / d[k];
                if t < ratio || (t == ratio && leave.is_some_and(|l: usize| basis[k] < basis[l])) {
                    ratio = t;
                    leave = Some(k);
                }
            }
        }
        let Some(l) = leave else { break };
        if ratio <= 1e-15 {
            degenerate += 1;
        } else {
            degenerate = 0;
        }
        basis[l] = e;
    }
    f[j]
}

/// Largest convex minorant of `u` on its grid: the biconjugate `(u*)*` taken over
/// all real slopes, which at grid nodes equals the lower convex hull of the samples.
///
/// One dimension uses a monotone-chain hull; higher dimensions solve a small linear
/// program per node.
pub fn convex_envelope(u: &GridFunction) -> Result<GridFunction> {
    let spec = u.spec();
    let f = u.values();
    let values = if spec.dim() == 1 {
        lower_hull_1d(&spec.axis_coords(0), f)
    } else {
        let xs: Vec<Vec<f64>> = (0..spec.len()).map(|i| spec.point_of(i)).collect();
        (0..spec.len())
            .into_par_iter()
            .map(|j| lower_hull_at(spec, &xs, f, j))
            .collect()
    };
    // The hull never exceeds the data; clamp away rounding excursions.
    let values = values.iter().zip(f).map(|(a, b)| a.min(*b)).collect();
    GridFunction::new(spec.clone(), values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid_core::GridSpec;

    /// Brute lower hull: min over chords through each node.
    fn hull_oracle(xs: &[f64], f: &[f64]) -> Vec<f64> {
        let n = xs.len();
        (0..n)
            .map(|j| {
                let mut best = f[j];
                for a in 0..=j {
                    for b in j..n {
                        if a == b {
                            continue;
                        }
                        let t = (xs[j] - xs[a]) / (xs[b] - xs[a]);
                        best = best.min(f[a] + t * (f[b] - f[a]));
                    }
                }
                best
            })
            .collect()
    }

    #[test]
    fn convexity_examples() {
        let spec = GridSpec::centered(2, 1.0, 21).unwrap();
        let q = GridFunction::from_fn(spec.clone(), |x| 0.5 * (x[0] * x[0] + x[1] * x[1])).unwrap();
        let r = convexity_check(&q, 1e-8);
        assert!(r.passes && (r.min_eigenvalue - 1.0).abs() < 1e-10);
        let nq = q.map(|_, v| -v).unwrap();
        let r = convexity_check(&nq, 1e-8);
        assert!(!r.passes && (r.min_eigenvalue + 1.0).abs() < 1e-10);
        assert_eq!(r.violations[0], vec![1, 1]);
    }

    #[test]
    fn fractional_power_convex_away_from_origin() {
        // Spectrum |x|^{beta-1} {beta, 1, ...} is nonnegative wherever defined.
        let spec = GridSpec::centered(2, 1.0, 41).unwrap();
        let p = 4.0 / 3.0;
        let u = GridFunction::from_fn(spec, |x| (x[0] * x[0] + x[1] * x[1]).sqrt().powf(p) / p).unwrap();
        let r = convexity_check_where(&u, 1e-8, |x| x.iter().any(|v| v.abs() > 1e-12));
        assert!(r.passes, "min {}", r.min_eigenvalue);
        assert!(r.min_eigenvalue >= -1e-8);
    }

    #[test]
    fn convex_input_is_fixed() {
        let spec = GridSpec::centered(1, 1.0, 101).unwrap();
        let u = GridFunction::from_fn(spec, |x| x[0].exp() + 0.3 * x[0] * x[0]).unwrap();
        let env = convex_envelope(&u).unwrap();
        assert!(env.max_abs_diff(&u) <= 1e-9);

        let spec = GridSpec::centered(2, 1.0, 15).unwrap();
        let q = GridFunction::from_fn(spec, |x| 0.5 * (2.0 * x[0] * x[0] + x[0] * x[1] + x[1] * x[1])).unwrap();
        let env = convex_envelope(&q).unwrap();
        assert!(env.max_abs_diff(&q) <= 1e-9);
    }

    #[test]
    fn concave_and_double_well_match_hull_oracle() {
        let spec = GridSpec::centered(1, 1.0, 101).unwrap();
        let xs = spec.axis_coords(0);
        let conc = GridFunction::from_fn(spec.clone(), |x| -x[0] * x[0]).unwrap();
        let env = convex_envelope(&conc).unwrap();
        for v in env.values() {
            assert!((v + 1.0).abs() < 1e-12);
        }
        let well = GridFunction::from_fn(spec, |x| x[0] * x[0] * (x[0] * x[0] - 1.0)).unwrap();
        let env = convex_envelope(&well).unwrap();
        let oracle = hull_oracle(&xs, well.values());
        for (a, b) in env.values().iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-12);
        }
        // Flat at the well depth -1/4 between the minima x = ±1/sqrt(2).
        let mid = xs.iter().position(|&x| x.abs() < 1e-12).unwrap();
        assert!((env.at_flat(mid) + 0.25).abs() < 1e-3);
    }

    /// Brute 2D hull oracle: min over all node triangles containing the node.
    fn hull_oracle_2d(spec: &GridSpec, f: &[f64], j: usize) -> f64 {
        let xs: Vec<Vec<f64>> = (0..spec.len()).map(|i| spec.point_of(i)).collect();
        let p = &xs[j];
        let mut best = f[j];
        let n = xs.len();
        for a in 0..n {
            for b in (a + 1)..n {
                for c in (b + 1)..n {
                    let (xa, xb, xc) = (&xs[a], &xs[b], &xs[c]);
                    let det = (xb[0] - xa[0]) * (xc[1] - xa[1]) - (xc[0] - xa[0]) * (xb[1] - xa[1]);
                    if det.abs() < 1e-14 {
                        continue;
                    }
                    let l1 = ((p[0] - xa[0]) * (xc[1] - xa[1]) - (xc[0] - xa[0]) * (p[1] - xa[1])) / det;
                    let l2 = ((xb[0] - xa[0]) * (p[1] - xa[1]) - (p[0] - xa[0]) * (xb[1] - xa[1])) / det;
                    let l0 = 1.0 - l1 - l2;
                    if l0 >= -1e-12 && l1 >= -1e-12 && l2 >= -1e-12 {
                        best = best.min(l0 * f[a] + l1 * f[b] + l2 * f[c]);
                    }
                }
            }
        }
        best
    }

    #[test]
    fn two_dimensional_envelope_matches_triangle_oracle() {
        let spec = GridSpec::centered(2, 1.0, 7).unwrap();
        let u = GridFunction::from_fn(spec.clone(), |x| (2.0 * x[0]).cos() + x[1] * x[1] - 0.5 * x[0] * x[1]).unwrap();
        let env = convex_envelope(&u).unwrap();
        for j in 0..spec.len() {
            let o = hull_oracle_2d(&spec, u.values(), j);
            assert!((env.at_flat(j) - o).abs() < 1e-10, "node {j}: {} vs {o}", env.at_flat(j));
        }
    }

    #[test]
    fn envelope_is_idempotent_and_below() {
        let spec = GridSpec::centered(2, 1.0, 13).unwrap();
        let u = GridFunction::from_fn(spec, |x| (2.0 * x[0]).cos() + x[1] * x[1] - 0.5 * x[0] * x[1]).unwrap();
        let e1 = convex_envelope(&u).unwrap();
        assert!(e1.values().iter().zip(u.values()).all(|(a, b)| a <= b));
        let e2 = convex_envelope(&e1).unwrap();
        assert!(e2.max_abs_diff(&e1) < 1e-12);
        assert!(e2.values().iter().zip(e1.values()).all(|(a, b)| a <= b));
    }
}
