//! Discrete Legendre–Fenchel transform `f*(t) = max_x (x·t - f(x))` over grid nodes.
//!
//! The brute-force transform is the reference. The fast path applies a
//! linear-time upper-envelope pass along one axis at a time (the discrete sup
//! over a tensor grid separates axis by axis) and recomputes each final value
//! from the selected node with the same arithmetic as the reference.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid_core::{eigen_sym, gradient_at_flat, hessian_at_flat, GridFunction, GridSpec, Spectrum, SymmetricMatrix};

/// Conjugate values on a dual grid with the maximizing primal node of each dual node.
#[derive(Debug, Clone)]
pub struct Conjugate {
    pub values: GridFunction,
    /// Flat index of the primal maximizer (lexicographically smallest on ties).
    pub argmax: Vec<usize>,
}

#[inline]
pub(crate) fn pair_value(x: &[f64], xbar: &[f64], f: f64) -> f64 {
    let mut dot = 0.0;
    for (a, b) in x.iter().zip(xbar) {
        dot += a * b;
    }
    dot - f
}

/// Per-axis `[min, max]` of central-difference gradients over interior nodes.
pub fn slope_range(u: &GridFunction) -> Vec<(f64, f64)> {
    let spec = u.spec();
    let mut range = vec![(f64::INFINITY, f64::NEG_INFINITY); spec.dim()];
    for flat in spec.interior_indices(1) {
        for (a, g) in gradient_at_flat(u, flat).into_iter().enumerate() {
            range[a].0 = range[a].0.min(g);
            range[a].1 = range[a].1.max(g);
        }
    }
    range
}

/// Dual grid with spacing `h_dual` covering the slope range of `u` padded by `2 h_dual`.
pub fn covering_dual_spec(u: &GridFunction, h_dual: f64) -> Result<GridSpec> {
    let range = slope_range(u);
    let pad = 2.0 * h_dual;
    let span = range
        .iter()
        .map(|(lo, hi)| hi - lo + 2.0 * pad)
        .fold(0.0, f64::max);
    let m = ((span / h_dual).ceil() as usize + 1).max(crate::grid_core::MIN_POINTS);
    let full = (m - 1) as f64 * h_dual;
    let lo = range
        .iter()
        .map(|(lo, hi)| 0.5 * (lo + hi) - 0.5 * full)
        .collect();
    GridSpec::new(lo, h_dual, m)
}

/// Errors unless the dual box contains the slope range of `u`.
pub fn check_dual_covers(u: &GridFunction, dual: &GridSpec) -> Result<()> {
    if dual.dim() != u.dim() {
        return Err(Error::DimensionMismatch { expected: u.dim(), got: dual.dim() });
    }
    for (axis, (lo, hi)) in slope_range(u).into_iter().enumerate() {
        let tol = 1e-9 * (1.0 + lo.abs().max(hi.abs()));
        let (have_lo, have_hi) = (dual.lo()[axis], dual.hi(axis));
        if have_lo > lo + tol || have_hi < hi - tol {
            return Err(Error::DualRangeTooSmall {
                axis,
                need_lo: lo,
                need_hi: hi,
                have_lo,
                have_hi,
            });
        }
    }
    Ok(())
}

fn primal_points(spec: &GridSpec) -> Vec<Vec<f64>> {
    (0..spec.len()).map(|f| spec.point_of(f)).collect()
}

/// Reference transform: exhaustive max over every primal node.
pub fn conjugate_brute(u: &GridFunction, dual: &GridSpec) -> Result<Conjugate> {
    check_dual_covers(u, dual)?;
    Ok(conjugate_brute_unchecked(u, dual))
}

fn conjugate_brute_unchecked(u: &GridFunction, dual: &GridSpec) -> Conjugate {
    let xs = primal_points(u.spec());
    let f = u.values();
    let (values, argmax): (Vec<f64>, Vec<usize>) = (0..dual.len())
        .into_par_iter()
        .map(|k| {
            let t = dual.point_of(k);
            let mut best = f64::NEG_INFINITY;
            let mut arg = 0;
            for (j, x) in xs.iter().enumerate() {
                let v = pair_value(x, &t, f[j]);
                if v > best {
                    best = v;
                    arg = j;
                }
            }
            (best, arg)
        })
        .unzip();
    Conjugate {
        values: GridFunction::new(dual.clone(), values).expect("finite max of finite values"),
        argmax,
    }
}

pub fn legendre_transform_brute(u: &GridFunction, dual: &GridSpec) -> Result<GridFunction> {
    Ok(conjugate_brute(u, dual)?.values)
}

/// Upper envelope of the lines `t -> x_j t + w_j`, evaluated at ascending `ts`.
/// Writes the envelope value and the smallest maximizing `j` for each `t`.
fn envelope_line(xs: &[f64], w: &[f64], ts: &[f64], out_v: &mut [f64], out_j: &mut [u32], hull: &mut Vec<usize>) {
    hull.clear();
    for j in 0..xs.len() {
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            let cross = (xs[b] - xs[a]) * (w[j] - w[a]) - (w[b] - w[a]) * (xs[j] - xs[a]);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(j);
    }
    let mut p = 0;
    for (k, &t) in ts.iter().enumerate() {
        while p + 1 < hull.len() {
            let cur = xs[hull[p]] * t + w[hull[p]];
            let next = xs[hull[p + 1]] * t + w[hull[p + 1]];
            if next > cur {
                p += 1;
            } else {
                break;
            }
        }
        out_v[k] = xs[hull[p]] * t + w[hull[p]];
        out_j[k] = hull[p] as u32;
    }
}

/// Fast separable transform. Agrees with [`conjugate_brute`] up to rounding in near ties.
pub fn conjugate_with_argmax(u: &GridFunction, dual: &GridSpec) -> Result<Conjugate> {
    check_dual_covers(u, dual)?;
    Ok(conjugate_fast_unchecked(u, dual))
}

/// Refined conjugate on a dual grid inside the slope range (no covering check).
pub(crate) fn refined_conjugate_inside(u: &GridFunction, dual: &GridSpec) -> Result<Conjugate> {
    if dual.dim() != u.dim() {
        return Err(Error::DimensionMismatch { expected: u.dim(), got: dual.dim() });
    }
    let conj = conjugate_fast_unchecked(u, dual);
    let values = refine_conjugate(u, &conj);
    Ok(Conjugate { values, argmax: conj.argmax })
}

fn conjugate_fast_unchecked(u: &GridFunction, dual: &GridSpec) -> Conjugate {
    let spec = u.spec();
    let n = spec.dim();
    let m = spec.points_per_axis();
    let md = dual.points_per_axis();

    // Stage arrays are processed from the last axis to the first.
    let mut current: Vec<f64> = u.values().iter().map(|v| -v).collect();
    let mut stage_args: Vec<Vec<u32>> = vec![Vec::new(); n];
    let mut hull = Vec::with_capacity(m);
    let mut line_w = vec![0.0; m];
    let mut line_v = vec![0.0; md];
    let mut line_j = vec![0u32; md];
    for axis in (0..n).rev() {
        let xs = spec.axis_coords(axis);
        let ts = dual.axis_coords(axis);
        let outer = m.pow(axis as u32);
        let inner = md.pow((n - 1 - axis) as u32);
        let mut next = vec![0.0; outer * md * inner];
        let mut args = vec![0u32; outer * md * inner];
        for o in 0..outer {
            for i in 0..inner {
                for j in 0..m {
                    line_w[j] = current[(o * m + j) * inner + i];
                }
                envelope_line(&xs, &line_w, &ts, &mut line_v, &mut line_j, &mut hull);
                for k in 0..md {
                    next[(o * md + k) * inner + i] = line_v[k];
                    args[(o * md + k) * inner + i] = line_j[k];
                }
            }
        }
        stage_args[axis] = args;
        current = next;
    }

    let f = u.values();
    let mut values = Vec::with_capacity(dual.len());
    let mut argmax = Vec::with_capacity(dual.len());
    let mut jidx = vec![0usize; n];
    for k in 0..dual.len() {
        let kidx = dual.multi_index(k);
        for axis in 0..n {
            let mut o = 0;
            for &j in &jidx[..axis] {
                o = o * m + j;
            }
            let mut rest = 0;
            for &kk in &kidx[axis..] {
                rest = rest * md + kk;
            }
            jidx[axis] = stage_args[axis][o * md.pow((n - axis) as u32) + rest] as usize;
        }
        let flat = spec.flat(&jidx);
        values.push(pair_value(&spec.point(&jidx), &dual.point(&kidx), f[flat]));
        argmax.push(flat);
    }
    Conjugate {
        values: GridFunction::new(dual.clone(), values).expect("finite max of finite values"),
        argmax,
    }
}

/// Discrete Legendre transform of `u` sampled on `dual`.
pub fn legendre_transform(u: &GridFunction, dual: &GridSpec) -> Result<GridFunction> {
    Ok(conjugate_with_argmax(u, dual)?.values)
}

/// Central gradient and value at an interior node.
pub(crate) fn gradient_and_value(u: &GridFunction, flat: usize) -> (Vec<f64>, f64) {
    (gradient_at_flat(u, flat), u.at_flat(flat))
}

/// Cholesky factor of a positive definite matrix, row-major lower triangle.
fn cholesky(m: &SymmetricMatrix) -> Option<Vec<f64>> {
    let n = m.dim();
    let scale = (0..n).fold(0.0f64, |a, i| a.max(m.get(i, i).abs())).max(1.0);
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut v = m.get(i, j);
            for k in 0..j {
                v -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if v <= 1e-12 * scale {
                    return None;
                }
                l[i * n + i] = v.sqrt();
            } else {
                l[i * n + j] = v / l[j * n + j];
            }
        }
    }
    Some(l)
}

fn cholesky_solve(l: &[f64], r: &[f64]) -> Vec<f64> {
    let n = r.len();
    let mut y = r.to_vec();
    for i in 0..n {
        for k in 0..i {
            y[i] -= l[i * n + k] * y[k];
        }
        y[i] /= l[i * n + i];
    }
    for i in (0..n).rev() {
        for k in (i + 1)..n {
            y[i] -= l[k * n + i] * y[k];
        }
        y[i] /= l[i * n + i];
    }
    y
}

const BOX_SWEEPS: usize = 200;
const REACH: usize = 1;
const TRUST: f64 = 0.5;

/// `max r.d - d^T H d / 2` over the box `|d_a| <= w`, for positive definite `H`.
fn box_gain(hess: &SymmetricMatrix, l: &[f64], r: &[f64], w: f64) -> f64 {
    let n = r.len();
    let mut d = cholesky_solve(l, r);
    if d.iter().all(|v| v.abs() <= w) {
        return 0.5 * r.iter().zip(&d).map(|(a, b)| a * b).sum::<f64>();
    }
    // projected coordinate descent from the clamped unconstrained optimum
    for v in d.iter_mut() {
        *v = v.clamp(-w, w);
    }
    for _ in 0..BOX_SWEEPS {
        let mut moved = 0.0f64;
        for a in 0..n {
            let mut g = r[a];
            for b in 0..n {
                if b != a {
                    g -= hess.get(a, b) * d[b];
                }
            }
            let new = (g / hess.get(a, a)).clamp(-w, w);
            moved = moved.max((new - d[a]).abs());
            d[a] = new;
        }
        if moved <= 1e-15 * w {
            break;
        }
    }
    let mut q = 0.0;
    for a in 0..n {
        for b in 0..n {
            q += d[a] * hess.get(a, b) * d[b];
        }
    }
    r.iter().zip(&d).map(|(a, b)| a * b).sum::<f64>() - 0.5 * q
}

/// Local quadratic model of `u` at an interior node.
struct NodeModel {
    point: Vec<f64>,
    value: f64,
    grad: Vec<f64>,
    hess: SymmetricMatrix,
    chol: Vec<f64>,
}

fn node_model(u: &GridFunction, node: usize) -> Option<NodeModel> {
    let mut hess = hessian_at_flat(u, node);
    let chol = match cholesky(&hess) {
        Some(l) => l,
        None => {
            // indefinite second differences at a kink: keep the convex part
            let sp = eigen_sym(&hess).ok()?;
            let floor = 1e-9 * sp.max().abs().max(1.0);
            let clipped = Spectrum { values: sp.values.iter().map(|v| v.max(floor)).collect(), vectors: sp.vectors };
            hess = clipped.reconstruct();
            cholesky(&hess)?
        }
    };
    Some(NodeModel {
        point: u.spec().point_of(node),
        value: u.at_flat(node),
        grad: gradient_at_flat(u, node),
        hess,
        chol,
    })
}

/// Interior nodes within `REACH` of `j` in every axis.
fn neighbours(spec: &GridSpec, j: usize) -> Vec<usize> {
    let n = spec.dim();
    let m = spec.points_per_axis();
    let center = spec.multi_index(j);
    let mut idx = vec![0usize; n];
    let mut out = Vec::new();
    'cand: for code in 0..(2 * REACH + 1).pow(n as u32) {
        let mut c = code;
        for a in 0..n {
            let off = (c % (2 * REACH + 1)) as isize - REACH as isize;
            c /= 2 * REACH + 1;
            let i = center[a] as isize + off;
            if i < 1 || i as usize >= m - 1 {
                continue 'cand;
            }
            idx[a] = i as usize;
        }
        out.push(spec.flat(&idx));
    }
    out
}

/// Second-order correction of a discrete sup at dual point `t`.
///
/// Each candidate node carries the quadratic model of `u` built from its central
/// differences, trusted on the box of half-width `h / 2` around the node. The
/// refined value is the largest model sup, so it is a sup of affine functions of
/// `t` and stays convex and continuous across changes of the maximizer.
fn refine_with<'a>(t: &[f64], w: f64, discrete: f64, models: impl Iterator<Item = &'a NodeModel>) -> f64 {
    let mut best = discrete;
    let mut r = vec![0.0; t.len()];
    for md in models {
        for a in 0..t.len() {
            r[a] = t[a] - md.grad[a];
        }
        let base = pair_value(&md.point, t, md.value);
        best = best.max(base + box_gain(&md.hess, &md.chol, &r, w));
    }
    best
}

/// Replaces each discrete sup by its local second-order refinement.
pub fn refine_conjugate(u: &GridFunction, conj: &Conjugate) -> GridFunction {
    let spec = u.spec();
    let dual = conj.values.spec();
    let w = TRUST * spec.spacing();
    let mut needed = vec![false; spec.len()];
    for &j in &conj.argmax {
        for node in neighbours(spec, j) {
            needed[node] = true;
        }
    }
    let models: Vec<Option<NodeModel>> = needed
        .par_iter()
        .enumerate()
        .map(|(node, &need)| if need { node_model(u, node) } else { None })
        .collect();
    let values: Vec<f64> = (0..dual.len())
        .into_par_iter()
        .map(|k| {
            let cands = neighbours(spec, conj.argmax[k]);
            let it = cands.iter().filter_map(|&node| models[node].as_ref());
            refine_with(&dual.point_of(k), w, conj.values.at_flat(k), it)
        })
        .collect();
    GridFunction::new(dual.clone(), values).expect("refined values finite")
}

/// Fast transform followed by the second-order refinement.
///
/// The plain nodal sup is piecewise affine in the dual variable, so its second
/// differences are O(1) noise; the refinement restores O(h) accurate Hessians
/// for smooth strictly convex input and is exact on quadratics.
pub fn refined_conjugate(u: &GridFunction, dual: &GridSpec) -> Result<Conjugate> {
    let conj = conjugate_with_argmax(u, dual)?;
    let values = refine_conjugate(u, &conj);
    Ok(Conjugate { values, argmax: conj.argmax })
}

/// Refined conjugate at an arbitrary dual point (exhaustive discrete search).
pub fn conjugate_at(u: &GridFunction, t: &[f64]) -> f64 {
    let spec = u.spec();
    let f = u.values();
    let mut best = f64::NEG_INFINITY;
    let mut arg = 0;
    for j in 0..spec.len() {
        let v = pair_value(&spec.point_of(j), t, f[j]);
        if v > best {
            best = v;
            arg = j;
        }
    }
    let models: Vec<NodeModel> = neighbours(spec, arg).into_iter().filter_map(|node| node_model(u, node)).collect();
    refine_with(t, TRUST * spec.spacing(), best, models.iter())
}
