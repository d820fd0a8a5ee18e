//! Fixed-seed property suites with measured values against bounds.

use std::f64::consts::FRAC_PI_4;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::convex_transform::{
    auxiliary_potential, common_nodes, conjugate_brute, conjugate_with_argmax, convexity_check,
    convexity_check_where, covering_dual_spec, inverse_rotate, legendre_transform, lewy_yuan_rotate,
    refined_conjugate, rotated_auxiliary, COS, SIN,
};
use crate::diagnostics::{
    dual_convexity_check, geometric_radii, holder_exponent_fit, rank_field_default, vmo_modulus, DualVerdict,
    HessianField,
};
use crate::error::{Error, Result};
use crate::grid_core::{eigen_sym, eigenvalues, hessian_central, lagrangian_angle};
use crate::soliton_profiles::{build_rotated_rotator, build_singular_rotator_with, rotator_profile, SingularOptions};
use crate::viscosity_solver::{
    default_dt, flow_step, residual_field_with, solve_dirichlet, stability_bound, sup_where, SolveParams, Stencil,
};
use crate::{GridFunction, GridSpec, PhaseSpec, SymmetricMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Duality,
    Rotation,
    Solver,
    Profile,
    Diagnostics,
    All,
}

impl Suite {
    pub const NAMES: [&'static str; 6] = ["duality", "rotation", "solver", "profile", "diagnostics", "all"];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Duality => "duality",
            Suite::Rotation => "rotation",
            Suite::Solver => "solver",
            Suite::Profile => "profile",
            Suite::Diagnostics => "diagnostics",
            Suite::All => "all",
        }
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "duality" => Suite::Duality,
            "rotation" => Suite::Rotation,
            "solver" => Suite::Solver,
            "profile" => Suite::Profile,
            "diagnostics" => Suite::Diagnostics,
            "all" => Suite::All,
            other => {
                return Err(Error::Config(format!(
                    "unknown suite {other:?}; expected one of {}",
                    Suite::NAMES.join(", ")
                )))
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    AtMost,
    AtLeast,
}

/// One measured quantity against its bound.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub suite: &'static str,
    pub name: String,
    pub measured: f64,
    pub relation: Relation,
    pub bound: f64,
    pub pass: bool,
}

impl Check {
    fn at_most(suite: &'static str, name: impl Into<String>, measured: f64, bound: f64) -> Self {
        let pass = measured <= bound;
        Self { suite, name: name.into(), measured, relation: Relation::AtMost, bound, pass }
    }

    fn at_least(suite: &'static str, name: impl Into<String>, measured: f64, bound: f64) -> Self {
        let pass = measured >= bound;
        Self { suite, name: name.into(), measured, relation: Relation::AtLeast, bound, pass }
    }

    /// A yes/no property reported as 1 (holds) or 0 against the bound 1.
    fn holds(suite: &'static str, name: impl Into<String>, ok: bool) -> Self {
        Self::at_least(suite, name, if ok { 1.0 } else { 0.0 }, 1.0)
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rel = match self.relation {
            Relation::AtMost => "<=",
            Relation::AtLeast => ">=",
        };
        write!(
            f,
            "{:<12} {:<46} {:>11.4e} {} {:<11.4e} {}",
            self.suite,
            self.name,
            self.measured,
            rel,
            self.bound,
            if self.pass { "pass" } else { "FAIL" }
        )
    }
}

/// Header and one row per check.
pub fn format_table(checks: &[Check]) -> String {
    let mut out = format!("{:<12} {:<46} {:>11} {:<14} {}\n", "suite", "check", "measured", "   bound", "result");
    for c in checks {
        out.push_str(&c.to_string());
        out.push('\n');
    }
    let failed = checks.iter().filter(|c| !c.pass).count();
    out.push_str(&format!("{} checks, {} failed\n", checks.len(), failed));
    out
}

pub fn run(suite: Suite) -> Result<Vec<Check>> {
    match suite {
        Suite::Duality => duality(),
        Suite::Rotation => rotation(),
        Suite::Solver => solver(),
        Suite::Profile => profile(),
        Suite::Diagnostics => diagnostics(),
        Suite::All => {
            let mut all = Vec::new();
            for s in [Suite::Duality, Suite::Rotation, Suite::Solver, Suite::Profile, Suite::Diagnostics] {
                all.extend(run(s)?);
            }
            Ok(all)
        }
    }
}

fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

fn quadratic_form(a: &SymmetricMatrix, x: &[f64]) -> f64 {
    0.5 * x.iter().zip(a.mul_vec(x)).map(|(s, t)| s * t).sum::<f64>()
}

fn power(n: usize, m: usize, p: f64) -> Result<GridFunction> {
    GridFunction::from_fn(GridSpec::centered(n, 1.0, m)?, |x| norm2(x).sqrt().powf(p) / p)
}

/// Interior error of the nodal transform of `|x|^p/p` against `|t|^q/q`.
fn power_duality_error(n: usize, p: f64, m: usize) -> Result<(f64, f64)> {
    let q = p / (p - 1.0);
    let u = power(n, m, p)?;
    let spec = u.spec();
    let dual = covering_dual_spec(&u, spec.spacing())?;
    let conj = conjugate_with_argmax(&u, &dual)?;
    let mut worst = 0.0f64;
    for k in 0..dual.len() {
        if spec.is_interior(&spec.multi_index(conj.argmax[k]), 1) {
            let exact = norm2(&dual.point_of(k)).sqrt().powf(q) / q;
            worst = worst.max((conj.values.at_flat(k) - exact).abs());
        }
    }
    Ok((worst, spec.spacing()))
}

fn duality() -> Result<Vec<Check>> {
    const S: &str = "duality";
    let mut out = Vec::new();

    let f = |x: &[f64]| 0.5 * norm2(x) + 0.1 * (x[0] + 0.3).powi(4) + (1.0 + (x[0] - x[x.len() - 1]).exp()).ln();
    let u = GridFunction::from_fn(GridSpec::centered(2, 1.0, 31)?, f)?;
    let dual = covering_dual_spec(&u, u.spec().spacing())?;
    let fast = legendre_transform(&u, &dual)?;
    let brute = conjugate_brute(&u, &dual)?.values;
    out.push(Check::at_most(S, "fast transform minus brute force", fast.max_abs_diff(&brute), 0.0));

    let u = GridFunction::from_fn(GridSpec::centered(1, 1.0, 401)?, f)?;
    let h = u.spec().spacing();
    let us = legendre_transform(&u, &covering_dual_spec(&u, h)?)?;
    let uss = legendre_transform(&us, u.spec())?;
    let spec = u.spec();
    let mut above = 0.0f64;
    let mut gap = 0.0f64;
    for j in 0..spec.len() {
        let d = uss.at_flat(j) - u.at_flat(j);
        above = above.max(d);
        if spec.is_interior(&spec.multi_index(j), 1) {
            gap = gap.max(-d);
        }
    }
    out.push(Check::at_most(S, "biconjugate excess over u", above, 1e-12));
    out.push(Check::at_most(S, "biconjugate interior gap (h = 5e-3)", gap, h));

    let v = u.map(|x, w| w + 0.05 * (1.0 + (7.0 * x[0]).sin()))?;
    let mut dual = covering_dual_spec(&v, h)?;
    let du = covering_dual_spec(&u, h)?;
    if du.lo()[0] < dual.lo()[0] || du.hi(0) > dual.hi(0) {
        let lo = du.lo()[0].min(dual.lo()[0]);
        let hi = du.hi(0).max(dual.hi(0));
        dual = GridSpec::new(vec![lo], h, ((hi - lo) / h).ceil() as usize + 1)?;
    }
    let (a, b) = (legendre_transform(&u, &dual)?, legendre_transform(&v, &dual)?);
    let flips = (0..dual.len()).filter(|&k| a.at_flat(k) < b.at_flat(k)).count();
    out.push(Check::at_most(S, "order reversal violations", flips as f64, 0.0));

    for (n, p, m, c) in [(1usize, 4.0 / 3.0, 401usize, 3.0), (1, 3.0, 401, 3.0), (2, 4.0 / 3.0, 101, 5.0)] {
        let (e, h) = power_duality_error(n, p, m)?;
        out.push(Check::at_most(S, format!("power duality p = {p:.4}, n = {n}, h = {h}"), e, c * h));
    }
    Ok(out)
}

fn random_quadratic(n: usize, lo: f64, hi: f64, rng: &mut ChaCha8Rng) -> Result<(SymmetricMatrix, Vec<f64>)> {
    let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
    let q = eigen_sym(&SymmetricMatrix::from_rows(&rows))?.vectors;
    let lambda: Vec<f64> = (0..n).map(|_| rng.gen_range(lo..hi)).collect();
    let a = SymmetricMatrix::from_fn(n, |i, j| (0..n).map(|k| q[k][i] * lambda[k] * q[k][j]).sum());
    Ok((a, lambda))
}

fn rotated_spectra(g: &GridFunction) -> Result<Vec<Vec<f64>>> {
    g.spec()
        .interior_indices(1)
        .into_iter()
        .map(|f| eigenvalues(&hessian_central(g, &g.spec().multi_index(f))?))
        .collect()
}

fn rotation() -> Result<Vec<Check>> {
    const S: &str = "rotation";
    let mut out = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(11);

    let h = 0.01;
    for (n, half) in [(1usize, 1.0), (2, 0.25)] {
        let spec = GridSpec::centered(n, half, (2.0 * half / h).round() as usize + 1)?;
        let mut worst = 0.0f64;
        for _ in 0..5 {
            let (a, lambda) = random_quadratic(n, 0.2, 5.0, &mut rng)?;
            let u = GridFunction::from_fn(spec.clone(), |x| quadratic_form(&a, x))?;
            let r = lewy_yuan_rotate(&u)?;
            let mut want: Vec<f64> = lambda.iter().map(|l| l.atan() - FRAC_PI_4).collect();
            want.sort_by(f64::total_cmp);
            for ev in rotated_spectra(&r.grid)? {
                for (l, w) in ev.iter().zip(&want) {
                    worst = worst.max((l.atan() - w).abs());
                }
            }
        }
        out.push(Check::at_most(S, format!("angle shift by pi/4, n = {n}, h = {h}"), worst, 5.0 * h));
    }

    let mut extreme = 0.0f64;
    let mut bound = 0.0f64;
    for n in [1usize, 2] {
        let spec = if n == 1 { GridSpec::centered(1, 1.0, 201)? } else { GridSpec::centered(2, 0.5, 51)? };
        let (a, _) = random_quadratic(n, 0.0, 4.0, &mut rng)?;
        let c: Vec<f64> = (0..n).map(|_| rng.gen_range(-0.3..0.3)).collect();
        let u = GridFunction::from_fn(spec.clone(), |x| {
            let r = x.iter().zip(&c).map(|(s, t)| (s - t).powi(2)).sum::<f64>().sqrt();
            quadratic_form(&a, x) + 0.5 * r.powf(1.5) / 1.5
        })?;
        for ev in rotated_spectra(&lewy_yuan_rotate(&u)?.grid)? {
            extreme = extreme.max(ev.iter().fold(0.0f64, |m, l| m.max(l.abs())));
        }
        bound = f64::max(bound, 1.0 + 10.0 * spec.spacing());
    }
    out.push(Check::at_most(S, "rotated Hessian spectrum radius", extreme, bound));

    let u = GridFunction::from_fn(GridSpec::centered(2, 1.0, 41)?, |x| 0.5 * norm2(x))?;
    let r = lewy_yuan_rotate(&u)?;
    out.push(Check::at_most(S, "half square rotates to zero", sup_where(&r.grid, |_| true), 1e-12));

    let f = |x: &[f64]| 0.5 * x[0] * x[0] + x.get(1).map_or(0.0, |y| y * y) + 0.05 * (x[0] + 0.5).powi(4);
    let grad = |x: &[f64]| -> Vec<f64> {
        let mut g = vec![x[0] + 0.2 * (x[0] + 0.5).powi(3)];
        if let Some(y) = x.get(1) {
            g.push(2.0 * y);
        }
        g
    };
    for (n, m) in [(1usize, 201usize), (2, 81)] {
        let spec = GridSpec::centered(n, 1.0, m)?;
        let h = spec.spacing();
        let u = GridFunction::from_fn(spec.clone(), f)?;
        let r = lewy_yuan_rotate(&u)?;
        let back = inverse_rotate(&r)?;
        let rot = r.grid.spec();
        let margin = 2.0 * rot.spacing();
        let worst = common_nodes(back.spec(), &spec, 2.0 * h)
            .into_iter()
            .filter(|&j| {
                let x = back.spec().point_of(j);
                let xbar: Vec<f64> = x.iter().zip(grad(&x)).map(|(a, b)| COS * a + SIN * b).collect();
                (0..n).all(|a| xbar[a] >= rot.lo()[a] + margin && xbar[a] <= rot.hi(a) - margin)
            })
            .map(|j| (back.at_flat(j) - f(&back.spec().point_of(j))).abs())
            .fold(0.0, f64::max);
        out.push(Check::at_most(S, format!("rotate then invert, n = {n}, h = {h}"), worst, h));
    }
    Ok(out)
}

/// `x.Ax/2 + eps (x1^4 + x1^2 x2^2)` and its exact Hessian.
fn perturbed(x: &[f64]) -> (f64, SymmetricMatrix) {
    let (x1, x2) = (x[0], x[1]);
    let eps = 0.3;
    let u = 0.5 * (1.2 * x1 * x1 + 0.6 * x1 * x2 + 0.8 * x2 * x2) + eps * (x1.powi(4) + x1 * x1 * x2 * x2);
    let hess = SymmetricMatrix::from_rows(&[
        vec![1.2 + eps * (12.0 * x1 * x1 + 2.0 * x2 * x2), 0.3 + eps * 4.0 * x1 * x2],
        vec![0.3 + eps * 4.0 * x1 * x2, 0.8 + eps * 2.0 * x1 * x1],
    ]);
    (u, hess)
}

fn solver() -> Result<Vec<Check>> {
    const S: &str = "solver";
    let mut out = Vec::new();

    let a = SymmetricMatrix::from_rows(&[vec![1.5, 0.4], vec![0.4, 0.7]]);
    let spec = GridSpec::centered(2, 1.0, 21)?;
    let h = spec.spacing();
    let exact = GridFunction::from_fn(spec.clone(), |x| quadratic_form(&a, x))?;
    let zero = GridFunction::from_fn(spec.clone(), |_| 0.0)?;
    let phase = PhaseSpec::constant(lagrangian_angle(&a)?)?;
    let params = SolveParams { dt: 0.95 * stability_bound(&spec), max_iters: 200_000, tol: 1e-13, stencil: Stencil::Central };
    let (u, report) = solve_dirichlet(&exact, &zero, &phase, &params)?;
    out.push(Check::holds(S, "quadratic Dirichlet problem converges", report.converged));
    out.push(Check::at_most(S, "quadratic Dirichlet error", u.max_abs_diff(&exact), 1e-6));
    out.push(Check::at_least(S, "solution min Hessian eigenvalue", convexity_check(&u, 10.0 * h).min_eigenvalue, -10.0 * h));

    let spec1 = GridSpec::centered(1, 1.0, 41)?;
    let exact1 = GridFunction::from_fn(spec1.clone(), |x| x[0] * x[0])?;
    let zero1 = GridFunction::from_fn(spec1.clone(), |_| 0.0)?;
    let params1 = SolveParams { dt: 0.95 * stability_bound(&spec1), max_iters: 200_000, tol: 1e-14, stencil: Stencil::Central };
    let (u1, _) = solve_dirichlet(&exact1, &zero1, &PhaseSpec::constant(2f64.atan())?, &params1)?;
    out.push(Check::at_most(S, "one-dimensional u'' = 2 error", u1.max_abs_diff(&exact1), 1e-8));

    let step = flow_step(&exact, &phase, &SolveParams::for_grid(&spec))?;
    out.push(Check::at_most(S, "exact solution moves under one step", step.max_abs_diff(&exact), 1e-15));

    let mut sups = Vec::new();
    for h in [0.1f64, 0.05, 0.025] {
        let g = GridSpec::centered(2, 1.0, (2.0 / h).round() as usize + 1)?;
        let w = GridFunction::from_fn(g, |x| perturbed(x).0)?;
        let res = residual_field_with(&w, &Stencil::Central, |x: &[f64], _, _| lagrangian_angle(&perturbed(x).1))?;
        sups.push((h, sup_where(&res, |x| x.iter().all(|v| v.abs() <= 0.5))));
    }
    let slope = sups
        .windows(2)
        .map(|w| (w[0].1 / w[1].1).ln() / (w[0].0 / w[1].0).ln())
        .fold(f64::INFINITY, f64::min);
    out.push(Check::at_least(S, "central residual order", slope, 1.9));

    let spec = GridSpec::centered(2, 1.0, 11)?;
    let u = GridFunction::from_fn(spec.clone(), |x| 0.5 * norm2(x) + 0.2 * x[0] * x[1])?;
    let v = u.map(|x, w| w + 0.04 * (1.0 - x[0] * x[0]) * (1.0 - x[1] * x[1]) * (1.0 + (9.0 * x[0]).sin()))?;
    let phase = PhaseSpec::self_similar(1.0, 0.5)?;
    let wide = SolveParams { dt: default_dt(&spec), max_iters: 1, tol: 1e-12, stencil: Stencil::wide(2) };
    let (su, sv) = (flow_step(&u, &phase, &wide)?, flow_step(&v, &phase, &wide)?);
    let flips = (0..spec.len()).filter(|&j| su.at_flat(j) > sv.at_flat(j) + 1e-12).count();
    out.push(Check::at_most(S, "wide-stencil comparison violations", flips as f64, 0.0));
    Ok(out)
}

fn profile() -> Result<Vec<Check>> {
    const S: &str = "profile";
    let mut out = Vec::new();
    for (n, a) in [(1usize, -1.0), (2, -0.5), (3, -0.25)] {
        let p = rotator_profile(n, a, 0.125, 4000)?;
        out.push(Check::at_most(S, format!("f''(0) - 4a/(n+2), n = {n}, a = {a}"), (p.fpp0() - 4.0 * a / (n as f64 + 2.0)).abs(), 1e-10));
        out.push(Check::at_most(S, format!("ODE residual on [0, 0.125], n = {n}"), p.max_residual()?, 1e-8));
        let half = if n == 3 { 0.2 } else { 0.35 };
        let grid = GridSpec::centered(n, half, 29)?;
        let h = grid.spacing();
        let big = rotated_auxiliary(&build_rotated_rotator(&p, &grid)?);
        let rep = convexity_check_where(&big, 0.0, |x| norm2(x).sqrt() >= 2.0 * h);
        out.push(Check::holds(S, format!("Ubar strictly convex off the origin, n = {n}"), rep.min_eigenvalue > 0.0));
    }
    let p = rotator_profile(1, -1.0, 0.125, 4000)?;
    let g = GridSpec::centered(1, 0.5, 2001)?;
    let opts = SingularOptions { primal_points: Some(20001), ..SingularOptions::default() };
    let u = build_singular_rotator_with(&p, &g, &opts)?;
    let fit = holder_exponent_fit(&auxiliary_potential(&u), &[0.0], &geometric_radii(0.004, 2.0, 6))?;
    out.push(Check::at_most(S, "Hoelder exponent of U at 0 minus 4/3, n = 1", (fit.exponent - 4.0 / 3.0).abs(), 0.02));
    Ok(out)
}

fn diagnostics() -> Result<Vec<Check>> {
    const S: &str = "diagnostics";
    let mut out = Vec::new();
    let radii = geometric_radii(0.8, 2.0, 5);
    for g in [1.5, 2.0] {
        let fit = holder_exponent_fit(&power(1, 4001, g)?, &[0.0], &radii)?;
        out.push(Check::at_most(S, format!("Hoelder exponent of |x|^{g}/{g} error"), (fit.exponent - g).abs(), 0.02));
    }

    let spec = GridSpec::centered(2, 1.0, 41)?;
    let field = HessianField::from_fn(spec.clone(), |x| SymmetricMatrix::diagonal(&[x[0].abs().sqrt(), x[1].signum()]))?;
    let base = vmo_modulus(&field, &[0.2]);
    let scaled = vmo_modulus(&field.scale(3.5), &[0.2]);
    out.push(Check::at_most(S, "VMO modulus scaling defect", (scaled[0].modulus - 3.5 * base[0].modulus).abs(), 1e-12));

    let r1 = rank_field_default(&GridFunction::from_fn(spec.clone(), |x| 0.5 * x[0] * x[0])?);
    out.push(Check::holds(S, "x1^2/2 has constant rank 1", r1.constant && r1.ranks[0] == 1));
    let r2 = rank_field_default(&GridFunction::from_fn(spec.clone(), |x| norm2(x).powi(2) / 4.0)?);
    out.push(Check::holds(S, "|x|^4/4 has non-constant rank", !r2.constant));

    let quad = dual_convexity_check(&GridFunction::from_fn(spec, |x| 0.5 * norm2(x))?, 0.5, 0.5)?;
    out.push(Check::holds(S, "quadratic dual is strongly convex", quad.verdict == DualVerdict::StronglyConvex));
    let beta = 1.0 / 3.0;
    let border = dual_convexity_check(&power(1, 20001, 1.0 + beta)?, 2.0, beta)?;
    out.push(Check::holds(S, "|x|^(4/3) dual classified borderline", border.verdict == DualVerdict::Borderline));
    out.push(Check::at_most(S, "borderline flatness minus 1 + 1/beta", (border.flatness - 4.0).abs(), 0.05));

    let radii = geometric_radii(0.8, 1.6, 5);
    let mut worst = 0.0f64;
    for beta in [1.0 / 3.0, 0.5, 0.8] {
        let u = power(1, 4001, 1.0 + beta)?;
        let primal = holder_exponent_fit(&u, &[0.0], &radii)?.exponent;
        let dual = refined_conjugate(&u, &covering_dual_spec(&u, u.spec().spacing())?)?.values;
        let conj = holder_exponent_fit(&dual, &[0.0], &radii)?.exponent;
        worst = worst.max(((primal - 1.0) * (conj - 1.0) - 1.0).abs());
    }
    out.push(Check::at_most(S, "exponent duality (p-1)(q-1) - 1", worst, 0.05));
    Ok(out)
}
