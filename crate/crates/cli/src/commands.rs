use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use lmcflow_core::convex_transform::{
    inverse_rotate_with, lewy_yuan_rotate_with, InverseOptions, RotateOptions, RotatedPotential,
};
use lmcflow_core::diagnostics::{
    dual_convexity_check, geometric_radii, holder_exponent_fit, rank_field, vmo_modulus, HessianField,
};
use lmcflow_core::grid_core::{fmt_f64, gradient_central, grid_to_string, read_grid_file};
use lmcflow_core::phase_models::{phase_range_check, PhasePoint};
use lmcflow_core::soliton_profiles::{build_singular_rotator_with, rotator_profile, SingularOptions};
use lmcflow_core::viscosity_solver::{default_dt, solve_dirichlet, SolveParams, Stencil, WideStencil};
use lmcflow_core::{Error, GridFunction, GridSpec, PhaseSpec, PhaseTable, Result, SymmetricMatrix};

use crate::config::RunConfig;

fn invalid(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

/// What a command produced.
pub struct Outcome {
    pub text: String,
    /// Set when a solve stopped at its iteration cap.
    pub not_converged: bool,
}

impl Outcome {
    fn done(text: String) -> Self {
        Self { text, not_converged: false }
    }
}

fn footer(text: &mut String, pairs: &[(&str, String)]) {
    for (k, v) in pairs {
        let _ = writeln!(text, "# {k}={v}");
    }
}

fn grid_text(u: &GridFunction, pairs: &[(&str, String)]) -> String {
    let mut text = grid_to_string(u);
    footer(&mut text, pairs);
    text
}

pub fn grid_spec(cfg: &RunConfig) -> Result<GridSpec> {
    let n: usize = cfg.require("grid.n")?;
    let m: usize = cfg.require("grid.m")?;
    match (cfg.get::<f64>("grid.h")?, cfg.list("grid.lo")?) {
        (Some(h), Some(lo)) => {
            let lo = match lo.len() {
                1 => vec![lo[0]; n],
                k if k == n => lo,
                k => return Err(invalid(format!("grid.lo has {k} entries, grid.n = {n}"))),
            };
            GridSpec::new(lo, h, m)
        }
        (None, None) => GridSpec::centered(n, cfg.get_or("grid.half_width", 1.0)?, m),
        _ => Err(invalid("grid.h and grid.lo go together; omit both for a centered grid")),
    }
}

fn vector(cfg: &RunConfig, key: &str, n: usize) -> Result<Vec<f64>> {
    match cfg.list(key)? {
        None => Ok(vec![0.0; n]),
        Some(v) if v.len() == 1 => Ok(vec![v[0]; n]),
        Some(v) if v.len() == n => Ok(v),
        Some(v) => Err(invalid(format!("{key} has {} entries, expected {n}", v.len()))),
    }
}

pub fn phase_spec(cfg: &RunConfig, n: usize) -> Result<PhaseSpec> {
    let variant: String = cfg.require("phase.variant")?;
    let c = || cfg.get_or("phase.c", 0.0);
    let spec = match variant.as_str() {
        "constant" => PhaseSpec::constant(c()?)?,
        "self_similar" => PhaseSpec::self_similar(c()?, cfg.require("phase.b")?)?,
        "translator" => PhaseSpec::translator(c()?, vector(cfg, "phase.k", n)?, vector(cfg, "phase.l", n)?)?,
        "rotator" => PhaseSpec::rotator(c()?, cfg.require("phase.a")?)?,
        "singular" => PhaseSpec::singular(cfg.get_or("phase.n", n)?, cfg.require("phase.beta")?)?,
        "tabulated" => {
            let path = cfg.path("phase.table").ok_or_else(|| invalid("tabulated phase needs phase.table"))?;
            PhaseSpec::tabulated(PhaseTable::read(&path)?)
        }
        other => {
            return Err(invalid(format!(
                "phase.variant {other:?}: expected constant, self_similar, translator, rotator, singular or tabulated"
            )))
        }
    };
    spec.validate(n)?;
    Ok(spec)
}

fn stencil(cfg: &RunConfig, n: usize) -> Result<Stencil> {
    match cfg.get_or("solve.stencil", "central".to_string())?.as_str() {
        "central" => Ok(Stencil::Central),
        "wide" => match cfg.raw("solve.directions") {
            None => Ok(Stencil::wide(n)),
            Some(text) => {
                let dirs = text
                    .split(';')
                    .map(|d| {
                        d.split(',')
                            .map(|t| t.trim().parse::<i64>().map_err(|_| invalid(format!("solve.directions: bad entry {t:?}"))))
                            .collect::<Result<Vec<_>>>()
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(Stencil::Wide(WideStencil::new(n, dirs)?))
            }
        },
        other => Err(invalid(format!("solve.stencil {other:?}: expected central or wide"))),
    }
}

fn matrix(cfg: &RunConfig, n: usize) -> Result<SymmetricMatrix> {
    let v = cfg.list("boundary.matrix")?.unwrap_or_else(|| vec![1.0]);
    if v.len() == 1 {
        Ok(SymmetricMatrix::diagonal(&vec![v[0]; n]))
    } else if v.len() == n {
        Ok(SymmetricMatrix::diagonal(&v))
    } else if v.len() == n * n {
        let rows: Vec<Vec<f64>> = v.chunks(n).map(<[f64]>::to_vec).collect();
        if (0..n).any(|i| (0..i).any(|j| rows[i][j] != rows[j][i])) {
            return Err(invalid("boundary.matrix is not symmetric"));
        }
        Ok(SymmetricMatrix::from_rows(&rows))
    } else {
        Err(invalid(format!("boundary.matrix needs 1, {n} or {} entries, got {}", n * n, v.len())))
    }
}

/// Boundary data and, for analytic kinds, the exact solution it was sampled from.
fn boundary(cfg: &RunConfig, spec: &GridSpec) -> Result<(GridFunction, bool)> {
    let n = spec.dim();
    match cfg.get_or("boundary.kind", "file".to_string())?.as_str() {
        "quadratic" => {
            let a = matrix(cfg, n)?;
            let u = GridFunction::from_fn(spec.clone(), |x| {
                0.5 * x.iter().zip(a.mul_vec(x)).map(|(s, t)| s * t).sum::<f64>()
            })?;
            Ok((u, true))
        }
        "power" => {
            let beta: f64 = cfg.require("boundary.beta")?;
            if !(beta > 0.0) {
                return Err(invalid(format!("boundary.beta must be positive, got {beta}")));
            }
            let g = 1.0 + beta;
            let u = GridFunction::from_fn(spec.clone(), |x| x.iter().map(|v| v * v).sum::<f64>().sqrt().powf(g) / g)?;
            Ok((u, true))
        }
        "file" => {
            let path = cfg.path("boundary.file").ok_or_else(|| invalid("boundary.kind = file needs boundary.file"))?;
            let u = read_grid_file(&path)?.grid;
            if !u.spec().same_shape(spec) {
                return Err(invalid(format!("{}: grid does not match the grid block", path.display())));
            }
            Ok((u, false))
        }
        other => Err(invalid(format!("boundary.kind {other:?}: expected quadratic, power or file"))),
    }
}

pub fn solve(cfg: &RunConfig) -> Result<Outcome> {
    let spec = grid_spec(cfg)?;
    let n = spec.dim();
    let phase = phase_spec(cfg, n)?;
    let (bdry, exact) = boundary(cfg, &spec)?;
    let params = SolveParams {
        dt: cfg.get_or("solve.dt", default_dt(&spec))?,
        max_iters: cfg.get_or("solve.max_iters", 200_000)?,
        tol: cfg.get_or("solve.tol", 1e-10)?,
        stencil: stencil(cfg, n)?,
    };
    if !(params.tol > 0.0) {
        return Err(invalid(format!("solve.tol must be positive, got {}", params.tol)));
    }
    let initial = match cfg.path("solve.initial") {
        Some(path) => read_grid_file(&path)?.grid,
        None => GridFunction::from_fn(spec.clone(), |_| 0.0)?,
    };
    let (u, report) = solve_dirichlet(&bdry, &initial, &phase, &params)?;
    let mut pairs = vec![
        ("phase", phase.name().to_string()),
        ("dt", fmt_f64(params.dt)),
        ("iterations", report.iterations.to_string()),
        ("final_update", fmt_f64(report.final_update)),
        ("residual_sup", fmt_f64(report.residual_sup)),
        ("converged", report.converged.to_string()),
    ];
    if exact {
        let err = (0..spec.len())
            .filter(|&j| !spec.is_boundary(&spec.multi_index(j)))
            .map(|j| (u.at_flat(j) - bdry.at_flat(j)).abs())
            .fold(0.0, f64::max);
        pairs.push(("max_error", fmt_f64(err)));
    }
    let range = phase_range_check(&phase, &phase_samples(&u)?)?;
    pairs.push(("phase_min", fmt_f64(range.min)));
    pairs.push(("phase_max", fmt_f64(range.max)));
    pairs.push(("phase_in_range", range.in_range.to_string()));
    Ok(Outcome { text: grid_text(&u, &pairs), not_converged: !report.converged })
}

/// `(x, u, Du)` at interior nodes.
fn phase_samples(u: &GridFunction) -> Result<Vec<PhasePoint>> {
    let spec = u.spec();
    spec.interior_indices(1)
        .into_iter()
        .map(|j| {
            let idx = spec.multi_index(j);
            Ok(PhasePoint { x: spec.point(&idx), u: u.at_flat(j), p: gradient_central(u, &idx)? })
        })
        .collect()
}

fn read_input(cfg: &RunConfig, key: &str) -> Result<GridFunction> {
    let path = cfg.path(key).ok_or_else(|| invalid(format!("missing required key {key}")))?;
    Ok(read_grid_file(&path)?.grid)
}

pub fn rotate(cfg: &RunConfig) -> Result<Outcome> {
    let u = read_input(cfg, "rotate.in")?;
    let defaults = RotateOptions::default();
    let opts = RotateOptions {
        shrink: cfg.get_or("rotate.shrink", defaults.shrink)?,
        dual_spacing: cfg.get("rotate.dual_h")?,
        convexity_tol: defaults.convexity_tol,
    };
    let r = lewy_yuan_rotate_with(&u, &opts)?;
    Ok(Outcome::done(grid_text(&r.grid, &[("shrink", opts.shrink.to_string()), ("scattered_points", r.points.len().to_string())])))
}

pub fn inverse_rotate(cfg: &RunConfig) -> Result<Outcome> {
    let grid = read_input(cfg, "inverse.in")?;
    let opts = InverseOptions {
        floor: cfg.get("inverse.floor")?,
        exclude_radius: cfg.get_or("inverse.exclude_radius", 0.0)?,
        primal_spacing: cfg.get("inverse.primal_h")?,
    };
    let r = RotatedPotential { points: Vec::new(), values: Vec::new(), grid };
    let u = inverse_rotate_with(&r, &opts)?;
    Ok(Outcome::done(grid_text(&u, &[])))
}

fn profile_of(cfg: &RunConfig) -> Result<lmcflow_core::soliton_profiles::ProfileSolution> {
    rotator_profile(
        cfg.require("profile.n")?,
        cfg.require("profile.a")?,
        cfg.get_or("profile.smax", 0.125)?,
        cfg.get_or("profile.steps", 2000)?,
    )
}

pub fn profile(cfg: &RunConfig) -> Result<Outcome> {
    let p = profile_of(cfg)?;
    let mut text = String::from("s,f,fp,fpp\n");
    for i in 0..p.s.len() {
        let _ = writeln!(text, "{},{},{},{}", fmt_f64(p.s[i]), fmt_f64(p.f[i]), fmt_f64(p.fp[i]), fmt_f64(p.fpp[i]));
    }
    footer(
        &mut text,
        &[
            ("n", p.n.to_string()),
            ("a", p.a.to_string()),
            ("s0", fmt_f64(p.s0)),
            ("fpp0", fmt_f64(p.fpp0())),
            ("max_residual", fmt_f64(p.max_residual()?)),
        ],
    );
    Ok(Outcome::done(text))
}

pub fn singular(cfg: &RunConfig) -> Result<Outcome> {
    let p = profile_of(cfg)?;
    let grid = grid_spec(cfg)?;
    if grid.dim() != p.n {
        return Err(invalid(format!("grid.n = {} but profile.n = {}", grid.dim(), p.n)));
    }
    let defaults = SingularOptions::default();
    let opts = SingularOptions {
        primal_points: cfg.get("singular.primal_points")?,
        exclude_cells: cfg.get_or("singular.exclude_cells", defaults.exclude_cells)?,
    };
    let u = build_singular_rotator_with(&p, &grid, &opts)?;
    Ok(Outcome::done(grid_text(&u, &[("n", p.n.to_string()), ("a", p.a.to_string())])))
}

fn radii(cfg: &RunConfig, u: &GridFunction) -> Result<Vec<f64>> {
    Ok(match cfg.list("diagnose.radii")? {
        Some(r) => r,
        None => {
            let spec = u.spec();
            let half = (0..spec.dim()).map(|a| 0.5 * (spec.hi(a) - spec.lo()[a])).fold(f64::INFINITY, f64::min);
            geometric_radii(0.5 * half, std::f64::consts::SQRT_2, 5)
        }
    })
}

pub fn diagnose(cfg: &RunConfig) -> Result<Outcome> {
    let u = read_input(cfg, "diagnose.in")?;
    let n = u.dim();
    let mode: String = cfg.require("diagnose.mode")?;
    let mut text = String::new();
    match mode.as_str() {
        "holder" => {
            let point = vector(cfg, "diagnose.point", n)?;
            let fit = holder_exponent_fit(&u, &point, &radii(cfg, &u)?)?;
            text.push_str("radius,oscillation\n");
            for (r, o) in fit.radii.iter().zip(&fit.oscillations) {
                let _ = writeln!(text, "{},{}", fmt_f64(*r), fmt_f64(*o));
            }
            footer(
                &mut text,
                &[("exponent", fmt_f64(fit.exponent)), ("constant", fmt_f64(fit.constant)), ("residual", fmt_f64(fit.residual))],
            );
        }
        "vmo" => {
            let field = HessianField::from_potential(&u)?;
            text.push_str("radius,modulus,centers\n");
            for p in vmo_modulus(&field, &radii(cfg, &u)?) {
                let _ = writeln!(text, "{},{},{}", fmt_f64(p.radius), fmt_f64(p.modulus), p.centers);
            }
        }
        "rank" => {
            let tol = cfg.get_or("diagnose.tol", 10.0 * u.spec().spacing())?;
            let report = rank_field(&u, tol);
            let axes: Vec<String> = (0..n).map(|a| format!("x{a}")).collect();
            let _ = writeln!(text, "{},rank", axes.join(","));
            for (j, r) in report.ranks.iter().enumerate() {
                let x: Vec<String> = report.interior.point_of(j).into_iter().map(fmt_f64).collect();
                let _ = writeln!(text, "{},{r}", x.join(","));
            }
            footer(
                &mut text,
                &[
                    ("eig_tol", fmt_f64(report.eig_tol)),
                    ("constant", report.constant.to_string()),
                    ("interfaces", report.interfaces.len().to_string()),
                ],
            );
        }
        "dual" => {
            let report = dual_convexity_check(&u, cfg.get_or("diagnose.alpha", 0.5)?, cfg.require("diagnose.beta")?)?;
            let point: Vec<String> = report.min_point.iter().map(|v| fmt_f64(*v)).collect();
            text.push_str("key,value\n");
            for (k, v) in [
                ("verdict", report.verdict.as_str().to_string()),
                ("theorem_consistent", report.theorem_consistent.to_string()),
                ("min_eigenvalue", fmt_f64(report.min_eigenvalue)),
                ("floor", fmt_f64(report.floor)),
                ("min_point", point.join(" ")),
                ("flatness", fmt_f64(report.flatness)),
                ("flatness_residual", fmt_f64(report.flatness_residual)),
                ("lower_exponent", fmt_f64(report.lower_exponent)),
                ("upper_exponent", fmt_f64(report.upper_exponent)),
            ] {
                let _ = writeln!(text, "{k},{v}");
            }
        }
        other => return Err(invalid(format!("diagnose.mode {other:?}: expected holder, vmo, rank or dual"))),
    }
    Ok(Outcome::done(text))
}

/// Writes to `out` when set, otherwise returns the text for standard output.
pub fn emit(cfg: &RunConfig, text: &str) -> Result<Option<String>> {
    match cfg.path("out") {
        Some(path) => {
            write_file(&path, text)?;
            Ok(None)
        }
        None => Ok(Some(text.to_string())),
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Config(format!("cannot write {}: {e}", PathBuf::from(path).display())))
}
