use std::path::Path;
use std::process::{Command, Output};

use lmcflow_core::grid_core::{read_grid_file, write_grid_file};
use lmcflow_core::{GridFunction, GridSpec};

fn lmcflow(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lmcflow")).current_dir(dir).args(args).output().expect("binary runs")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

const QUADRATIC: &str = "\
# u = |x|^2 / 2 has angle 2 arctan 1
grid.n = 2
grid.m = 21
phase.variant = constant
phase.c = 1.5707963267948966
boundary.kind = quadratic
boundary.matrix = 1
solve.dt = 0.0023
solve.tol = 1e-13
";

#[test]
fn solve_recovers_the_quadratic() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("q.cfg"), QUADRATIC).unwrap();
    let out = lmcflow(dir.path(), &["solve", "--config", "q.cfg", "--out", "u.csv"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let doc = read_grid_file(&dir.path().join("u.csv")).unwrap();
    let exact = GridFunction::from_fn(doc.grid.spec().clone(), |x| 0.5 * (x[0] * x[0] + x[1] * x[1])).unwrap();
    assert!(doc.grid.max_abs_diff(&exact) <= 1e-6);
    let get = |k: &str| doc.footer.iter().find(|(key, _)| key == k).map(|(_, v)| v.clone());
    assert_eq!(get("converged").as_deref(), Some("true"));
    assert!(get("max_error").unwrap().parse::<f64>().unwrap() <= 1e-6);
}

#[test]
fn solve_reports_non_convergence() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("q.cfg"), QUADRATIC).unwrap();
    let out = lmcflow(dir.path(), &["solve", "--config", "q.cfg", "--solve.max_iters", "10", "--out", "u.csv"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(dir.path().join("u.csv").is_file());
}

#[test]
fn solve_rejects_bad_configs() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("q.cfg"), QUADRATIC).unwrap();
    for extra in [&["--grid.colour", "red"][..], &["--solve.dt", "1"], &["--phase.variant", "spiral"]] {
        let mut args = vec!["solve", "--config", "q.cfg"];
        args.extend_from_slice(extra);
        let out = lmcflow(dir.path(), &args);
        assert_eq!(out.status.code(), Some(1), "{extra:?}: {}", stderr(&out));
    }
    std::fs::write(dir.path().join("bad.cfg"), format!("{QUADRATIC}solve.smoothing = 2\n")).unwrap();
    let out = lmcflow(dir.path(), &["solve", "--config", "bad.cfg"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("solve.smoothing"));
}

#[test]
fn profile_starts_at_the_series_curvature() {
    let dir = tempfile::tempdir().unwrap();
    let out = lmcflow(dir.path(), &["profile", "--n", "1", "--a", "-1", "--out", "p.csv"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = std::fs::read_to_string(dir.path().join("p.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("s,f,fp,fpp"));
    let row: Vec<f64> = lines.next().unwrap().split(',').map(|t| t.parse().unwrap()).collect();
    assert_eq!(row[0], 0.0);
    assert!((row[3] + 4.0 / 3.0).abs() <= 1e-10, "fpp(0) = {}", row[3]);
}

#[test]
fn rotate_names_the_first_non_convex_node() {
    let dir = tempfile::tempdir().unwrap();
    let spec = GridSpec::centered(2, 1.0, 11).unwrap();
    let u = GridFunction::from_fn(spec, |x| 0.5 * x[0] * x[0] - 0.5 * x[1] * x[1]).unwrap();
    write_grid_file(&dir.path().join("saddle.csv"), &u, &[]).unwrap();
    let out = lmcflow(dir.path(), &["rotate", "--in", "saddle.csv"]);
    assert_eq!(out.status.code(), Some(1));
    let msg = stderr(&out);
    assert!(msg.contains("not convex") && msg.contains("node [1, 1]"), "{msg}");
}

#[test]
fn rotate_then_invert_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let f = |x: &[f64]| 0.5 * x[0] * x[0] + 0.05 * (x[0] + 0.5).powi(4);
    let u = GridFunction::from_fn(GridSpec::centered(1, 1.0, 201).unwrap(), f).unwrap();
    write_grid_file(&dir.path().join("u.csv"), &u, &[]).unwrap();
    let out = lmcflow(dir.path(), &["rotate", "--in", "u.csv", "--out", "r.csv"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let out = lmcflow(dir.path(), &["inverse-rotate", "--in", "r.csv", "--out", "back.csv"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let back = read_grid_file(&dir.path().join("back.csv")).unwrap().grid;
    let h = u.spec().spacing();
    let spec = back.spec();
    let inside = (0..spec.len()).filter(|&j| spec.point_of(j)[0].abs() <= 0.5);
    let err = inside.map(|j| (back.at_flat(j) - f(&spec.point_of(j))).abs()).fold(0.0, f64::max);
    assert!(err <= h, "round trip error {err}");
}

#[test]
fn missing_inputs_fail_before_running() {
    let dir = tempfile::tempdir().unwrap();
    let out = lmcflow(dir.path(), &["diagnose", "--in", "absent.csv", "--mode", "holder"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("does not exist"));
}

#[test]
fn inverse_rotation_failure_is_numerical() {
    let dir = tempfile::tempdir().unwrap();
    // ubar = x^2 makes the rotated auxiliary concave
    let spec = GridSpec::centered(1, 1.0, 41).unwrap();
    let ubar = GridFunction::from_fn(spec, |x| x[0] * x[0]).unwrap();
    write_grid_file(&dir.path().join("r.csv"), &ubar, &[]).unwrap();
    let out = lmcflow(dir.path(), &["inverse-rotate", "--in", "r.csv"]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
}

#[test]
fn diagnose_modes() {
    let dir = tempfile::tempdir().unwrap();
    let spec = GridSpec::centered(1, 1.0, 2001).unwrap();
    let u = GridFunction::from_fn(spec, |x| x[0].abs().powf(1.5) / 1.5).unwrap();
    write_grid_file(&dir.path().join("u.csv"), &u, &[]).unwrap();
    let out = lmcflow(dir.path(), &["diagnose", "--in", "u.csv", "--mode", "holder", "--radii", "0.8,0.4,0.2,0.1,0.05"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = String::from_utf8(out.stdout).unwrap();
    let exponent: f64 = text.lines().find_map(|l| l.strip_prefix("# exponent=")).unwrap().parse().unwrap();
    assert!((exponent - 1.5).abs() <= 0.02, "{exponent}");

    let out = lmcflow(dir.path(), &["diagnose", "--in", "u.csv", "--mode", "dual", "--beta", "0.5", "--alpha", "1"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(String::from_utf8(out.stdout).unwrap().contains("verdict,borderline"));

    for mode in ["rank", "vmo"] {
        let out = lmcflow(dir.path(), &["diagnose", "--in", "u.csv", "--mode", mode]);
        assert_eq!(out.status.code(), Some(0), "{mode}: {}", stderr(&out));
    }
    let out = lmcflow(dir.path(), &["diagnose", "--in", "u.csv", "--mode", "spectral"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("q.cfg"), QUADRATIC).unwrap();
    let runs: Vec<Vec<u8>> = (0..2)
        .map(|i| {
            let name = format!("u{i}.csv");
            let out = lmcflow(dir.path(), &["solve", "--config", "q.cfg", "--solve.tol", "1e-8", "--out", &name]);
            assert_eq!(out.status.code(), Some(0));
            std::fs::read(dir.path().join(name)).unwrap()
        })
        .collect();
    assert_eq!(runs[0], runs[1]);
    let single = lmcflow(dir.path(), &["singular", "--profile.n", "1", "--profile.a", "-1", "--grid.n", "1", "--grid.m", "101", "--grid.half_width", "0.5"]);
    let again = lmcflow(dir.path(), &["singular", "--profile.n", "1", "--profile.a", "-1", "--grid.n", "1", "--grid.m", "101", "--grid.half_width", "0.5", "--threads", "1"]);
    assert_eq!(single.status.code(), Some(0), "{}", stderr(&single));
    assert_eq!(single.stdout, again.stdout);
}

#[test]
fn verify_suites_pass() {
    let dir = tempfile::tempdir().unwrap();
    for suite in ["duality", "profile"] {
        let out = lmcflow(dir.path(), &["verify", suite]);
        let table = String::from_utf8(out.stdout).unwrap();
        assert_eq!(out.status.code(), Some(0), "{table}");
        assert!(table.contains(" 0 failed"));
    }
    assert_eq!(lmcflow(dir.path(), &["verify", "everything"]).status.code(), Some(1));
}
