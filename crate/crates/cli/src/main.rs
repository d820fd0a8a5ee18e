//! `lmcflow`: batch front end for the potential-equation toolkit.

mod commands;
mod config;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lmcflow_core::verify::{self, Suite};
use lmcflow_core::{Error, ErrorKind, Result};

use config::RunConfig;

const EXIT_VALIDATION: u8 = 1;
const EXIT_NUMERICAL: u8 = 2;
const EXIT_NOT_CONVERGED: u8 = 3;

#[derive(Parser)]
#[command(name = "lmcflow", version, about = "Rotations, solvers and diagnostics for sum arctan(lambda_i) = psi")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Relax a Dirichlet problem to its steady state.
    Solve(RunArgs),
    /// Rotate a convex potential by pi/4.
    Rotate(RunArgs),
    /// Undo a rotation.
    InverseRotate(RunArgs),
    /// Integrate the rotated rotator profile.
    Profile(RunArgs),
    /// Build the primal rotator potential from its profile.
    Singular(RunArgs),
    /// Hoelder, VMO, rank or dual-convexity diagnostics of a grid file.
    Diagnose(RunArgs),
    /// Run a fixed-seed property suite.
    Verify {
        /// duality, rotation, solver, profile, diagnostics or all
        suite: String,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Key-value config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides such as `--solve.dt 1e-4`; keys without a section refer to the command's own.
    #[arg(trailing_var_arg = true, allow_hyphen_values = true, value_name = "--KEY VALUE")]
    overrides: Vec<String>,
}

type Runner = fn(&RunConfig) -> Result<commands::Outcome>;

fn exit_for(e: &Error) -> u8 {
    match e.kind() {
        ErrorKind::Validation => EXIT_VALIDATION,
        ErrorKind::Numerical => EXIT_NUMERICAL,
    }
}

fn load(args: &RunArgs, section: &str) -> Result<RunConfig> {
    let mut overrides = args.overrides.clone();
    let mut path = args.config.clone();
    if let Some(i) = overrides.iter().position(|a| a == "--config") {
        let p = overrides.get(i + 1).ok_or_else(|| Error::Config("--config needs a value".into()))?;
        path = Some(PathBuf::from(p));
        overrides.drain(i..i + 2);
    }
    let mut cfg = match path {
        Some(p) => RunConfig::load(&p)?,
        None => RunConfig::default(),
    };
    cfg.apply_overrides(&overrides, section)?;
    cfg.check_files()?;
    if let Some(threads) = cfg.get::<usize>("threads")? {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Error::Config(format!("threads: {e}")))?;
    }
    Ok(cfg)
}

fn run(command: Command) -> Result<u8> {
    let (args, section, f): (RunArgs, &str, Runner) = match command {
        Command::Solve(a) => (a, "solve", commands::solve),
        Command::Rotate(a) => (a, "rotate", commands::rotate),
        Command::InverseRotate(a) => (a, "inverse", commands::inverse_rotate),
        Command::Profile(a) => (a, "profile", commands::profile),
        Command::Singular(a) => (a, "singular", commands::singular),
        Command::Diagnose(a) => (a, "diagnose", commands::diagnose),
        Command::Verify { suite } => {
            let suite: Suite = suite.parse()?;
            let checks = verify::run(suite)?;
            print!("{}", verify::format_table(&checks));
            return Ok(if checks.iter().all(|c| c.pass) { 0 } else { EXIT_NUMERICAL });
        }
    };
    let cfg = load(&args, section)?;
    let outcome = f(&cfg)?;
    if let Some(text) = commands::emit(&cfg, &outcome.text)? {
        std::io::stdout().lock().write_all(text.as_bytes())?;
    }
    if outcome.not_converged {
        eprintln!("lmcflow: solve stopped at solve.max_iters without converging");
        return Ok(EXIT_NOT_CONVERGED);
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("lmcflow: {e}");
            ExitCode::from(exit_for(&e))
        }
    }
}
