//! `section.key = value` run configuration with command-line overrides.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use lmcflow_core::{Error, Result};

/// Every key the front end understands.
pub const KNOWN_KEYS: &[&str] = &[
    "out",
    "threads",
    "grid.n",
    "grid.m",
    "grid.h",
    "grid.lo",
    "grid.half_width",
    "phase.variant",
    "phase.c",
    "phase.b",
    "phase.a",
    "phase.k",
    "phase.l",
    "phase.beta",
    "phase.n",
    "phase.table",
    "solve.dt",
    "solve.max_iters",
    "solve.tol",
    "solve.stencil",
    "solve.initial",
    "solve.directions",
    "boundary.kind",
    "boundary.matrix",
    "boundary.beta",
    "boundary.file",
    "rotate.in",
    "rotate.shrink",
    "rotate.dual_h",
    "inverse.in",
    "inverse.floor",
    "inverse.exclude_radius",
    "inverse.primal_h",
    "profile.n",
    "profile.a",
    "profile.smax",
    "profile.steps",
    "singular.primal_points",
    "singular.exclude_cells",
    "diagnose.in",
    "diagnose.mode",
    "diagnose.point",
    "diagnose.radii",
    "diagnose.alpha",
    "diagnose.beta",
    "diagnose.tol",
];

/// Keys whose values name files that must exist before a run.
const FILE_KEYS: &[&str] = &["phase.table", "solve.initial", "boundary.file", "rotate.in", "inverse.in", "diagnose.in"];

fn invalid(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunConfig {
    entries: BTreeMap<String, String>,
    /// Directory relative file paths are resolved against.
    base: PathBuf,
}

impl RunConfig {
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let mut cfg = Self { entries: BTreeMap::new(), base: base.to_path_buf() };
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: i + 1,
                msg: format!("expected `section.key = value`, got {line:?}"),
            })?;
            let key = key.trim();
            if cfg.entries.contains_key(key) {
                return Err(Error::Parse { line: i + 1, msg: format!("duplicate key {key}") });
            }
            cfg.set(key, value.trim()).map_err(|e| Error::Parse { line: i + 1, msg: e.to_string() })?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| invalid(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text, path.parent().unwrap_or(Path::new("")))
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        if !KNOWN_KEYS.contains(&key) {
            return Err(invalid(format!("unknown key {key}")));
        }
        self.entries.insert(key.to_string(), value.to_string());
        Ok(())
    }

    /// Applies `--key value` / `--key=value` pairs. A key without a section is looked up
    /// in `section` first, then at top level.
    pub fn apply_overrides(&mut self, args: &[String], section: &str) -> Result<()> {
        let mut it = args.iter();
        while let Some(arg) = it.next() {
            let flag = arg
                .strip_prefix("--")
                .ok_or_else(|| invalid(format!("expected --key, got {arg:?}")))?;
            let (key, value) = match flag.split_once('=') {
                Some((k, v)) => (k.to_string(), v.to_string()),
                None => {
                    let v = it.next().ok_or_else(|| invalid(format!("--{flag} needs a value")))?;
                    (flag.to_string(), v.clone())
                }
            };
            let key = key.replace('-', "_");
            let full = if key.contains('.') {
                key
            } else {
                let scoped = format!("{section}.{key}");
                if KNOWN_KEYS.contains(&scoped.as_str()) {
                    scoped
                } else {
                    key
                }
            };
            // flags name paths relative to the working directory
            let value = if FILE_KEYS.contains(&full.as_str()) || full == "out" {
                std::env::current_dir().map(|d| d.join(&value)).unwrap_or_else(|_| PathBuf::from(&value))
                    .display()
                    .to_string()
            } else {
                value
            };
            self.set(&full, &value)?;
        }
        Ok(())
    }

    /// Fails on the first referenced file that does not exist.
    pub fn check_files(&self) -> Result<()> {
        for key in FILE_KEYS {
            if let Some(path) = self.path(key) {
                if !path.is_file() {
                    return Err(invalid(format!("{key}: file {} does not exist", path.display())));
                }
            }
        }
        Ok(())
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        debug_assert!(KNOWN_KEYS.contains(&key), "{key}");
        self.entries.get(key).map(String::as_str)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.raw(key) {
            None => Ok(None),
            Some(v) => v.parse().map(Some).map_err(|_| invalid(format!("{key}: cannot parse {v:?}"))),
        }
    }

    pub fn get_or<T: FromStr>(&self, key: &str, default: T) -> Result<T> {
        Ok(self.get(key)?.unwrap_or(default))
    }

    pub fn require<T: FromStr>(&self, key: &str) -> Result<T> {
        self.get(key)?.ok_or_else(|| invalid(format!("missing required key {key}")))
    }

    /// Comma-separated reals.
    pub fn list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        let Some(v) = self.raw(key) else { return Ok(None) };
        v.split(',')
            .map(|t| t.trim().parse::<f64>().map_err(|_| invalid(format!("{key}: cannot parse {t:?}"))))
            .collect::<Result<Vec<_>>>()
            .map(Some)
    }

    pub fn path(&self, key: &str) -> Option<PathBuf> {
        self.raw(key).map(|v| self.base.join(v))
    }
}
