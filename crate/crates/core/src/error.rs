use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Coarse failure class, used by front ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Bad input: malformed grids, failed preconditions, unreadable files.
    Validation,
    /// The computation itself broke down (blow-up, branch exit, non-invertible rotation).
    Numerical,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("index not interior: {0:?}")]
    IndexNotInterior(Vec<usize>),
    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("dual range too small: axis {axis} needs [{need_lo}, {need_hi}], grid covers [{have_lo}, {have_hi}]")]
    DualRangeTooSmall {
        axis: usize,
        need_lo: f64,
        need_hi: f64,
        have_lo: f64,
        have_hi: f64,
    },
    #[error("input not convex: min Hessian eigenvalue {min_eigenvalue:.3e} at node {node:?}")]
    NotConvex { node: Vec<usize>, min_eigenvalue: f64 },
    #[error("rotated potential not invertible: min Hessian eigenvalue {min_eigenvalue:.3e} <= {floor:.3e} at node {node:?}")]
    NotInvertible {
        node: Vec<usize>,
        min_eigenvalue: f64,
        floor: f64,
    },
    #[error("rotated domain too small: no box of at least 5 points per axis fits inside the rotated image")]
    RotatedDomainTooSmall,
    #[error("invalid phase: {0}")]
    InvalidPhase(String),
    #[error("phase table query outside table at coordinate {axis} = {value}")]
    TableOutOfRange { axis: usize, value: f64 },
    #[error("invalid solver parameters: {0}")]
    InvalidParams(String),
    #[error("blow-up: reduce dt")]
    BlowUp,
    #[error("profile leaves principal branch at s = {0}")]
    BranchExit(f64),
    #[error("unsupported sign: rotator profile requires a <= 0, got a = {0}")]
    UnsupportedSign(f64),
    #[error("grid exceeds profile range: needs s up to {needed}, profile reaches {available}")]
    OutOfProfileRange { needed: f64, available: f64 },
    #[error("too few usable radii: {usable} (need at least 4)")]
    TooFewRadii { usable: usize },
    #[error("invalid radii: {0}")]
    InvalidRadii(String),
    #[error("config: {0}")]
    Config(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::BlowUp
            | Error::BranchExit(_)
            | Error::NotInvertible { .. }
            | Error::RotatedDomainTooSmall => ErrorKind::Numerical,
            _ => ErrorKind::Validation,
        }
    }
}
