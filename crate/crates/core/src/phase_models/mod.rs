//! Right-hand sides `psi(x, u, p)` and checks on them.

mod checks;
mod table;

pub use checks::{
    lipschitz_bound, partial_convexity_check, partial_convexity_check_with, phase_range_check,
    ConvexityOptions, PartialConvexityReport, PhasePoint, PhaseRangeReport,
};
pub use table::PhaseTable;

use std::f64::consts::FRAC_PI_2;
use std::sync::Arc;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum PhaseSpec {
    Constant { c: f64 },
    /// `c + b (x.p - 2u)`: shrinkers for `b > 0`, expanders for `b < 0`.
    SelfSimilar { c: f64, b: f64 },
    /// `c + k.x + l.p`.
    Translator { c: f64, k: Vec<f64>, l: Vec<f64> },
    /// `c + (a/2)(|x|^2 + |p|^2)`.
    Rotator { c: f64, a: f64 },
    /// `n pi/2 - (n-1) arctan(|p|^q) - arctan(|p|^q / beta)`, `q = 1/beta - 1`.
    SingularFamily { n: usize, beta: f64 },
    /// Multilinear interpolation of sampled `psi(x, p)`.
    Tabulated { table: Arc<PhaseTable> },
}

impl PhaseSpec {
    pub fn constant(c: f64) -> Result<Self> {
        finite(c, "c")?;
        Ok(Self::Constant { c })
    }

    pub fn self_similar(c: f64, b: f64) -> Result<Self> {
        finite(c, "c")?;
        finite(b, "b")?;
        Ok(Self::SelfSimilar { c, b })
    }

    pub fn translator(c: f64, k: Vec<f64>, l: Vec<f64>) -> Result<Self> {
        finite(c, "c")?;
        if k.len() != l.len() {
            return Err(Error::InvalidPhase(format!(
                "translator k has length {} but l has length {}",
                k.len(),
                l.len()
            )));
        }
        if k.iter().chain(&l).any(|v| !v.is_finite()) {
            return Err(Error::InvalidPhase("translator k, l must be finite".into()));
        }
        Ok(Self::Translator { c, k, l })
    }

    pub fn rotator(c: f64, a: f64) -> Result<Self> {
        finite(c, "c")?;
        finite(a, "a")?;
        Ok(Self::Rotator { c, a })
    }

    pub fn singular(n: usize, beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta < 1.0) {
            return Err(Error::InvalidPhase(format!("beta must lie in (0, 1), got {beta}")));
        }
        if n == 0 {
            return Err(Error::InvalidPhase("dimension must be positive".into()));
        }
        Ok(Self::SingularFamily { n, beta })
    }

    pub fn tabulated(table: PhaseTable) -> Self {
        Self::Tabulated { table: Arc::new(table) }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Constant { .. } => "constant",
            Self::SelfSimilar { .. } => "self_similar",
            Self::Translator { .. } => "translator",
            Self::Rotator { .. } => "rotator",
            Self::SingularFamily { .. } => "singular",
            Self::Tabulated { .. } => "tabulated",
        }
    }

    /// Checks the parameters against the grid dimension `n`.
    pub fn validate(&self, n: usize) -> Result<()> {
        match self {
            Self::Translator { k, l, .. } if k.len() != n || l.len() != n => {
                Err(Error::InvalidPhase(format!(
                    "translator vectors have length {}/{} on a {n}-dimensional grid",
                    k.len(),
                    l.len()
                )))
            }
            Self::SingularFamily { n: m, beta } => {
                if *m != n {
                    return Err(Error::InvalidPhase(format!(
                        "singular phase built for n = {m}, grid has n = {n}"
                    )));
                }
                if !(*beta > 0.0 && *beta < 1.0) {
                    return Err(Error::InvalidPhase(format!("beta must lie in (0, 1), got {beta}")));
                }
                Ok(())
            }
            Self::Tabulated { table } if table.dim() != n => Err(Error::InvalidPhase(format!(
                "table is {}-dimensional in x, grid has n = {n}",
                table.dim()
            ))),
            _ => Ok(()),
        }
    }

    /// True when `psi` is non-increasing in `u`, which makes the flow a monotone scheme.
    pub fn nonincreasing_in_u(&self) -> bool {
        match self {
            Self::SelfSimilar { b, .. } => *b >= 0.0,
            _ => true,
        }
    }
}

fn finite(v: f64, name: &str) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidPhase(format!("{name} must be finite")))
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Singular-family phase as a function of `r = |p|`.
pub fn singular_phase(n: usize, beta: f64, r: f64) -> f64 {
    let nf = n as f64;
    if r == 0.0 {
        return nf * FRAC_PI_2;
    }
    let t = r.powf(1.0 / beta - 1.0);
    nf * FRAC_PI_2 - (nf - 1.0) * t.atan() - (t / beta).atan()
}

/// Evaluates `psi(x, u, p)`.
pub fn eval_phase(spec: &PhaseSpec, x: &[f64], u: f64, p: &[f64]) -> Result<f64> {
    Ok(match spec {
        PhaseSpec::Constant { c } => *c,
        PhaseSpec::SelfSimilar { c, b } => {
            if *b == 0.0 {
                *c
            } else {
                c + b * (dot(x, p) - 2.0 * u)
            }
        }
        PhaseSpec::Translator { c, k, l } => c + dot(k, x) + dot(l, p),
        PhaseSpec::Rotator { c, a } => {
            if *a == 0.0 {
                *c
            } else {
                c + 0.5 * a * (dot(x, x) + dot(p, p))
            }
        }
        PhaseSpec::SingularFamily { n, beta } => singular_phase(*n, *beta, dot(p, p).sqrt()),
        PhaseSpec::Tabulated { table } => table.eval(x, p)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn rotator_at_origin_is_c() {
        let s = PhaseSpec::rotator(0.0, -1.0).unwrap();
        assert_eq!(eval_phase(&s, &[0.0, 0.0], 3.0, &[0.0, 0.0]).unwrap(), 0.0);
    }

    #[test]
    fn singular_family_value() {
        let s = PhaseSpec::singular(3, 1.0 / 3.0).unwrap();
        let p = [0.6, 0.0, 0.8];
        let v = eval_phase(&s, &[0.1, 0.2, 0.3], 0.0, &p).unwrap();
        assert!((v - (PI - 3f64.atan())).abs() < 1e-12);
        assert!((v - 1.892_546_881_191_538_8).abs() < 1e-12);
        assert_eq!(eval_phase(&s, &[0.0; 3], 0.0, &[0.0; 3]).unwrap(), 1.5 * PI);
    }

    #[test]
    fn self_similar_on_null_set_is_c() {
        let s = PhaseSpec::self_similar(0.7, 2.5).unwrap();
        // u = x.p / 2 exactly
        let x = [0.5, -0.25];
        let p = [2.0, 4.0];
        assert_eq!(eval_phase(&s, &x, 0.0, &p).unwrap(), 0.7);
    }

    #[test]
    fn singular_identity_on_power_profile() {
        for &(n, beta) in &[(2usize, 0.5), (3, 1.0 / 3.0), (4, 0.8), (1, 0.25)] {
            let s = PhaseSpec::singular(n, beta).unwrap();
            for k in 1..20 {
                let mut x = vec![0.0; n];
                for (i, xi) in x.iter_mut().enumerate() {
                    *xi = 0.13 * k as f64 * (1.0 + i as f64).sin();
                }
                let r = dot(&x, &x).sqrt();
                let u = r.powf(1.0 + beta) / (1.0 + beta);
                let p: Vec<f64> = x.iter().map(|v| v * r.powf(beta - 1.0)).collect();
                let scale = r.powf(beta - 1.0);
                let angle = (n as f64 - 1.0) * scale.atan() + (beta * scale).atan();
                let psi = eval_phase(&s, &x, u, &p).unwrap();
                assert!((angle - psi).abs() < 1e-10, "n={n} beta={beta} r={r}");
            }
        }
    }

    #[test]
    fn zero_parameters_reduce_to_constant() {
        let x = [0.3, -1.2];
        let p = [4.0, 0.5];
        let c = 0.9;
        for s in [
            PhaseSpec::self_similar(c, 0.0).unwrap(),
            PhaseSpec::translator(c, vec![0.0; 2], vec![0.0; 2]).unwrap(),
            PhaseSpec::rotator(c, 0.0).unwrap(),
        ] {
            assert_eq!(eval_phase(&s, &x, 7.0, &p).unwrap(), c);
        }
    }

    #[test]
    fn validation() {
        assert!(PhaseSpec::singular(2, 1.0).is_err());
        assert!(PhaseSpec::singular(2, 0.0).is_err());
        assert!(PhaseSpec::translator(0.0, vec![1.0], vec![1.0, 2.0]).is_err());
        let t = PhaseSpec::translator(0.0, vec![1.0], vec![1.0]).unwrap();
        assert!(t.validate(2).is_err());
        assert!(t.validate(1).is_ok());
        assert!(PhaseSpec::singular(3, 0.5).unwrap().validate(2).is_err());
    }
}
