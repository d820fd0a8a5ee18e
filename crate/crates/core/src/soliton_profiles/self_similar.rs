use crate::error::{Error, Result};
use crate::grid_core::{lagrangian_angle, SymmetricMatrix};
use crate::phase_models::{eval_phase, PhaseSpec};

/// Polynomial `sum c x^e` with its exact derivatives.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Polynomial {
    pub terms: Vec<(f64, Vec<u32>)>,
}

impl Polynomial {
    pub fn monomial(c: f64, exponents: Vec<u32>) -> Self {
        Self { terms: vec![(c, exponents)] }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(c, e)| c * x.iter().zip(e).map(|(v, &k)| v.powi(k as i32)).product::<f64>())
            .sum()
    }

    fn partial(&self, a: usize) -> Self {
        let terms = self
            .terms
            .iter()
            .filter(|(_, e)| e[a] > 0)
            .map(|(c, e)| {
                let mut e2 = e.clone();
                e2[a] -= 1;
                (c * e[a] as f64, e2)
            })
            .collect();
        Self { terms }
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        (0..x.len()).map(|a| self.partial(a).eval(x)).collect()
    }

    pub fn hessian(&self, x: &[f64]) -> SymmetricMatrix {
        let n = x.len();
        SymmetricMatrix::from_fn(n, |i, j| self.partial(i).partial(j).eval(x))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelfSimilarOrder {
    /// Sup of the residual on each radius.
    pub radii: Vec<f64>,
    pub sups: Vec<f64>,
    /// Least-squares slope of log sup against log r; `None` when every sup is exactly zero.
    pub slope: Option<f64>,
    pub exactly_zero: bool,
}

/// Sample points: shells at fractions of `r` along a fixed direction set.
fn ball_samples(n: usize, r: f64) -> Vec<Vec<f64>> {
    let mut dirs = Vec::new();
    let k = 5usize;
    for code in 0..k.pow(n as u32) {
        let mut c = code;
        let d: Vec<f64> = (0..n)
            .map(|_| {
                let v = (c % k) as f64 - 2.0;
                c /= k;
                v
            })
            .collect();
        let len = d.iter().map(|v| v * v).sum::<f64>().sqrt();
        if len > 0.0 {
            dirs.push(d.into_iter().map(|v| v / len).collect::<Vec<_>>());
        }
    }
    let mut out = Vec::new();
    for frac in [0.25, 0.5, 0.75, 1.0] {
        for d in &dirs {
            out.push(d.iter().map(|v| v * r * frac).collect());
        }
    }
    out
}

/// Self-similar correction `-b (x.Du - 2u)` of `u = x.Ax/2 + cubic` on shrinking balls.
///
/// With `c = theta(A)` this is the part of the self-similar residual beyond the
/// constant-phase one. A pure quadratic gives exactly zero by Euler homogeneity.
pub fn self_similar_residual_order(
    q: &SymmetricMatrix,
    b: f64,
    perturbation: Option<&Polynomial>,
    radii: &[f64],
) -> Result<SelfSimilarOrder> {
    let n = q.dim();
    if radii.len() < 2 || radii.iter().any(|r| !(*r > 0.0)) {
        return Err(Error::InvalidRadii("need at least two positive radii".into()));
    }
    let c = lagrangian_angle(q)?;
    let shrinker = PhaseSpec::self_similar(c, b)?;
    let flat = PhaseSpec::constant(c)?;
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(s, t)| s * t).sum::<f64>();
    let mut sups = Vec::with_capacity(radii.len());
    for &r in radii {
        let mut sup = 0.0f64;
        for x in ball_samples(n, r) {
            let ax = q.mul_vec(&x);
            let mut u = 0.5 * dot(&x, &ax);
            let mut p = ax;
            if let Some(pert) = perturbation {
                u += pert.eval(&x);
                for (pi, gi) in p.iter_mut().zip(pert.gradient(&x)) {
                    *pi += gi;
                }
            }
            let res = eval_phase(&flat, &x, u, &p)? - eval_phase(&shrinker, &x, u, &p)?;
            sup = sup.max(res.abs());
        }
        sups.push(sup);
    }
    let exactly_zero = sups.iter().all(|s| *s == 0.0);
    let slope = if sups.iter().any(|s| *s == 0.0) {
        None
    } else {
        let pts: Vec<(f64, f64)> = radii.iter().zip(&sups).map(|(r, s)| (r.ln(), s.ln())).collect();
        Some(crate::diagnostics::linear_fit(&pts).0)
    };
    Ok(SelfSimilarOrder { radii: radii.to_vec(), sups, slope, exactly_zero })
}
