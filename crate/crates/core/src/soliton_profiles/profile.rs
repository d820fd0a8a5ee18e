use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use super::series;
use crate::error::{Error, Result};

/// Degree of the Taylor polynomial for `f` near `s = 0`.
pub const SERIES_DEGREE: usize = 4;
/// Switch from the series to the integrator.
pub const DEFAULT_S0: f64 = 1e-3;

/// Radial profile `ubar(xbar) = f(|xbar|^2 / 2)` of the rotated rotator.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileSolution {
    pub n: usize,
    pub a: f64,
    /// Series-switch radius.
    pub s0: f64,
    /// Taylor coefficients of `f` about `s = 0`.
    pub series: Vec<f64>,
    pub s: Vec<f64>,
    pub f: Vec<f64>,
    pub fp: Vec<f64>,
    pub fpp: Vec<f64>,
}

/// `(n-1) arctan f' + arctan(2 s f'' + f') - n pi/4 - a s (1 + f'^2)`.
pub fn ode_residual(n: usize, a: f64, s: f64, fp: f64, fpp: f64) -> f64 {
    let nf = n as f64;
    (nf - 1.0) * fp.atan() + (2.0 * s * fpp + fp).atan() - nf * FRAC_PI_4 - a * s * (1.0 + fp * fp)
}

/// `f''` solved from the ODE; fails when the tangent argument leaves the principal branch.
fn second_derivative(n: usize, a: f64, s: f64, fp: f64) -> Result<f64> {
    let nf = n as f64;
    let phi = nf * FRAC_PI_4 + a * s * (1.0 + fp * fp) - (nf - 1.0) * fp.atan();
    if !(phi.abs() < FRAC_PI_2) {
        return Err(Error::BranchExit(s));
    }
    Ok((phi.tan() - fp) / (2.0 * s))
}

/// Taylor coefficients `f = s + g_2 s^2 + ... + g_K s^K` making the ODE residual
/// vanish through order `s^(K-1)`.
///
/// The coefficient `g_k` first enters the residual at order `s^(k-1)` with factor
/// `k (n + 2k - 2) / 2`, so each one is solved from the residual of the lower ones.
pub fn series_coefficients(n: usize, a: f64, degree: usize) -> Vec<f64> {
    let mut g = vec![0.0; degree + 1];
    g[1] = 1.0;
    for k in 2..=degree {
        let res = residual_series(n, a, &g);
        g[k] = -2.0 * res[k - 1] / (k as f64 * (n as f64 + 2.0 * k as f64 - 2.0));
    }
    g
}

/// Coefficients of the ODE residual for the polynomial `f = sum g_k s^k`, through `s^(K-1)`.
pub(crate) fn residual_series(n: usize, a: f64, g: &[f64]) -> Vec<f64> {
    let fp = series::deriv(g);
    let fp = &fp[..g.len() - 1];
    let fpp = series::deriv(fp);
    // 2 s f'' + f'
    let inner: Vec<f64> = series::shift(&fpp).iter().zip(fp).map(|(x, y)| 2.0 * x + y).collect();
    let mut out = series::atan(&inner);
    let atan_fp = series::atan(fp);
    let mut sq = series::mul(fp, fp);
    sq[0] += 1.0;
    let rhs = series::shift(&sq);
    let nf = n as f64;
    for k in 0..out.len() {
        out[k] += (nf - 1.0) * atan_fp[k] - a * rhs[k];
    }
    out[0] -= nf * FRAC_PI_4;
    out
}

/// Integrates the rotated rotator profile on `[0, s_max]` with `steps` classical
/// Runge-Kutta steps after the series segment `[0, s0]`.
pub fn rotator_profile(n: usize, a: f64, s_max: f64, steps: usize) -> Result<ProfileSolution> {
    rotator_profile_with(n, a, s_max, steps, DEFAULT_S0)
}

pub fn rotator_profile_with(n: usize, a: f64, s_max: f64, steps: usize, s0: f64) -> Result<ProfileSolution> {
    if a > 0.0 {
        return Err(Error::UnsupportedSign(a));
    }
    if !a.is_finite() {
        return Err(Error::NonFinite("a"));
    }
    if n == 0 || steps == 0 || !(s_max > s0 && s0 > 0.0) || !s_max.is_finite() {
        return Err(Error::InvalidParams(format!(
            "profile needs n >= 1, steps >= 1 and 0 < s0 < s_max (n = {n}, steps = {steps}, s0 = {s0}, s_max = {s_max})"
        )));
    }
    let series = series_coefficients(n, a, SERIES_DEGREE);
    let ds = (s_max - s0) / steps as f64;
    let mut sol = ProfileSolution {
        n,
        a,
        s0,
        series,
        s: Vec::with_capacity(steps + 2),
        f: Vec::with_capacity(steps + 2),
        fp: Vec::with_capacity(steps + 2),
        fpp: Vec::with_capacity(steps + 2),
    };
    let from_series = |sol: &ProfileSolution, s: f64| sol.series_eval(s);
    for s in [0.0, s0] {
        let (f, fp, fpp) = from_series(&sol, s);
        sol.s.push(s);
        sol.f.push(f);
        sol.fp.push(fp);
        sol.fpp.push(fpp);
    }
    if a == 0.0 {
        // f(s) = s; the tangent of n pi/4 - (n-1) pi/4 is 1 only up to rounding.
        for i in 1..=steps {
            let s = s0 + i as f64 * ds;
            sol.s.push(s);
            sol.f.push(s);
            sol.fp.push(1.0);
            sol.fpp.push(0.0);
        }
        return Ok(sol);
    }
    let rhs = |s: f64, fp: f64| second_derivative(n, a, s, fp);
    let (mut f, mut fp) = (sol.f[1], sol.fp[1]);
    for i in 0..steps {
        let s = s0 + i as f64 * ds;
        let k1f = fp;
        let k1p = rhs(s, fp)?;
        let k2f = fp + 0.5 * ds * k1p;
        let k2p = rhs(s + 0.5 * ds, k2f)?;
        let k3f = fp + 0.5 * ds * k2p;
        let k3p = rhs(s + 0.5 * ds, k3f)?;
        let k4f = fp + ds * k3p;
        let k4p = rhs(s + ds, k4f)?;
        f += ds / 6.0 * (k1f + 2.0 * k2f + 2.0 * k3f + k4f);
        fp += ds / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
        let s_next = s0 + (i + 1) as f64 * ds;
        sol.s.push(s_next);
        sol.f.push(f);
        sol.fp.push(fp);
        sol.fpp.push(rhs(s_next, fp)?);
    }
    Ok(sol)
}

impl ProfileSolution {
    pub fn s_max(&self) -> f64 {
        *self.s.last().expect("profile has samples")
    }

    /// `f''(0) = 2 g_2`.
    pub fn fpp0(&self) -> f64 {
        2.0 * self.series[2]
    }

    fn series_eval(&self, s: f64) -> (f64, f64, f64) {
        let d1 = series::deriv(&self.series);
        let d2 = series::deriv(&d1);
        (series::eval(&self.series, s), series::eval(&d1, s), series::eval(&d2, s))
    }

    /// `(f, f', f'')` at `s`: the series on `[0, s0]`, quintic Hermite interpolation beyond.
    pub fn eval(&self, s: f64) -> Result<(f64, f64, f64)> {
        let top = self.s_max();
        if !(s >= 0.0 && s <= top * (1.0 + 1e-12)) {
            return Err(Error::OutOfProfileRange { needed: s, available: top });
        }
        if s <= self.s0 {
            return Ok(self.series_eval(s));
        }
        let i = match self.s.binary_search_by(|v| v.total_cmp(&s)) {
            Ok(i) => return Ok((self.f[i], self.fp[i], self.fpp[i])),
            Err(i) => i.min(self.s.len() - 1),
        };
        let (l, r) = (i - 1, i);
        let hh = self.s[r] - self.s[l];
        let t = (s - self.s[l]) / hh;
        let c0 = self.f[l];
        let c1 = hh * self.fp[l];
        let c2 = 0.5 * hh * hh * self.fpp[l];
        let big_a = self.f[r] - (c0 + c1 + c2);
        let big_b = hh * self.fp[r] - (c1 + 2.0 * c2);
        let big_c = hh * hh * self.fpp[r] - 2.0 * c2;
        let c3 = 10.0 * big_a - 4.0 * big_b + 0.5 * big_c;
        let c4 = -15.0 * big_a + 7.0 * big_b - big_c;
        let c5 = 6.0 * big_a - 3.0 * big_b + 0.5 * big_c;
        let p = [c0, c1, c2, c3, c4, c5];
        let d1 = series::deriv(&p);
        let d2 = series::deriv(&d1);
        Ok((series::eval(&p, t), series::eval(&d1, t) / hh, series::eval(&d2, t) / (hh * hh)))
    }

    /// Largest ODE residual over the samples and the midpoints between them.
    pub fn max_residual(&self) -> Result<f64> {
        let mut worst = 0.0f64;
        for i in 0..self.s.len() {
            let s = self.s[i];
            worst = worst.max(ode_residual(self.n, self.a, s, self.fp[i], self.fpp[i]).abs());
            if i + 1 < self.s.len() {
                let mid = 0.5 * (s + self.s[i + 1]);
                let (_, fp, fpp) = self.eval(mid)?;
                worst = worst.max(ode_residual(self.n, self.a, mid, fp, fpp).abs());
            }
        }
        Ok(worst)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn leading_coefficient() {
        for &(n, a) in &[(1usize, -1.0), (2, -0.5), (3, -0.25), (2, -0.1)] {
            let g = series_coefficients(n, a, SERIES_DEGREE);
            assert!((2.0 * g[2] - 4.0 * a / (n as f64 + 2.0)).abs() < 1e-14);
            let res = residual_series(n, a, &g);
            assert!(res.iter().all(|r| r.abs() < 1e-13), "{res:?}");
        }
    }

    #[test]
    fn zero_rotation_is_identity_profile() {
        let p = rotator_profile(3, 0.0, 0.125, 100).unwrap();
        for i in 0..p.s.len() {
            assert_eq!(p.f[i], p.s[i]);
            assert_eq!(p.fp[i], 1.0);
        }
        assert_eq!(p.eval(0.05).unwrap(), (0.05, 1.0, 0.0));
    }

    #[test]
    fn sign_and_branch_errors() {
        assert!(matches!(rotator_profile(1, 0.5, 0.1, 10), Err(Error::UnsupportedSign(_))));
        match rotator_profile(1, -1.0, 50.0, 5000) {
            Err(e @ Error::BranchExit(_)) => assert!(e.to_string().contains("profile leaves principal branch")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn residual_and_handoff() {
        let p = rotator_profile(2, -0.5, 0.125, 2000).unwrap();
        assert!(p.max_residual().unwrap() < 1e-8);
        // one RK step from s0 - delta reproduces the series at s0
        let delta = 1e-4;
        let (f0, fp0, _) = p.series_eval(p.s0 - delta);
        let other = rotator_profile_with(2, -0.5, p.s0, 1, p.s0 - delta).unwrap();
        let (fs, fps, _) = p.series_eval(p.s0);
        assert!((other.f[2] - fs).abs() < 1e-9 && (other.fp[2] - fps).abs() < 1e-9);
        assert!((other.f[1] - f0).abs() < 1e-15 && (other.fp[1] - fp0).abs() < 1e-15);
    }

    #[test]
    fn quartic_ansatz_residual_is_second_order() {
        let (n, a) = (2usize, -0.5);
        let g2 = 2.0 * a / (n as f64 + 2.0);
        let r = |s: f64| ode_residual(n, a, s, 1.0 + 2.0 * g2 * s, 2.0 * g2).abs();
        let slope = (r(0.01) / r(0.005)).log2();
        assert!((slope - 2.0).abs() < 0.1, "slope {slope}");
    }

    #[test]
    fn matches_refined_integration() {
        let coarse = rotator_profile(1, -1.0, 0.125, 500).unwrap();
        let fine = rotator_profile(1, -1.0, 0.125, 8000).unwrap();
        let (fc, _, _) = coarse.eval(0.02).unwrap();
        let (ff, _, _) = fine.eval(0.02).unwrap();
        assert!((fc - ff).abs() < 1e-7);
    }
}
