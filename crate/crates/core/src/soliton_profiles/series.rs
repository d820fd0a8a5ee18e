//! Truncated power series in `s`, coefficient `k` multiplying `s^k`.

pub(crate) fn mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let d = a.len().min(b.len());
    (0..d).map(|k| (0..=k).map(|i| a[i] * b[k - i]).sum()).collect()
}

/// `1 / a`, requires `a[0] != 0`.
pub(crate) fn recip(a: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len()];
    out[0] = 1.0 / a[0];
    for k in 1..a.len() {
        let s: f64 = (1..=k).map(|i| a[i] * out[k - i]).sum();
        out[k] = -s / a[0];
    }
    out
}

/// Derivative, padded with a zero top coefficient.
pub(crate) fn deriv(a: &[f64]) -> Vec<f64> {
    let mut out: Vec<f64> = (1..a.len()).map(|k| k as f64 * a[k]).collect();
    out.push(0.0);
    out
}

/// Antiderivative with constant `c0`, truncated to the input length.
pub(crate) fn integ(a: &[f64], c0: f64) -> Vec<f64> {
    let mut out = vec![c0];
    out.extend((1..a.len()).map(|k| a[k - 1] / k as f64));
    out
}

pub(crate) fn atan(z: &[f64]) -> Vec<f64> {
    let mut one_plus = mul(z, z);
    one_plus[0] += 1.0;
    integ(&mul(&deriv(z), &recip(&one_plus)), z[0].atan())
}

/// Multiplication by `s`.
pub(crate) fn shift(a: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0];
    out.extend_from_slice(&a[..a.len() - 1]);
    out
}

pub(crate) fn eval(a: &[f64], s: f64) -> f64 {
    a.iter().rev().fold(0.0, |acc, c| acc * s + c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arctan_of_one_plus_s() {
        // atan(1 + s) = pi/4 + s/2 - s^2/4 + s^3/12 + 0 s^4 ...
        let a = atan(&[1.0, 1.0, 0.0, 0.0, 0.0]);
        let want = [std::f64::consts::FRAC_PI_4, 0.5, -0.25, 1.0 / 12.0, 0.0];
        for (x, y) in a.iter().zip(want) {
            assert!((x - y).abs() < 1e-15, "{a:?}");
        }
    }

    #[test]
    fn reciprocal_of_geometric() {
        let r = recip(&[1.0, -1.0, 0.0, 0.0]);
        assert_eq!(r, vec![1.0, 1.0, 1.0, 1.0]);
        assert_eq!(eval(&[1.0, 2.0, 3.0], 2.0), 17.0);
    }
}
