use std::path::Path;

use crate::error::{Error, Result};
use crate::grid_core::parse_kv_tokens;

/// Samples of `psi` on a tensor grid over `(x_1..x_n, p_1..p_n)`, last axis fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseTable {
    n: usize,
    lo: Vec<f64>,
    h: Vec<f64>,
    m: Vec<usize>,
    values: Vec<f64>,
}

impl PhaseTable {
    pub fn new(n: usize, lo: Vec<f64>, h: Vec<f64>, m: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        let axes = 2 * n;
        if n == 0 || lo.len() != axes || h.len() != axes || m.len() != axes {
            return Err(Error::InvalidPhase(format!(
                "table over n = {n} needs {axes} axes for lo, h and m"
            )));
        }
        if lo.iter().any(|v| !v.is_finite()) || h.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::InvalidPhase("table lo must be finite and h positive".into()));
        }
        if m.iter().any(|&k| k < 2) {
            return Err(Error::InvalidPhase("table axes need at least 2 samples".into()));
        }
        let len = m.iter().try_fold(1usize, |acc, &k| acc.checked_mul(k));
        if len != Some(values.len()) {
            return Err(Error::InvalidPhase(format!(
                "table expects {:?} values, got {}",
                len,
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("phase table"));
        }
        Ok(Self { n, lo, h, m, values })
    }

    /// Samples `f(x, p)` on the given axes.
    pub fn from_fn(
        n: usize,
        lo: Vec<f64>,
        h: Vec<f64>,
        m: Vec<usize>,
        f: impl Fn(&[f64], &[f64]) -> f64,
    ) -> Result<Self> {
        let total: usize = m.iter().product();
        let mut values = Vec::with_capacity(total);
        let mut pt = vec![0.0; 2 * n];
        for flat in 0..total {
            let mut r = flat;
            for a in (0..2 * n).rev() {
                pt[a] = lo[a] + (r % m[a]) as f64 * h[a];
                r /= m[a];
            }
            values.push(f(&pt[..n], &pt[n..]));
        }
        Self::new(n, lo, h, m, values)
    }

    /// Spatial dimension `n`; the table has `2n` axes.
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn spacing(&self) -> &[f64] {
        &self.h
    }

    pub fn shape(&self) -> &[usize] {
        &self.m
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn hi(&self, axis: usize) -> f64 {
        self.lo[axis] + (self.m[axis] - 1) as f64 * self.h[axis]
    }

    /// Multilinear interpolation at `(x, p)`.
    pub fn eval(&self, x: &[f64], p: &[f64]) -> Result<f64> {
        if x.len() != self.n || p.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: x.len().max(p.len()) });
        }
        let axes = 2 * self.n;
        let mut base = vec![0usize; axes];
        let mut frac = vec![0.0; axes];
        for a in 0..axes {
            let v = if a < self.n { x[a] } else { p[a - self.n] };
            let t = (v - self.lo[a]) / self.h[a];
            let top = (self.m[a] - 1) as f64;
            let slack = 1e-9;
            if !(t >= -slack && t <= top + slack) {
                return Err(Error::TableOutOfRange { axis: a, value: v });
            }
            let t = t.clamp(0.0, top);
            let i = (t.floor() as usize).min(self.m[a] - 2);
            base[a] = i;
            frac[a] = t - i as f64;
        }
        let mut acc = 0.0;
        for corner in 0..(1usize << axes) {
            let mut w = 1.0;
            let mut flat = 0usize;
            for a in 0..axes {
                let bit = (corner >> (axes - 1 - a)) & 1;
                w *= if bit == 1 { frac[a] } else { 1.0 - frac[a] };
                flat = flat * self.m[a] + base[a] + bit;
            }
            if w != 0.0 {
                acc += w * self.values[flat];
            }
        }
        Ok(acc)
    }

    /// Largest difference quotient along each axis; bounds the interpolant's partials.
    pub fn axis_slopes(&self) -> Vec<f64> {
        let axes = 2 * self.n;
        let mut out = vec![0.0f64; axes];
        let mut stride = 1usize;
        for a in (0..axes).rev() {
            for (flat, v) in self.values.iter().enumerate() {
                if (flat / stride) % self.m[a] + 1 < self.m[a] {
                    let d = (self.values[flat + stride] - v).abs() / self.h[a];
                    out[a] = out[a].max(d);
                }
            }
            stride *= self.m[a];
        }
        out
    }

    /// Text form: header `# phase-table n= lo= h= m=` then one value per line.
    pub fn to_text(&self) -> String {
        let join = |v: Vec<String>| v.join(",");
        let mut s = format!(
            "# phase-table n={} lo={} h={} m={}\n",
            self.n,
            join(self.lo.iter().map(|v| format!("{v}")).collect()),
            join(self.h.iter().map(|v| format!("{v}")).collect()),
            join(self.m.iter().map(|v| v.to_string()).collect()),
        );
        for v in &self.values {
            s.push_str(&format!("{v:.16e}\n"));
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or(Error::Parse { line: 1, msg: "empty table".into() })?;
        let body = header
            .trim()
            .strip_prefix("# phase-table")
            .ok_or(Error::Parse { line: 1, msg: "expected '# phase-table' header".into() })?;
        let kv = parse_kv_tokens(body);
        let get = |k: &str| {
            kv.iter()
                .find(|(key, _)| key == k)
                .map(|(_, v)| v.as_str())
                .ok_or(Error::Parse { line: 1, msg: format!("missing {k}=") })
        };
        let bad = |msg: String| Error::Parse { line: 1, msg };
        let n: usize = get("n")?.parse().map_err(|e| bad(format!("n: {e}")))?;
        let floats = |s: &str| -> Result<Vec<f64>> {
            s.split(',').map(|t| t.trim().parse::<f64>().map_err(|e| bad(format!("{t}: {e}")))).collect()
        };
        let lo = floats(get("lo")?)?;
        let h = floats(get("h")?)?;
        let m = get("m")?
            .split(',')
            .map(|t| t.trim().parse::<usize>().map_err(|e| bad(format!("{t}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        let mut values = Vec::new();
        for (i, line) in lines {
            let t = line.trim();
            if t.starts_with('#') {
                continue;
            }
            values.push(t.parse::<f64>().map_err(|e| Error::Parse { line: i + 1, msg: format!("{t}: {e}") })?);
        }
        Self::new(n, lo, h, m, values)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }
}
