//! Plain-text grid format.
//!
//! ```text
//! # grid n=2 m=3 h=0.5 lo=-0.5,-0.5
//! -5.0000000000000000e-1,-5.0000000000000000e-1,2.5000000000000000e-1
//! ...
//! # key=value        (optional footer comments)
//! ```

use std::io::Write;
use std::path::Path;

use super::grid::{GridFunction, GridSpec};
use crate::error::{Error, Result};

/// Format with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn grid_header(spec: &GridSpec) -> String {
    let lo: Vec<String> = spec.lo().iter().map(|v| v.to_string()).collect();
    format!(
        "# grid n={} m={} h={} lo={}",
        spec.dim(),
        spec.points_per_axis(),
        spec.spacing(),
        lo.join(",")
    )
}

pub fn write_grid<W: Write>(w: &mut W, u: &GridFunction) -> std::io::Result<()> {
    let spec = u.spec();
    writeln!(w, "{}", grid_header(spec))?;
    let mut line = String::new();
    for flat in 0..spec.len() {
        line.clear();
        for x in spec.point_of(flat) {
            line.push_str(&fmt_f64(x));
            line.push(',');
        }
        line.push_str(&fmt_f64(u.at_flat(flat)));
        writeln!(w, "{line}")?;
    }
    Ok(())
}

/// Writes a grid block followed by `# key=value` footer lines.
pub fn write_grid_file(path: &Path, u: &GridFunction, footer: &[(String, String)]) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_grid(&mut out, u)?;
    for (k, v) in footer {
        writeln!(out, "# {k}={v}")?;
    }
    out.flush()?;
    Ok(())
}

pub fn grid_to_string(u: &GridFunction) -> String {
    let mut buf = Vec::new();
    write_grid(&mut buf, u).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("ascii output")
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn parse_f64(s: &str, line: usize) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| parse_err(line, format!("not a number: {s:?}")))
}

/// Parses `key=value` tokens separated by whitespace.
pub fn parse_kv_tokens(s: &str) -> Vec<(String, String)> {
    s.split_whitespace()
        .filter_map(|tok| tok.split_once('='))
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
}

pub fn parse_grid_header(line: &str, line_no: usize) -> Result<GridSpec> {
    let rest = line
        .trim()
        .strip_prefix("# grid")
        .ok_or_else(|| parse_err(line_no, "expected '# grid' header"))?;
    let kv = parse_kv_tokens(rest);
    let get = |key: &str| {
        kv.iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
            .ok_or_else(|| parse_err(line_no, format!("header missing {key}")))
    };
    let n: usize = get("n")?.parse().map_err(|_| parse_err(line_no, "bad n"))?;
    let m: usize = get("m")?.parse().map_err(|_| parse_err(line_no, "bad m"))?;
    let h = parse_f64(get("h")?, line_no)?;
    let lo = get("lo")?
        .split(',')
        .map(|t| parse_f64(t, line_no))
        .collect::<Result<Vec<_>>>()?;
    if lo.len() != n {
        return Err(parse_err(line_no, format!("lo has {} entries, n = {n}", lo.len())));
    }
    GridSpec::new(lo, h, m)
}

/// Parsed grid plus any `# key=value` footer pairs.
pub struct GridDocument {
    pub grid: GridFunction,
    pub footer: Vec<(String, String)>,
}

/// Parses a grid block from `lines`, starting at its header. `first_line` is the
/// 1-based number of the header line, for error messages.
pub fn parse_grid_lines<'a>(
    lines: impl Iterator<Item = &'a str>,
    first_line: usize,
) -> Result<GridDocument> {
    let mut lines = lines
        .enumerate()
        .map(|(i, l)| (i + first_line, l))
        .filter(|(_, l)| !l.trim().is_empty());
    let (no, header) = lines.next().ok_or_else(|| parse_err(first_line, "empty grid block"))?;
    let spec = parse_grid_header(header, no)?;
    let n = spec.dim();
    let mut values = Vec::with_capacity(spec.len());
    let mut footer = Vec::new();
    for (no, line) in lines {
        let t = line.trim();
        if let Some(c) = t.strip_prefix('#') {
            footer.extend(parse_kv_tokens(c));
            continue;
        }
        if values.len() == spec.len() {
            return Err(parse_err(no, "more rows than grid nodes"));
        }
        let fields: Vec<&str> = t.split(',').collect();
        if fields.len() != n + 1 {
            return Err(parse_err(no, format!("expected {} fields, got {}", n + 1, fields.len())));
        }
        let expect = spec.point_of(values.len());
        for (a, f) in fields[..n].iter().enumerate() {
            let x = parse_f64(f, no)?;
            if (x - expect[a]).abs() > 1e-9 * (1.0 + expect[a].abs()) {
                return Err(parse_err(no, format!("coordinate {x} does not match node {}", expect[a])));
            }
        }
        values.push(parse_f64(fields[n], no)?);
    }
    if values.len() != spec.len() {
        return Err(parse_err(first_line, format!("{} rows for {} nodes", values.len(), spec.len())));
    }
    Ok(GridDocument { grid: GridFunction::new(spec, values)?, footer })
}

pub fn parse_grid(text: &str) -> Result<GridDocument> {
    parse_grid_lines(text.lines(), 1)
}

pub fn read_grid_file(path: &Path) -> Result<GridDocument> {
    parse_grid(&std::fs::read_to_string(path)?)
}
