//! File formats: graph and bank JSON, signal and matrix CSV, Matrix Market
//! text, PGM images and pyramid dumps.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::circulant::CirculantGraph;
use crate::error::{GwtError, Result};
use crate::multiscale::{NlaResult, Pyramid};
use crate::signal::GraphSignal;

/// 17 significant digits, enough to round-trip any double.
pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

fn parse_f64(s: &str, line: usize) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| GwtError::Parse(format!("line {line}: '{}' is not a number", s.trim())))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

pub fn to_json<T: Serialize>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

pub fn write_json<T: Serialize>(path: &Path, v: &T) -> Result<()> {
    fs::write(path, to_json(v)?)?;
    Ok(())
}

pub fn read_graph(path: &Path) -> Result<CirculantGraph> {
    read_json(path)
}

/// `index,re,im` with one row per node.
pub fn signal_to_csv(x: &GraphSignal) -> String {
    let mut s = String::from("index,re,im\n");
    for (i, v) in x.values().iter().enumerate() {
        let _ = writeln!(s, "{i},{},{}", fmt_f64(v.re), fmt_f64(v.im));
    }
    s
}

/// Reads `index,re,im`, `index,value`, or a bare column of values. A header
/// line is skipped when it is not numeric.
pub fn signal_from_csv(text: &str, label: &str) -> Result<GraphSignal> {
    let mut rows: Vec<(Option<usize>, Complex64)> = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if ln == 0 && f[0].trim().parse::<f64>().is_err() {
            continue;
        }
        let row = match f.len() {
            1 => (None, Complex64::new(parse_f64(f[0], ln + 1)?, 0.0)),
            2 => (
                Some(parse_f64(f[0], ln + 1)? as usize),
                Complex64::new(parse_f64(f[1], ln + 1)?, 0.0),
            ),
            3 => (
                Some(parse_f64(f[0], ln + 1)? as usize),
                Complex64::new(parse_f64(f[1], ln + 1)?, parse_f64(f[2], ln + 1)?),
            ),
            k => {
                return Err(GwtError::Parse(format!(
                    "line {}: expected 1-3 fields, got {k}",
                    ln + 1
                )))
            }
        };
        rows.push(row);
    }
    for (i, (idx, _)) in rows.iter().enumerate() {
        if let Some(idx) = idx {
            if *idx != i {
                return Err(GwtError::Parse(format!("row {i} has index {idx}")));
            }
        }
    }
    Ok(GraphSignal::new(
        rows.into_iter().map(|r| r.1).collect(),
        label,
    ))
}

pub fn read_signal(path: &Path) -> Result<GraphSignal> {
    let label = path.file_stem().and_then(|s| s.to_str()).unwrap_or("");
    signal_from_csv(&fs::read_to_string(path)?, label)
}

pub fn write_signal(path: &Path, x: &GraphSignal) -> Result<()> {
    fs::write(path, signal_to_csv(x))?;
    Ok(())
}

pub fn matrix_to_csv(m: &DMatrix<f64>) -> String {
    let mut s = String::new();
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| fmt_f64(m[(i, j)])).collect();
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}

/// Dense matrix from CSV (comma or whitespace separated) or Matrix Market
/// (`coordinate` or `array`, `general` or `symmetric`).
pub fn matrix_from_text(text: &str) -> Result<DMatrix<f64>> {
    if text.trim_start().starts_with("%%MatrixMarket") {
        return matrix_market(text);
    }
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with('%') {
            continue;
        }
        let r = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(|t| parse_f64(t, ln + 1))
            .collect::<Result<Vec<_>>>()?;
        rows.push(r);
    }
    let nr = rows.len();
    let nc = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != nc) {
        return Err(GwtError::Parse("ragged matrix rows".into()));
    }
    Ok(DMatrix::from_fn(nr, nc, |i, j| rows[i][j]))
}

fn matrix_market(text: &str) -> Result<DMatrix<f64>> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| GwtError::Parse("empty file".into()))?;
    let h = header.to_lowercase();
    let coordinate = h.contains("coordinate");
    let symmetric = h.contains("symmetric");
    if h.contains("complex") {
        return Err(GwtError::Parse(
            "complex Matrix Market files are not supported".into(),
        ));
    }
    let mut body = lines.filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('%'));
    let (ln, size) = body
        .next()
        .ok_or_else(|| GwtError::Parse("missing size line".into()))?;
    let dims = size
        .split_whitespace()
        .map(|t| parse_f64(t, ln + 1).map(|v| v as usize))
        .collect::<Result<Vec<_>>>()?;
    if dims.len() < 2 {
        return Err(GwtError::Parse("size line needs rows and columns".into()));
    }
    let mut m = DMatrix::zeros(dims[0], dims[1]);
    if coordinate {
        for (ln, l) in body {
            let t: Vec<&str> = l.split_whitespace().collect();
            if t.len() < 2 {
                return Err(GwtError::Parse(format!("line {}: short entry", ln + 1)));
            }
            let i = parse_f64(t[0], ln + 1)? as usize;
            let j = parse_f64(t[1], ln + 1)? as usize;
            let v = if t.len() > 2 {
                parse_f64(t[2], ln + 1)?
            } else {
                1.0
            };
            if i == 0 || j == 0 || i > dims[0] || j > dims[1] {
                return Err(GwtError::Parse(format!(
                    "line {}: index out of range",
                    ln + 1
                )));
            }
            m[(i - 1, j - 1)] = v;
            if symmetric {
                m[(j - 1, i - 1)] = v;
            }
        }
    } else {
        let vals = body
            .map(|(ln, l)| parse_f64(l, ln + 1))
            .collect::<Result<Vec<_>>>()?;
        let mut it = vals.into_iter();
        for j in 0..dims[1] {
            let start = if symmetric { j } else { 0 };
            for i in start..dims[0] {
                let v = it
                    .next()
                    .ok_or_else(|| GwtError::Parse("too few array entries".into()))?;
                m[(i, j)] = v;
                if symmetric {
                    m[(j, i)] = v;
                }
            }
        }
    }
    Ok(m)
}

pub fn read_matrix(path: &Path) -> Result<DMatrix<f64>> {
    matrix_from_text(&fs::read_to_string(path)?)
}

/// 8-bit PGM (`P2` or `P5`) as row-major intensities and `(height, width)`.
pub fn pgm_from_bytes(data: &[u8]) -> Result<(Vec<f64>, (usize, usize))> {
    let mut pos = 0;
    let mut token = || -> Result<String> {
        loop {
            while pos < data.len() && data[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if pos < data.len() && data[pos] == b'#' {
                while pos < data.len() && data[pos] != b'\n' {
                    pos += 1;
                }
                continue;
            }
            break;
        }
        let start = pos;
        while pos < data.len() && !data[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(GwtError::Parse("truncated PGM header".into()));
        }
        Ok(String::from_utf8_lossy(&data[start..pos]).into_owned())
    };
    let magic = token()?;
    let num = |s: String| {
        s.parse::<usize>()
            .map_err(|_| GwtError::Parse(format!("bad PGM field '{s}'")))
    };
    let w = num(token()?)?;
    let h = num(token()?)?;
    let maxval = num(token()?)?;
    if maxval == 0 || maxval > 255 {
        return Err(GwtError::Parse(format!(
            "only 8-bit PGM is supported (maxval {maxval})"
        )));
    }
    let n = w * h;
    let vals = match magic.as_str() {
        "P5" => {
            let start = pos + 1;
            let px = data
                .get(start..start + n)
                .ok_or_else(|| GwtError::Parse("truncated PGM pixel data".into()))?;
            px.iter().map(|&b| b as f64).collect()
        }
        "P2" => (0..n)
            .map(|_| token().and_then(|t| num(t).map(|v| v as f64)))
            .collect::<Result<Vec<_>>>()?,
        m => return Err(GwtError::Parse(format!("unsupported PGM magic '{m}'"))),
    };
    Ok((vals, (h, w)))
}

/// Image from a PGM file, or from a CSV matrix of intensities.
pub fn read_image(path: &Path) -> Result<(Vec<f64>, (usize, usize))> {
    let data = fs::read(path)?;
    if data.starts_with(b"P2") || data.starts_with(b"P5") {
        return pgm_from_bytes(&data);
    }
    let m = matrix_from_text(&String::from_utf8_lossy(&data))?;
    let (h, w) = (m.nrows(), m.ncols());
    Ok(((0..h * w).map(|i| m[(i / w, i % w)]).collect(), (h, w)))
}

pub fn nla_to_csv(r: &NlaResult) -> String {
    let mut s = String::from("k,snr_db\n");
    for p in &r.curve {
        let _ = writeln!(s, "{},{}", p.k, fmt_f64(p.snr_db));
    }
    s
}

/// Writes `pyramid.json` plus `level_<j>_hp.csv` and `root_lp.csv` into
/// `dir`, returning the files written.
pub fn write_pyramid(dir: &Path, p: &Pyramid) -> Result<Vec<String>> {
    fs::create_dir_all(dir)?;
    let mut files = Vec::new();
    let mut levels = Vec::new();
    for (j, l) in p.levels.iter().enumerate() {
        let name = format!("level_{j}_hp.csv");
        write_signal(&dir.join(&name), &GraphSignal::new(l.hp_coeffs.clone(), ""))?;
        levels.push(serde_json::json!({
            "level": j,
            "graph": l.graph,
            "pattern": l.pattern.to_bit_string(),
            "bank": l.bank,
            "hp_file": name,
        }));
        files.push(name);
    }
    write_signal(&dir.join("root_lp.csv"), &p.root_lp)?;
    files.push("root_lp.csv".into());
    let manifest = serde_json::json!({
        "strategy": p.strategy,
        "levels": levels,
        "root_graph": p.root_graph,
        "root_lp_file": "root_lp.csv",
    });
    write_json(&dir.join("pyramid.json"), &manifest)?;
    files.push("pyramid.json".into());
    Ok(files)
}
