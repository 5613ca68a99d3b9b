//! Text formats for data and conductivity grids.
//!
//! Data files carry one row per reading and one column per sounding; each cell
//! is `re;im` and cells are separated by `,`:
//!
//! ```text
//! # fdem-data n_readings=12 n_soundings=3 order=nu,rho,h,omega
//! # meta preset=gem2 seed=0
//! 1.25e-3;4.5e-2,1.3e-3;4.4e-2,1.31e-3;4.39e-2
//! ...
//! ```
//!
//! Conductivity files are plain `n_layers x n_soundings` grids under a
//! `# fdem-conductivity n_layers=<n> n_soundings=<N>` header. An optional
//! `# meta` line directly below the header holds free-form `key=value` pairs.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

fn parse_err(line: usize, message: impl Into<String>) -> FormatError {
    FormatError::Parse { line, message: message.into() }
}

/// `key=value` pairs of a `# meta` line, kept sorted for stable output.
pub type Meta = BTreeMap<String, String>;

const DATA_MAGIC: &str = "fdem-data";
const SIGMA_MAGIC: &str = "fdem-conductivity";
const DATA_ORDER: &str = "nu,rho,h,omega";

/// Shortest representation that parses back to the same `f64`.
fn num(v: f64) -> String {
    format!("{v:e}")
}

fn write_meta(out: &mut String, meta: &Meta) {
    if meta.is_empty() {
        return;
    }
    out.push_str("# meta");
    for (k, v) in meta {
        let _ = write!(out, " {k}={v}");
    }
    out.push('\n');
}

pub fn data_to_string(data: &DMatrix<Complex64>, meta: &Meta) -> String {
    let mut out = format!(
        "# {DATA_MAGIC} n_readings={} n_soundings={} order={DATA_ORDER}\n",
        data.nrows(),
        data.ncols()
    );
    write_meta(&mut out, meta);
    for row in data.row_iter() {
        let cells: Vec<String> = row.iter().map(|z| format!("{};{}", num(z.re), num(z.im))).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn sigma_to_string(sigma: &DMatrix<f64>, meta: &Meta) -> String {
    let mut out = format!("# {SIGMA_MAGIC} n_layers={} n_soundings={}\n", sigma.nrows(), sigma.ncols());
    write_meta(&mut out, meta);
    for row in sigma.row_iter() {
        let cells: Vec<String> = row.iter().map(|v| num(*v)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

struct Header {
    fields: BTreeMap<String, String>,
    meta: Meta,
    body_start: usize,
}

fn pairs(line: usize, words: &[&str]) -> Result<BTreeMap<String, String>, FormatError> {
    words
        .iter()
        .map(|w| {
            w.split_once('=')
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .ok_or_else(|| parse_err(line, format!("expected key=value, found '{w}'")))
        })
        .collect()
}

fn header(lines: &[&str], magic: &str) -> Result<Header, FormatError> {
    let first = lines.first().ok_or_else(|| parse_err(1, "empty file"))?;
    let words: Vec<&str> = first.split_whitespace().collect();
    if words.len() < 2 || words[0] != "#" || words[1] != magic {
        return Err(parse_err(1, format!("expected header '# {magic} ...'")));
    }
    let fields = pairs(1, &words[2..])?;
    let mut body_start = 1;
    let mut meta = Meta::new();
    if let Some(second) = lines.get(1) {
        let words: Vec<&str> = second.split_whitespace().collect();
        if words.len() >= 2 && words[0] == "#" && words[1] == "meta" {
            meta = pairs(2, &words[2..])?;
            body_start = 2;
        }
    }
    Ok(Header { fields, meta, body_start })
}

fn dim(h: &Header, key: &str) -> Result<usize, FormatError> {
    let v = h.fields.get(key).ok_or_else(|| parse_err(1, format!("header lacks {key}")))?;
    v.parse().map_err(|_| parse_err(1, format!("{key}='{v}' is not a count")))
}

/// Rows of the body split into cells; blank lines are rejected.
fn body<'a>(lines: &[&'a str], h: &Header, rows: usize, cols: usize) -> Result<Vec<Vec<&'a str>>, FormatError> {
    let body = &lines[h.body_start..];
    if body.len() != rows {
        return Err(parse_err(h.body_start + body.len().min(rows) + 1, format!("expected {rows} rows, found {}", body.len())));
    }
    body.iter()
        .enumerate()
        .map(|(i, l)| {
            let cells: Vec<&str> = l.split(',').map(str::trim).collect();
            if cells.len() != cols {
                return Err(parse_err(h.body_start + i + 1, format!("expected {cols} cells, found {}", cells.len())));
            }
            Ok(cells)
        })
        .collect()
}

fn lines(text: &str) -> Vec<&str> {
    let mut v: Vec<&str> = text.lines().collect();
    while v.last().is_some_and(|l| l.trim().is_empty()) {
        v.pop();
    }
    v
}

fn real(line: usize, cell: &str) -> Result<f64, FormatError> {
    let v: f64 = cell.parse().map_err(|_| parse_err(line, format!("'{cell}' is not a number")))?;
    if !v.is_finite() {
        return Err(parse_err(line, format!("'{cell}' is not finite")));
    }
    Ok(v)
}

pub fn parse_data(text: &str) -> Result<(DMatrix<Complex64>, Meta), FormatError> {
    let lines = lines(text);
    let h = header(&lines, DATA_MAGIC)?;
    if let Some(order) = h.fields.get("order") {
        if order != DATA_ORDER {
            return Err(parse_err(1, format!("unsupported reading order '{order}'")));
        }
    }
    let (m, n) = (dim(&h, "n_readings")?, dim(&h, "n_soundings")?);
    let rows = body(&lines, &h, m, n)?;
    let mut data = DMatrix::zeros(m, n);
    for (i, cells) in rows.iter().enumerate() {
        let line = h.body_start + i + 1;
        for (j, cell) in cells.iter().enumerate() {
            let (re, im) = cell.split_once(';').ok_or_else(|| parse_err(line, format!("'{cell}' is not 're;im'")))?;
            data[(i, j)] = Complex64::new(real(line, re.trim())?, real(line, im.trim())?);
        }
    }
    Ok((data, h.meta))
}

pub fn parse_sigma(text: &str) -> Result<(DMatrix<f64>, Meta), FormatError> {
    let lines = lines(text);
    let h = header(&lines, SIGMA_MAGIC)?;
    let (n, big_n) = (dim(&h, "n_layers")?, dim(&h, "n_soundings")?);
    let rows = body(&lines, &h, n, big_n)?;
    let mut sigma = DMatrix::zeros(n, big_n);
    for (i, cells) in rows.iter().enumerate() {
        for (j, cell) in cells.iter().enumerate() {
            sigma[(i, j)] = real(h.body_start + i + 1, cell)?;
        }
    }
    Ok((sigma, h.meta))
}

fn read(path: &Path) -> Result<String, FormatError> {
    std::fs::read_to_string(path).map_err(|source| FormatError::Io { path: path.display().to_string(), source })
}

pub fn read_data(path: &Path) -> Result<(DMatrix<Complex64>, Meta), FormatError> {
    parse_data(&read(path)?)
}

pub fn read_sigma(path: &Path) -> Result<(DMatrix<f64>, Meta), FormatError> {
    parse_sigma(&read(path)?)
}

/// Binary greyscale quick-look, black at zero and white at the image maximum.
pub fn sigma_to_pgm(sigma: &DMatrix<f64>) -> Vec<u8> {
    let top = sigma.iter().copied().fold(0.0, f64::max);
    let mut out = format!("P5\n{} {}\n255\n", sigma.ncols(), sigma.nrows()).into_bytes();
    for row in sigma.row_iter() {
        for v in row.iter() {
            let g = if top > 0.0 { (v / top).clamp(0.0, 1.0) * 255.0 } else { 0.0 };
            out.push(g.round() as u8);
        }
    }
    out
}
