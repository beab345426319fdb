//! CSV input/output.
//!
//! Input files hold either one column `y` or two columns `x, y`, with or
//! without a header row. Numbers are written with 17 significant digits so
//! that reruns reproduce files byte for byte; missing values are empty
//! fields.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use frontier_core::Sample;
use sha2::{Digest, Sha256};

use crate::error::AppError;

/// Relative tolerance on the spacing of an explicit `x` column.
pub const SPACING_TOL: f64 = 1e-6;

/// Data read from a CSV file.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub sample: Sample,
    /// Original `x` values, or `j/n` when the file has no `x` column.
    pub xs: Vec<f64>,
    pub explicit_x: bool,
    /// Hex SHA-256 of the raw file bytes.
    pub digest: String,
}

impl Dataset {
    /// Unit design coordinate of an input-scale `x`: the affine map sending
    /// `xs[j-1]` to `j/n`.
    pub fn to_unit(&self, x: f64) -> f64 {
        let n = self.xs.len() as f64;
        let step = (self.xs[self.xs.len() - 1] - self.xs[0]) / (n - 1.0);
        ((x - self.xs[0]) / step + 1.0) / n
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn read_dataset(path: &Path) -> Result<Dataset, AppError> {
    let mut bytes = Vec::new();
    File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| AppError::io(format!("cannot read {}", path.display()), e))?;
    parse_dataset(&bytes)
}

fn parse_field(field: &str, line: u64) -> Result<f64, AppError> {
    let v: f64 = field.trim().parse().map_err(|_| AppError::Parse {
        line,
        message: format!("'{field}' is not a number"),
    })?;
    if !v.is_finite() {
        return Err(AppError::Parse {
            line,
            message: format!("'{field}' is not finite"),
        });
    }
    Ok(v)
}

pub fn parse_dataset(bytes: &[u8]) -> Result<Dataset, AppError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(bytes);
    let mut rows: Vec<(u64, Vec<String>)> = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| AppError::Parse {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.iter().all(|f| f.is_empty()) {
            continue;
        }
        rows.push((line, rec.iter().map(str::to_owned).collect()));
    }
    let Some((first_line, first)) = rows.first().cloned() else {
        return Err(AppError::Input("input file has no data rows".into()));
    };
    let header = first.iter().any(|f| f.parse::<f64>().is_err());
    let (width, y_col, x_col) = if header {
        let names: Vec<String> = first.iter().map(|s| s.to_ascii_lowercase()).collect();
        let find = |name: &str| names.iter().position(|c| c == name);
        let y = find("y").ok_or(AppError::Parse {
            line: first_line,
            message: "header has no 'y' column".into(),
        })?;
        (names.len(), y, find("x"))
    } else {
        match first.len() {
            1 => (1, 0, None),
            2 => (2, 1, Some(0)),
            w => {
                return Err(AppError::Parse {
                    line: first_line,
                    message: format!("expected 1 or 2 columns without a header, found {w}"),
                })
            }
        }
    };
    let data = if header { &rows[1..] } else { &rows[..] };
    let mut xs = Vec::with_capacity(data.len());
    let mut ys = Vec::with_capacity(data.len());
    for (line, fields) in data {
        if fields.len() != width {
            return Err(AppError::Parse {
                line: *line,
                message: format!("expected {width} fields, found {}", fields.len()),
            });
        }
        ys.push(parse_field(&fields[y_col], *line)?);
        if let Some(c) = x_col {
            xs.push(parse_field(&fields[c], *line)?);
        }
    }
    let n = ys.len();
    if n < 2 {
        return Err(AppError::Input(format!("need at least two observations, found {n}")));
    }
    let explicit_x = x_col.is_some();
    if explicit_x {
        check_equidistant(&xs)?;
    } else {
        xs = (1..=n).map(|j| j as f64 / n as f64).collect();
    }
    Ok(Dataset {
        sample: Sample::new(ys)?,
        xs,
        explicit_x,
        digest: sha256_hex(bytes),
    })
}

/// Consecutive spacings must agree with the mean spacing within
/// [`SPACING_TOL`] relative, and be increasing.
pub fn check_equidistant(xs: &[f64]) -> Result<(), AppError> {
    let n = xs.len();
    let expected = (xs[n - 1] - xs[0]) / (n - 1) as f64;
    for (i, w) in xs.windows(2).enumerate() {
        let spacing = w[1] - w[0];
        if expected.is_nan() || expected <= 0.0 || (spacing - expected).abs() > SPACING_TOL * expected {
            return Err(AppError::NonEquidistantDesign {
                row: i + 2,
                spacing,
                expected,
            });
        }
    }
    Ok(())
}

/// Fixed-format number: 17 significant digits in scientific notation.
pub fn fmt_num(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_num).unwrap_or_default()
}

/// Writes a CSV table with `\n` line endings.
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<(), AppError> {
    let ctx = || format!("cannot write {}", path.display());
    let file = File::create(path).map_err(|e| AppError::io(ctx(), e))?;
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(file);
    let csv_err = |e: csv::Error| AppError::io(ctx(), std::io::Error::other(e));
    w.write_record(header).map_err(csv_err)?;
    for r in rows {
        w.write_record(r).map_err(csv_err)?;
    }
    w.flush().map_err(|e| AppError::io(ctx(), e))
}

pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<(), AppError> {
    let ctx = || format!("cannot write {}", path.display());
    let mut text = serde_json::to_string_pretty(value).map_err(|e| AppError::io(ctx(), std::io::Error::other(e)))?;
    text.push('\n');
    File::create(path)
        .and_then(|mut f| f.write_all(text.as_bytes()))
        .map_err(|e| AppError::io(ctx(), e))
}
