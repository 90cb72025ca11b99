//! Plain-text table writers shared by the command-line front end.
//!
//! All tables are tab separated with a header row. Floats use the shortest
//! representation that round-trips, so identical inputs give identical bytes.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::corr::CorrelationMatrix;
use crate::marketdata::ReturnPanel;
use crate::spectral::RollingSpectrumTrace;

/// Sidecar record of a correlation matrix file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixMetadata {
    pub assets: Vec<String>,
    pub window_start: String,
    pub window_end: String,
    #[serde(rename = "T")]
    pub t: usize,
    pub block_split: Option<usize>,
}

impl From<&CorrelationMatrix> for MatrixMetadata {
    fn from(c: &CorrelationMatrix) -> Self {
        Self {
            assets: c.assets.clone(),
            window_start: c.window.start.to_string(),
            window_end: c.window.end.to_string(),
            t: c.window.len,
            block_split: c.block_split,
        }
    }
}

/// Shortest round-trip decimal, switching to exponent form outside
/// `[1e-5, 1e16)`.
pub fn format_float(x: f64) -> String {
    let a = x.abs();
    if a != 0.0 && a.is_finite() && !(1e-5..1e16).contains(&a) {
        format!("{x:e}")
    } else {
        x.to_string()
    }
}

fn floats<'a>(values: impl IntoIterator<Item = &'a f64>) -> Vec<String> {
    values.into_iter().map(|v| format_float(*v)).collect()
}

fn row<W: Write, T: std::fmt::Display>(out: &mut W, first: &str, cells: impl IntoIterator<Item = T>) -> io::Result<()> {
    write!(out, "{first}")?;
    for c in cells {
        write!(out, "\t{c}")?;
    }
    writeln!(out)
}

/// Matrix with an asset-id header row and first column.
pub fn write_matrix<W: Write>(out: &mut W, c: &CorrelationMatrix) -> io::Result<()> {
    row(out, "asset", &c.assets)?;
    for (i, asset) in c.assets.iter().enumerate() {
        row(out, asset, floats(c.entries.row(i).iter()))?;
    }
    Ok(())
}

/// One row per date, one column per asset.
pub fn write_returns<W: Write>(out: &mut W, panel: &ReturnPanel) -> io::Result<()> {
    row(out, "date", &panel.assets)?;
    for (t, d) in panel.dates.iter().enumerate() {
        row(out, &d.to_string(), floats(panel.returns.column(t).iter()))?;
    }
    Ok(())
}

/// `window_end_date, lambda_1 … lambda_N`.
pub fn write_trace<W: Write>(out: &mut W, trace: &RollingSpectrumTrace) -> io::Result<()> {
    let n = trace.assets.len();
    row(out, "window_end_date", (1..=n).map(|k| format!("lambda_{k}")))?;
    for p in &trace.points {
        row(out, &p.window_end.to_string(), floats(&p.eigenvalues))?;
    }
    Ok(())
}

/// Leading-eigenvector components per window.
pub fn write_leading_vectors<W: Write>(out: &mut W, trace: &RollingSpectrumTrace) -> io::Result<()> {
    row(out, "window_end_date", &trace.assets)?;
    for p in &trace.points {
        row(out, &p.window_end.to_string(), floats(&p.leading_vector))?;
    }
    Ok(())
}

/// Generic table from a header and numeric rows.
pub fn write_table<W: Write>(out: &mut W, header: &[&str], rows: &[Vec<String>]) -> io::Result<()> {
    writeln!(out, "{}", header.join("\t"))?;
    for r in rows {
        writeln!(out, "{}", r.join("\t"))?;
    }
    Ok(())
}
