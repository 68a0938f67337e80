//! Check results and the files they are written to.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

/// Header of every result table.
pub const RESULT_HEADER: [&str; 8] = ["run_id", "mode", "check", "lhs", "rhs", "residual", "pass", "seconds"];

/// Header of plot-data tables.
pub const PLOT_HEADER: [&str; 4] = ["t", "w", "u_sup", "energy_proxy"];

/// One evaluated check. It passes iff `residual <= tol`; a NaN residual fails.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    pub tol: f64,
    pub seconds: f64,
}

impl Check {
    /// `|lhs - rhs| <= tol`.
    pub fn close(name: impl Into<String>, lhs: f64, rhs: f64, tol: f64) -> Self {
        Self::with_residual(name, lhs, rhs, (lhs - rhs).abs(), tol)
    }

    /// `|lhs - rhs| / |rhs| <= tol`.
    pub fn relative(name: impl Into<String>, lhs: f64, rhs: f64, tol: f64) -> Self {
        let residual = if lhs == rhs { 0.0 } else { (lhs - rhs).abs() / rhs.abs() };
        Self::with_residual(name, lhs, rhs, residual, tol)
    }

    /// `lhs <= rhs`; the residual is the excess.
    pub fn at_most(name: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        Self::with_residual(name, lhs, rhs, excess(lhs - rhs), 0.0)
    }

    /// `lhs >= rhs`; the residual is the shortfall.
    pub fn at_least(name: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        Self::with_residual(name, lhs, rhs, excess(rhs - lhs), 0.0)
    }

    /// `lhs > rhs`.
    pub fn above(name: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        let residual = if lhs > rhs { 0.0 } else if lhs.is_nan() { f64::NAN } else { rhs - lhs + f64::MIN_POSITIVE };
        Self::with_residual(name, lhs, rhs, residual, 0.0)
    }

    /// A yes/no property, encoded as `lhs = 1` (holds) against `rhs = 1`.
    pub fn holds(name: impl Into<String>, ok: bool) -> Self {
        let v = if ok { 1.0 } else { 0.0 };
        Self::with_residual(name, v, 1.0, 1.0 - v, 0.0)
    }

    /// A check whose evaluation raised an error.
    pub fn errored(name: impl Into<String>, err: impl fmt::Display) -> Self {
        Self::with_residual(format!("{} (error: {err})", name.into()), f64::NAN, f64::NAN, f64::NAN, 0.0)
    }

    pub fn with_residual(name: impl Into<String>, lhs: f64, rhs: f64, residual: f64, tol: f64) -> Self {
        Self {
            name: name.into(),
            lhs,
            rhs,
            residual,
            tol,
            seconds: 0.0,
        }
    }

    pub fn passed(&self) -> bool {
        self.residual <= self.tol
    }

    /// Name with the tolerance appended, as written to the tables.
    pub fn label(&self) -> String {
        format!("{} [tol {:e}]", self.name, self.tol)
    }

    /// Test hook: a negative tolerance no residual can meet.
    pub fn invert_tolerance(&mut self) {
        self.tol = -(self.tol.abs() + 1.0);
    }
}

/// `max(x, 0)`, keeping NaN.
pub fn excess(x: f64) -> f64 {
    if x.is_nan() {
        f64::NAN
    } else {
        x.max(0.0)
    }
}

/// One row of the result table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub run_id: String,
    pub mode: String,
    pub check: String,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    pub pass: bool,
    pub seconds: f64,
}

impl ResultRecord {
    pub fn from_check(run_id: &str, mode: &str, check: &Check) -> Self {
        Self {
            run_id: run_id.to_string(),
            mode: mode.to_string(),
            check: check.label(),
            lhs: check.lhs,
            rhs: check.rhs,
            residual: check.residual,
            pass: check.passed(),
            seconds: check.seconds,
        }
    }
}

/// Seventeen significant digits, enough to recover every `f64` exactly.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, thiserror::Error)]
#[error("cannot write {path}: {source}")]
pub struct WriteError {
    pub path: PathBuf,
    #[source]
    pub source: Box<dyn std::error::Error + Send + Sync>,
}

fn partial_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(".partial");
    path.with_file_name(name)
}

/// Writes `path` through `path.partial`, renamed only after a complete write,
/// so a final file is never truncated.
pub fn write_atomic(
    path: &Path,
    fill: impl FnOnce(&mut dyn Write) -> Result<(), Box<dyn std::error::Error + Send + Sync>>,
) -> Result<(), WriteError> {
    let wrap = |source: Box<dyn std::error::Error + Send + Sync>| WriteError {
        path: path.to_path_buf(),
        source,
    };
    let tmp = partial_path(path);
    let file = fs::File::create(&tmp).map_err(|e| wrap(e.into()))?;
    let mut out = std::io::BufWriter::new(file);
    fill(&mut out).map_err(wrap)?;
    let file = out.into_inner().map_err(|e| wrap(e.into_error().into()))?;
    file.sync_all().map_err(|e| wrap(e.into()))?;
    fs::rename(&tmp, path).map_err(|e| wrap(e.into()))
}

fn csv_writer(out: &mut dyn Write) -> csv::Writer<&mut dyn Write> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out)
}

pub fn write_results_csv(out: &mut dyn Write, records: &[ResultRecord]) -> csv::Result<()> {
    let mut w = csv_writer(out);
    w.write_record(RESULT_HEADER)?;
    for r in records {
        w.write_record([
            r.run_id.clone(),
            r.mode.clone(),
            r.check.clone(),
            fmt_f64(r.lhs),
            fmt_f64(r.rhs),
            fmt_f64(r.residual),
            r.pass.to_string(),
            fmt_f64(r.seconds),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_plot_csv(out: &mut dyn Write, rows: &[[f64; 4]]) -> csv::Result<()> {
    let mut w = csv_writer(out);
    w.write_record(PLOT_HEADER)?;
    for row in rows {
        w.write_record(row.iter().map(|v| fmt_f64(*v)))?;
    }
    w.flush()?;
    Ok(())
}

/// Writes a table whose cells are already formatted.
pub fn write_table_csv(out: &mut dyn Write, header: &[&str], rows: &[Vec<String>]) -> csv::Result<()> {
    let mut w = csv_writer(out);
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}
