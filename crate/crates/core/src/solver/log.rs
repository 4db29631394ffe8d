use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

/// Header of the iteration CSV.
pub const CSV_HEADER: &str = "iter,primal,dual,psnr,time_ms,objective";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    /// 1-based iteration index.
    pub iter: usize,
    pub primal: f64,
    pub dual: f64,
    /// PSNR of `v` against the ground truth, NaN without one.
    pub psnr: f64,
    /// Wall time since the solver started, at the end of this iteration.
    pub time_ms: f64,
    /// `f(x)` after the x-update.
    pub objective: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct IterationLog {
    pub records: Vec<IterationRecord>,
}

impl IterationLog {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last(&self) -> Option<&IterationRecord> {
        self.records.last()
    }

    pub fn primal(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.primal).collect()
    }

    pub fn dual(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.dual).collect()
    }

    /// Renders the log as CSV. With `with_time = false` the `time_ms`
    /// column holds `nan`, which makes the output reproducible byte for byte.
    pub fn to_csv(&self, with_time: bool) -> String {
        let mut out = String::with_capacity(64 * (self.records.len() + 1));
        out.push_str(CSV_HEADER);
        out.push('\n');
        for r in &self.records {
            let time = if with_time {
                fmt_fixed(r.time_ms, 3)
            } else {
                "nan".into()
            };
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                r.iter,
                fmt_real(r.primal),
                fmt_real(r.dual),
                fmt_fixed(r.psnr, 6),
                time,
                fmt_real(r.objective)
            );
        }
        out
    }

    pub fn write_csv(&self, path: &Path, with_time: bool) -> Result<()> {
        std::fs::write(path, self.to_csv(with_time)).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }
}

fn non_finite(v: f64) -> Option<String> {
    if v.is_nan() {
        Some("nan".into())
    } else if v.is_infinite() {
        Some(if v > 0.0 { "inf" } else { "-inf" }.into())
    } else {
        None
    }
}

/// Shortest round-trip scientific notation.
fn fmt_real(v: f64) -> String {
    non_finite(v).unwrap_or_else(|| format!("{v:e}"))
}

fn fmt_fixed(v: f64, digits: usize) -> String {
    non_finite(v).unwrap_or_else(|| format!("{v:.digits$}"))
}
