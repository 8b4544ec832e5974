//! CSV record types and writers. Column order is part of the file format.

use std::path::{Path, PathBuf};

use serde::{de::DeserializeOwned, Deserialize, Serialize};

use crate::experiment::{ExperimentResult, ExperimentSpec};
use crate::{CliError, Result};

/// Long-format result row shared by all sweep and validation experiments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub experiment: String,
    pub series: String,
    pub sweep_var: String,
    pub sweep_value: f64,
    pub scheme: String,
    pub metric: String,
    pub mean: f64,
    /// Student-t 95% half-width; `inf` for a single sample.
    pub ci95: f64,
    pub n: usize,
    pub flag: String,
}

pub const ROW_HEADER: &str = "experiment,series,sweep_var,sweep_value,scheme,metric,mean,ci95,n,flag";
pub const CDF_HEADER: &str = "scheme,trial,mu,rate,cdf";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CdfRow {
    pub scheme: String,
    pub trial: usize,
    pub mu: usize,
    /// msg/s
    pub rate: f64,
    pub cdf: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iteration: usize,
    pub dual_value: f64,
    pub objective: f64,
    pub eta_max: f64,
    pub eta_change: f64,
    pub removals: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssignmentRow {
    pub scheme: String,
    pub mu: usize,
    /// Empty when the MU is unserved.
    pub bs: Option<usize>,
    pub mode: Option<String>,
    pub bandwidth_hz: f64,
    pub rate: f64,
}

pub fn write_csv<T: Serialize>(path: &Path, records: &[T]) -> Result<()> {
    let csv_err = |source| CliError::Csv { path: path.to_path_buf(), source };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    for r in records {
        w.serialize(r).map_err(csv_err)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn read_csv<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let csv_err = |source| CliError::Csv { path: path.to_path_buf(), source };
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    r.deserialize().collect::<std::result::Result<_, _>>().map_err(csv_err)
}

/// Writes every non-empty table of `result` under the output directory and
/// returns the paths written.
pub fn write_result(spec: &ExperimentSpec, result: &ExperimentResult) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(&spec.out_dir).map_err(|e| CliError::io(&spec.out_dir, e))?;
    let name = spec.experiment.name();
    let mut written = Vec::new();
    let mut emit = |suffix: &str, write: &dyn Fn(&Path) -> Result<()>| -> Result<()> {
        let path = spec.out_dir.join(format!("{name}{suffix}.csv"));
        write(&path)?;
        written.push(path);
        Ok(())
    };
    if !result.rows.is_empty() {
        emit("", &|p| write_csv(p, &result.rows))?;
    }
    if !result.cdf.is_empty() {
        emit("", &|p| write_csv(p, &result.cdf))?;
    }
    if !result.trace.is_empty() {
        emit("-trace", &|p| write_csv(p, &result.trace))?;
    }
    if !result.assignments.is_empty() {
        emit("-assignment", &|p| write_csv(p, &result.assignments))?;
    }
    Ok(written)
}
