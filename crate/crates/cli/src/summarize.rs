//! Text summaries of result directories.

use std::collections::BTreeMap;
use std::fmt::Write;
use std::path::Path;

use crate::experiment::PROPOSED;
use crate::output::{read_csv, CdfRow, Row, CDF_HEADER, ROW_HEADER};
use crate::{CliError, Result};

/// One paragraph per result CSV in `dir`, in file-name order.
pub fn summarize(dir: &Path) -> Result<String> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .map_err(|e| CliError::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .collect();
    files.sort();
    let mut out = String::new();
    for path in &files {
        let header = std::fs::read_to_string(path)
            .map_err(|e| CliError::io(path, e))?
            .lines()
            .next()
            .unwrap_or_default()
            .to_string();
        let name = path.file_name().unwrap_or_default().to_string_lossy();
        if header == ROW_HEADER {
            let rows: Vec<Row> = read_csv(path)?;
            summarize_rows(&mut out, &name, &rows);
        } else if header == CDF_HEADER {
            let rows: Vec<CdfRow> = read_csv(path)?;
            summarize_cdf(&mut out, &name, &rows);
        }
    }
    if out.is_empty() {
        out = format!("no results in {}\n", dir.display());
    }
    Ok(out)
}

fn summarize_rows(out: &mut String, name: &str, rows: &[Row]) {
    let Some(first) = rows.first() else {
        let _ = writeln!(out, "{name}: empty");
        return;
    };
    let _ = writeln!(out, "{name} ({})", first.experiment);
    let flagged = rows.iter().filter(|r| !r.flag.is_empty()).count();
    if rows.iter().any(|r| r.scheme == "analytic") {
        validation_gaps(out, rows);
    } else {
        throughput_gains(out, rows);
    }
    if flagged > 0 {
        let _ = writeln!(out, "  flagged rows: {flagged}");
    }
}

/// Largest relative analytic-vs-simulated gap per metric.
fn validation_gaps(out: &mut String, rows: &[Row]) {
    let mut analytic: BTreeMap<(&str, &str, u64), f64> = BTreeMap::new();
    for r in rows.iter().filter(|r| r.scheme == "analytic") {
        analytic.insert((&r.metric, &r.series, r.sweep_value.to_bits()), r.mean);
    }
    let mut worst: BTreeMap<&str, (f64, &Row)> = BTreeMap::new();
    let mut worst_abs: BTreeMap<&str, f64> = BTreeMap::new();
    for r in rows.iter().filter(|r| r.scheme == "simulated") {
        let Some(&a) = analytic.get(&(r.metric.as_str(), r.series.as_str(), r.sweep_value.to_bits())) else {
            continue;
        };
        if !(a.is_finite() && r.mean.is_finite()) {
            continue;
        }
        let abs = (a - r.mean).abs();
        let e = worst_abs.entry(&r.metric).or_insert(0.0);
        *e = e.max(abs);
        let gap = if r.mean == 0.0 { abs } else { abs / r.mean.abs() };
        if worst.get(r.metric.as_str()).is_none_or(|(g, _)| gap > *g) {
            worst.insert(&r.metric, (gap, r));
        }
    }
    for (metric, (gap, r)) in worst {
        let _ = writeln!(
            out,
            "  {metric}: max relative gap {:.2}% ({}, {}={}), max absolute gap {:.3e}",
            gap * 100.0,
            r.series,
            r.sweep_var,
            r.sweep_value,
            worst_abs[metric]
        );
    }
}

/// Proposed vs best benchmark throughput at every grid point.
fn throughput_gains(out: &mut String, rows: &[Row]) {
    let mut points: BTreeMap<(&str, u64), (f64, f64, f64)> = BTreeMap::new();
    for r in rows.iter().filter(|r| r.metric == "throughput" && r.mean.is_finite()) {
        let e = points
            .entry((&r.series, r.sweep_value.to_bits()))
            .or_insert((r.sweep_value, f64::NAN, f64::NEG_INFINITY));
        if r.scheme == PROPOSED {
            e.1 = r.mean;
        } else {
            e.2 = e.2.max(r.mean);
        }
    }
    for ((series, _), (value, proposed, best)) in points {
        if proposed.is_nan() || !best.is_finite() {
            continue;
        }
        let gain = if best > 0.0 { (proposed / best - 1.0) * 100.0 } else { f64::NAN };
        let _ = writeln!(
            out,
            "  {series} @ {value}: proposed {proposed:.1} msg/s, best benchmark {best:.1} msg/s, gain {gain:+.1}%"
        );
    }
}

fn summarize_cdf(out: &mut String, name: &str, rows: &[CdfRow]) {
    let _ = writeln!(out, "{name} (rate-cdf)");
    let mut by_scheme: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for r in rows {
        by_scheme.entry(&r.scheme).or_default().push(r.rate);
    }
    for (scheme, mut rates) in by_scheme {
        rates.sort_by(f64::total_cmp);
        let median = rates[rates.len() / 2];
        let _ = writeln!(out, "  {scheme}: {} links, median rate {median:.1} msg/s", rates.len());
    }
}
