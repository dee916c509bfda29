//! Human-readable summaries and long-format CSV of completed runs.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use snlw_core::stats::linear_fit;
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::CliError;
use crate::manifest::RunManifest;
use crate::table::{num, Table};

pub const SUMMARY_FILE: &str = "summary.md";
pub const LONG_FILE: &str = "long.csv";

/// Least-squares slope with a two-sided 95% confidence interval (`None` with
/// fewer than three points).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SlopeFit {
    pub slope: f64,
    pub interval: Option<(f64, f64)>,
}

pub fn fit_slope(x: &[f64], y: &[f64]) -> SlopeFit {
    let (a, b) = linear_fit(x, y);
    let n = x.len();
    if n < 3 {
        return SlopeFit { slope: b, interval: None };
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let ssr: f64 = x.iter().zip(y).map(|(xi, yi)| (yi - a - b * xi).powi(2)).sum();
    let se = (ssr / (n - 2) as f64 / sxx).sqrt();
    let t = StudentsT::new(0.0, 1.0, (n - 2) as f64).expect("positive degrees of freedom").inverse_cdf(0.975);
    SlopeFit { slope: b, interval: Some((b - t * se, b + t * se)) }
}

fn parse(cell: &str) -> Option<f64> {
    cell.parse().ok()
}

fn cauchy_section(table: &Table, out: &mut String) {
    let col = |n: &str| table.column(n).expect("cauchy.csv column");
    let (order, low, gap, se) = (col("order"), col("low"), col("gap"), col("se"));
    let mut orders: Vec<&str> = table.rows.iter().map(|r| r[order].as_str()).collect();
    orders.dedup();
    out.push_str("\n## Cauchy gaps\n\n| order | N | gap | SE | decreasing |\n|---|---|---|---|---|\n");
    for o in orders {
        let mut rows: Vec<&Vec<String>> = table.rows.iter().filter(|r| r[order] == o).collect();
        rows.sort_by_key(|r| r[low].parse::<u64>().unwrap_or(0));
        let mut prev: Option<f64> = None;
        let mut monotone = true;
        for r in rows {
            let g = parse(&r[gap]).unwrap_or(f64::NAN);
            let verdict = match prev {
                None => "-",
                Some(p) if g < p => "pass",
                Some(_) => {
                    monotone = false;
                    "fail"
                }
            };
            let _ = writeln!(out, "| {o} | {} | {} | {} | {verdict} |", r[low], r[gap], r[se]);
            prev = Some(g);
        }
        let _ = writeln!(out, "\norder {o}: {}\n", if monotone { "strictly decreasing" } else { "not monotone" });
    }
}

fn converge_section(table: &Table, out: &mut String) {
    let col = |n: &str| table.column(n).expect("converge_summary.csv column");
    let (arm, low, med) = (col("renormalized"), col("low"), col("median"));
    out.push_str("\n## Refinement gaps\n\n");
    for a in ["true", "false"] {
        let pts: Vec<(f64, f64)> = table
            .rows
            .iter()
            .filter(|r| r[arm] == a)
            .filter_map(|r| Some((parse(&r[low])?.ln(), parse(&r[med])?.ln())))
            .filter(|p| p.0.is_finite() && p.1.is_finite())
            .collect();
        if pts.len() < 2 {
            continue;
        }
        let (x, y): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
        let fit = fit_slope(&x, &y);
        let ci = fit.interval.map_or_else(|| "n/a".to_string(), |(l, h)| format!("[{l:.4}, {h:.4}]"));
        let _ = writeln!(out, "renormalized = {a}: log-log slope of the median gap {:.4}, 95% CI {ci}", fit.slope);
    }
}

fn universality_section(table: &Table, out: &mut String) {
    let col = |n: &str| table.column(n).expect("universality_summary.csv column");
    let (eps, med) = (col("eps"), col("median"));
    let mut rows: Vec<(f64, f64)> = table.rows.iter().filter_map(|r| Some((parse(&r[eps])?, parse(&r[med])?))).collect();
    rows.sort_by(|a, b| b.0.total_cmp(&a.0));
    let decreasing = rows.windows(2).all(|w| w[1].1 < w[0].1);
    out.push_str("\n## Distance to the limit\n\n| eps | median |\n|---|---|\n");
    for (e, m) in &rows {
        let _ = writeln!(out, "| {e} | {m:.6e} |");
    }
    let _ = writeln!(out, "\nmedian distance {} as eps decreases", if decreasing { "strictly decreases" } else { "does not decrease monotonically" });
}

/// Writes `summary.md` and `long.csv` into a completed run directory and
/// returns the summary text.
pub fn write_report(dir: &Path) -> Result<String, CliError> {
    let manifest = RunManifest::read(dir)?;
    manifest.verify(dir)?;
    let mut text = format!("# {} run\n\n", manifest.experiment);
    let _ = writeln!(text, "version {}, {} workers, {:.2} s wall clock", manifest.version, manifest.workers, manifest.wall_clock_seconds);
    if let Some(r) = manifest.replicas {
        let _ = writeln!(text, "{r} replicas, {} with blowup", manifest.blowups);
    }
    text.push_str("\n## Parameters\n\n");
    for (k, v) in &manifest.parameters {
        let _ = writeln!(text, "- {k} = {v}");
    }
    text.push_str("\n## Outputs\n\n");
    let mut long = Table::new(&["experiment", "file", "row", "column", "value"]);
    for out in &manifest.outputs {
        let table = Table::read(&dir.join(&out.file))?;
        let _ = writeln!(text, "- {} ({} rows)", out.file, table.rows.len());
        for (i, row) in table.rows.iter().enumerate() {
            for (h, cell) in table.header.iter().zip(row) {
                long.push(vec![manifest.experiment.clone(), out.file.clone(), i.to_string(), h.clone(), cell.clone()]);
            }
        }
        match out.file.as_str() {
            "cauchy.csv" => cauchy_section(&table, &mut text),
            "converge_summary.csv" => converge_section(&table, &mut text),
            "universality_summary.csv" => universality_section(&table, &mut text),
            "wick_covariance.csv" => {
                let z = table.column("z").expect("z column");
                let worst = table.rows.iter().filter_map(|r| parse(&r[z])).map(f64::abs).fold(0.0, f64::max);
                let _ = writeln!(text, "\nWick covariance: max |z| = {}", num(worst));
            }
            _ => {}
        }
    }
    let summary_path = dir.join(SUMMARY_FILE);
    fs::write(&summary_path, &text).map_err(CliError::io(&summary_path))?;
    let long_path = dir.join(LONG_FILE);
    fs::write(&long_path, long.to_bytes()?).map_err(CliError::io(&long_path))?;
    Ok(text)
}
