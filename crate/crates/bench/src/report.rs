use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path as FsPath, PathBuf};

use serde::{Deserialize, Serialize};

use crate::planner::{PlannerId, TrialRecord};
use crate::stats::{summarize, SummaryStats};
use crate::BenchError;

/// Search-time and collision-check statistics for one algorithm.
#[derive(Debug, Clone, PartialEq)]
pub struct CostRow {
    pub environment: String,
    pub algorithm: String,
    pub successes: usize,
    pub trials: usize,
    pub time: SummaryStats,
    pub configs: SummaryStats,
}

/// First-path length statistics (successful runs only).
#[derive(Debug, Clone, PartialEq)]
pub struct LengthRow {
    pub environment: String,
    pub algorithm: String,
    pub successes: usize,
    pub length: SummaryStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct CostCsv {
    environment: String,
    algorithm: String,
    successes: usize,
    trials: usize,
    time_mean: f64,
    time_median: f64,
    time_min: f64,
    time_max: f64,
    time_std: f64,
    time_iqr: f64,
    cc_mean: f64,
    cc_median: f64,
    cc_min: f64,
    cc_max: f64,
    cc_std: f64,
    cc_iqr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct LengthCsv {
    environment: String,
    algorithm: String,
    successes: usize,
    length_mean: f64,
    length_median: f64,
    length_min: f64,
    length_max: f64,
    length_std: f64,
    length_iqr: f64,
}

const COST_HEADER: [&str; 16] = [
    "environment", "algorithm", "successes", "trials", "time_mean", "time_median", "time_min", "time_max", "time_std",
    "time_iqr", "cc_mean", "cc_median", "cc_min", "cc_max", "cc_std", "cc_iqr",
];

const LENGTH_HEADER: [&str; 9] = [
    "environment", "algorithm", "successes", "length_mean", "length_median", "length_min", "length_max", "length_std",
    "length_iqr",
];

/// The twelve statistic columns of a cost row, in header order.
pub fn stat_columns(row: &CostRow) -> [f64; 12] {
    let (t, c) = (&row.time, &row.configs);
    [t.mean, t.median, t.min, t.max, t.std, t.iqr, c.mean, c.median, c.min, c.max, c.std, c.iqr]
}

fn nan_stats() -> SummaryStats {
    SummaryStats {
        mean: f64::NAN,
        median: f64::NAN,
        min: f64::NAN,
        max: f64::NAN,
        std: f64::NAN,
        iqr: f64::NAN,
    }
}

fn stats_or_nan(values: &[f64], drop_worst: usize) -> SummaryStats {
    if values.is_empty() {
        return nan_stats();
    }
    // small groups keep at least one record
    summarize(values, drop_worst.min(values.len() - 1)).unwrap()
}

fn by_planner(records: &[TrialRecord]) -> BTreeMap<PlannerId, Vec<&TrialRecord>> {
    let mut m: BTreeMap<PlannerId, Vec<&TrialRecord>> = BTreeMap::new();
    for r in records {
        m.entry(r.planner).or_default().push(r);
    }
    m
}

/// One cost row per planner. Each statistic drops its own `drop_worst`
/// largest values.
pub fn cost_rows(environment: &str, records: &[TrialRecord], drop_worst: usize) -> Vec<CostRow> {
    by_planner(records)
        .into_iter()
        .map(|(p, recs)| {
            let t: Vec<f64> = recs.iter().map(|r| r.wall_time_s).collect();
            let c: Vec<f64> = recs.iter().map(|r| r.configs_checked as f64).collect();
            CostRow {
                environment: environment.to_string(),
                algorithm: p.to_string(),
                successes: recs.iter().filter(|r| r.success).count(),
                trials: recs.len(),
                time: stats_or_nan(&t, drop_worst),
                configs: stats_or_nan(&c, drop_worst),
            }
        })
        .collect()
}

pub fn length_rows(environment: &str, records: &[TrialRecord]) -> Vec<LengthRow> {
    by_planner(records)
        .into_iter()
        .map(|(p, recs)| {
            let l: Vec<f64> = recs.iter().filter_map(|r| r.path_length).collect();
            LengthRow {
                environment: environment.to_string(),
                algorithm: p.to_string(),
                successes: l.len(),
                length: stats_or_nan(&l, 0),
            }
        })
        .collect()
}

fn writer(path: &FsPath, header: &[&str]) -> Result<csv::Writer<fs::File>, BenchError> {
    if let Some(d) = path.parent() {
        fs::create_dir_all(d)?;
    }
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    w.write_record(header)?;
    Ok(w)
}

pub fn write_cost_csv(path: &FsPath, rows: &[CostRow]) -> Result<(), BenchError> {
    let mut w = writer(path, &COST_HEADER)?;
    for r in rows {
        let (t, c) = (&r.time, &r.configs);
        w.serialize(CostCsv {
            environment: r.environment.clone(),
            algorithm: r.algorithm.clone(),
            successes: r.successes,
            trials: r.trials,
            time_mean: t.mean,
            time_median: t.median,
            time_min: t.min,
            time_max: t.max,
            time_std: t.std,
            time_iqr: t.iqr,
            cc_mean: c.mean,
            cc_median: c.median,
            cc_min: c.min,
            cc_max: c.max,
            cc_std: c.std,
            cc_iqr: c.iqr,
        })?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_cost_csv(path: &FsPath) -> Result<Vec<CostRow>, BenchError> {
    let mut rd = csv::Reader::from_path(path)?;
    let mut out = Vec::new();
    for row in rd.deserialize() {
        let r: CostCsv = row?;
        out.push(CostRow {
            environment: r.environment,
            algorithm: r.algorithm,
            successes: r.successes,
            trials: r.trials,
            time: SummaryStats {
                mean: r.time_mean,
                median: r.time_median,
                min: r.time_min,
                max: r.time_max,
                std: r.time_std,
                iqr: r.time_iqr,
            },
            configs: SummaryStats {
                mean: r.cc_mean,
                median: r.cc_median,
                min: r.cc_min,
                max: r.cc_max,
                std: r.cc_std,
                iqr: r.cc_iqr,
            },
        });
    }
    Ok(out)
}

pub fn write_length_csv(path: &FsPath, rows: &[LengthRow]) -> Result<(), BenchError> {
    let mut w = writer(path, &LENGTH_HEADER)?;
    for r in rows {
        let l = &r.length;
        w.serialize(LengthCsv {
            environment: r.environment.clone(),
            algorithm: r.algorithm.clone(),
            successes: r.successes,
            length_mean: l.mean,
            length_median: l.median,
            length_min: l.min,
            length_max: l.max,
            length_std: l.std,
            length_iqr: l.iqr,
        })?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_length_csv(path: &FsPath) -> Result<Vec<LengthRow>, BenchError> {
    let mut rd = csv::Reader::from_path(path)?;
    let mut out = Vec::new();
    for row in rd.deserialize() {
        let r: LengthCsv = row?;
        out.push(LengthRow {
            environment: r.environment,
            algorithm: r.algorithm,
            successes: r.successes,
            length: SummaryStats {
                mean: r.length_mean,
                median: r.length_median,
                min: r.length_min,
                max: r.length_max,
                std: r.length_std,
                iqr: r.length_iqr,
            },
        });
    }
    Ok(out)
}

pub fn write_records_csv(path: &FsPath, records: &[TrialRecord]) -> Result<(), BenchError> {
    if let Some(d) = path.parent() {
        fs::create_dir_all(d)?;
    }
    let mut w = csv::Writer::from_path(path)?;
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_records_csv(path: &FsPath) -> Result<Vec<TrialRecord>, BenchError> {
    let mut rd = csv::Reader::from_path(path)?;
    rd.deserialize().map(|r| r.map_err(BenchError::from)).collect()
}

/// `x,y` columns for external plotting.
pub fn write_xy(path: &FsPath, x: &str, y: &str, points: &[(f64, f64)]) -> Result<(), BenchError> {
    let mut w = writer(path, &[x, y])?;
    for (a, b) in points {
        w.serialize((a, b))?;
    }
    w.flush()?;
    Ok(())
}

fn fmt_stats(s: &SummaryStats, scale: f64, digits: usize) -> String {
    [s.mean, s.median, s.min, s.max, s.std, s.iqr]
        .iter()
        .map(|v| format!("{:.*}", digits, v * scale))
        .collect::<Vec<_>>()
        .join(" | ")
}

pub fn cost_markdown(rows: &[CostRow]) -> String {
    let mut s = String::new();
    s += "| environment | algorithm | solved | time mean (s) | median | min | max | std | IQR | CC mean (x1000) | median | min | max | std | IQR |\n";
    s += "|---|---|---|---|---|---|---|---|---|---|---|---|---|---|---|\n";
    for r in rows {
        let _ = writeln!(
            s,
            "| {} | {} | {}/{} | {} | {} |",
            r.environment,
            r.algorithm,
            r.successes,
            r.trials,
            fmt_stats(&r.time, 1.0, 4),
            fmt_stats(&r.configs, 1e-3, 2)
        );
    }
    s
}

pub fn length_markdown(rows: &[LengthRow]) -> String {
    let mut s = String::new();
    s += "| environment | algorithm | solved | length mean | median | min | max | std | IQR |\n";
    s += "|---|---|---|---|---|---|---|---|---|\n";
    for r in rows {
        let _ = writeln!(
            s,
            "| {} | {} | {} | {} |",
            r.environment,
            r.algorithm,
            r.successes,
            fmt_stats(&r.length, 1.0, 2)
        );
    }
    s
}

/// Files written by [`emit_report`].
#[derive(Debug, Clone)]
pub struct ReportFiles {
    pub cost_csv: PathBuf,
    pub cost_md: PathBuf,
    pub length_csv: PathBuf,
    pub length_md: PathBuf,
}

/// Writes the cost and path-length tables as CSV and Markdown.
pub fn emit_report(
    dir: &FsPath,
    environment: &str,
    records: &[TrialRecord],
    drop_worst: usize,
) -> Result<ReportFiles, BenchError> {
    fs::create_dir_all(dir)?;
    let cost = cost_rows(environment, records, drop_worst);
    let length = length_rows(environment, records);
    let files = ReportFiles {
        cost_csv: dir.join("cost.csv"),
        cost_md: dir.join("cost.md"),
        length_csv: dir.join("length.csv"),
        length_md: dir.join("length.md"),
    };
    write_cost_csv(&files.cost_csv, &cost)?;
    fs::write(&files.cost_md, cost_markdown(&cost))?;
    write_length_csv(&files.length_csv, &length)?;
    fs::write(&files.length_md, length_markdown(&length))?;
    Ok(files)
}
