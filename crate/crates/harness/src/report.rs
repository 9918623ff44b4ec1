//! Aggregation of JSON-lines run records into CSV summaries.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use serde::Serialize;
use sleeping_mis::record::RunRecord;
use thiserror::Error;

use crate::fit::{fit_growth, GrowthModel};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("line {line}: {source}")]
    Parse {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub fn read_records<R: BufRead>(r: R) -> Result<Vec<RunRecord>, ReportError> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|source| ReportError::Parse { line: i + 1, source })?);
    }
    Ok(out)
}

/// Type-7 quantile (linear interpolation between order statistics).
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

fn sorted(v: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = v.collect();
    v.sort_by(f64::total_cmp);
    v
}

type Key = (String, bool, String, usize);

fn key(r: &RunRecord) -> Key {
    (r.algorithm.clone(), r.avg_energy, r.graph.clone(), r.n)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SummaryRow {
    pub schema_version: u32,
    pub algorithm: String,
    pub avg_energy: bool,
    pub graph: String,
    pub n: usize,
    pub runs: usize,
    pub rounds_p50: f64,
    pub rounds_p90: f64,
    pub rounds_max: f64,
    pub max_awake_p50: f64,
    pub max_awake_p90: f64,
    pub max_awake_max: f64,
    pub mean_awake_p50: f64,
    pub mean_awake_p90: f64,
    pub mean_awake_max: f64,
    pub not_independent_rate: f64,
    pub not_maximal_rate: f64,
    pub violation_rate: f64,
    pub flagged_rate: f64,
}

pub const SUMMARY_HEADER: [&str; 19] = [
    "schema_version",
    "algorithm",
    "avg_energy",
    "graph",
    "n",
    "runs",
    "rounds_p50",
    "rounds_p90",
    "rounds_max",
    "max_awake_p50",
    "max_awake_p90",
    "max_awake_max",
    "mean_awake_p50",
    "mean_awake_p90",
    "mean_awake_max",
    "not_independent_rate",
    "not_maximal_rate",
    "violation_rate",
    "flagged_rate",
];

fn groups(records: &[RunRecord]) -> BTreeMap<Key, Vec<&RunRecord>> {
    let mut g: BTreeMap<Key, Vec<&RunRecord>> = BTreeMap::new();
    for r in records {
        g.entry(key(r)).or_default().push(r);
    }
    g
}

pub fn summarize(records: &[RunRecord]) -> Vec<SummaryRow> {
    groups(records)
        .into_iter()
        .map(|((algorithm, avg_energy, graph, n), rs)| {
            let k = rs.len() as f64;
            let rate = |f: &dyn Fn(&RunRecord) -> bool| rs.iter().filter(|r| f(r)).count() as f64 / k;
            let rounds = sorted(rs.iter().map(|r| r.total_rounds as f64));
            let max_awake = sorted(rs.iter().map(|r| r.max_awake as f64));
            let mean_awake = sorted(rs.iter().map(|r| r.mean_awake));
            SummaryRow {
                schema_version: REPORT_SCHEMA_VERSION,
                algorithm,
                avg_energy,
                graph,
                n,
                runs: rs.len(),
                rounds_p50: quantile(&rounds, 0.5),
                rounds_p90: quantile(&rounds, 0.9),
                rounds_max: *rounds.last().unwrap(),
                max_awake_p50: quantile(&max_awake, 0.5),
                max_awake_p90: quantile(&max_awake, 0.9),
                max_awake_max: *max_awake.last().unwrap(),
                mean_awake_p50: quantile(&mean_awake, 0.5),
                mean_awake_p90: quantile(&mean_awake, 0.9),
                mean_awake_max: *mean_awake.last().unwrap(),
                not_independent_rate: rate(&|r| !r.independent),
                not_maximal_rate: rate(&|r| !r.maximal),
                violation_rate: rate(&|r| r.budget_violations + r.other_violations > 0 || r.unintended_drops > 0),
                flagged_rate: rate(&|r| !r.flags.is_empty()),
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FitRow {
    pub schema_version: u32,
    pub algorithm: String,
    pub avg_energy: bool,
    pub graph: String,
    pub metric: String,
    pub model: String,
    pub points: usize,
    pub k: f64,
    pub residual: f64,
    pub over_model: bool,
    pub under_model: bool,
}

pub const FIT_HEADER: [&str; 11] = [
    "schema_version",
    "algorithm",
    "avg_energy",
    "graph",
    "metric",
    "model",
    "points",
    "k",
    "residual",
    "over_model",
    "under_model",
];

/// Fits the per-`n` median of each metric against every growth model, for
/// every series with at least three distinct `n`.
pub fn fit_rows(records: &[RunRecord]) -> Vec<FitRow> {
    let metrics: [(&str, fn(&RunRecord) -> f64); 3] = [
        ("max_awake", |r| r.max_awake as f64),
        ("total_rounds", |r| r.total_rounds as f64),
        ("mean_awake", |r| r.mean_awake),
    ];
    let mut series: BTreeMap<(String, bool, String), Vec<(usize, Vec<&RunRecord>)>> = BTreeMap::new();
    for ((a, e, g, n), rs) in groups(records) {
        series.entry((a, e, g)).or_default().push((n, rs));
    }
    let mut out = Vec::new();
    for ((algorithm, avg_energy, graph), per_n) in series {
        for (metric, f) in metrics {
            let pts: Vec<(usize, f64)> =
                per_n.iter().map(|(n, rs)| (*n, quantile(&sorted(rs.iter().map(|r| f(r))), 0.5))).collect();
            for model in GrowthModel::ALL {
                if let Ok(fit) = fit_growth(&pts, model) {
                    out.push(FitRow {
                        schema_version: REPORT_SCHEMA_VERSION,
                        algorithm: algorithm.clone(),
                        avg_energy,
                        graph: graph.clone(),
                        metric: metric.to_string(),
                        model: model.name().to_string(),
                        points: pts.len(),
                        k: fit.k,
                        residual: fit.residual,
                        over_model: fit.over_model,
                        under_model: fit.under_model,
                    });
                }
            }
        }
    }
    out
}

/// Writes `header` and then `rows`; the header is written even with no rows.
pub fn write_csv<W: Write, T: Serialize>(w: W, header: &[&str], rows: &[T]) -> Result<(), ReportError> {
    let mut wtr = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    wtr.write_record(header)?;
    for r in rows {
        wtr.serialize(r)?;
    }
    wtr.flush()?;
    Ok(())
}
