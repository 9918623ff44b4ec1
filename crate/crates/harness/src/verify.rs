//! The `verify` suites: awake schedules and small-graph correctness.

use serde::Serialize;
use sleeping_mis::avg_energy::Which;
use sleeping_mis::graph::{is_independent, is_maximal_independent, NodeId};
use sleeping_mis::oracle::{enumerate_small_graphs, oracle_all_mis, OracleError};
use sleeping_mis::schedule::{build_awake_sets, size_bound, verify_awake_sets};

use crate::settings::Settings;
use crate::sweep::{run_algorithm, AlgSpec, HarnessError};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScheduleSummary {
    pub max_t: u64,
    /// Lengths whose sets fail the check.
    pub failures: Vec<u64>,
}

pub fn verify_schedules(max_t: u64) -> ScheduleSummary {
    let failures = (1..=max_t)
        .filter(|&t| {
            let sets = build_awake_sets(t).expect("t >= 1").sets();
            !(verify_awake_sets(t, &sets) && sets.iter().all(|s| s.len() <= size_bound(t)))
        })
        .collect();
    ScheduleSummary { max_t, failures }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct OracleSummary {
    pub algorithm: String,
    pub n: usize,
    pub graphs: usize,
    pub runs: usize,
    pub not_independent: usize,
    pub not_maximal: usize,
    /// Maximal outputs missing from the brute-force list.
    pub unlisted: usize,
}

impl OracleSummary {
    pub fn maximal_rate(&self) -> f64 {
        1.0 - self.not_maximal as f64 / self.runs.max(1) as f64
    }

    /// Independent always, listed whenever maximal, maximal in at least 99%.
    pub fn passed(&self) -> bool {
        self.not_independent == 0 && self.unlisted == 0 && self.maximal_rate() >= 0.99
    }
}

#[derive(Debug, thiserror::Error)]
pub enum VerifyError {
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Harness(#[from] HarnessError),
}

/// Runs `alg` on every graph `enumerate_small_graphs(n)` yields, once per
/// seed in `0..seeds`.
pub fn verify_small_graphs(
    n: usize,
    alg: AlgSpec,
    seeds: u64,
    settings: &Settings,
) -> Result<OracleSummary, VerifyError> {
    let graphs = enumerate_small_graphs(n, 0)?;
    let mut s = OracleSummary {
        algorithm: match alg.alg {
            Which::Alg1 => "alg1".into(),
            Which::Alg2 => "alg2".into(),
        },
        n,
        graphs: graphs.len(),
        ..Default::default()
    };
    for g in &graphs {
        let all = oracle_all_mis(g)?;
        for seed in 0..seeds {
            let (set, _) = run_algorithm(g, "small", alg, settings, seed)?;
            s.runs += 1;
            if !is_independent(g, &set) {
                s.not_independent += 1;
            } else if !is_maximal_independent(g, &set) {
                s.not_maximal += 1;
            } else {
                let mut v: Vec<NodeId> = set.iter().collect();
                v.sort_unstable();
                if !all.contains(&v) {
                    s.unlisted += 1;
                }
            }
        }
    }
    Ok(s)
}

