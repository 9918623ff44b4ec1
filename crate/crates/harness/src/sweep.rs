//! Sweep specifications and their execution.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc;

use serde::{Deserialize, Serialize};
use sleeping_mis::alg1::run_alg1;
use sleeping_mis::alg2::run_alg2;
use sleeping_mis::avg_energy::{run_avg_energy_pipeline, Which};
use sleeping_mis::config::Profile;
use sleeping_mis::graph::{generate_graph, Graph, GraphError, GraphModel, NodeSet};
use sleeping_mis::isolate::{run_phase, Phase};
use sleeping_mis::pipeline::AlgError;
use sleeping_mis::record::RunRecord;
use thiserror::Error;

use crate::settings::Settings;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid sweep: {0}")]
    Spec(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("{label} seed {seed}: {source}")]
    Alg {
        label: String,
        seed: u64,
        #[source]
        source: AlgError,
    },
}

/// A graph family with `n` left open.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum ModelSpec {
    Gnp { avg_deg: f64 },
    GnpP { p: f64 },
    RandomRegular { d: usize },
    PlantedHubs { hubs: usize, hub_degree: usize },
    Star,
    Path,
    Complete,
}

impl ModelSpec {
    pub fn at(&self, n: usize) -> GraphModel {
        match *self {
            ModelSpec::Gnp { avg_deg } => GraphModel::gnp_avg_degree(n, avg_deg),
            ModelSpec::GnpP { p } => GraphModel::Gnp { n, p },
            ModelSpec::RandomRegular { d } => GraphModel::RandomRegular { n, d },
            ModelSpec::PlantedHubs { hubs, hub_degree } => GraphModel::PlantedHubs { n, hubs, hub_degree },
            ModelSpec::Star => GraphModel::Star { n },
            ModelSpec::Path => GraphModel::Path { n },
            ModelSpec::Complete => GraphModel::Complete { n },
        }
    }

    /// Family and parameters without `n`, e.g. `gnp:avg_deg=8`.
    pub fn label(&self) -> String {
        match *self {
            ModelSpec::Gnp { avg_deg } => format!("gnp:avg_deg={avg_deg}"),
            ModelSpec::GnpP { p } => format!("gnp:p={p}"),
            ModelSpec::RandomRegular { d } => format!("regular:d={d}"),
            ModelSpec::PlantedHubs { hubs, hub_degree } => format!("hubs:hubs={hubs},hub_degree={hub_degree}"),
            ModelSpec::Star => "star".into(),
            ModelSpec::Path => "path".into(),
            ModelSpec::Complete => "complete".into(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlgSpec {
    pub alg: Which,
    #[serde(default)]
    pub avg_energy: bool,
    #[serde(default)]
    pub phase: Option<Phase>,
}

impl AlgSpec {
    pub fn full(alg: Which, avg_energy: bool) -> Self {
        AlgSpec { alg, avg_energy, phase: None }
    }
}

/// Runs one algorithm on `g`. The record's graph field is set to `label`.
pub fn run_algorithm(
    g: &Graph,
    label: &str,
    spec: AlgSpec,
    settings: &Settings,
    seed: u64,
) -> Result<(NodeSet, RunRecord), HarnessError> {
    let (cfg, engine) = (&settings.config, settings.engine.clone());
    let out = match (spec.phase, spec.avg_energy, spec.alg) {
        (Some(p), _, which) => run_phase(g, which, p, cfg, seed, engine),
        (None, true, which) => run_avg_energy_pipeline(g, which, cfg, seed, engine),
        (None, false, Which::Alg1) => run_alg1(g, cfg, seed, engine),
        (None, false, Which::Alg2) => run_alg2(g, cfg, seed, engine),
    };
    let (s, mut rec) = out.map_err(|source| HarnessError::Alg { label: label.to_string(), seed, source })?;
    rec.graph = label.to_string();
    Ok((s, rec))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub ns: Vec<usize>,
    pub models: Vec<ModelSpec>,
    /// Seeds per cell, `first_seed..first_seed + seeds`.
    pub seeds: u64,
    #[serde(default)]
    pub first_seed: u64,
    pub algorithms: Vec<AlgSpec>,
    #[serde(default = "desk")]
    pub profile: Profile,
}

fn desk() -> Profile {
    Profile::Desk
}

/// One generated graph; every algorithm of the sweep runs on it with the
/// same seed.
#[derive(Clone, Debug, PartialEq)]
pub struct Cell {
    pub n: usize,
    pub model: ModelSpec,
    pub seed: u64,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.seeds == 0 {
            return Err(HarnessError::Spec("seeds per cell must be at least 1".into()));
        }
        if self.ns.is_empty() || self.models.is_empty() || self.algorithms.is_empty() {
            return Err(HarnessError::Spec("ns, models and algorithms must be non-empty".into()));
        }
        if self.ns.contains(&0) {
            return Err(HarnessError::Spec("n must be at least 1".into()));
        }
        Ok(())
    }

    pub fn cells(&self) -> Vec<Cell> {
        let mut out = Vec::new();
        for &n in &self.ns {
            for m in &self.models {
                for seed in self.first_seed..self.first_seed + self.seeds {
                    out.push(Cell { n, model: m.clone(), seed });
                }
            }
        }
        out
    }
}

pub fn run_cell(cell: &Cell, algorithms: &[AlgSpec], settings: &Settings) -> Result<Vec<RunRecord>, HarnessError> {
    let g = generate_graph(&cell.model.at(cell.n), cell.seed)?;
    let label = cell.model.label();
    algorithms.iter().map(|&a| run_algorithm(&g, &label, a, settings, cell.seed).map(|r| r.1)).collect()
}

/// Runs every cell on `jobs` threads and hands the records to `sink` in cell
/// order. Stops at the first error.
pub fn run_sweep<F>(spec: &SweepSpec, settings: &Settings, jobs: usize, mut sink: F) -> Result<(), HarnessError>
where
    F: FnMut(RunRecord),
{
    spec.validate()?;
    let cells = spec.cells();
    let next = AtomicUsize::new(0);
    let (tx, rx) = mpsc::channel();
    std::thread::scope(|s| {
        for _ in 0..jobs.max(1) {
            let tx = tx.clone();
            let (cells, next) = (&cells, &next);
            s.spawn(move || loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= cells.len() {
                    break;
                }
                let r = run_cell(&cells[i], &spec.algorithms, settings);
                let failed = r.is_err();
                if tx.send((i, r)).is_err() || failed {
                    // park the counter so the other workers stop too
                    next.store(cells.len(), Ordering::Relaxed);
                    break;
                }
            });
        }
        drop(tx);
        let mut pending = BTreeMap::new();
        let mut want = 0;
        for (i, r) in rx {
            pending.insert(i, r);
            while let Some(r) = pending.remove(&want) {
                r?.into_iter().for_each(&mut sink);
                want += 1;
            }
        }
        Ok(())
    })
}
