//! Per-run metrics, serialized as one JSON line per run by the harness.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::config::Config;
use crate::engine::{energy_report, Simulator, ViolationKind};
use crate::graph::{is_independent, is_maximal_independent, Graph, NodeSet};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseRecord {
    pub name: String,
    pub rounds: u64,
    /// Largest number of rounds any node was awake during this phase.
    pub max_awake: u64,
    pub wall_ms: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub schema_version: u32,
    pub algorithm: String,
    pub avg_energy: bool,
    pub seed: u64,
    pub graph: String,
    pub n: usize,
    pub m: usize,
    pub max_degree: usize,
    pub config: Config,
    pub phases: Vec<PhaseRecord>,
    pub total_rounds: u64,
    pub max_awake: u64,
    pub mean_awake: f64,
    pub mis_size: usize,
    pub independent: bool,
    pub maximal: bool,
    pub budget_violations: usize,
    pub other_violations: usize,
    pub unintended_drops: u64,
    pub declared_drops: u64,
    pub delivered: u64,
    /// Failure flags raised by the run (e.g. a Phase III component with no
    /// successful execution). Empty on a clean run.
    pub flags: Vec<String>,
    pub stats: BTreeMap<String, f64>,
    /// Excluded from determinism comparisons.
    pub wall_clock_ms: u64,
}

impl RunRecord {
    /// Copy with every wall-clock field zeroed, for replay comparisons.
    pub fn canonical(&self) -> RunRecord {
        let mut r = RunRecord { wall_clock_ms: 0, ..self.clone() };
        r.phases.iter_mut().for_each(|p| p.wall_ms = 0);
        r
    }
}

/// Splits a run into named phases and collects per-phase rounds and awake
/// maxima from the simulator's ledger.
pub struct PhaseClock {
    phases: Vec<PhaseRecord>,
    start_round: u64,
    started: Instant,
    start_awake: Vec<u64>,
    stats: BTreeMap<String, f64>,
    flags: Vec<String>,
}

impl PhaseClock {
    pub fn new(sim: &Simulator<'_>) -> Self {
        PhaseClock {
            phases: Vec::new(),
            start_round: sim.clock(),
            started: Instant::now(),
            start_awake: sim.ledger().awake.clone(),
            stats: BTreeMap::new(),
            flags: Vec::new(),
        }
    }

    /// Closes the phase that started at the previous call.
    pub fn end(&mut self, sim: &Simulator<'_>, name: &str) {
        let awake = &sim.ledger().awake;
        let max_awake = awake
            .iter()
            .zip(&self.start_awake)
            .map(|(a, b)| a - b)
            .max()
            .unwrap_or(0);
        self.phases.push(PhaseRecord {
            name: name.to_string(),
            rounds: sim.clock() - self.start_round,
            max_awake,
            wall_ms: self.started.elapsed().as_millis() as u64,
        });
        self.start_round = sim.clock();
        self.started = Instant::now();
        self.start_awake.clone_from(awake);
    }

    pub fn stat(&mut self, key: &str, v: f64) {
        self.stats.insert(key.to_string(), v);
    }

    pub fn flag(&mut self, f: impl Into<String>) {
        self.flags.push(f.into());
    }

    pub fn flags(&self) -> &[String] {
        &self.flags
    }

    /// Builds the record, running the exact independence and maximality
    /// checks on `mis`.
    pub fn finish(
        self,
        sim: Simulator<'_>,
        algorithm: &str,
        avg_energy: bool,
        config: &Config,
        mis: &NodeSet,
    ) -> RunRecord {
        let g: &Graph = sim.graph();
        let seed = sim.seed();
        let t = sim.finish();
        let e = energy_report(&t.ledger);
        let budget = t
            .violations
            .iter()
            .filter(|v| matches!(v.kind, ViolationKind::Budget { .. }))
            .count();
        RunRecord {
            schema_version: SCHEMA_VERSION,
            algorithm: algorithm.to_string(),
            avg_energy,
            seed,
            graph: format!("n={},m={}", g.n(), g.num_edges()),
            n: g.n(),
            m: g.num_edges(),
            max_degree: g.max_degree(),
            config: config.clone(),
            phases: self.phases,
            total_rounds: e.total_rounds,
            max_awake: e.max_awake,
            mean_awake: e.mean_awake,
            mis_size: mis.len(),
            independent: is_independent(g, mis),
            maximal: is_maximal_independent(g, mis),
            budget_violations: budget,
            other_violations: t.violations.len() - budget,
            unintended_drops: t.messages.unintended_drops,
            declared_drops: t.messages.declared_drops,
            delivered: t.messages.delivered,
            flags: self.flags,
            stats: self.stats,
            wall_clock_ms: 0,
        }
    }
}
