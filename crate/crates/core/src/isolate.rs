//! Single phases run on their own, for debugging. The resulting set is
//! independent but usually not maximal.

use serde::{Deserialize, Serialize};

use crate::alg1::phase1_reduce;
use crate::alg2::run_alg2_phase1;
use crate::avg_energy::Which;
use crate::config::{loglog_ceil, Config};
use crate::engine::{log2_ceil, EngineConfig, Simulator};
use crate::graph::{Graph, NodeId, NodeSet};
use crate::mis_core::{phase3_component_mis, Coloring};
use crate::pipeline::{phases_two_three, AlgError};
use crate::record::{PhaseClock, RunRecord};
use crate::trees::ClusterForest;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    /// Degree reduction only.
    One,
    /// Shattering, clustering and Phase III on the whole graph, skipping Phase I.
    Two,
    /// Phase III with every node its own cluster.
    Three,
}

fn coloring(which: Which, cfg: &Config) -> Coloring {
    match which {
        Which::Alg1 => Coloring::Fixed(cfg.alg1_coloring_steps),
        Which::Alg2 => Coloring::UntilFixpoint(cfg.alg2_coloring_steps),
    }
}

pub fn run_phase(
    g: &Graph,
    which: Which,
    phase: Phase,
    cfg: &Config,
    seed: u64,
    engine: EngineConfig,
) -> Result<(NodeSet, RunRecord), AlgError> {
    let n = g.n();
    let engine = EngineConfig { budget_factor: cfg.budget_factor, ..engine };
    let mut sim = Simulator::new(g, seed, engine);
    let mut clock = PhaseClock::new(&sim);
    let all: Vec<NodeId> = g.nodes().collect();
    let mis = match phase {
        Phase::One => {
            let joined = match which {
                Which::Alg1 => phase1_reduce(&mut sim, cfg)?.mis,
                Which::Alg2 => run_alg2_phase1(&mut sim, cfg)?.joined,
            };
            clock.end(&sim, "phase1");
            NodeSet::from_iter(n, joined)
        }
        Phase::Two => phases_two_three(&mut sim, &mut clock, &all, g.max_degree(), cfg, coloring(which, cfg))?,
        Phase::Three => {
            let forest = ClusterForest::singletons(n, &all, cfg.depth_bound(n));
            let rounds = cfg.mis_factor as u64 * (log2_ceil(g.max_degree() + 1) as u64 + loglog_ceil(n) as u64);
            let (s, st) = phase3_component_mis(&mut sim, forest, coloring(which, cfg), rounds, 0x4953_4f33)?;
            clock.end(&sim, "phase3");
            clock.stat("phase3_iterations", st.iterations.len() as f64);
            s
        }
    };
    let name = match (which, phase) {
        (Which::Alg1, Phase::One) => "alg1/phase1",
        (Which::Alg1, Phase::Two) => "alg1/phase2",
        (Which::Alg1, Phase::Three) => "alg1/phase3",
        (Which::Alg2, Phase::One) => "alg2/phase1",
        (Which::Alg2, Phase::Two) => "alg2/phase2",
        (Which::Alg2, Phase::Three) => "alg2/phase3",
    };
    let rec = clock.finish(sim, name, false, cfg, &mis);
    Ok((mis, rec))
}
