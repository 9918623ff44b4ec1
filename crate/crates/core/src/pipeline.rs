//! Phases II and III, shared by every pipeline: shattering with desire-level
//! rounds and ball clustering, then cluster merging and the packed MIS on
//! each remaining component.

use thiserror::Error;

use crate::config::{loglog_ceil, Config};
use crate::engine::{log2_ceil, EngineError, Simulator};
use crate::graph::{NodeId, NodeSet};
use crate::mis_core::{cluster_remaining, desire_level_mis, phase3_component_mis, Coloring, Phase3Error};
use crate::record::PhaseClock;
use crate::trees::TreeError;

#[derive(Debug, Error)]
pub enum AlgError {
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Phase3(#[from] Phase3Error),
}

pub(crate) const PHASE2_STREAM: u64 = 0x5048_4153_4532;
pub(crate) const PHASE3_STREAM: u64 = 0x5048_4153_4533;

/// Runs Phases II and III on `participants`, whose induced degree is
/// promised to be at most `delta`. Returns the nodes that joined.
pub fn phases_two_three(
    sim: &mut Simulator<'_>,
    clock: &mut PhaseClock,
    participants: &[NodeId],
    delta: usize,
    cfg: &Config,
    coloring: Coloring,
) -> Result<NodeSet, AlgError> {
    let n = sim.graph().n();
    let ld = log2_ceil(delta + 1) as u64;
    let rounds = cfg.phase2_factor as u64 * ld;
    let mis = desire_level_mis(sim, participants, rounds, PHASE2_STREAM)?;
    clock.end(sim, "phase2");
    let sh = cluster_remaining(sim, mis, cfg.radius_for(n), cfg.depth_bound(n))?;
    clock.end(sim, "clustering");
    let largest = sh.components.iter().map(Vec::len).max().unwrap_or(0);
    clock.stat("phase2_remaining", sh.mis.remaining.len() as f64);
    clock.stat("phase2_components", sh.components.len() as f64);
    clock.stat("phase2_max_component", largest as f64);
    clock.stat("phase2_clusters", sh.forest.num_clusters() as f64);
    clock.stat("phase2_ball_iterations", sh.ball_iterations as f64);

    let mis_rounds = cfg.mis_factor as u64 * (ld + loglog_ceil(n) as u64);
    let (s3, st) = phase3_component_mis(sim, sh.forest, coloring, mis_rounds, PHASE3_STREAM)?;
    clock.end(sim, "phase3");
    clock.stat("phase3_iterations", st.iterations.len() as f64);
    clock.stat("phase3_components", st.components as f64);
    let orphans: usize = st.iterations.iter().map(|i| i.orphans).sum();
    clock.stat("phase3_orphans", orphans as f64);
    let depth = st.iterations.iter().map(|i| i.max_depth).max().unwrap_or(0);
    clock.stat("phase3_max_depth", depth as f64);
    let palette = st.iterations.iter().map(|i| i.palette).max().unwrap_or(0);
    clock.stat("phase3_palette", palette as f64);
    if st.failed_components > 0 {
        clock.flag(format!("phase3_failed_components:{}", st.failed_components));
    }
    if st.halving_violated {
        clock.flag("phase3_halving_violated");
    }

    let mut out = sh.mis.in_mis;
    out.union_with(&s3);
    Ok(out)
}
