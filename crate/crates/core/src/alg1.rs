//! Phase I regularized Luby with presampled mark rounds, followed by the
//! shared Phases II and III.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::config::{clamp_p, Config};
use crate::engine::{
    exchange_broadcast, log2_ceil, Ctx, EngineConfig, Inbox, Outbox, Protocol, Simulator, Wake,
};
use crate::graph::{Graph, NodeId, NodeSet};
use crate::mis_core::Coloring;
use crate::pipeline::{phases_two_three, AlgError};
use crate::record::{PhaseClock, RunRecord};
use crate::rng::node_rng;
use crate::schedule::{build_awake_sets, AwakeSchedule};

use rand::Rng;

const MARK_STREAM: u64 = 0x4d41_524b;

/// Number of Phase I iterations, `⌊log₂ Δ⌋ − ⌈2 log₂ log₂ n⌉`. Zero or
/// negative means Phase I is skipped.
pub fn phase1_iterations(delta: usize, n: usize) -> i64 {
    if delta == 0 || n < 2 {
        return 0;
    }
    let floor_log = (usize::BITS - 1 - delta.leading_zeros()) as i64;
    let loglog = (n as f64).log2().log2().max(0.0);
    floor_log - (2.0 * loglog).ceil() as i64
}

/// Marking probability `2^i / (10Δ)` in iteration `i`.
pub fn mark_probability(i: u32, delta: usize) -> f64 {
    clamp_p(2f64.powi(i as i32) / (10.0 * delta.max(1) as f64))
}

/// First success of independent Bernoulli trials, `per_iter` trials with
/// probability `probs[i]` in iteration `i`, one geometric draw per
/// iteration. `uniform` must return values in `(0, 1]`. Rounds are 1-based.
pub fn first_success(probs: &[f64], per_iter: u64, mut uniform: impl FnMut() -> f64) -> Option<u64> {
    for (i, &p) in probs.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        let base = i as u64 * per_iter;
        if p >= 1.0 {
            return Some(base + 1);
        }
        let u: f64 = uniform();
        let fails = (u.ln() / (1.0 - p).ln()).floor();
        if fails < per_iter as f64 {
            return Some(base + fails as u64 + 1);
        }
    }
    None
}

/// Presampled mark round `r_v` of every node (indexed by node id).
pub fn presample_mark_rounds(n: usize, delta: usize, c: u32, seed: u64) -> Vec<Option<u64>> {
    let t = phase1_iterations(delta, n);
    if t < 1 {
        return vec![None; n];
    }
    let per_iter = c as u64 * log2_ceil(n) as u64;
    let probs: Vec<f64> = (0..t as u32).map(|i| mark_probability(i, delta)).collect();
    (0..n as NodeId)
        .map(|v| {
            let mut rng = node_rng(seed, MARK_STREAM, v);
            first_success(&probs, per_iter, || 1.0 - rng.gen::<f64>())
        })
        .collect()
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Phase1Outcome {
    pub mis: Vec<NodeId>,
    /// Nodes neither in the set nor next to it.
    pub residual: Vec<NodeId>,
    pub spoiled: Vec<NodeId>,
    pub sampled: usize,
    pub iterations: u32,
    pub rounds: u64,
    pub residual_max_degree: usize,
}

struct PhaseOne<'a> {
    r: &'a [Option<u64>],
    sched: AwakeSchedule,
    joined: Vec<bool>,
    spoiled: Vec<bool>,
    /// the node heard that a neighbour joined
    removed: Vec<bool>,
}

fn at(t: u64, s: u64) -> u64 {
    3 * (t - 1) + s
}

impl PhaseOne<'_> {
    /// Engine rounds in which `v` is awake, in order.
    fn slots(&self, v: NodeId) -> Vec<u64> {
        let r = self.r[v as usize].expect("only sampled nodes wake");
        let mut out = Vec::new();
        for l in self.sched.set(r).expect("r_v within the schedule") {
            if l == r {
                out.extend([at(l, 1), at(l, 2), at(l, 3)]);
            } else {
                out.push(at(l, 3));
            }
        }
        out
    }

    fn next(&self, v: NodeId, after: u64) -> Wake {
        self.slots(v).into_iter().find(|&e| e > after).map_or(Wake::Never, Wake::At)
    }
}

impl Protocol for PhaseOne<'_> {
    type Msg = bool;

    fn init(&mut self, v: NodeId, _: &Ctx) -> Wake {
        if self.r[v as usize].is_none() {
            return Wake::Never;
        }
        self.next(v, 0)
    }

    fn send(&mut self, v: NodeId, ctx: &Ctx, out: &mut Outbox<'_, bool>) {
        let i = v as usize;
        let (t, s) = ((ctx.round - 1) / 3 + 1, (ctx.round - 1) % 3 + 1);
        let mine = self.r[i] == Some(t);
        match s {
            1 if mine && !self.removed[i] => out.broadcast(true),
            2 if mine && self.joined[i] => out.broadcast(true),
            3 if self.joined[i] => out.broadcast(true),
            _ => {}
        }
    }

    fn receive(&mut self, v: NodeId, ctx: &Ctx, inbox: &Inbox<'_, bool>) -> Wake {
        let i = v as usize;
        let (t, s) = ((ctx.round - 1) / 3 + 1, (ctx.round - 1) % 3 + 1);
        let heard = inbox.iter().next().is_some();
        if s == 1 && self.r[i] == Some(t) {
            if !self.removed[i] {
                if heard {
                    self.spoiled[i] = true;
                } else {
                    self.joined[i] = true;
                }
            }
        } else if heard {
            self.removed[i] = true;
        }
        self.next(v, ctx.round)
    }

    fn duration(&self) -> Option<u64> {
        Some(3 * self.sched.t())
    }
}

/// Phase I on the whole graph: `T` iterations of `c⌈log₂ n⌉` rounds, three
/// sub-rounds each, every sampled node awake only in `S_{r_v}`; then one
/// round in which every node learns whether a neighbour joined.
pub fn phase1_reduce(sim: &mut Simulator<'_>, cfg: &Config) -> Result<Phase1Outcome, AlgError> {
    let g = sim.graph();
    let n = g.n();
    let delta = g.max_degree();
    let t = phase1_iterations(delta, n);
    let all: Vec<NodeId> = g.nodes().collect();
    if t < 1 {
        return Ok(Phase1Outcome { residual: all, residual_max_degree: delta, ..Default::default() });
    }
    let r = presample_mark_rounds(n, delta, cfg.c, sim.seed());
    let total = t as u64 * cfg.c as u64 * log2_ceil(n) as u64;
    let mut p = PhaseOne {
        r: &r,
        sched: build_awake_sets(total).expect("at least one round"),
        joined: vec![false; n],
        spoiled: vec![false; n],
        removed: vec![false; n],
    };
    let start = sim.clock();
    sim.run(&mut p, all.iter().copied())?;
    let joined = p.joined;
    exchange_broadcast(sim, &all, |v| joined[v as usize].then_some(true))?;

    let mut out = Phase1Outcome {
        sampled: r.iter().filter(|x| x.is_some()).count(),
        iterations: t as u32,
        rounds: sim.clock() - start,
        ..Default::default()
    };
    let mut gone = joined.clone();
    for v in 0..n {
        if joined[v] {
            out.mis.push(v as NodeId);
            for &u in g.neighbors(v as NodeId) {
                gone[u as usize] = true;
            }
        }
    }
    out.residual = all.iter().copied().filter(|&v| !gone[v as usize]).collect();
    out.spoiled = all.iter().copied().filter(|&v| p.spoiled[v as usize] && !gone[v as usize]).collect();
    out.residual_max_degree = out
        .residual
        .iter()
        .map(|&v| g.neighbors(v).iter().filter(|&&u| !gone[u as usize]).count())
        .max()
        .unwrap_or(0);
    Ok(out)
}

/// Degree promised after Phase I: `c_deg · (log₂ n)²`, or `Δ` if smaller.
pub fn phase1_degree_cap(n: usize, delta: usize, cfg: &Config) -> usize {
    let l = log2_ceil(n) as f64;
    ((cfg.c_deg * l * l).ceil() as usize).min(delta)
}

pub fn run_alg1(g: &Graph, cfg: &Config, seed: u64, engine: EngineConfig) -> Result<(NodeSet, RunRecord), AlgError> {
    let started = Instant::now();
    let engine = EngineConfig { budget_factor: cfg.budget_factor, ..engine };
    let mut sim = Simulator::new(g, seed, engine);
    let mut clock = PhaseClock::new(&sim);
    let p1 = phase1_reduce(&mut sim, cfg)?;
    clock.end(&sim, "phase1");
    let n = g.n();
    let cap = phase1_degree_cap(n, g.max_degree(), cfg);
    clock.stat("phase1_iterations", p1.iterations as f64);
    clock.stat("phase1_sampled", p1.sampled as f64);
    clock.stat("phase1_residual", p1.residual.len() as f64);
    clock.stat("phase1_residual_max_degree", p1.residual_max_degree as f64);
    if p1.residual_max_degree > cap {
        clock.flag("phase1_degree_cap_exceeded");
    }
    let coloring = Coloring::Fixed(cfg.alg1_coloring_steps);
    let rest = phases_two_three(&mut sim, &mut clock, &p1.residual, cap, cfg, coloring)?;
    let mut mis = NodeSet::from_iter(n, p1.mis.iter().copied());
    mis.union_with(&rest);
    let mut rec = clock.finish(sim, "alg1", false, cfg, &mis);
    rec.wall_clock_ms = started.elapsed().as_millis() as u64;
    Ok((mis, rec))
}
