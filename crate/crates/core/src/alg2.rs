//! Sampling-based degree reduction `Δ → 8Δ^0.6`, repeated until the degree
//! falls below `(log₂ n)^threshold_exp`, then the shared Phases II and III
//! with Linial iterated to its fixpoint.

use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::alg1::first_success;
use crate::config::{clamp_p, Config};
use crate::engine::{
    bits_for, exchange_broadcast, log2_ceil, Ctx, EngineConfig, Inbox, Outbox, Protocol, Simulator, Wake, Words,
};
use crate::graph::{Graph, NodeId, NodeSet};
use crate::mis_core::Coloring;
use crate::pipeline::{phases_two_three, AlgError};
use crate::record::{PhaseClock, RunRecord};
use crate::rng::{coin, node_rng};
use crate::schedule::{build_awake_sets, AwakeSchedule};

const TAG_STREAM: u64 = 0x5441_4731;
const PREMARK_STREAM: u64 = 0x5052_4d4b;
const RESAMPLE_STREAM: u64 = 0x5253_4d50;

/// `deg̃ = Δ^0.5 · A_v`.
pub fn estimate_degree(a_v: u64, delta: f64) -> f64 {
    delta.sqrt() * a_v as f64
}

/// `min(1, 2Δ^0.6 / (5 deg̃))`, and 1 when `deg̃ = 0`.
pub fn resample_probability(delta: f64, est: f64) -> f64 {
    if est <= 0.0 {
        return 1.0;
    }
    clamp_p(2.0 * delta.powf(0.6) / (5.0 * est))
}

pub fn tag_probability(delta: f64) -> f64 {
    clamp_p(delta.powf(-0.5))
}

pub fn premark_probability(delta: f64) -> f64 {
    clamp_p(1.0 / (2.0 * delta.powf(0.6)))
}

/// Certified degree after one reduction, `⌈8Δ^0.6⌉`.
pub fn next_delta(delta: f64) -> f64 {
    (8.0 * delta.powf(0.6)).ceil()
}

/// `(log₂ n)^exp`.
pub fn degree_threshold(n: usize, exp: f64) -> f64 {
    (log2_ceil(n) as f64).powf(exp)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sampling {
    pub tag_round: Option<u64>,
    pub premark_round: Option<u64>,
}

impl Sampling {
    /// First round in which either coin came up.
    pub fn r_v(&self) -> Option<u64> {
        match (self.tag_round, self.premark_round) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        }
    }
}

/// Presampled coins for `rounds` rounds; `iteration` separates repeated
/// reductions in one run.
pub fn presample(nodes: &[NodeId], n: usize, delta: f64, rounds: u64, seed: u64, iteration: u32) -> Vec<Sampling> {
    let (pa, pb) = (tag_probability(delta), premark_probability(delta));
    let mut out = vec![Sampling::default(); n];
    for &v in nodes {
        let mut a = node_rng(seed, TAG_STREAM + ((iteration as u64) << 32), v);
        let mut b = node_rng(seed, PREMARK_STREAM + ((iteration as u64) << 32), v);
        out[v as usize] = Sampling {
            tag_round: first_success(&[pa], rounds, || 1.0 - a.gen::<f64>()),
            premark_round: first_success(&[pb], rounds, || 1.0 - b.gen::<f64>()),
        };
    }
    out
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ReduceOutcome {
    pub joined: Vec<NodeId>,
    /// Participants neither joined nor next to a joined node.
    pub residual: Vec<NodeId>,
    pub residual_max_degree: usize,
    pub cleanup_joined: usize,
    pub sampled: usize,
    pub marked: usize,
}

struct Reduce<'a> {
    s: &'a [Sampling],
    sched: AwakeSchedule,
    delta: f64,
    seed: u64,
    iteration: u32,
    abits: u32,
    removed: Vec<bool>,
    a_count: Vec<u64>,
    marked: Vec<bool>,
    joined: Vec<bool>,
    marked_total: usize,
}

fn at(t: u64, s: u64) -> u64 {
    4 * (t - 1) + s
}

impl Reduce<'_> {
    fn next(&self, v: NodeId, after: u64) -> Wake {
        let r = self.s[v as usize].r_v().expect("only sampled nodes wake");
        let set = self.sched.set(r).expect("r_v within the schedule");
        for l in set {
            let subs: &[u64] = if l == r { &[1, 2, 3, 4] } else { &[4] };
            for &sub in subs {
                if at(l, sub) > after {
                    return Wake::At(at(l, sub));
                }
            }
        }
        Wake::Never
    }
}

impl Protocol for Reduce<'_> {
    type Msg = Words<1>;

    fn init(&mut self, v: NodeId, _: &Ctx) -> Wake {
        match self.s[v as usize].r_v() {
            Some(_) => self.next(v, 0),
            None => Wake::Never,
        }
    }

    fn send(&mut self, v: NodeId, ctx: &Ctx, out: &mut Outbox<'_, Words<1>>) {
        let i = v as usize;
        let (t, sub) = ((ctx.round - 1) / 4 + 1, (ctx.round - 1) % 4 + 1);
        let mine = self.s[i].r_v() == Some(t) && !self.removed[i];
        match sub {
            1 if mine && self.s[i].tag_round == Some(t) => out.broadcast(Words { w: [1], bits: 1 }),
            2 if mine && self.marked[i] => out.broadcast(Words { w: [self.a_count[i]], bits: self.abits }),
            3 if mine && self.joined[i] => out.broadcast(Words { w: [1], bits: 1 }),
            4 if self.joined[i] => out.broadcast(Words { w: [1], bits: 1 }),
            _ => {}
        }
    }

    fn receive(&mut self, v: NodeId, ctx: &Ctx, inbox: &Inbox<'_, Words<1>>) -> Wake {
        let i = v as usize;
        let (t, sub) = ((ctx.round - 1) / 4 + 1, (ctx.round - 1) % 4 + 1);
        let mine = self.s[i].r_v() == Some(t) && !self.removed[i];
        match sub {
            1 if mine && self.s[i].premark_round == Some(t) => {
                let a = inbox.iter().count() as u64;
                self.a_count[i] = a;
                let p = resample_probability(self.delta, estimate_degree(a, self.delta));
                let idx = (self.iteration as u64) << 32 | v as u64;
                if coin(self.seed, RESAMPLE_STREAM, idx, p) {
                    self.marked[i] = true;
                    self.marked_total += 1;
                }
            }
            2 if mine && self.marked[i] => {
                // Δ^0.5 is common to both estimates, so compare the counts
                let beaten = inbox.iter().any(|(_, m)| self.a_count[i] <= m.w[0]);
                self.joined[i] = !beaten;
            }
            3 | 4 if !self.joined[i] => {
                if inbox.iter().next().is_some() {
                    self.removed[i] = true;
                }
            }
            _ => {}
        }
        self.next(v, ctx.round)
    }

    fn duration(&self) -> Option<u64> {
        Some(4 * self.sched.t())
    }
}

/// One reduction on `participants` with certified degree `delta`: sampled
/// rounds over `reduce_factor · ⌈log₂ n⌉` rounds, then four rounds with
/// everyone awake for the high-degree cleanup.
pub fn degree_reduce_once(
    sim: &mut Simulator<'_>,
    participants: &[NodeId],
    delta: f64,
    cfg: &Config,
    iteration: u32,
) -> Result<ReduceOutcome, AlgError> {
    let g = sim.graph();
    let n = g.n();
    let rounds = (cfg.reduce_factor as u64 * log2_ceil(n) as u64).max(1);
    let s = presample(participants, n, delta, rounds, sim.seed(), iteration);
    let mut p = Reduce {
        s: &s,
        sched: build_awake_sets(rounds).expect("at least one round"),
        delta,
        seed: sim.seed(),
        iteration,
        abits: bits_for(g.max_degree() as u64),
        removed: vec![false; n],
        a_count: vec![0; n],
        marked: vec![false; n],
        joined: vec![false; n],
        marked_total: 0,
    };
    sim.run(&mut p, participants.iter().copied())?;
    let mut joined = p.joined;

    // learn who is covered, count active neighbours, then the cleanup
    let heard = exchange_broadcast(sim, participants, |v| joined[v as usize].then_some(true))?;
    let mut active = vec![false; n];
    for (i, &v) in participants.iter().enumerate() {
        active[v as usize] = !joined[v as usize] && heard[i].is_empty();
    }
    let heard = exchange_broadcast(sim, participants, |v| active[v as usize].then_some(true))?;
    let cut = 4.0 * delta.powf(0.6);
    let mut deg = vec![0usize; n];
    for (i, &v) in participants.iter().enumerate() {
        deg[v as usize] = heard[i].len();
    }
    let high = |v: NodeId| active[v as usize] && deg[v as usize] as f64 >= cut;
    let heard = exchange_broadcast(sim, participants, |v| high(v).then_some(true))?;
    let mut cleanup = Vec::new();
    for (i, &v) in participants.iter().enumerate() {
        if high(v) && deg[v as usize] as f64 > cut && heard[i].is_empty() {
            cleanup.push(v);
        }
    }
    for &v in &cleanup {
        joined[v as usize] = true;
    }
    let heard = exchange_broadcast(sim, participants, |v| cleanup.binary_search(&v).is_ok().then_some(true))?;

    let mut out = ReduceOutcome {
        cleanup_joined: cleanup.len(),
        sampled: participants.iter().filter(|&&v| s[v as usize].r_v().is_some()).count(),
        marked: p.marked_total,
        ..Default::default()
    };
    for (i, &v) in participants.iter().enumerate() {
        if joined[v as usize] {
            out.joined.push(v);
        } else if active[v as usize] && heard[i].is_empty() {
            out.residual.push(v);
        }
    }
    let still = NodeSet::from_iter(n, out.residual.iter().copied());
    out.residual_max_degree = out
        .residual
        .iter()
        .map(|&v| g.neighbors(v).iter().filter(|&&u| still.contains(u)).count())
        .max()
        .unwrap_or(0);
    Ok(out)
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Alg2Phase1 {
    pub joined: Vec<NodeId>,
    pub residual: Vec<NodeId>,
    /// Certified degree of the residual graph.
    pub delta: f64,
    pub iterations: u32,
    /// Reductions whose residual degree exceeded `8Δ^0.6`.
    pub over_cap: u32,
    pub residual_max_degree: usize,
}

/// Repeats [`degree_reduce_once`] with the certified cap until the degree
/// bound is below the threshold.
pub fn run_alg2_phase1(sim: &mut Simulator<'_>, cfg: &Config) -> Result<Alg2Phase1, AlgError> {
    let g = sim.graph();
    let n = g.n();
    let threshold = degree_threshold(n, cfg.threshold_exp);
    let mut out = Alg2Phase1 {
        residual: g.nodes().collect(),
        delta: g.max_degree() as f64,
        residual_max_degree: g.max_degree(),
        ..Default::default()
    };
    while out.delta > threshold && next_delta(out.delta) < out.delta {
        let r = degree_reduce_once(sim, &out.residual, out.delta, cfg, out.iterations)?;
        out.delta = next_delta(out.delta);
        if r.residual_max_degree as f64 > out.delta {
            out.over_cap += 1;
        }
        out.iterations += 1;
        out.joined.extend(r.joined);
        out.residual = r.residual;
        out.residual_max_degree = r.residual_max_degree;
    }
    Ok(out)
}

pub fn run_alg2(g: &Graph, cfg: &Config, seed: u64, engine: EngineConfig) -> Result<(NodeSet, RunRecord), AlgError> {
    let started = Instant::now();
    let engine = EngineConfig { budget_factor: cfg.budget_factor, ..engine };
    let mut sim = Simulator::new(g, seed, engine);
    let mut clock = PhaseClock::new(&sim);
    let p1 = run_alg2_phase1(&mut sim, cfg)?;
    clock.end(&sim, "phase1");
    clock.stat("phase1_iterations", p1.iterations as f64);
    clock.stat("phase1_residual", p1.residual.len() as f64);
    clock.stat("phase1_residual_max_degree", p1.residual_max_degree as f64);
    if p1.over_cap > 0 {
        clock.flag(format!("phase1_degree_cap_exceeded:{}", p1.over_cap));
    }
    let cap = (p1.delta as usize).min(g.max_degree());
    let coloring = Coloring::UntilFixpoint(cfg.alg2_coloring_steps);
    let rest = phases_two_three(&mut sim, &mut clock, &p1.residual, cap, cfg, coloring)?;
    let mut mis = NodeSet::from_iter(g.n(), p1.joined.iter().copied());
    mis.union_with(&rest);
    let mut rec = clock.finish(sim, "alg2", false, cfg, &mis);
    rec.wall_clock_ms = started.elapsed().as_millis() as u64;
    Ok((mis, rec))
}
