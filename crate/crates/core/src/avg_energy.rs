//! Constant node-averaged energy. Between Phase I and Phase II, a short
//! degree reduction with failure detection (Phase I½) and a few Luby stages
//! on its low-degree part leave only a small fraction of the nodes for the
//! expensive phases.

use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::alg1::{first_success, mark_probability, phase1_degree_cap, phase1_reduce};
use crate::alg2::run_alg2_phase1;
use crate::config::{lg, loglog_ceil, Config};
use crate::engine::{exchange_broadcast, log2_ceil, Ctx, EngineConfig, EngineError, Inbox, Outbox, Protocol, Simulator, Wake};
use crate::graph::{Graph, NodeId, NodeSet, Roster};
use crate::mis_core::{run_luby, Coloring};
use crate::pipeline::{phases_two_three, AlgError};
use crate::record::{PhaseClock, RunRecord};
use crate::rng::node_rng;

const HALF_STREAM: u64 = 0x4841_4c46;
const SPARSIFY_STREAM: u64 = 0x5350_4152;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Which {
    Alg1,
    Alg2,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FailReason {
    TooManySpoiled,
    DegreeNotHalved,
    /// Forced by the caller.
    Injected,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub node: NodeId,
    pub reason: FailReason,
    pub iteration: u32,
    /// Global round of the announcement; the node sleeps from then on.
    pub announced: u64,
}

/// Outcome of Phase I½: the nodes that joined, the low-degree part `a` and
/// the failed nodes `f`. Everything else was covered.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FailurePartition {
    pub joined: Vec<NodeId>,
    pub a: Vec<NodeId>,
    pub f: Vec<NodeId>,
    pub failures: Vec<Failure>,
    pub iterations: u32,
    pub sampled: usize,
    /// Degree bound every node of `a` satisfies by construction.
    pub cap: usize,
    pub a_max_degree: usize,
}

/// `⌊log₂ Δ₂⌋ − ⌈cap_exp · log₂ log₂ log₂ n⌉`, the number of iterations.
pub fn half_iterations(delta2: usize, n: usize, cap_exp: f64) -> i64 {
    if delta2 == 0 || n < 2 {
        return 0;
    }
    let floor_log = (usize::BITS - 1 - delta2.leading_zeros()) as i64;
    let lll = (n as f64).log2().log2().max(1.0).log2();
    floor_log - (cap_exp * lll).ceil() as i64
}

/// Degree bound after `t` iterations: `Δ₂/2^t` non-spoiled neighbours
/// plus `t · C · log₂ log₂ n` spoiled ones.
pub fn half_degree_cap(delta2: usize, n: usize, t: u32, cfg: &Config) -> usize {
    if t == 0 {
        return delta2;
    }
    let spoiled = t as f64 * cfg.big_c as f64 * lg(lg(n as f64));
    (delta2 >> t.min(63)) + spoiled.floor() as usize
}

struct Half<'a> {
    roster: &'a Roster,
    /// 1-based sampling round over all iterations
    r: Vec<Option<u64>>,
    per_iter: u64,
    iters: u64,
    delta2: usize,
    spoil_unit: f64,
    inject: &'a [NodeId],
    marked: Vec<bool>,
    joined: Vec<bool>,
    announced: Vec<bool>,
    spoiled: Vec<bool>,
    covered: Vec<bool>,
    failed: Vec<Option<(FailReason, u32)>>,
    fail_round: Vec<u64>,
}

impl Half<'_> {
    fn len(&self) -> u64 {
        2 * self.per_iter + 3
    }

    /// (iteration, offset within it), both 0-based
    fn split(&self, round: u64) -> (u64, u64) {
        ((round - 1) / self.len(), (round - 1) % self.len())
    }

    fn round_of(&self, it: u64, off: u64) -> u64 {
        it * self.len() + off + 1
    }

    /// Next round after `after` in which an active node is awake.
    fn next(&self, i: usize, after: u64) -> Wake {
        let (mut it, _) = if after == 0 { (0, 0) } else { self.split(after) };
        while it < self.iters {
            let mut slots = Vec::new();
            if let Some(r) = self.r[i] {
                if (r - 1) / self.per_iter == it {
                    let t = (r - 1) % self.per_iter;
                    // join rounds before the own one, then mark and join
                    slots.extend((0..t).map(|s| 2 * s + 1));
                    slots.extend([2 * t, 2 * t + 1]);
                }
            }
            let e = 2 * self.per_iter;
            slots.extend([e, e + 1, e + 2]);
            if let Some(off) = slots.into_iter().map(|o| self.round_of(it, o)).find(|&g| g > after) {
                return Wake::At(off);
            }
            it += 1;
        }
        Wake::Never
    }
}

impl Protocol for Half<'_> {
    type Msg = bool;

    fn init(&mut self, v: NodeId, _: &Ctx) -> Wake {
        self.next(self.roster.at(v), 0)
    }

    fn send(&mut self, v: NodeId, ctx: &Ctx, out: &mut Outbox<'_, bool>) {
        let i = self.roster.at(v);
        let (it, off) = self.split(ctx.round);
        let e = 2 * self.per_iter;
        let mine = self.r[i].map(|r| r - 1 == it * self.per_iter + off / 2).unwrap_or(false);
        if off < e {
            if off % 2 == 0 && mine && !self.covered[i] {
                self.marked[i] = true;
                out.broadcast(true);
            } else if off % 2 == 1 && mine && self.joined[i] {
                out.broadcast(true);
            }
        } else if off == e {
            if self.joined[i] && !self.announced[i] {
                self.announced[i] = true;
                out.broadcast(true);
            }
        } else if off == e + 1 {
            out.broadcast(self.spoiled[i]);
        } else if self.failed[i].is_some() {
            out.broadcast(true);
        }
    }

    fn receive(&mut self, v: NodeId, ctx: &Ctx, inbox: &Inbox<'_, bool>) -> Wake {
        let i = self.roster.at(v);
        let (it, off) = self.split(ctx.round);
        let e = 2 * self.per_iter;
        let heard = inbox.iter().next().is_some();
        if off < e {
            if off % 2 == 0 && self.marked[i] {
                self.marked[i] = false;
                if heard {
                    self.spoiled[i] = true;
                } else {
                    self.joined[i] = true;
                }
            } else if off % 2 == 1 && heard && !self.joined[i] {
                self.covered[i] = true;
                return Wake::Never;
            }
        } else if off == e {
            if self.joined[i] {
                return Wake::Never;
            }
            if heard {
                self.covered[i] = true;
                return Wake::Never;
            }
        } else if off == e + 1 {
            let spoiled = inbox.iter().filter(|&(_, s)| s).count() as f64;
            let fresh = inbox.iter().filter(|&(_, s)| !s).count();
            let k = it + 1;
            let reason = if it == 0 && self.inject.binary_search(&v).is_ok() {
                Some(FailReason::Injected)
            } else if spoiled > k as f64 * self.spoil_unit {
                Some(FailReason::TooManySpoiled)
            } else if fresh > self.delta2 >> k.min(63) {
                Some(FailReason::DegreeNotHalved)
            } else {
                None
            };
            if let Some(r) = reason {
                self.failed[i] = Some((r, it as u32));
                self.fail_round[i] = ctx.global_round + 1;
            }
        } else if self.failed[i].is_some() {
            return Wake::Never;
        }
        self.next(i, ctx.round)
    }

    fn duration(&self) -> Option<u64> {
        Some(self.iters * self.len())
    }
}

/// Phase I½ on `participants`, whose induced degree is at most `delta2`.
pub fn phase1half_reduce(
    sim: &mut Simulator<'_>,
    participants: &[NodeId],
    delta2: usize,
    cfg: &Config,
) -> Result<FailurePartition, EngineError> {
    phase1half_reduce_with(sim, participants, delta2, cfg, &[])
}

/// [`phase1half_reduce`] where the nodes in `inject` fail at the end of the
/// first iteration regardless of their counts.
pub fn phase1half_reduce_with(
    sim: &mut Simulator<'_>,
    participants: &[NodeId],
    delta2: usize,
    cfg: &Config,
    inject: &[NodeId],
) -> Result<FailurePartition, EngineError> {
    let g = sim.graph();
    let n = g.n();
    let roster = Roster::new(n, participants.iter().copied());
    let t = half_iterations(delta2, n, cfg.half_cap_exp).max(0) as u32;
    let mut out = FailurePartition { iterations: t, cap: half_degree_cap(delta2, n, t, cfg), ..Default::default() };
    if t == 0 || roster.is_empty() {
        out.a = roster.nodes().to_vec();
        out.a_max_degree = induced_max_degree(g, &out.a);
        return Ok(out);
    }
    let per_iter = cfg.half_factor as u64 * loglog_ceil(n) as u64;
    let probs: Vec<f64> = (0..t).map(|i| mark_probability(i, delta2)).collect();
    let r: Vec<Option<u64>> = roster
        .nodes()
        .iter()
        .map(|&v| {
            let mut rng = node_rng(sim.seed(), HALF_STREAM, v);
            first_success(&probs, per_iter, || 1.0 - rng.gen::<f64>())
        })
        .collect();
    let mut inject = inject.to_vec();
    inject.sort_unstable();
    let k = roster.len();
    let mut p = Half {
        roster: &roster,
        r,
        per_iter,
        iters: t as u64,
        delta2,
        spoil_unit: cfg.big_c as f64 * lg(lg(n as f64)),
        inject: &inject,
        marked: vec![false; k],
        joined: vec![false; k],
        announced: vec![false; k],
        spoiled: vec![false; k],
        covered: vec![false; k],
        failed: vec![None; k],
        fail_round: vec![0; k],
    };
    sim.run(&mut p, roster.nodes().iter().copied())?;
    out.sampled = p.r.iter().filter(|x| x.is_some()).count();
    for (i, &v) in roster.nodes().iter().enumerate() {
        if p.joined[i] {
            out.joined.push(v);
        } else if let Some((reason, iteration)) = p.failed[i] {
            out.f.push(v);
            out.failures.push(Failure { node: v, reason, iteration, announced: p.fail_round[i] });
        } else if !p.covered[i] {
            out.a.push(v);
        }
    }
    out.a_max_degree = induced_max_degree(g, &out.a);
    Ok(out)
}

fn induced_max_degree(g: &Graph, nodes: &[NodeId]) -> usize {
    let set = NodeSet::from_iter(g.n(), nodes.iter().copied());
    nodes.iter().map(|&v| g.neighbors(v).iter().filter(|&&u| set.contains(u)).count()).max().unwrap_or(0)
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SparsifyOutcome {
    pub joined: Vec<NodeId>,
    pub remaining: Vec<NodeId>,
    /// Nodes left after each stage.
    pub after_stage: Vec<usize>,
    /// More than `k_s · |participants| / 2^k` nodes remain.
    pub over_bound: bool,
}

/// `k` stages of `sparsify_factor · ⌈log₂ (d+1)⌉` Luby rounds each on the
/// nodes still undecided, every one of them awake until it decides.
pub fn sparsify_low_degree(
    sim: &mut Simulator<'_>,
    participants: &[NodeId],
    d: usize,
    k: u32,
    cfg: &Config,
) -> Result<SparsifyOutcome, EngineError> {
    let rounds = (cfg.sparsify_factor as u64 * log2_ceil(d + 1) as u64).max(1);
    let mut left = participants.to_vec();
    let mut out = SparsifyOutcome::default();
    for stage in 0..k {
        if left.is_empty() {
            break;
        }
        let o = run_luby(sim, &left, rounds, SPARSIFY_STREAM + stage as u64)?;
        out.joined.extend(o.in_mis.iter());
        left = o.remaining.iter().collect();
        out.after_stage.push(left.len());
    }
    let bound = cfg.k_s * participants.len() as f64 / 2f64.powi(k as i32);
    out.over_bound = left.len() as f64 > bound;
    out.remaining = left;
    Ok(out)
}

/// `⌈2 log₂ log₂ log₂ n⌉`, at least 0.
pub fn sparsify_stages(n: usize) -> u32 {
    let lll = (n as f64).log2().log2().max(1.0).log2();
    (2.0 * lll).ceil().max(0.0) as u32
}

/// Phase I of `which`, then Phase I½, sparsification, and Phases II and III
/// on the failed nodes plus what sparsification left.
pub fn run_avg_energy_pipeline(
    g: &Graph,
    which: Which,
    cfg: &Config,
    seed: u64,
    engine: EngineConfig,
) -> Result<(NodeSet, RunRecord), AlgError> {
    let started = Instant::now();
    let n = g.n();
    let engine = EngineConfig { budget_factor: cfg.budget_factor, ..engine };
    let mut sim = Simulator::new(g, seed, engine);
    let mut clock = PhaseClock::new(&sim);
    let mut mis = NodeSet::new(n);
    let (residual, delta2, coloring) = match which {
        Which::Alg1 => {
            let p1 = phase1_reduce(&mut sim, cfg)?;
            clock.stat("phase1_sampled", p1.sampled as f64);
            p1.mis.iter().for_each(|&v| _ = mis.insert(v));
            let cap = phase1_degree_cap(n, g.max_degree(), cfg);
            (p1.residual, cap, Coloring::Fixed(cfg.alg1_coloring_steps))
        }
        Which::Alg2 => {
            let p1 = run_alg2_phase1(&mut sim, cfg)?;
            p1.joined.iter().for_each(|&v| _ = mis.insert(v));
            let cap = (p1.delta as usize).min(g.max_degree());
            (p1.residual, cap, Coloring::UntilFixpoint(cfg.alg2_coloring_steps))
        }
    };
    clock.end(&sim, "phase1");
    clock.stat("phase1_residual", residual.len() as f64);

    let half = phase1half_reduce(&mut sim, &residual, delta2, cfg)?;
    clock.end(&sim, "phase1half");
    clock.stat("half_iterations", half.iterations as f64);
    clock.stat("half_sampled", half.sampled as f64);
    clock.stat("half_failed", half.f.len() as f64);
    clock.stat("half_a", half.a.len() as f64);
    clock.stat("half_a_max_degree", half.a_max_degree as f64);
    if half.a_max_degree > half.cap {
        clock.flag("half_degree_cap_exceeded");
    }

    let k = sparsify_stages(n);
    let sp = sparsify_low_degree(&mut sim, &half.a, half.cap, k, cfg)?;
    // failed nodes slept through the later joins and hear about them now
    let mut joiners: Vec<NodeId> = half.joined.iter().chain(&sp.joined).copied().collect();
    joiners.sort_unstable();
    let mut handoff: Vec<NodeId> = joiners.iter().chain(&half.f).copied().collect();
    handoff.sort_unstable();
    let heard = exchange_broadcast(&mut sim, &handoff, |v| joiners.binary_search(&v).is_ok().then_some(true))?;
    let mut rest = sp.remaining.clone();
    for (i, &v) in handoff.iter().enumerate() {
        if heard[i].is_empty() && half.f.binary_search(&v).is_ok() {
            rest.push(v);
        }
    }
    rest.sort_unstable();
    clock.end(&sim, "sparsify");
    clock.stat("sparsify_stages", k as f64);
    clock.stat("sparsify_remaining", sp.remaining.len() as f64);
    clock.stat("phase2_input", rest.len() as f64);
    if sp.over_bound {
        clock.flag("sparsify_over_bound");
    }
    joiners.iter().for_each(|&v| _ = mis.insert(v));

    let delta = delta2.max(half.cap);
    let s = phases_two_three(&mut sim, &mut clock, &rest, delta, cfg, coloring)?;
    mis.union_with(&s);
    let mut rec = clock.finish(sim, name_of(which), true, cfg, &mis);
    rec.wall_clock_ms = started.elapsed().as_millis() as u64;
    Ok((mis, rec))
}

fn name_of(which: Which) -> &'static str {
    match which {
        Which::Alg1 => "alg1",
        Which::Alg2 => "alg2",
    }
}
