//! Lock-step simulator of the CONGEST model with sleeping nodes.
//!
//! A run is a sequence of *stages*. Each stage executes one [`Protocol`] on a
//! set of participating nodes; the global clock and the [`EnergyLedger`] carry
//! over from stage to stage, so a multi-phase algorithm is accounted as one
//! execution. Inside a stage, every round has three steps:
//!
//! 1. every awake node runs [`Protocol::send`] and may emit at most one
//!    message per incident edge;
//! 2. messages reach their receivers only if the receiver is awake in the
//!    same round, otherwise they are dropped;
//! 3. every awake node runs [`Protocol::receive`] on its inbox and names the
//!    next round it wants to be awake in.
//!
//! A node that is asleep does nothing and cannot be woken by anyone else. Its
//! only way back is the wake-up it scheduled itself.
//!
//! Only awake nodes cost simulation time, and rounds in which nobody is awake
//! are skipped without being visited, so long sparse schedules stay cheap.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Graph, NodeId};

/// Message payloads report their encoded size so the engine can enforce the
/// per-message bit budget.
pub trait Payload: Copy {
    fn bits(&self) -> u32;
}

/// Next round (stage-local, 1-based) a node wants to be awake in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Wake {
    At(u64),
    Never,
}

/// What a handler may see besides its own state.
#[derive(Clone, Copy, Debug)]
pub struct Ctx {
    /// Stage-local round, 0 during `init`.
    pub round: u64,
    /// Global round of the whole run.
    pub global_round: u64,
    pub seed: u64,
    pub budget_bits: u32,
    pub n: usize,
}

pub trait Protocol {
    type Msg: Payload;

    /// Local computation before the stage starts; free of energy cost.
    fn init(&mut self, v: NodeId, ctx: &Ctx) -> Wake;

    fn send(&mut self, v: NodeId, ctx: &Ctx, out: &mut Outbox<'_, Self::Msg>);

    fn receive(&mut self, v: NodeId, ctx: &Ctx, inbox: &Inbox<'_, Self::Msg>) -> Wake;

    /// Stages that run on a globally known schedule occupy exactly this many
    /// rounds, even if every node goes to sleep earlier.
    fn duration(&self) -> Option<u64> {
        None
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ViolationMode {
    #[default]
    Abort,
    RecordAndContinue,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EngineConfig {
    /// B = budget_factor · ⌈log₂ n⌉ bits per message.
    pub budget_factor: u32,
    pub max_rounds: u64,
    pub mode: ViolationMode,
    pub record_awake_sets: bool,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            budget_factor: 4,
            max_rounds: (1 << 40) - 1,
            mode: ViolationMode::Abort,
            record_awake_sets: false,
        }
    }
}

pub fn log2_ceil(n: usize) -> u32 {
    if n <= 2 {
        1
    } else {
        usize::BITS - (n - 1).leading_zeros()
    }
}

impl EngineConfig {
    pub fn budget_bits(&self, n: usize) -> u32 {
        self.budget_factor * log2_ceil(n)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ViolationKind {
    Budget { src: NodeId, bits: u32, budget: u32 },
    DuplicateEdge { src: NodeId, dst: NodeId },
    NotAnEdge { src: NodeId, dst: NodeId },
    BadWake { node: NodeId, requested: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub round: u64,
    #[serde(flatten)]
    pub kind: ViolationKind,
}

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("run aborted in round {}: {:?}", .0.round, .0.kind)]
    Aborted(Violation),
    #[error("round limit {0} exceeded")]
    RoundLimit(u64),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnergyLedger {
    pub awake: Vec<u64>,
    pub total_rounds: u64,
}

impl EnergyLedger {
    pub fn new(n: usize) -> Self {
        EnergyLedger {
            awake: vec![0; n],
            total_rounds: 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub max_awake: u64,
    pub mean_awake: f64,
    pub total_rounds: u64,
}

/// Max and arithmetic mean of awake counts over all nodes (never-awake nodes
/// count as zero), plus the round count.
pub fn energy_report(ledger: &EnergyLedger) -> EnergyReport {
    let n = ledger.awake.len();
    let sum: u64 = ledger.awake.iter().sum();
    EnergyReport {
        max_awake: ledger.awake.iter().copied().max().unwrap_or(0),
        mean_awake: if n == 0 { 0.0 } else { sum as f64 / n as f64 },
        total_rounds: ledger.total_rounds,
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MessageStats {
    pub delivered: u64,
    /// Broadcast copies that hit a sleeping neighbour; legal and expected.
    pub declared_drops: u64,
    /// Point-to-point messages whose receiver was asleep.
    pub unintended_drops: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub ledger: EnergyLedger,
    pub violations: Vec<Violation>,
    pub messages: MessageStats,
    pub awake_sets: Option<Vec<(u64, Vec<NodeId>)>>,
}

impl Transcript {
    pub fn energy(&self) -> EnergyReport {
        energy_report(&self.ledger)
    }
}

/// Outgoing side of one awake node for one round.
pub struct Outbox<'a, M> {
    src: NodeId,
    g: &'a Graph,
    budget: u32,
    targeted: &'a mut Vec<(NodeId, NodeId, M)>,
    first_targeted: usize,
    broadcast: &'a mut Option<M>,
    violations: &'a mut Vec<ViolationKind>,
}

impl<'a, M: Payload> Outbox<'a, M> {
    fn over_budget(&mut self, msg: &M) -> bool {
        let bits = msg.bits();
        if bits > self.budget {
            self.violations.push(ViolationKind::Budget {
                src: self.src,
                bits,
                budget: self.budget,
            });
            return true;
        }
        false
    }

    /// Point-to-point message on edge `(src, dst)`; the receiver is expected
    /// to be awake.
    pub fn send(&mut self, dst: NodeId, msg: M) {
        if !self.g.has_edge(self.src, dst) {
            self.violations.push(ViolationKind::NotAnEdge { src: self.src, dst });
            return;
        }
        let dup = self.broadcast.is_some()
            || self.targeted[self.first_targeted..]
                .iter()
                .any(|&(_, d, _)| d == dst);
        if dup {
            self.violations
                .push(ViolationKind::DuplicateEdge { src: self.src, dst });
            return;
        }
        if self.over_budget(&msg) {
            return;
        }
        self.targeted.push((self.src, dst, msg));
    }

    /// Same message on every incident edge. Copies reaching sleeping
    /// neighbours are dropped silently (fire-and-forget).
    pub fn broadcast(&mut self, msg: M) {
        if self.broadcast.is_some() || self.targeted.len() > self.first_targeted {
            let dst = self.g.neighbors(self.src).first().copied().unwrap_or(self.src);
            self.violations
                .push(ViolationKind::DuplicateEdge { src: self.src, dst });
            return;
        }
        if self.over_budget(&msg) {
            return;
        }
        *self.broadcast = Some(msg);
    }
}

/// Messages delivered to one node in one round: point-to-point messages
/// first, then broadcasts, each group in increasing sender id.
pub struct Inbox<'a, M> {
    targeted: &'a [(NodeId, NodeId, M)],
    broadcasts: &'a [(NodeId, M)],
}

impl<'a, M: Copy> Inbox<'a, M> {
    pub fn iter(&self) -> impl Iterator<Item = (NodeId, M)> + '_ {
        let direct = self.targeted.iter().map(|&(s, _, m)| (s, m));
        direct.chain(self.broadcasts.iter().copied())
    }
}

const IDX_BITS: u32 = 24;
const IDX_MASK: u64 = (1 << IDX_BITS) - 1;

pub struct Simulator<'g> {
    g: &'g Graph,
    seed: u64,
    config: EngineConfig,
    budget: u32,
    clock: u64,
    ledger: EnergyLedger,
    violations: Vec<Violation>,
    messages: MessageStats,
    awake_sets: Option<Vec<(u64, Vec<NodeId>)>>,
    awake_stamp: Vec<u64>,
    /// `round << 24 | index` into that round's broadcast list, per sender
    bcast_at: Vec<u64>,
    /// stage counter, and the stage each node last took part in
    stage: u64,
    member: Vec<u64>,
    /// position of a participant in the current stage's induced adjacency
    local_pos: Vec<u32>,
    /// index of a node in the current round's awake list
    awake_pos: Vec<u32>,
}

/// Adjacency induced by one stage's participants.
struct Induced {
    offsets: Vec<usize>,
    targets: Vec<NodeId>,
}

impl Induced {
    fn neighbors<'a>(&'a self, v: NodeId, pos: &[u32]) -> &'a [NodeId] {
        let i = pos[v as usize] as usize;
        &self.targets[self.offsets[i]..self.offsets[i + 1]]
    }
}

impl<'g> Simulator<'g> {
    /// Panics if the graph has more than 2^24 nodes or `max_rounds` exceeds 2^40.
    pub fn new(g: &'g Graph, seed: u64, config: EngineConfig) -> Self {
        let n = g.n();
        assert!(n as u64 <= 1 << IDX_BITS, "at most 2^24 nodes");
        assert!(config.max_rounds < 1 << (64 - IDX_BITS), "max_rounds below 2^40");
        Simulator {
            g,
            seed,
            budget: config.budget_bits(n),
            awake_sets: config.record_awake_sets.then(Vec::new),
            config,
            clock: 0,
            ledger: EnergyLedger::new(n),
            violations: Vec::new(),
            messages: MessageStats::default(),
            awake_stamp: vec![0; n],
            bcast_at: vec![0; n],
            stage: 0,
            member: vec![0; n],
            local_pos: vec![0; n],
            awake_pos: vec![0; n],
        }
    }

    fn induced(&mut self, members: &[NodeId], stage: u64) -> Induced {
        let mut offsets = Vec::with_capacity(members.len() + 1);
        let mut targets = Vec::new();
        offsets.push(0);
        for (i, &v) in members.iter().enumerate() {
            self.local_pos[v as usize] = i as u32;
            targets.extend(self.g.neighbors(v).iter().copied().filter(|&u| self.member[u as usize] == stage));
            offsets.push(targets.len());
        }
        Induced { offsets, targets }
    }

    pub fn graph(&self) -> &'g Graph {
        self.g
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn budget_bits(&self) -> u32 {
        self.budget
    }

    /// Rounds elapsed so far.
    pub fn clock(&self) -> u64 {
        self.clock
    }

    pub fn ledger(&self) -> &EnergyLedger {
        &self.ledger
    }

    pub fn messages(&self) -> &MessageStats {
        &self.messages
    }

    pub fn violations(&self) -> &[Violation] {
        &self.violations
    }

    /// Advances the clock over rounds in which nobody is awake.
    pub fn idle(&mut self, rounds: u64) -> Result<(), EngineError> {
        self.advance(rounds)
    }

    fn advance(&mut self, rounds: u64) -> Result<(), EngineError> {
        self.clock += rounds;
        self.ledger.total_rounds = self.clock;
        if self.clock > self.config.max_rounds {
            return Err(EngineError::RoundLimit(self.config.max_rounds));
        }
        Ok(())
    }

    fn ctx(&self, round: u64) -> Ctx {
        Ctx {
            round,
            global_round: self.clock + round,
            seed: self.seed,
            budget_bits: self.budget,
            n: self.g.n(),
        }
    }

    fn record(&mut self, round: u64, kinds: &mut Vec<ViolationKind>) -> Result<(), EngineError> {
        for kind in kinds.drain(..) {
            let v = Violation { round, kind };
            self.violations.push(v.clone());
            if self.config.mode == ViolationMode::Abort {
                return Err(EngineError::Aborted(v));
            }
        }
        Ok(())
    }

    /// Runs one stage on every node.
    pub fn run_all<P: Protocol>(&mut self, p: &mut P) -> Result<u64, EngineError> {
        let n = self.g.n() as NodeId;
        self.run(p, 0..n)
    }

    /// Runs one stage with the given participants; everyone else sleeps
    /// throughout. Returns the number of rounds the stage occupied.
    pub fn run<P, I>(&mut self, p: &mut P, participants: I) -> Result<u64, EngineError>
    where
        P: Protocol,
        I: IntoIterator<Item = NodeId>,
    {
        let fixed = p.duration();
        let mut calendar: BTreeMap<u64, Vec<NodeId>> = BTreeMap::new();
        let mut pending = Vec::new();
        let ctx0 = self.ctx(0);
        self.stage += 1;
        let stage = self.stage;
        let mut members: Vec<NodeId> = Vec::new();
        for v in participants {
            if self.member[v as usize] == stage {
                continue;
            }
            self.member[v as usize] = stage;
            members.push(v);
            match p.init(v, &ctx0) {
                Wake::At(r) if r >= 1 && fixed.map_or(true, |d| r <= d) => {
                    calendar.entry(r).or_default().push(v)
                }
                Wake::At(r) => pending.push(ViolationKind::BadWake { node: v, requested: r }),
                Wake::Never => {}
            }
        }
        self.record(self.clock, &mut pending)?;
        // broadcasts can only come from participants, so receivers scan
        // their neighbours inside the stage
        let local = (members.len() < self.g.n()).then(|| self.induced(&members, stage));

        let mut bcast_msg: Vec<P::Msg> = Vec::new();
        let mut heard: Vec<(NodeId, P::Msg)> = Vec::new();
        let mut targeted: Vec<(NodeId, NodeId, P::Msg)> = Vec::new();
        let mut bcast_src: Vec<NodeId> = Vec::new();
        let mut pushed: Vec<(NodeId, P::Msg)> = Vec::new();
        let mut push_off: Vec<usize> = Vec::new();
        let mut fill: Vec<usize> = Vec::new();
        let mut last_round = 0u64;

        while let Some((round, mut awake)) = calendar.pop_first() {
            awake.sort_unstable();
            let ctx = self.ctx(round);
            let global = ctx.global_round;
            if global > self.config.max_rounds {
                return Err(EngineError::RoundLimit(self.config.max_rounds));
            }
            last_round = round;
            let mut scan = 0u64;
            for (j, &v) in awake.iter().enumerate() {
                self.awake_stamp[v as usize] = global;
                self.awake_pos[v as usize] = j as u32;
                self.ledger.awake[v as usize] += 1;
                scan += self.g.degree(v) as u64;
            }
            if let Some(log) = self.awake_sets.as_mut() {
                log.push((global, awake.clone()));
            }

            // send
            targeted.clear();
            bcast_msg.clear();
            bcast_src.clear();
            let mut copies = 0u64;
            for &v in &awake {
                let mut slot = None;
                let first = targeted.len();
                {
                    let mut out = Outbox {
                        src: v,
                        g: self.g,
                        budget: self.budget,
                        targeted: &mut targeted,
                        first_targeted: first,
                        broadcast: &mut slot,
                        violations: &mut pending,
                    };
                    p.send(v, &ctx, &mut out);
                }
                if let Some(m) = slot {
                    self.bcast_at[v as usize] = global << IDX_BITS | bcast_msg.len() as u64;
                    bcast_msg.push(m);
                    bcast_src.push(v);
                    copies += self.g.degree(v) as u64;
                }
            }
            self.record(global, &mut pending)?;

            // deliver
            targeted.retain(|&(_, dst, _)| {
                let ok = self.awake_stamp[dst as usize] == global;
                if !ok {
                    self.messages.unintended_drops += 1;
                }
                ok
            });
            self.messages.delivered += targeted.len() as u64;
            targeted.sort_by_key(|&(_, dst, _)| dst);

            // few broadcasts are pushed to awake neighbours, many are pulled
            // by the receivers
            let push = !bcast_msg.is_empty() && 4 * copies < scan;
            if push {
                // counting sort by receiver, senders stay in increasing order
                push_off.clear();
                push_off.resize(awake.len() + 1, 0);
                for &u in &bcast_src {
                    for &w in self.g.neighbors(u) {
                        if self.awake_stamp[w as usize] == global {
                            push_off[self.awake_pos[w as usize] as usize + 1] += 1;
                        }
                    }
                }
                for j in 0..awake.len() {
                    push_off[j + 1] += push_off[j];
                }
                let total = push_off[awake.len()];
                pushed.clear();
                pushed.resize(total, (0, bcast_msg[0]));
                fill.clear();
                fill.extend_from_slice(&push_off[..awake.len()]);
                for (&u, &m) in bcast_src.iter().zip(&bcast_msg) {
                    for &w in self.g.neighbors(u) {
                        if self.awake_stamp[w as usize] == global {
                            let j = self.awake_pos[w as usize] as usize;
                            pushed[fill[j]] = (u, m);
                            fill[j] += 1;
                        }
                    }
                }
            }

            // receive; copies nobody picked up were sent to sleeping neighbours
            let mut picked = 0u64;
            let mut cursor = 0usize;
            for (j, &v) in awake.iter().enumerate() {
                while cursor < targeted.len() && targeted[cursor].1 < v {
                    cursor += 1;
                }
                let start = cursor;
                while cursor < targeted.len() && targeted[cursor].1 == v {
                    cursor += 1;
                }
                heard.clear();
                if push {
                    heard.extend_from_slice(&pushed[push_off[j]..push_off[j + 1]]);
                    picked += heard.len() as u64;
                } else if !bcast_msg.is_empty() {
                    let nbrs = match &local {
                        Some(l) => l.neighbors(v, &self.local_pos),
                        None => self.g.neighbors(v),
                    };
                    for &u in nbrs {
                        let at = self.bcast_at[u as usize];
                        if at >> IDX_BITS == global {
                            heard.push((u, bcast_msg[(at & IDX_MASK) as usize]));
                        }
                    }
                    picked += heard.len() as u64;
                }
                let inbox = Inbox { targeted: &targeted[start..cursor], broadcasts: &heard };
                match p.receive(v, &ctx, &inbox) {
                    Wake::At(r) if r > round && fixed.map_or(true, |d| r <= d) => {
                        calendar.entry(r).or_default().push(v)
                    }
                    Wake::At(r) => pending.push(ViolationKind::BadWake { node: v, requested: r }),
                    Wake::Never => {}
                }
            }
            self.messages.delivered += picked;
            self.messages.declared_drops += copies - picked;
            self.record(global, &mut pending)?;
        }

        let used = fixed.unwrap_or(last_round);
        self.advance(used)?;
        Ok(used)
    }

    pub fn finish(self) -> Transcript {
        Transcript {
            ledger: self.ledger,
            violations: self.violations,
            messages: self.messages,
            awake_sets: self.awake_sets,
        }
    }
}

/// Runs a single protocol on all nodes as a complete execution.
pub fn run_simulation<P: Protocol>(
    g: &Graph,
    protocol: &mut P,
    seed: u64,
    config: EngineConfig,
) -> Result<Transcript, EngineError> {
    let mut sim = Simulator::new(g, seed, config);
    sim.run_all(protocol)?;
    Ok(sim.finish())
}

impl Payload for bool {
    fn bits(&self) -> u32 {
        1
    }
}

impl Payload for () {
    fn bits(&self) -> u32 {
        1
    }
}

/// Raw bit string of a given width, for tests and simple protocols.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Bits {
    pub value: u64,
    pub width: u32,
}

impl Payload for Bits {
    fn bits(&self) -> u32 {
        self.width
    }
}

/// Number of bits needed to encode values in `0..=max`.
pub fn bits_for(max: u64) -> u32 {
    (u64::BITS - max.leading_zeros()).max(1)
}

/// Up to `K` fixed-width fields; `bits` is the sum of the field widths.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Words<const K: usize> {
    pub w: [u64; K],
    pub bits: u32,
}

impl<const K: usize> Payload for Words<K> {
    fn bits(&self) -> u32 {
        self.bits
    }
}

struct Exchange<M> {
    out: Vec<(NodeId, NodeId, M)>,
    first: Vec<(NodeId, usize)>,
    got: Vec<(NodeId, NodeId, M)>,
}

impl<M: Payload> Protocol for Exchange<M> {
    type Msg = M;
    fn init(&mut self, _: NodeId, _: &Ctx) -> Wake {
        Wake::At(1)
    }
    fn send(&mut self, v: NodeId, _: &Ctx, out: &mut Outbox<'_, M>) {
        if let Ok(pos) = self.first.binary_search_by_key(&v, |&(s, _)| s) {
            let mut i = self.first[pos].1;
            while i < self.out.len() && self.out[i].0 == v {
                out.send(self.out[i].1, self.out[i].2);
                i += 1;
            }
        }
    }
    fn receive(&mut self, v: NodeId, _: &Ctx, inbox: &Inbox<'_, M>) -> Wake {
        for (s, m) in inbox.iter() {
            self.got.push((v, s, m));
        }
        Wake::Never
    }
    fn duration(&self) -> Option<u64> {
        Some(1)
    }
}

/// One round in which each `(src, dst, msg)` is sent point-to-point; every
/// sender and receiver is awake. Returns the delivered `(dst, src, msg)`
/// triples sorted by receiver.
pub fn exchange<M: Payload>(
    sim: &mut Simulator<'_>,
    sends: Vec<(NodeId, NodeId, M)>,
) -> Result<Vec<(NodeId, NodeId, M)>, EngineError> {
    exchange_with(sim, sends, &[])
}

/// Like [`exchange`], with `listeners` awake as well because they cannot
/// know in advance whether anything will arrive.
pub fn exchange_with<M: Payload>(
    sim: &mut Simulator<'_>,
    mut sends: Vec<(NodeId, NodeId, M)>,
    listeners: &[NodeId],
) -> Result<Vec<(NodeId, NodeId, M)>, EngineError> {
    sends.sort_by_key(|&(s, d, _)| (s, d));
    let mut first = Vec::new();
    for (i, &(s, _, _)) in sends.iter().enumerate() {
        if i == 0 || sends[i - 1].0 != s {
            first.push((s, i));
        }
    }
    let mut parts: Vec<NodeId> = sends.iter().flat_map(|&(s, d, _)| [s, d]).collect();
    parts.extend_from_slice(listeners);
    parts.sort_unstable();
    parts.dedup();
    let mut p = Exchange { out: sends, first, got: Vec::new() };
    sim.run(&mut p, parts)?;
    Ok(p.got)
}

struct Shout<'a, M, F> {
    msg: F,
    got: &'a mut Vec<Vec<(NodeId, M)>>,
    pos: Vec<(NodeId, usize)>,
}

impl<M: Payload, F: Fn(NodeId) -> Option<M>> Protocol for Shout<'_, M, F> {
    type Msg = M;
    fn init(&mut self, _: NodeId, _: &Ctx) -> Wake {
        Wake::At(1)
    }
    fn send(&mut self, v: NodeId, _: &Ctx, out: &mut Outbox<'_, M>) {
        if let Some(m) = (self.msg)(v) {
            out.broadcast(m);
        }
    }
    fn receive(&mut self, v: NodeId, _: &Ctx, inbox: &Inbox<'_, M>) -> Wake {
        let i = self.pos[self.pos.binary_search_by_key(&v, |&(u, _)| u).unwrap()].1;
        self.got[i].extend(inbox.iter());
        Wake::Never
    }
    fn duration(&self) -> Option<u64> {
        Some(1)
    }
}

/// One round in which every node of `nodes` is awake and broadcasts
/// `msg(v)` if it is `Some`. Returns, for each node in the order given, the
/// messages heard from awake neighbours in `nodes`.
pub fn exchange_broadcast<M, F>(
    sim: &mut Simulator<'_>,
    nodes: &[NodeId],
    msg: F,
) -> Result<Vec<Vec<(NodeId, M)>>, EngineError>
where
    M: Payload,
    F: Fn(NodeId) -> Option<M>,
{
    let mut got = vec![Vec::new(); nodes.len()];
    let mut pos: Vec<(NodeId, usize)> = nodes.iter().copied().zip(0..).collect();
    pos.sort_unstable();
    let mut p = Shout { msg, got: &mut got, pos };
    sim.run(&mut p, nodes.iter().copied())?;
    Ok(got)
}
