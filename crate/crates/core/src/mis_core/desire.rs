//! Desire-level MIS: every node marks itself with its current desire level
//! `p = 2^-j`, halves it when the summed levels of its active neighbours
//! reach 2 and doubles it (up to 1/2) otherwise. Up to 64 independent
//! executions run side by side, one bit per execution in every message.

use crate::engine::{bits_for, Ctx, EngineError, Inbox, Outbox, Protocol, Simulator, Wake, Words};
use crate::graph::{NodeId, NodeSet, Roster};
use crate::mis_core::luby::MisOutcome;
use crate::rng::coin;

const GONE: u8 = 0;

fn level_p(l: u8) -> f64 {
    f64::from_bits((1023u64.saturating_sub(l as u64)) << 52)
}

/// `level_p` by table, with gone neighbours weighing nothing.
static WEIGHT: [f64; 256] = {
    let mut t = [0.0; 256];
    let mut l = 1;
    while l < 256 {
        t[l] = f64::from_bits((1023 - l as u64) << 52);
        l += 1;
    }
    t
};

struct Desire<'a> {
    roster: &'a Roster,
    k: usize,
    rounds: u64,
    stream: u64,
    verdict: bool,
    all: u64,
    /// per node, executions still active
    active: Vec<u64>,
    joined: Vec<u64>,
    marked: Vec<u64>,
    nbr_marked: Vec<u64>,
    halved: Vec<u64>,
    /// own level j per execution, `k` entries per node
    level: Vec<u8>,
    /// participating neighbours per node, `slots[off[i]..off[i+1]]`
    off: Vec<usize>,
    slots: Vec<NodeId>,
    /// neighbour level per slot and execution (GONE once inactive)
    nbr_level: Vec<u8>,
    success: Vec<u64>,
}

impl Desire<'_> {
    fn last_round(&self) -> u64 {
        1 + 3 * self.rounds
    }

    fn lvl(&mut self, i: usize, e: usize) -> &mut u8 {
        &mut self.level[i * self.k + e]
    }
}

impl Protocol for Desire<'_> {
    type Msg = Words<1>;

    fn init(&mut self, _: NodeId, _: &Ctx) -> Wake {
        Wake::At(1)
    }

    fn send(&mut self, v: NodeId, ctx: &Ctx, out: &mut Outbox<'_, Words<1>>) {
        let i = self.roster.at(v);
        let k = self.k as u32;
        let r = ctx.round;
        if r == 1 {
            out.broadcast(Words { w: [0], bits: 1 });
            return;
        }
        if r > self.last_round() {
            out.broadcast(Words { w: [self.joined[i]], bits: k });
            return;
        }
        let t = (r - 2) / 3 + 1;
        match (r - 2) % 3 {
            0 => {
                let mut m = 0u64;
                for e in 0..self.k {
                    if self.active[i] >> e & 1 == 1 {
                        let p = level_p(*self.lvl(i, e));
                        let idx = ((v as u64) << 32) | (t << 6) | e as u64;
                        if coin(ctx.seed, self.stream, idx, p) {
                            m |= 1 << e;
                        }
                    }
                }
                self.marked[i] = m;
                if m != 0 {
                    out.broadcast(Words { w: [m], bits: k });
                }
            }
            1 => {
                let join = self.marked[i] & !self.nbr_marked[i];
                self.joined[i] |= join;
                if join != 0 {
                    out.broadcast(Words { w: [join], bits: k });
                }
            }
            _ if self.k == 1 => {
                // a single execution sends its level outright
                let l = if self.active[i] == 1 { self.level[i] } else { GONE };
                out.broadcast(Words { w: [l as u64], bits: bits_for(l as u64) });
            }
            _ => {
                out.broadcast(Words { w: [self.active[i] | self.halved[i] << k], bits: 2 * k });
            }
        }
    }

    fn receive(&mut self, v: NodeId, ctx: &Ctx, inbox: &Inbox<'_, Words<1>>) -> Wake {
        let i = self.roster.at(v);
        let k = self.k;
        let r = ctx.round;
        if r == 1 {
            // only participants are awake, and broadcasts arrive by sender id
            if k > 1 {
                let s: Vec<NodeId> = inbox.iter().map(|(u, _)| u).collect();
                self.slots_init(i, s);
            }
            return Wake::At(2);
        }
        if r > self.last_round() {
            let mut heard = 0u64;
            for (_, m) in inbox.iter() {
                heard |= m.w[0];
            }
            let mine = self.joined[i];
            self.success[i] = (mine & !heard) | (!mine & heard & self.all);
            return Wake::Never;
        }
        match (r - 2) % 3 {
            0 => {
                let mut nm = 0u64;
                for (_, m) in inbox.iter() {
                    nm |= m.w[0];
                }
                self.nbr_marked[i] = nm;
                Wake::At(r + 1)
            }
            1 => {
                let mut nj = 0u64;
                for (_, m) in inbox.iter() {
                    nj |= m.w[0];
                }
                // joined executions and covered ones both stop being active
                self.active[i] &= !(self.joined[i] | nj);
                Wake::At(r + 1)
            }
            _ => {
                let mut sums = [0.0f64; 32];
                if k == 1 {
                    for (_, m) in inbox.iter() {
                        sums[0] += WEIGHT[m.w[0] as usize];
                    }
                } else {
                    let (a, b) = (self.off[i], self.off[i + 1]);
                    // senders come in increasing id, like the slots
                    let mut s = a;
                    for (u, m) in inbox.iter() {
                        while s < b && self.slots[s] < u {
                            s += 1;
                        }
                        if s == b || self.slots[s] != u {
                            continue;
                        }
                        for (e, sum) in sums.iter_mut().enumerate().take(k) {
                            let l = &mut self.nbr_level[s * k + e];
                            if m.w[0] >> e & 1 == 0 {
                                *l = GONE;
                            } else if m.w[0] >> (k + e) & 1 == 1 {
                                *l = l.saturating_add(1);
                            } else if *l != GONE {
                                *l = (*l - 1).max(1);
                            }
                            *sum += WEIGHT[*l as usize];
                        }
                    }
                }
                let mut halved = 0u64;
                for (e, &d) in sums.iter().enumerate().take(k) {
                    let l = self.lvl(i, e);
                    if d >= 2.0 {
                        *l = l.saturating_add(1);
                        halved |= 1 << e;
                    } else {
                        *l = (*l - 1).max(1);
                    }
                }
                self.halved[i] = halved;
                if r >= self.last_round() || self.active[i] == 0 {
                    // the announcement above already told the neighbours
                    if self.verdict {
                        Wake::At(self.last_round() + 1)
                    } else {
                        Wake::Never
                    }
                } else {
                    Wake::At(r + 1)
                }
            }
        }
    }

    fn duration(&self) -> Option<u64> {
        Some(self.last_round() + self.verdict as u64)
    }
}

impl Desire<'_> {
    fn slots_init(&mut self, i: usize, s: Vec<NodeId>) {
        // the handshake round visits nodes in roster order, so slots are appended
        debug_assert_eq!(self.off.len(), i + 1);
        self.slots.extend_from_slice(&s);
        self.nbr_level.extend(std::iter::repeat(1u8).take(s.len() * self.k));
        self.off.push(self.slots.len());
    }
}

/// Outcome of `k` packed executions.
#[derive(Clone, Debug)]
pub struct PackedOutcome {
    pub executions: Vec<MisOutcome>,
    /// Per participant (roster order), bit `e` set iff the node's local
    /// success condition holds for execution `e`.
    pub success: Vec<u64>,
    pub roster: Roster,
}

fn run_desire(
    sim: &mut Simulator<'_>,
    participants: &[NodeId],
    k: usize,
    rounds: u64,
    stream: u64,
    verdict: bool,
) -> Result<PackedOutcome, EngineError> {
    assert!((1..=32).contains(&k), "between 1 and 32 executions");
    let g = sim.graph();
    let n = g.n();
    let roster = Roster::new(n, participants.iter().copied());
    let m = roster.len();
    let all = if k == 64 { u64::MAX } else { (1u64 << k) - 1 };
    let mut p = Desire {
        roster: &roster,
        k,
        rounds,
        stream,
        verdict,
        all,
        active: vec![all; m],
        joined: vec![0; m],
        marked: vec![0; m],
        nbr_marked: vec![0; m],
        halved: vec![0; m],
        level: vec![1; m * k],
        off: vec![0],
        slots: Vec::new(),
        nbr_level: Vec::new(),
        success: vec![0; m],
    };
    if m > 0 {
        sim.run(&mut p, roster.nodes().iter().copied())?;
    }
    let executions = (0..k)
        .map(|e| {
            let mut o = MisOutcome {
                in_mis: NodeSet::new(n),
                covered: NodeSet::new(n),
                remaining: NodeSet::new(n),
            };
            for (i, &v) in roster.nodes().iter().enumerate() {
                if p.joined[i] >> e & 1 == 1 {
                    o.in_mis.insert(v);
                } else if p.active[i] >> e & 1 == 0 {
                    o.covered.insert(v);
                } else {
                    o.remaining.insert(v);
                }
            }
            o
        })
        .collect();
    let success = p.success;
    Ok(PackedOutcome { executions, success, roster })
}

/// One execution for `rounds` rounds on the subgraph induced by
/// `participants`; every participant is awake until it decides.
pub fn desire_level_mis(
    sim: &mut Simulator<'_>,
    participants: &[NodeId],
    rounds: u64,
    stream: u64,
) -> Result<MisOutcome, EngineError> {
    let mut o = run_desire(sim, participants, 1, rounds, stream, false)?;
    Ok(o.executions.pop().unwrap())
}

/// `k` independent executions packed into `k`-bit messages, followed by one
/// round in which every node evaluates its success condition per execution.
pub fn packed_parallel_mis(
    sim: &mut Simulator<'_>,
    participants: &[NodeId],
    k: usize,
    rounds: u64,
    stream: u64,
) -> Result<PackedOutcome, EngineError> {
    run_desire(sim, participants, k, rounds, stream, true)
}
