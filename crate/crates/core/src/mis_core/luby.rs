//! Luby's algorithm with degree-based mark resolution, all nodes awake.

use crate::engine::{bits_for, Ctx, EngineError, Inbox, Outbox, Protocol, Simulator, Wake, Words};
use crate::graph::{NodeId, NodeSet, Roster};
use crate::rng::coin;

/// Result of a randomized MIS stage on a set of participants.
#[derive(Clone, Debug)]
pub struct MisOutcome {
    pub in_mis: NodeSet,
    /// Participants with a neighbour in `in_mis`.
    pub covered: NodeSet,
    /// Participants that are neither.
    pub remaining: NodeSet,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Status {
    Active,
    Joined,
    Covered,
}

struct Luby<'a> {
    roster: &'a Roster,
    rounds: u64,
    stream: u64,
    degw: u32,
    status: Vec<Status>,
    deg: Vec<u32>,
    marked: Vec<bool>,
    just_covered: Vec<bool>,
}

impl Luby<'_> {
    fn phase(&self, round: u64) -> (u64, u64) {
        // round 1 is the handshake; afterwards three sub-rounds per round
        ((round - 2) / 3 + 1, (round - 2) % 3 + 1)
    }
}

impl Protocol for Luby<'_> {
    type Msg = Words<1>;

    fn init(&mut self, _: NodeId, _: &Ctx) -> Wake {
        Wake::At(1)
    }

    fn send(&mut self, v: NodeId, ctx: &Ctx, out: &mut Outbox<'_, Words<1>>) {
        let i = self.roster.at(v);
        if ctx.round == 1 {
            out.broadcast(Words { w: [0], bits: 1 });
            return;
        }
        let (t, sub) = self.phase(ctx.round);
        match sub {
            1 if self.status[i] == Status::Active => {
                let d = self.deg[i];
                let p = if d == 0 { 1.0 } else { 1.0 / (2.0 * d as f64) };
                self.marked[i] = coin(ctx.seed, self.stream, ((v as u64) << 32) | t, p);
                if self.marked[i] {
                    out.broadcast(Words { w: [d as u64], bits: self.degw });
                }
            }
            2 if self.marked[i] => out.broadcast(Words { w: [1], bits: 1 }),
            3 if self.just_covered[i] => out.broadcast(Words { w: [1], bits: 1 }),
            _ => {}
        }
    }

    fn receive(&mut self, v: NodeId, ctx: &Ctx, inbox: &Inbox<'_, Words<1>>) -> Wake {
        let i = self.roster.at(v);
        let next = Wake::At(ctx.round + 1);
        if ctx.round == 1 {
            self.deg[i] = inbox.iter().filter(|&(u, _)| self.roster.contains(u)).count() as u32;
            return next;
        }
        let (_, sub) = self.phase(ctx.round);
        match sub {
            1 => {
                if self.marked[i] {
                    let d = self.deg[i] as u64;
                    // the endpoint with the lower degree (then lower id) gives way
                    let beaten = inbox
                        .iter()
                        .filter(|&(u, _)| self.roster.contains(u))
                        .any(|(u, m)| m.w[0] > d || (m.w[0] == d && u > v));
                    if beaten {
                        self.marked[i] = false;
                    }
                }
                next
            }
            2 => {
                if self.marked[i] {
                    self.marked[i] = false;
                    self.status[i] = Status::Joined;
                    return Wake::Never;
                }
                if inbox.iter().any(|(u, _)| self.roster.contains(u)) {
                    self.status[i] = Status::Covered;
                    self.just_covered[i] = true;
                }
                next
            }
            _ => {
                if self.just_covered[i] {
                    self.just_covered[i] = false;
                    return Wake::Never;
                }
                let gone = inbox.iter().filter(|&(u, _)| self.roster.contains(u)).count() as u32;
                self.deg[i] -= gone;
                if ctx.round >= 1 + 3 * self.rounds {
                    Wake::Never
                } else {
                    next
                }
            }
        }
    }

    fn duration(&self) -> Option<u64> {
        Some(1 + 3 * self.rounds)
    }
}

/// Runs `rounds` Luby rounds on the subgraph induced by `participants`.
/// Every participant stays awake until it joins or is covered.
pub fn run_luby(
    sim: &mut Simulator<'_>,
    participants: &[NodeId],
    rounds: u64,
    stream: u64,
) -> Result<MisOutcome, EngineError> {
    let n = sim.graph().n();
    let roster = Roster::new(n, participants.iter().copied());
    let k = roster.len();
    let mut p = Luby {
        roster: &roster,
        rounds,
        stream,
        degw: bits_for(n as u64),
        status: vec![Status::Active; k],
        deg: vec![0; k],
        marked: vec![false; k],
        just_covered: vec![false; k],
    };
    if rounds > 0 {
        sim.run(&mut p, roster.nodes().iter().copied())?;
    }
    let mut out = MisOutcome {
        in_mis: NodeSet::new(n),
        covered: NodeSet::new(n),
        remaining: NodeSet::new(n),
    };
    for (i, &v) in roster.nodes().iter().enumerate() {
        match p.status[i] {
            Status::Joined => out.in_mis.insert(v),
            Status::Covered => out.covered.insert(v),
            Status::Active => out.remaining.insert(v),
        };
    }
    Ok(out)
}
