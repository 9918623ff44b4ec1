//! Shattering: a short desire-level run followed by clustering of the
//! undecided nodes into low-diameter clusters with spanning trees.

use std::collections::BTreeMap;

use crate::engine::{log2_ceil, Ctx, Inbox, Outbox, Protocol, Simulator, Wake, Words};
use crate::graph::{NodeId, NodeSet, Roster};
use crate::mis_core::desire::desire_level_mis;
use crate::mis_core::luby::MisOutcome;
use crate::trees::{elect_root_and_build_tree, ClusterForest, TreeError};

const NONE: NodeId = NodeId::MAX;

/// One round of minimum-id ball growing among the still unclustered nodes:
/// `r` rounds of min flooding, then `r` rounds in which every local minimum
/// claims its unclustered `r`-ball breadth-first.
struct Balls<'a> {
    roster: &'a Roster,
    r: u64,
    idw: u32,
    min: Vec<NodeId>,
    center: Vec<NodeId>,
    claimed_at: Vec<u64>,
}

impl Protocol for Balls<'_> {
    type Msg = Words<1>;

    fn init(&mut self, v: NodeId, _: &Ctx) -> Wake {
        self.min[self.roster.at(v)] = v;
        Wake::At(1)
    }

    fn send(&mut self, v: NodeId, ctx: &Ctx, out: &mut Outbox<'_, Words<1>>) {
        let i = self.roster.at(v);
        if ctx.round <= self.r {
            out.broadcast(Words { w: [self.min[i] as u64], bits: self.idw });
        } else if self.center[i] != NONE && self.claimed_at[i] + 1 == ctx.round {
            out.broadcast(Words { w: [self.center[i] as u64], bits: self.idw });
        }
    }

    fn receive(&mut self, v: NodeId, ctx: &Ctx, inbox: &Inbox<'_, Words<1>>) -> Wake {
        let i = self.roster.at(v);
        let heard = inbox
            .iter()
            .filter(|&(u, _)| self.roster.contains(u))
            .map(|(_, m)| m.w[0] as NodeId)
            .min();
        if ctx.round <= self.r {
            if let Some(m) = heard {
                self.min[i] = self.min[i].min(m);
            }
            if ctx.round == self.r && self.min[i] == v {
                self.center[i] = v;
                self.claimed_at[i] = self.r;
            }
        } else if self.center[i] == NONE {
            if let Some(c) = heard {
                self.center[i] = c;
                self.claimed_at[i] = ctx.round;
            }
        }
        if ctx.round < 2 * self.r {
            Wake::At(ctx.round + 1)
        } else {
            Wake::Never
        }
    }

    fn duration(&self) -> Option<u64> {
        Some(2 * self.r)
    }
}

#[derive(Clone, Debug)]
pub struct Shattered {
    pub mis: MisOutcome,
    /// Spanning trees over the undecided nodes.
    pub forest: ClusterForest,
    /// Connected components of the undecided nodes.
    pub components: Vec<Vec<NodeId>>,
    pub ball_iterations: u32,
}

/// Runs `rounds` desire-level rounds on `participants`, then groups the
/// undecided nodes into clusters of radius at most `radius` around their
/// centers and builds a minimum-id rooted BFS tree in every cluster.
pub fn shatter_and_cluster(
    sim: &mut Simulator<'_>,
    participants: &[NodeId],
    rounds: u64,
    radius: u32,
    d_bound: u32,
    stream: u64,
) -> Result<Shattered, TreeError> {
    let mis = desire_level_mis(sim, participants, rounds, stream)?;
    cluster_remaining(sim, mis, radius, d_bound)
}

/// The clustering half of [`shatter_and_cluster`], applied to the nodes an
/// earlier MIS stage left undecided.
pub fn cluster_remaining(
    sim: &mut Simulator<'_>,
    mis: MisOutcome,
    radius: u32,
    d_bound: u32,
) -> Result<Shattered, TreeError> {
    let g = sim.graph();
    let n = g.n();
    let rest: Vec<NodeId> = mis.remaining.iter().collect();
    let (labels, ball_iterations) = grow_balls(sim, &rest, radius)?;
    let forest = if rest.is_empty() {
        ClusterForest::singletons(n, &[], d_bound)
    } else {
        elect_root_and_build_tree(sim, &labels, 2 * radius, d_bound)?
    };
    let components = g.components_within(&NodeSet::from_iter(n, rest.iter().copied()));
    Ok(Shattered { mis, forest, components, ball_iterations })
}

/// Iterated ball growing until every node in `nodes` has a center.
pub fn grow_balls(
    sim: &mut Simulator<'_>,
    nodes: &[NodeId],
    radius: u32,
) -> Result<(BTreeMap<NodeId, NodeId>, u32), TreeError> {
    let n = sim.graph().n();
    let idw = log2_ceil(n);
    let mut labels = BTreeMap::new();
    let mut left: Vec<NodeId> = nodes.to_vec();
    let mut iterations = 0;
    while !left.is_empty() {
        iterations += 1;
        let roster = Roster::new(n, left.iter().copied());
        let k = roster.len();
        let mut p = Balls {
            roster: &roster,
            r: radius.max(1) as u64,
            idw,
            min: vec![NONE; k],
            center: vec![NONE; k],
            claimed_at: vec![0; k],
        };
        sim.run(&mut p, roster.nodes().iter().copied())?;
        left.clear();
        for (i, &v) in roster.nodes().iter().enumerate() {
            if p.center[i] == NONE {
                left.push(v);
            } else {
                labels.insert(v, p.center[i]);
            }
        }
    }
    Ok((labels, iterations))
}
