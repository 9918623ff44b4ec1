//! Rooted spanning trees over clusters, with broadcast and convergecast that
//! keep every node awake for at most two rounds, and star merges.
//!
//! A [`ClusterForest`] holds the per-node tree state (parent, depth, cluster
//! id, number of children) of every node taking part in the clustering. The
//! state is what each node knows locally; the operations below only change it
//! through engine stages, so every bit a node learns is paid for in rounds and
//! awake time.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::engine::{
    exchange, log2_ceil, Ctx, EngineError, Inbox, Outbox, Payload, Protocol, Simulator, Wake, Words,
};
use crate::graph::{Graph, NodeId};

pub const NO_PARENT: NodeId = NodeId::MAX;
const ABSENT: u32 = u32::MAX;

#[derive(Debug, Error)]
pub enum TreeError {
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("cluster {0} is not connected")]
    Disconnected(NodeId),
    #[error("tree depth {depth} exceeds bound {bound}")]
    TooDeep { depth: u32, bound: u32 },
    #[error("merge topology is not a union of stars: {0}")]
    NotStar(String),
    #[error("broken tree invariant: {0}")]
    Invariant(String),
}

#[derive(Clone, Debug)]
pub struct ClusterForest {
    members: Vec<NodeId>,
    local: Vec<u32>,
    parent: Vec<NodeId>,
    depth: Vec<u32>,
    cluster: Vec<NodeId>,
    children: Vec<u32>,
    d_bound: u32,
}

/// Global depth cap `c_d · ⌈log₂ n⌉` used to schedule tree operations.
pub fn depth_cap(n: usize, c_d: u32) -> u32 {
    c_d * log2_ceil(n)
}

impl ClusterForest {
    /// Every member is its own singleton cluster.
    pub fn singletons(n: usize, members: &[NodeId], d_bound: u32) -> Self {
        let mut members = members.to_vec();
        members.sort_unstable();
        members.dedup();
        let mut local = vec![ABSENT; n];
        for (i, &v) in members.iter().enumerate() {
            local[v as usize] = i as u32;
        }
        let k = members.len();
        ClusterForest {
            cluster: members.clone(),
            members,
            local,
            parent: vec![NO_PARENT; k],
            depth: vec![0; k],
            children: vec![0; k],
            d_bound,
        }
    }

    /// Forest given by parent pointers (`None` for roots), with depths,
    /// cluster ids and child counts filled in. Meant for fixtures.
    pub fn from_parents(
        n: usize,
        parents: &BTreeMap<NodeId, Option<NodeId>>,
        d_bound: u32,
    ) -> Result<Self, TreeError> {
        let members: Vec<NodeId> = parents.keys().copied().collect();
        let mut f = ClusterForest::singletons(n, &members, d_bound);
        for (i, &v) in members.iter().enumerate() {
            if let Some(p) = parents[&v] {
                if !f.contains(p) {
                    return Err(TreeError::Invariant(format!("parent {p} of {v} missing")));
                }
                f.parent[i] = p;
                let pi = f.index(p);
                f.children[pi] += 1;
            }
        }
        for i in 0..members.len() {
            let (mut x, mut d) = (members[i], 0u32);
            while let Some(p) = f.parent(x) {
                x = p;
                d += 1;
                if d as usize > members.len() {
                    return Err(TreeError::Invariant(format!("cycle through {}", members[i])));
                }
            }
            f.depth[i] = d;
            f.cluster[i] = x;
        }
        Ok(f)
    }

    pub fn members(&self) -> &[NodeId] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, v: NodeId) -> bool {
        self.local.get(v as usize).is_some_and(|&i| i != ABSENT)
    }

    /// Position of `v` in `members()`.
    pub fn index(&self, v: NodeId) -> usize {
        let i = self.local[v as usize];
        debug_assert!(i != ABSENT, "node {v} not in forest");
        i as usize
    }

    pub fn parent(&self, v: NodeId) -> Option<NodeId> {
        let p = self.parent[self.index(v)];
        (p != NO_PARENT).then_some(p)
    }

    pub fn depth(&self, v: NodeId) -> u32 {
        self.depth[self.index(v)]
    }

    pub fn cluster(&self, v: NodeId) -> NodeId {
        self.cluster[self.index(v)]
    }

    pub fn children(&self, v: NodeId) -> u32 {
        self.children[self.index(v)]
    }

    pub fn is_root(&self, v: NodeId) -> bool {
        self.parent[self.index(v)] == NO_PARENT
    }

    pub fn d_bound(&self) -> u32 {
        self.d_bound
    }

    pub fn max_depth(&self) -> u32 {
        self.depth.iter().copied().max().unwrap_or(0)
    }

    pub fn roots(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.members
            .iter()
            .copied()
            .filter(move |&v| self.is_root(v))
    }

    pub fn num_clusters(&self) -> usize {
        self.roots().count()
    }

    /// Members grouped by cluster id.
    pub fn clusters(&self) -> BTreeMap<NodeId, Vec<NodeId>> {
        let mut out: BTreeMap<NodeId, Vec<NodeId>> = BTreeMap::new();
        for &v in &self.members {
            out.entry(self.cluster(v)).or_default().push(v);
        }
        out
    }

    /// Recomputes everything from scratch and compares with the stored state.
    pub fn check_invariants(&self, g: &Graph) -> Result<(), TreeError> {
        let bad = |s: String| Err(TreeError::Invariant(s));
        let mut kids = vec![0u32; self.len()];
        for (i, &v) in self.members.iter().enumerate() {
            let p = self.parent[i];
            if p == NO_PARENT {
                if self.depth[i] != 0 || self.cluster[i] != v {
                    return bad(format!("root {v} has depth {} cluster {}", self.depth[i], self.cluster[i]));
                }
                continue;
            }
            if !self.contains(p) || !g.has_edge(v, p) {
                return bad(format!("parent {p} of {v} is not a forest neighbour"));
            }
            let pi = self.index(p);
            kids[pi] += 1;
            if self.depth[i] != self.depth[pi] + 1 {
                return bad(format!("depth of {v} is {} but parent has {}", self.depth[i], self.depth[pi]));
            }
            if self.cluster[i] != self.cluster[pi] {
                return bad(format!("{v} and parent {p} disagree on cluster"));
            }
        }
        if kids != self.children {
            return bad("children counts out of date".into());
        }
        // walk up from every node: must reach its cluster root within depth steps
        for &v in &self.members {
            let mut x = v;
            let mut steps = 0;
            while let Some(p) = self.parent(x) {
                x = p;
                steps += 1;
                if steps > self.len() {
                    return bad(format!("cycle through {v}"));
                }
            }
            if x != self.cluster(v) {
                return bad(format!("{v} hangs below {x}, not its cluster {}", self.cluster(v)));
            }
        }
        if self.max_depth() > self.d_bound {
            return Err(TreeError::TooDeep { depth: self.max_depth(), bound: self.d_bound });
        }
        Ok(())
    }
}

struct Broadcast<'a, M, R> {
    forest: &'a ClusterForest,
    held: Vec<Option<M>>,
    relay: R,
    duration: u64,
}

impl<M: Payload, R: Fn(NodeId, M) -> M> Protocol for Broadcast<'_, M, R> {
    type Msg = M;

    fn init(&mut self, v: NodeId, _: &Ctx) -> Wake {
        let d = self.forest.depth(v) as u64;
        if d == 0 {
            Wake::At(1)
        } else {
            Wake::At(d)
        }
    }

    fn send(&mut self, v: NodeId, ctx: &Ctx, out: &mut Outbox<'_, M>) {
        let f = self.forest;
        if ctx.round == f.depth(v) as u64 + 1 && f.children(v) > 0 {
            if let Some(m) = self.held[f.index(v)] {
                out.broadcast(m);
            }
        }
    }

    fn receive(&mut self, v: NodeId, ctx: &Ctx, inbox: &Inbox<'_, M>) -> Wake {
        let f = self.forest;
        let d = f.depth(v) as u64;
        if let Some(p) = f.parent(v) {
            if ctx.round == d {
                self.held[f.index(v)] = inbox
                    .iter()
                    .find(|&(s, _)| s == p)
                    .map(|(_, m)| (self.relay)(v, m));
                if f.children(v) > 0 {
                    return Wake::At(d + 1);
                }
            }
        }
        Wake::Never
    }

    fn duration(&self) -> Option<u64> {
        Some(self.duration)
    }
}

/// Sends `payload(root)` from every included cluster root down its tree.
/// Returns what each forest member holds afterwards, indexed like
/// `members()`; members of excluded clusters hold `None`.
///
/// A node at depth `d` is awake in rounds `d` and `d + 1` only (the root just
/// in round 1); the stage takes `d_bound + 1` rounds.
pub fn ldt_broadcast<M, P, I>(
    sim: &mut Simulator<'_>,
    forest: &ClusterForest,
    include: I,
    payload: P,
) -> Result<Vec<Option<M>>, TreeError>
where
    M: Payload,
    P: Fn(NodeId) -> M,
    I: Fn(NodeId) -> bool,
{
    broadcast_relay(sim, forest, include, payload, |_, m| m)
}

/// Like [`ldt_broadcast`], but every non-root node stores and forwards
/// `relay(v, received)` instead of the message it got from its parent.
pub fn broadcast_relay<M, P, I, R>(
    sim: &mut Simulator<'_>,
    forest: &ClusterForest,
    include: I,
    payload: P,
    relay: R,
) -> Result<Vec<Option<M>>, TreeError>
where
    M: Payload,
    P: Fn(NodeId) -> M,
    I: Fn(NodeId) -> bool,
    R: Fn(NodeId, M) -> M,
{
    let mut held = vec![None; forest.len()];
    for r in forest.roots() {
        if include(r) {
            held[forest.index(r)] = Some(payload(r));
        }
    }
    let participants: Vec<NodeId> = forest
        .members()
        .iter()
        .copied()
        .filter(|&v| include(forest.cluster(v)))
        .collect();
    let mut p = Broadcast {
        forest,
        held,
        relay,
        duration: forest.d_bound() as u64 + 1,
    };
    sim.run(&mut p, participants)?;
    Ok(p.held)
}

struct Convergecast<'a, A, C, L> {
    forest: &'a ClusterForest,
    acc: Vec<A>,
    combine: C,
    lift: L,
    d: u64,
}

impl<A: Payload, C: Fn(A, A) -> A, L: Fn(NodeId, A) -> A> Protocol for Convergecast<'_, A, C, L> {
    type Msg = A;

    fn init(&mut self, v: NodeId, _: &Ctx) -> Wake {
        let f = self.forest;
        let dv = f.depth(v) as u64;
        if f.children(v) > 0 {
            Wake::At(self.d - dv)
        } else if !f.is_root(v) {
            Wake::At(self.d - dv + 1)
        } else {
            Wake::Never
        }
    }

    fn send(&mut self, v: NodeId, ctx: &Ctx, out: &mut Outbox<'_, A>) {
        let f = self.forest;
        if let Some(p) = f.parent(v) {
            if ctx.round == self.d - f.depth(v) as u64 + 1 {
                out.send(p, (self.lift)(v, self.acc[f.index(v)]));
            }
        }
    }

    fn receive(&mut self, v: NodeId, ctx: &Ctx, inbox: &Inbox<'_, A>) -> Wake {
        let f = self.forest;
        let dv = f.depth(v) as u64;
        if ctx.round == self.d - dv {
            let i = f.index(v);
            for (s, m) in inbox.iter() {
                if f.contains(s) && f.parent(s) == Some(v) {
                    self.acc[i] = (self.combine)(self.acc[i], m);
                }
            }
            if !f.is_root(v) {
                return Wake::At(self.d - dv + 1);
            }
        }
        Wake::Never
    }

    fn duration(&self) -> Option<u64> {
        Some(self.d)
    }
}

/// Folds `value(v)` over every included cluster with `combine` and returns
/// the result held by each root, keyed by cluster id.
///
/// A node at depth `d` listens to its children in round `D - d` and reports
/// to its parent in round `D - d + 1`, where `D = d_bound`.
pub fn ldt_convergecast<A, V, C, I>(
    sim: &mut Simulator<'_>,
    forest: &ClusterForest,
    include: I,
    value: V,
    combine: C,
) -> Result<BTreeMap<NodeId, A>, TreeError>
where
    A: Payload,
    V: Fn(NodeId) -> A,
    C: Fn(A, A) -> A,
    I: Fn(NodeId) -> bool,
{
    let acc = convergecast_lift(sim, forest, &include, value, |_, a| a, combine)?;
    Ok(forest
        .roots()
        .filter(|&r| include(r))
        .map(|r| (r, acc[forest.index(r)]))
        .collect())
}

/// Convergecast that returns every member's subtree fold (indexed like
/// `members()`). A node reports `lift(v, fold)` to its parent.
pub fn convergecast_lift<A, V, C, I, L>(
    sim: &mut Simulator<'_>,
    forest: &ClusterForest,
    include: I,
    value: V,
    lift: L,
    combine: C,
) -> Result<Vec<A>, TreeError>
where
    A: Payload,
    V: Fn(NodeId) -> A,
    C: Fn(A, A) -> A,
    I: Fn(NodeId) -> bool,
    L: Fn(NodeId, A) -> A,
{
    if forest.max_depth() > forest.d_bound() {
        return Err(TreeError::TooDeep {
            depth: forest.max_depth(),
            bound: forest.d_bound(),
        });
    }
    let acc: Vec<A> = forest.members().iter().map(|&v| value(v)).collect();
    let participants: Vec<NodeId> = forest
        .members()
        .iter()
        .copied()
        .filter(|&v| include(forest.cluster(v)))
        .collect();
    let mut p = Convergecast {
        forest,
        acc,
        combine,
        lift,
        d: forest.d_bound().max(1) as u64,
    };
    sim.run(&mut p, participants)?;
    Ok(p.acc)
}

struct Elect<'a> {
    labels: &'a BTreeMap<NodeId, NodeId>,
    r: u64,
    idw: u32,
    min: BTreeMap<NodeId, NodeId>,
    depth: BTreeMap<NodeId, u32>,
    parent: BTreeMap<NodeId, NodeId>,
    kids: BTreeMap<NodeId, u32>,
}

impl Protocol for Elect<'_> {
    type Msg = Words<2>;

    fn init(&mut self, v: NodeId, _: &Ctx) -> Wake {
        self.min.insert(v, v);
        Wake::At(1)
    }

    fn send(&mut self, v: NodeId, ctx: &Ctx, out: &mut Outbox<'_, Words<2>>) {
        let (r, label) = (ctx.round, self.labels[&v] as u64);
        if r <= self.r {
            out.broadcast(Words { w: [label, self.min[&v] as u64], bits: 2 * self.idw });
        } else if r <= 2 * self.r {
            if self.depth.get(&v).is_some_and(|&d| d as u64 == r - self.r - 1) {
                out.broadcast(Words { w: [label, self.depth[&v] as u64], bits: 2 * self.idw });
            }
        } else if let Some(&p) = self.parent.get(&v) {
            out.send(p, Words { w: [0, 0], bits: 1 });
        }
    }

    fn receive(&mut self, v: NodeId, ctx: &Ctx, inbox: &Inbox<'_, Words<2>>) -> Wake {
        let (r, label) = (ctx.round, self.labels[&v] as u64);
        if r <= self.r {
            let best = inbox
                .iter()
                .filter(|(_, m)| m.w[0] == label)
                .map(|(_, m)| m.w[1] as NodeId)
                .fold(self.min[&v], NodeId::min);
            self.min.insert(v, best);
            if r == self.r && best == v {
                self.depth.insert(v, 0);
            }
        } else if r <= 2 * self.r {
            if !self.depth.contains_key(&v) {
                let hit = inbox
                    .iter()
                    .filter(|(_, m)| m.w[0] == label)
                    .min_by_key(|&(s, _)| s);
                if let Some((s, m)) = hit {
                    self.parent.insert(v, s);
                    self.depth.insert(v, m.w[1] as u32 + 1);
                }
            }
        } else {
            self.kids.insert(v, inbox.iter().count() as u32);
        }
        if r <= 2 * self.r {
            Wake::At(r + 1)
        } else {
            Wake::Never
        }
    }

    fn duration(&self) -> Option<u64> {
        Some(2 * self.r + 1)
    }
}

/// Builds one BFS tree per cluster, rooted at the cluster's minimum id.
///
/// `labels` maps every participating node to an arbitrary cluster label;
/// each label class must be connected with diameter at most `radius`. All
/// participants stay awake for the `2 · radius + 1` rounds: `radius` rounds
/// of minimum flooding, `radius` rounds of BFS and one round in which every
/// node tells its parent about itself.
pub fn elect_root_and_build_tree(
    sim: &mut Simulator<'_>,
    labels: &BTreeMap<NodeId, NodeId>,
    radius: u32,
    d_bound: u32,
) -> Result<ClusterForest, TreeError> {
    let n = sim.graph().n();
    let members: Vec<NodeId> = labels.keys().copied().collect();
    let mut p = Elect {
        labels,
        r: radius as u64,
        idw: log2_ceil(n),
        min: BTreeMap::new(),
        depth: BTreeMap::new(),
        parent: BTreeMap::new(),
        kids: BTreeMap::new(),
    };
    sim.run(&mut p, members.iter().copied())?;
    let mut f = ClusterForest::singletons(n, &members, d_bound);
    for (i, &v) in members.iter().enumerate() {
        let Some(&d) = p.depth.get(&v) else {
            return Err(TreeError::Disconnected(labels[&v]));
        };
        f.depth[i] = d;
        f.cluster[i] = p.min[&v];
        f.parent[i] = p.parent.get(&v).copied().unwrap_or(NO_PARENT);
        f.children[i] = p.kids.get(&v).copied().unwrap_or(0);
    }
    // two roots under one label means the flood did not cover the label class
    let mut root_of: BTreeMap<NodeId, NodeId> = BTreeMap::new();
    for &v in &members {
        let c = f.cluster(v);
        if let Some(prev) = root_of.insert(labels[&v], c) {
            if prev != c {
                return Err(TreeError::Disconnected(labels[&v]));
            }
        }
    }
    if f.max_depth() > d_bound {
        return Err(TreeError::TooDeep { depth: f.max_depth(), bound: d_bound });
    }
    Ok(f)
}

/// Attaches leaf clusters to center clusters along the given edges `(u, v)`,
/// `u` in the center cluster and `v` in the leaf cluster. `v` takes `u` as
/// its parent, the path from `v` to the old leaf root is reversed, and the
/// whole leaf cluster adopts the center's cluster id and fresh depths.
///
/// Costs one cross-edge round, one convergecast and one broadcast in the leaf
/// clusters. Center clusters are untouched apart from `u` gaining a child.
pub fn merge_stars(
    sim: &mut Simulator<'_>,
    forest: &mut ClusterForest,
    attach: &[(NodeId, NodeId)],
) -> Result<(), TreeError> {
    let g = sim.graph();
    let idw = log2_ceil(g.n());
    let mut leaf_edge: BTreeMap<NodeId, (NodeId, NodeId)> = BTreeMap::new();
    for &(u, v) in attach {
        if !forest.contains(u) || !forest.contains(v) || !g.has_edge(u, v) {
            return Err(TreeError::NotStar(format!("({u}, {v}) is not a forest edge")));
        }
        let (cu, cv) = (forest.cluster(u), forest.cluster(v));
        if cu == cv {
            return Err(TreeError::NotStar(format!("({u}, {v}) inside cluster {cu}")));
        }
        if leaf_edge.insert(cv, (u, v)).is_some() {
            return Err(TreeError::NotStar(format!("cluster {cv} attached twice")));
        }
    }
    for &(u, _) in attach {
        if leaf_edge.contains_key(&forest.cluster(u)) {
            return Err(TreeError::NotStar(format!("center of {u} is also a leaf")));
        }
    }

    // cross round: the center endpoint hands over its cluster id and depth
    let sends = attach
        .iter()
        .map(|&(u, v)| {
            let m = Words { w: [forest.cluster(u) as u64, forest.depth(u) as u64], bits: 2 * idw };
            (u, v, m)
        })
        .collect();
    let got = exchange(sim, sends)?;
    let mut joined: BTreeMap<NodeId, (NodeId, NodeId, u32)> = BTreeMap::new();
    for (v, u, m) in got {
        joined.insert(v, (u, m.w[0] as NodeId, m.w[1] as u32 + 1));
    }

    // convergecast marks the path from v up to the old root; the message is
    // (new depth of v, old depth of v, sender) so each path node can place itself
    const NONE: u64 = u64::MAX;
    let is_leaf = |c: NodeId| leaf_edge.contains_key(&c);
    let path = convergecast_lift(
        sim,
        forest,
        is_leaf,
        |x| match joined.get(&x) {
            Some(&(_, _, nd)) => Words { w: [nd as u64, forest.depth(x) as u64, x as u64], bits: 3 * idw },
            None => Words { w: [NONE, 0, 0], bits: 1 },
        },
        |x, a| if a.w[0] == NONE { a } else { Words { w: [a.w[0], a.w[1], x as u64], bits: a.bits } },
        |a, b| if a.w[0] == NONE { b } else { a },
    )?;
    let new_depth = |x: NodeId| -> Option<u32> {
        let a = path[forest.index(x)];
        (a.w[0] != NONE).then(|| (a.w[0] + a.w[1]) as u32 - forest.depth(x))
    };

    // broadcast from the old root: new cluster id and the sender's new depth
    let held = broadcast_relay(
        sim,
        forest,
        is_leaf,
        |r| {
            let (u, _) = leaf_edge[&r];
            let nd = new_depth(r).expect("root lies on the reversed path");
            Words { w: [forest.cluster(u) as u64, nd as u64], bits: 2 * idw }
        },
        |x, m| match new_depth(x) {
            Some(nd) => Words { w: [m.w[0], nd as u64], bits: m.bits },
            None => Words { w: [m.w[0], m.w[1] + 1], bits: m.bits },
        },
    )?;

    // commit the state every node now knows locally
    let on_path: Vec<bool> = forest.members.iter().map(|&x| new_depth(x).is_some()).collect();
    let mut new_parent = forest.parent.clone();
    for (i, &x) in forest.members.iter().enumerate() {
        if !is_leaf(forest.cluster[i]) {
            continue;
        }
        let m = held[i].expect("leaf cluster member reached by broadcast");
        if on_path[i] {
            new_parent[i] = match joined.get(&x) {
                Some(&(u, _, _)) => u,
                None => path[i].w[2] as NodeId,
            };
        }
        forest.cluster[i] = m.w[0] as NodeId;
        forest.depth[i] = m.w[1] as u32;
    }
    forest.parent = new_parent;
    forest.children.iter_mut().for_each(|c| *c = 0);
    for i in 0..forest.len() {
        if forest.parent[i] != NO_PARENT {
            let pi = forest.index(forest.parent[i]);
            forest.children[pi] += 1;
        }
    }
    if forest.max_depth() > forest.d_bound {
        return Err(TreeError::TooDeep { depth: forest.max_depth(), bound: forest.d_bound });
    }
    Ok(())
}
