//! Cluster merging on the undecided components and the final packed MIS.
//!
//! Every iteration contracts clusters Borůvka-style: each cluster picks the
//! edge to its minimum-id neighbouring cluster; mutual picks form `M`,
//! clusters chosen by at least ten others are "high" and absorb their low
//! in-neighbours (`E_H`), the low clusters compute a maximal matching `M_L`
//! by color classes, and every low cluster left over hangs itself onto its
//! matched out-neighbour (`R`). All communication runs through tree
//! broadcasts, convergecasts and single cross-edge rounds.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{exchange, exchange_broadcast, exchange_with, log2_ceil, EngineError, Simulator, Words};
use crate::graph::{NodeId, NodeSet};
use crate::mis_core::desire::packed_parallel_mis;
use crate::mis_core::linial::{conflict_mask, palette_schedule, pick_color};
use crate::trees::{ldt_broadcast, ldt_convergecast, merge_stars, ClusterForest, TreeError};

const NONE: u64 = u64::MAX;
const HIGH_INDEGREE: u64 = 10;
const H_L_DEGREE: u64 = 10;

#[derive(Debug, Error)]
pub enum Phase3Error {
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error("improper coloring: clusters {0} and {1} share color {2}")]
    ImproperColoring(NodeId, NodeId, u64),
    #[error("M_L is not a maximal matching: {0}")]
    NotMaximalMatching(String),
}

impl From<EngineError> for Phase3Error {
    fn from(e: EngineError) -> Self {
        Phase3Error::Tree(TreeError::Engine(e))
    }
}

/// How many color-reduction steps to run per iteration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode", content = "steps")]
pub enum Coloring {
    /// Exactly this many steps (fewer if a step would not shrink the palette).
    Fixed(u32),
    /// Until the palette stops shrinking, at most this many steps.
    UntilFixpoint(u32),
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct IterationStats {
    pub clusters_before: usize,
    pub clusters_after: usize,
    pub m_edges: usize,
    pub eh_edges: usize,
    pub ml_edges: usize,
    pub r_edges: usize,
    pub high: usize,
    /// High clusters none of whose in-edges could be accepted.
    pub orphans: usize,
    pub palette: u64,
    pub max_depth: u32,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Phase3Stats {
    pub iterations: Vec<IterationStats>,
    pub components: usize,
    pub failed_components: usize,
    /// Some iteration left more than half of its clusters.
    pub halving_violated: bool,
}

#[derive(Clone, Copy, Debug)]
struct Sel {
    /// endpoint inside the choosing cluster
    x: NodeId,
    /// endpoint inside the chosen cluster
    y: NodeId,
    from: NodeId,
    to: NodeId,
}

fn w3(a: u64, b: u64, c: u64, idw: u32) -> Words<3> {
    Words { w: [a, b, c], bits: 3 * idw }
}

fn none3() -> Words<3> {
    Words { w: [NONE, NONE, NONE], bits: 1 }
}

fn min3(a: Words<3>, b: Words<3>) -> Words<3> {
    if b.w < a.w {
        b
    } else {
        a
    }
}

fn w1(v: u64, bits: u32) -> Words<1> {
    Words { w: [v], bits }
}

/// Per-iteration view of the cluster graph as the endpoints know it.
struct Round<'f> {
    forest: &'f ClusterForest,
    idw: u32,
    /// selection made by each non-finished cluster
    sel: BTreeMap<NodeId, Sel>,
    mutual: BTreeSet<NodeId>,
    indeg: BTreeMap<NodeId, u64>,
}

impl Round<'_> {
    fn high(&self, c: NodeId) -> bool {
        self.indeg.get(&c).copied().unwrap_or(0) >= HIGH_INDEGREE
    }

    fn oriented(&self) -> impl Iterator<Item = &Sel> + '_ {
        self.sel.values().filter(move |s| !self.mutual.contains(&s.from))
    }

    fn h_l(&self) -> impl Iterator<Item = &Sel> + '_ {
        self.oriented().filter(move |s| !self.high(s.from) && !self.high(s.to))
    }

    fn e_h(&self) -> impl Iterator<Item = &Sel> + '_ {
        self.oriented().filter(move |s| !self.high(s.from) && self.high(s.to))
    }
}

/// Step 1–3: every cluster learns the edge to its minimum-id neighbouring
/// cluster. Returns the selections; clusters without a neighbouring cluster
/// are absent.
fn select_out_edges(
    sim: &mut Simulator<'_>,
    forest: &ClusterForest,
    active: &BTreeSet<NodeId>,
    idw: u32,
) -> Result<BTreeMap<NodeId, Sel>, Phase3Error> {
    let nodes: Vec<NodeId> = forest
        .members()
        .iter()
        .copied()
        .filter(|&v| active.contains(&forest.cluster(v)))
        .collect();
    let heard = exchange_broadcast(sim, &nodes, |v| Some(w1(forest.cluster(v) as u64, idw)))?;
    let mut best = vec![none3(); forest.len()];
    for (i, &v) in nodes.iter().enumerate() {
        let own = forest.cluster(v) as u64;
        for &(u, m) in &heard[i] {
            if m.w[0] != own && forest.contains(u) {
                let cand = w3(m.w[0], v.min(u) as u64, v.max(u) as u64, idw);
                best[forest.index(v)] = min3(best[forest.index(v)], cand);
            }
        }
    }
    let inc = |c: NodeId| active.contains(&c);
    let at_root = ldt_convergecast(sim, forest, inc, |v| best[forest.index(v)], min3)?;
    let held = ldt_broadcast(sim, forest, inc, |r| at_root[&r])?;
    let mut sel = BTreeMap::new();
    for (i, &v) in forest.members().iter().enumerate() {
        let Some(m) = held[i] else { continue };
        if m.w[0] == NONE {
            continue;
        }
        let (a, b) = (m.w[1] as NodeId, m.w[2] as NodeId);
        if v == a || v == b {
            let y = if v == a { b } else { a };
            let c = forest.cluster(v);
            sel.insert(c, Sel { x: v, y, from: c, to: m.w[0] as NodeId });
        }
    }
    Ok(sel)
}

/// Steps 4–7: selections are announced across the chosen edges, clusters
/// count their incoming selections and learn whether they are high, and the
/// endpoints of every oriented edge swap their high flags.
fn classify<'f>(
    sim: &mut Simulator<'_>,
    forest: &'f ClusterForest,
    sel: BTreeMap<NodeId, Sel>,
    idw: u32,
) -> Result<Round<'f>, Phase3Error> {
    let live: BTreeSet<NodeId> = sel.keys().copied().collect();
    let listeners: Vec<NodeId> = forest
        .members()
        .iter()
        .copied()
        .filter(|&v| live.contains(&forest.cluster(v)))
        .collect();
    let sends = sel.values().map(|s| (s.x, s.y, w1(s.from as u64, idw))).collect();
    let got = exchange_with(sim, sends, &listeners)?;
    let mut mutual = BTreeSet::new();
    let mut incoming = vec![0u64; forest.len()];
    let mut is_mutual = vec![false; forest.len()];
    for (y, x, _) in got {
        let own = &sel[&forest.cluster(y)];
        if own.x == y && own.y == x {
            is_mutual[forest.index(y)] = true;
            mutual.insert(own.from);
        } else {
            incoming[forest.index(y)] += 1;
        }
    }
    let inc = |c: NodeId| live.contains(&c);
    let pack = |v: NodeId| Words { w: [incoming[forest.index(v)], is_mutual[forest.index(v)] as u64], bits: idw + 1 };
    let agg = ldt_convergecast(sim, forest, inc, pack, |a, b| Words {
        w: [a.w[0] + b.w[0], a.w[1] | b.w[1]],
        bits: a.bits.max(b.bits),
    })?;
    let held = ldt_broadcast(sim, forest, inc, |r| agg[&r])?;
    let mut indeg = BTreeMap::new();
    for (i, &v) in forest.members().iter().enumerate() {
        if let (Some(m), true) = (held[i], forest.is_root(v)) {
            indeg.insert(v, m.w[0]);
        }
    }
    let round = Round { forest, idw, sel, mutual, indeg };
    // both endpoints of an oriented edge learn the other side's class
    let mut sends = Vec::new();
    for s in round.oriented() {
        sends.push((s.x, s.y, w1(round.high(s.from) as u64, 1)));
        sends.push((s.y, s.x, w1(round.high(s.to) as u64, 1)));
    }
    exchange(sim, sends)?;
    Ok(round)
}

/// Root-to-endpoint color distribution on `H_L`: one broadcast in the low
/// clusters and one round across every `H_L` edge in both directions.
/// Returns, per `H_L` edge, the colors of its source and target cluster as
/// seen by the endpoints; fails if both sides carry the same color.
fn share_colors(
    sim: &mut Simulator<'_>,
    r: &Round<'_>,
    low: &BTreeSet<NodeId>,
    colors: &BTreeMap<NodeId, u64>,
    bits: u32,
) -> Result<Vec<(Sel, u64, u64)>, Phase3Error> {
    let f = r.forest;
    let held = ldt_broadcast(sim, f, |c| low.contains(&c), |root| w1(colors[&root], bits))?;
    let own = |v: NodeId| held[f.index(v)].expect("low cluster member holds its color").w[0];
    let mut sends = Vec::new();
    let edges: Vec<Sel> = r.h_l().copied().collect();
    for s in &edges {
        sends.push((s.x, s.y, w1(own(s.x), bits)));
        sends.push((s.y, s.x, w1(own(s.y), bits)));
    }
    exchange(sim, sends)?;
    let mut out = Vec::with_capacity(edges.len());
    for s in edges {
        let (cf, ct) = (own(s.x), own(s.y));
        if cf == ct {
            return Err(Phase3Error::ImproperColoring(s.from, s.to, cf));
        }
        out.push((s, cf, ct));
    }
    Ok(out)
}

/// Colors the low clusters, starting from their ids, with a few Linial
/// steps. Returns the final colors and palette size.
fn color_h_l(
    sim: &mut Simulator<'_>,
    r: &Round<'_>,
    low: &BTreeSet<NodeId>,
    coloring: Coloring,
) -> Result<(BTreeMap<NodeId, u64>, u64), Phase3Error> {
    let f = r.forest;
    let n = sim.graph().n() as u64;
    let budget = sim.budget_bits();
    let max_steps = match coloring {
        Coloring::Fixed(s) | Coloring::UntilFixpoint(s) => s,
    };
    let mut colors: BTreeMap<NodeId, u64> = low.iter().map(|&c| (c, c as u64)).collect();
    let mut palette = n.max(1);
    for (d, q) in palette_schedule(palette, H_L_DEGREE, budget, max_steps) {
        let bits = crate::engine::bits_for(palette - 1);
        let shared = share_colors(sim, r, low, &colors, bits)?;
        let mut mask = vec![0u64; f.len()];
        for (s, cf, ct) in shared {
            mask[f.index(s.x)] |= conflict_mask(cf, ct, q, d);
            mask[f.index(s.y)] |= conflict_mask(ct, cf, q, d);
        }
        let agg = ldt_convergecast(
            sim,
            f,
            |c| low.contains(&c),
            |v| w1(mask[f.index(v)], q as u32),
            |a, b| w1(a.w[0] | b.w[0], q as u32),
        )?;
        for (&root, m) in &agg {
            let c = colors[&root];
            colors.insert(root, pick_color(c, m.w[0], q, d).expect("q exceeds the number of conflicts"));
        }
        palette = q * q;
    }
    Ok((colors, palette))
}

/// Goes through the color classes in order; an unmatched cluster of the
/// current class takes its minimum-id unmatched in-neighbour. A cluster only
/// wakes for its own class and for the class of its out-neighbour.
fn color_class_matching(
    sim: &mut Simulator<'_>,
    r: &Round<'_>,
    low: &BTreeSet<NodeId>,
    colors: &BTreeMap<NodeId, u64>,
    palette: u64,
) -> Result<Vec<Sel>, Phase3Error> {
    let f = r.forest;
    let idw = r.idw;
    let cbits = crate::engine::bits_for(palette.saturating_sub(1));
    let shared = share_colors(sim, r, low, colors, cbits)?;
    let mut by_class: BTreeMap<u64, Vec<NodeId>> = BTreeMap::new();
    for &c in low {
        by_class.entry(colors[&c]).or_default().push(c);
    }
    let mut into: BTreeMap<NodeId, Vec<Sel>> = BTreeMap::new();
    for &(s, _, _) in &shared {
        into.entry(s.to).or_default().push(s);
    }
    let slot = 2 * f.d_bound().max(1) as u64 + 3;
    let mut matched: BTreeSet<NodeId> = BTreeSet::new();
    let mut by_out: BTreeSet<NodeId> = BTreeSet::new();
    let mut m_l = Vec::new();
    for j in 0..palette {
        let Some(class) = by_class.get(&j) else {
            sim.idle(slot)?;
            continue;
        };
        let members: BTreeSet<NodeId> = class.iter().copied().collect();
        let edges: Vec<Sel> = class.iter().flat_map(|c| into.get(c).cloned().unwrap_or_default()).collect();
        // (a) in-neighbours report whether they are taken
        let sends = edges.iter().map(|s| (s.x, s.y, w1(matched.contains(&s.from) as u64, 1))).collect();
        let got = exchange(sim, sends)?;
        let mut cand = vec![Words { w: [0, NONE, NONE, NONE], bits: 1 }; f.len()];
        for (y, z, m) in got {
            if m.w[0] == 0 {
                let w = [0, f.cluster(z) as u64, y as u64, z as u64];
                let i = f.index(y);
                if w[1..] < cand[i].w[1..] {
                    cand[i] = Words { w, bits: 3 * idw + 1 };
                }
            }
        }
        for &c in class {
            if by_out.contains(&c) {
                if let Some(s) = r.sel.get(&c) {
                    cand[f.index(s.x)].w[0] = 1;
                    cand[f.index(s.x)].bits = cand[f.index(s.x)].bits.max(1);
                }
            }
        }
        // (b) the root learns its own state and the best free in-neighbour
        let agg = ldt_convergecast(
            sim,
            f,
            |c| members.contains(&c),
            |v| cand[f.index(v)],
            |a, b| {
                let mut w = if b.w[1..] < a.w[1..] { b.w } else { a.w };
                w[0] = a.w[0] | b.w[0];
                Words { w, bits: a.bits.max(b.bits) }
            },
        )?;
        // (c) the decision goes back down
        let decide = |root: NodeId| {
            let a = agg[&root];
            if a.w[0] == 1 || a.w[1] == NONE {
                Words { w: [0, NONE, NONE], bits: 1 }
            } else {
                Words { w: [1, a.w[2], a.w[3]], bits: 2 * idw + 1 }
            }
        };
        ldt_broadcast(sim, f, |c| members.contains(&c), decide)?;
        // (d) the chosen in-neighbour is told; all in-neighbours listen
        let mut sends = Vec::new();
        for &c in class {
            let a = agg[&c];
            if a.w[0] == 1 {
                matched.insert(c);
            } else if a.w[1] != NONE {
                let (y, z) = (a.w[2] as NodeId, a.w[3] as NodeId);
                let zc = f.cluster(z);
                matched.insert(c);
                matched.insert(zc);
                by_out.insert(zc);
                m_l.push(r.sel[&zc]);
                sends.push((y, z, w1(1, 1)));
            }
        }
        let listeners: Vec<NodeId> = edges.iter().map(|s| s.x).collect();
        exchange_with(sim, sends, &listeners)?;
    }
    check_maximal_matching(&shared, &m_l)?;
    Ok(m_l)
}

fn check_maximal_matching(h_l: &[(Sel, u64, u64)], m_l: &[Sel]) -> Result<(), Phase3Error> {
    let mut covered = BTreeSet::new();
    for s in m_l {
        for c in [s.from, s.to] {
            if !covered.insert(c) {
                return Err(Phase3Error::NotMaximalMatching(format!("cluster {c} matched twice")));
            }
        }
    }
    for (s, _, _) in h_l {
        if !covered.contains(&s.from) && !covered.contains(&s.to) {
            return Err(Phase3Error::NotMaximalMatching(format!(
                "edge {} -> {} has no matched endpoint",
                s.from, s.to
            )));
        }
    }
    Ok(())
}

/// Low clusters whose out-edge lies in `H_L` but which stayed unmatched join
/// their (matched) out-neighbour. The out-endpoints of `M_L` report up their
/// trees, roots decide, the decision goes down and the out-endpoint tells the
/// other side.
fn leftovers(
    sim: &mut Simulator<'_>,
    r: &Round<'_>,
    low: &BTreeSet<NodeId>,
    m_l: &[Sel],
) -> Result<Vec<Sel>, Phase3Error> {
    let f = r.forest;
    let out_matched: BTreeSet<NodeId> = m_l.iter().map(|s| s.x).collect();
    let agg = ldt_convergecast(
        sim,
        f,
        |c| low.contains(&c),
        |v| out_matched.contains(&v),
        |a, b| a | b,
    )?;
    let centers: BTreeSet<NodeId> = m_l.iter().map(|s| s.to).collect();
    let h_l: Vec<Sel> = r.h_l().copied().collect();
    let joins: Vec<Sel> = h_l
        .iter()
        .copied()
        .filter(|s| !agg[&s.from] && !centers.contains(&s.from))
        .collect();
    let going: BTreeSet<NodeId> = joins.iter().map(|s| s.from).collect();
    ldt_broadcast(sim, f, |c| low.contains(&c), |root| going.contains(&root))?;
    let sends = joins.iter().map(|s| (s.x, s.y, true)).collect();
    let listeners: Vec<NodeId> = h_l.iter().map(|s| s.y).collect();
    exchange_with(sim, sends, &listeners)?;
    Ok(joins)
}

/// One contraction step over the clusters in `active`. Returns `None` once
/// no cluster has a neighbouring cluster left.
fn merge_iteration(
    sim: &mut Simulator<'_>,
    forest: &mut ClusterForest,
    active: &BTreeSet<NodeId>,
    coloring: Coloring,
) -> Result<Option<(IterationStats, BTreeSet<NodeId>)>, Phase3Error> {
    let idw = log2_ceil(sim.graph().n());
    let sel = select_out_edges(sim, forest, active, idw)?;
    if sel.is_empty() {
        return Ok(None);
    }
    let live: Vec<NodeId> = forest
        .members()
        .iter()
        .copied()
        .filter(|&v| sel.contains_key(&forest.cluster(v)))
        .collect();
    let (attach_m, attach_eh, attach_ml, attach_r, mut st) = {
        let r = classify(sim, forest, sel, idw)?;
        let low: BTreeSet<NodeId> = r.sel.keys().copied().filter(|&c| !r.high(c)).collect();
        let (colors, palette) = color_h_l(sim, &r, &low, coloring)?;
        let m_l = color_class_matching(sim, &r, &low, &colors, palette)?;
        let joins = leftovers(sim, &r, &low, &m_l)?;

        let mut attach_m = Vec::new();
        for &c in &r.mutual {
            let s = r.sel[&c];
            if s.from > s.to {
                attach_m.push((s.y, s.x));
            }
        }
        let e_h: Vec<Sel> = r.e_h().copied().collect();
        let fed: BTreeSet<NodeId> = e_h.iter().map(|s| s.to).collect();
        let high: Vec<NodeId> = r.sel.keys().copied().filter(|&c| r.high(c)).collect();
        let orphans = high.iter().filter(|c| !r.mutual.contains(c) && !fed.contains(c)).count();
        let st = IterationStats {
            clusters_before: r.sel.len(),
            m_edges: attach_m.len(),
            eh_edges: e_h.len(),
            ml_edges: m_l.len(),
            r_edges: joins.len(),
            high: high.len(),
            orphans,
            palette,
            ..Default::default()
        };
        let flip = |v: &[Sel]| v.iter().map(|s| (s.y, s.x)).collect::<Vec<_>>();
        (attach_m, flip(&e_h), flip(&m_l), flip(&joins), st)
    };
    for attach in [&attach_m, &attach_eh, &attach_ml, &attach_r] {
        merge_stars(sim, forest, attach)?;
    }
    let after: BTreeSet<NodeId> = live.iter().map(|&v| forest.cluster(v)).collect();
    st.clusters_after = after.len();
    st.max_depth = forest.max_depth();
    Ok(Some((st, after)))
}

/// Contracts every component of `forest` into a single cluster, then runs
/// `⌈log₂ n⌉` packed MIS executions and lets each cluster root keep the
/// first execution that succeeded on its whole component.
pub fn phase3_component_mis(
    sim: &mut Simulator<'_>,
    mut forest: ClusterForest,
    coloring: Coloring,
    mis_rounds: u64,
    stream: u64,
) -> Result<(NodeSet, Phase3Stats), Phase3Error> {
    let n = sim.graph().n();
    let mut stats = Phase3Stats::default();
    let mut out = NodeSet::new(n);
    if forest.is_empty() {
        return Ok((out, stats));
    }
    let mut active: BTreeSet<NodeId> = forest.roots().collect();
    while let Some((st, next)) = merge_iteration(sim, &mut forest, &active, coloring)? {
        stats.halving_violated |= st.clusters_after > st.clusters_before.div_ceil(2);
        stats.iterations.push(st);
        active = next;
    }
    stats.components = forest.num_clusters();

    let k = log2_ceil(n) as usize;
    let nodes: Vec<NodeId> = forest.members().to_vec();
    let packed = packed_parallel_mis(sim, &nodes, k, mis_rounds, stream)?;
    let all = if k >= 64 { u64::MAX } else { (1u64 << k) - 1 };
    let agg = ldt_convergecast(
        sim,
        &forest,
        |_| true,
        |v| w1(packed.success[packed.roster.at(v)] & all, k as u32),
        |a, b| w1(a.w[0] & b.w[0], k as u32),
    )?;
    let pick = |root: NodeId| {
        let ok = agg[&root].w[0];
        if ok == 0 {
            NONE
        } else {
            ok.trailing_zeros() as u64
        }
    };
    let ibits = crate::engine::bits_for(k as u64);
    let held = ldt_broadcast(sim, &forest, |_| true, |root| w1(pick(root).min(k as u64), ibits))?;
    for root in forest.roots() {
        stats.failed_components += (pick(root) == NONE) as usize;
    }
    for (i, &v) in forest.members().iter().enumerate() {
        let e = held[i].expect("every member is reached").w[0] as usize;
        let e = if e >= k { 0 } else { e };
        if packed.executions[e].in_mis.contains(v) {
            out.insert(v);
        }
    }
    Ok((out, stats))
}
