//! Undirected simple graphs in compressed adjacency form, seeded generators,
//! and the exact independence / maximality checks every other module leans on.

use std::collections::VecDeque;
use std::fmt;
use std::io::{BufRead, Write};

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::stream_rng;

pub type NodeId = u32;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("set is not independent: edge ({0}, {1}) has both endpoints inside")]
    NotIndependent(NodeId, NodeId),
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Undirected simple graph on nodes `0..n`. Adjacency lists are sorted and
/// stored back to back; `offsets[v]..offsets[v + 1]` indexes node `v`.
#[derive(Clone, PartialEq, Eq)]
pub struct Graph {
    offsets: Vec<usize>,
    targets: Vec<NodeId>,
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Graph")
            .field("n", &self.n())
            .field("m", &self.num_edges())
            .finish()
    }
}

impl Graph {
    pub fn empty(n: usize) -> Self {
        Graph {
            offsets: vec![0; n + 1],
            targets: Vec::new(),
        }
    }

    /// Builds a graph from an undirected edge list. Duplicate edges (in either
    /// orientation) are merged; self-loops and out-of-range ids are rejected.
    pub fn from_edges(n: usize, edges: &[(NodeId, NodeId)]) -> Result<Self, GraphError> {
        for &(u, v) in edges {
            if u as usize >= n || v as usize >= n {
                return Err(GraphError::InvalidParameter(format!(
                    "edge ({u}, {v}) out of range for n = {n}"
                )));
            }
            if u == v {
                return Err(GraphError::InvalidParameter(format!("self-loop at {u}")));
            }
        }
        Ok(Self::from_edges_unchecked(n, edges))
    }

    fn from_edges_unchecked(n: usize, edges: &[(NodeId, NodeId)]) -> Self {
        let mut deg = vec![0usize; n + 1];
        for &(u, v) in edges {
            deg[u as usize] += 1;
            deg[v as usize] += 1;
        }
        let mut offsets = vec![0usize; n + 1];
        for v in 0..n {
            offsets[v + 1] = offsets[v] + deg[v];
        }
        let mut fill = offsets.clone();
        let mut targets = vec![0 as NodeId; offsets[n]];
        for &(u, v) in edges {
            targets[fill[u as usize]] = v;
            fill[u as usize] += 1;
            targets[fill[v as usize]] = u;
            fill[v as usize] += 1;
        }
        // sort and dedup each list, then compact
        let mut write = 0usize;
        let mut new_offsets = vec![0usize; n + 1];
        for v in 0..n {
            let (lo, hi) = (offsets[v], offsets[v + 1]);
            targets[lo..hi].sort_unstable();
            let start = write;
            let mut last: Option<NodeId> = None;
            for i in lo..hi {
                let t = targets[i];
                if last != Some(t) {
                    targets[write] = t;
                    write += 1;
                    last = Some(t);
                }
            }
            new_offsets[v] = start;
            new_offsets[v + 1] = write;
        }
        targets.truncate(write);
        targets.shrink_to_fit();
        Graph {
            offsets: new_offsets,
            targets,
        }
    }

    pub fn n(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn num_edges(&self) -> usize {
        self.targets.len() / 2
    }

    #[inline]
    pub fn neighbors(&self, v: NodeId) -> &[NodeId] {
        let v = v as usize;
        &self.targets[self.offsets[v]..self.offsets[v + 1]]
    }

    #[inline]
    pub fn degree(&self, v: NodeId) -> usize {
        let v = v as usize;
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn max_degree(&self) -> usize {
        (0..self.n()).map(|v| self.degree(v as NodeId)).max().unwrap_or(0)
    }

    #[inline]
    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        self.neighbors(u).binary_search(&v).is_ok()
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> {
        0..self.n() as NodeId
    }

    /// Every undirected edge once, as `(u, v)` with `u < v`, in id order.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.nodes().flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .copied()
                .filter(move |&v| u < v)
                .map(move |v| (u, v))
        })
    }

    /// Checks symmetry, absence of self-loops and duplicates.
    pub fn check_invariants(&self) -> bool {
        for u in self.nodes() {
            let nb = self.neighbors(u);
            if nb.windows(2).any(|w| w[0] >= w[1]) {
                return false;
            }
            for &v in nb {
                if v == u || v as usize >= self.n() || !self.has_edge(v, u) {
                    return false;
                }
            }
        }
        true
    }

    /// Subgraph induced by `keep`, relabelled densely in increasing id order.
    /// Returns the graph and the map from new ids back to ids of `self`.
    pub fn induced_subgraph(&self, keep: &NodeSet) -> (Graph, Vec<NodeId>) {
        let map: Vec<NodeId> = keep.iter().collect();
        let mut back = vec![NodeId::MAX; self.n()];
        for (i, &v) in map.iter().enumerate() {
            back[v as usize] = i as NodeId;
        }
        let mut offsets = Vec::with_capacity(map.len() + 1);
        offsets.push(0usize);
        let mut targets = Vec::new();
        for &v in &map {
            for &w in self.neighbors(v) {
                let b = back[w as usize];
                if b != NodeId::MAX {
                    targets.push(b);
                }
            }
            offsets.push(targets.len());
        }
        (Graph { offsets, targets }, map)
    }

    /// Connected components as sorted node lists, ordered by smallest member.
    pub fn components(&self) -> Vec<Vec<NodeId>> {
        self.components_within(&NodeSet::full(self.n()))
    }

    /// Connected components of the subgraph induced by `within`.
    pub fn components_within(&self, within: &NodeSet) -> Vec<Vec<NodeId>> {
        let mut seen = NodeSet::new(self.n());
        let mut out = Vec::new();
        let mut queue = VecDeque::new();
        for s in within.iter() {
            if seen.contains(s) {
                continue;
            }
            seen.insert(s);
            queue.push_back(s);
            let mut comp = Vec::new();
            while let Some(v) = queue.pop_front() {
                comp.push(v);
                for &w in self.neighbors(v) {
                    if within.contains(w) && !seen.contains(w) {
                        seen.insert(w);
                        queue.push_back(w);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    pub fn write_edge_list<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{} {}", self.n(), self.num_edges())?;
        for (u, v) in self.edges() {
            writeln!(w, "{u} {v}")?;
        }
        Ok(())
    }

    pub fn read_edge_list<R: BufRead>(r: R) -> Result<Graph, GraphError> {
        let mut lines = r.lines().enumerate();
        let parse_pair = |line: usize, s: &str| -> Result<(usize, usize), GraphError> {
            let mut it = s.split_whitespace();
            let mut next = || -> Result<usize, GraphError> {
                it.next()
                    .ok_or_else(|| GraphError::Parse {
                        line,
                        msg: "expected two integers".into(),
                    })?
                    .parse::<usize>()
                    .map_err(|e| GraphError::Parse {
                        line,
                        msg: e.to_string(),
                    })
            };
            Ok((next()?, next()?))
        };
        let (n, m) = loop {
            match lines.next() {
                Some((i, l)) => {
                    let l = l?;
                    if l.trim().is_empty() {
                        continue;
                    }
                    break parse_pair(i + 1, &l)?;
                }
                None => {
                    return Err(GraphError::Parse {
                        line: 0,
                        msg: "missing header".into(),
                    })
                }
            }
        };
        let mut edges = Vec::with_capacity(m);
        for (i, l) in lines {
            let l = l?;
            if l.trim().is_empty() {
                continue;
            }
            let (u, v) = parse_pair(i + 1, &l)?;
            edges.push((u as NodeId, v as NodeId));
        }
        if edges.len() != m {
            return Err(GraphError::Parse {
                line: 1,
                msg: format!("header announces {m} edges, found {}", edges.len()),
            });
        }
        Graph::from_edges(n, &edges)
    }
}

/// Membership bitmap over `0..n`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct NodeSet {
    n: usize,
    words: Vec<u64>,
}

impl fmt::Debug for NodeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl NodeSet {
    pub fn new(n: usize) -> Self {
        NodeSet {
            n,
            words: vec![0; n.div_ceil(64)],
        }
    }

    pub fn full(n: usize) -> Self {
        let mut s = Self::new(n);
        for v in 0..n {
            s.insert(v as NodeId);
        }
        s
    }

    pub fn from_iter<I: IntoIterator<Item = NodeId>>(n: usize, it: I) -> Self {
        let mut s = Self::new(n);
        for v in it {
            s.insert(v);
        }
        s
    }

    /// Size of the universe, not the cardinality.
    pub fn universe(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn contains(&self, v: NodeId) -> bool {
        let v = v as usize;
        v < self.n && self.words[v / 64] >> (v % 64) & 1 == 1
    }

    #[inline]
    pub fn insert(&mut self, v: NodeId) -> bool {
        let v = v as usize;
        assert!(v < self.n, "node {v} outside universe {}", self.n);
        let bit = 1u64 << (v % 64);
        let was = self.words[v / 64] & bit != 0;
        self.words[v / 64] |= bit;
        !was
    }

    #[inline]
    pub fn remove(&mut self, v: NodeId) -> bool {
        let v = v as usize;
        if v >= self.n {
            return false;
        }
        let bit = 1u64 << (v % 64);
        let was = self.words[v / 64] & bit != 0;
        self.words[v / 64] &= !bit;
        was
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.words.iter().enumerate().flat_map(|(i, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let t = w.trailing_zeros();
                w &= w - 1;
                Some((i * 64 + t as usize) as NodeId)
            })
        })
    }

    pub fn union_with(&mut self, other: &NodeSet) {
        assert_eq!(self.n, other.n);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= *b;
        }
    }
}

/// A sorted list of nodes with constant-time position lookup, for per-node
/// state kept only for the nodes taking part in a stage.
#[derive(Clone, Debug)]
pub struct Roster {
    nodes: Vec<NodeId>,
    pos: Vec<u32>,
}

impl Roster {
    pub fn new(n: usize, nodes: impl IntoIterator<Item = NodeId>) -> Self {
        let mut nodes: Vec<NodeId> = nodes.into_iter().collect();
        nodes.sort_unstable();
        nodes.dedup();
        let mut pos = vec![u32::MAX; n];
        for (i, &v) in nodes.iter().enumerate() {
            pos[v as usize] = i as u32;
        }
        Roster { nodes, pos }
    }

    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn idx(&self, v: NodeId) -> Option<usize> {
        match self.pos.get(v as usize) {
            Some(&i) if i != u32::MAX => Some(i as usize),
            _ => None,
        }
    }

    /// Position of a node known to be on the roster.
    pub fn at(&self, v: NodeId) -> usize {
        self.pos[v as usize] as usize
    }

    pub fn contains(&self, v: NodeId) -> bool {
        self.idx(v).is_some()
    }
}

/// True iff no edge of `g` has both endpoints in `s`.
pub fn is_independent(g: &Graph, s: &NodeSet) -> bool {
    first_conflict(g, s).is_none()
}

fn first_conflict(g: &Graph, s: &NodeSet) -> Option<(NodeId, NodeId)> {
    for u in s.iter() {
        for &v in g.neighbors(u) {
            if u < v && s.contains(v) {
                return Some((u, v));
            }
        }
    }
    None
}

/// True iff `s` is independent and dominates every node outside it.
pub fn is_maximal_independent(g: &Graph, s: &NodeSet) -> bool {
    is_independent(g, s) && undominated(g, s).next().is_none()
}

/// Nodes that are neither in `s` nor adjacent to a member of `s`.
pub fn undominated<'a>(g: &'a Graph, s: &'a NodeSet) -> impl Iterator<Item = NodeId> + 'a {
    g.nodes()
        .filter(move |&v| !s.contains(v) && !g.neighbors(v).iter().any(|&w| s.contains(w)))
}

/// `s` together with all its neighbours.
pub fn closed_neighborhood(g: &Graph, s: &NodeSet) -> NodeSet {
    let mut out = s.clone();
    for u in s.iter() {
        for &w in g.neighbors(u) {
            out.insert(w);
        }
    }
    out
}

/// Removes `s` and its neighbours; returns the induced remainder and the map
/// from its ids back to ids of `g`.
pub fn residual_graph(g: &Graph, s: &NodeSet) -> Result<(Graph, Vec<NodeId>), GraphError> {
    if let Some((u, v)) = first_conflict(g, s) {
        return Err(GraphError::NotIndependent(u, v));
    }
    let removed = closed_neighborhood(g, s);
    let mut keep = NodeSet::new(g.n());
    for v in g.nodes() {
        if !removed.contains(v) {
            keep.insert(v);
        }
    }
    Ok(g.induced_subgraph(&keep))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum GraphModel {
    Gnp { n: usize, p: f64 },
    RandomRegular { n: usize, d: usize },
    Star { n: usize },
    Path { n: usize },
    Complete { n: usize },
    /// `hubs` nodes of degree about `hub_degree` attached to uniformly random
    /// other nodes; used to get a large maximum degree at moderate edge count.
    PlantedHubs { n: usize, hubs: usize, hub_degree: usize },
}

impl GraphModel {
    /// G(n, p) with expected average degree `avg_deg`.
    pub fn gnp_avg_degree(n: usize, avg_deg: f64) -> Self {
        let p = if n <= 1 { 0.0 } else { (avg_deg / (n - 1) as f64).min(1.0) };
        GraphModel::Gnp { n, p }
    }

    pub fn n(&self) -> usize {
        match *self {
            GraphModel::Gnp { n, .. }
            | GraphModel::RandomRegular { n, .. }
            | GraphModel::Star { n }
            | GraphModel::Path { n }
            | GraphModel::Complete { n }
            | GraphModel::PlantedHubs { n, .. } => n,
        }
    }
}

const GEN_STREAM: u64 = 0x6772_6170_6867_656e;

/// Deterministic in `(model, seed)`.
pub fn generate_graph(model: &GraphModel, seed: u64) -> Result<Graph, GraphError> {
    let n = model.n();
    if n == 0 {
        return Err(GraphError::InvalidParameter("n must be at least 1".into()));
    }
    match *model {
        GraphModel::Gnp { n, p } => gnp(n, p, seed),
        GraphModel::RandomRegular { n, d } => random_regular(n, d, seed),
        GraphModel::Star { n } => {
            let edges: Vec<_> = (1..n as NodeId).map(|v| (0, v)).collect();
            Ok(Graph::from_edges_unchecked(n, &edges))
        }
        GraphModel::Path { n } => {
            let edges: Vec<_> = (1..n as NodeId).map(|v| (v - 1, v)).collect();
            Ok(Graph::from_edges_unchecked(n, &edges))
        }
        GraphModel::Complete { n } => {
            let mut edges = Vec::with_capacity(n * (n - 1) / 2);
            for u in 0..n as NodeId {
                for v in u + 1..n as NodeId {
                    edges.push((u, v));
                }
            }
            Ok(Graph::from_edges_unchecked(n, &edges))
        }
        GraphModel::PlantedHubs {
            n,
            hubs,
            hub_degree,
        } => planted_hubs(n, hubs, hub_degree, seed),
    }
}

/// Pairs `(u, v)` with `v < u` are visited in lexicographic order of `(u, v)`
/// and skipped over with geometric jumps, so the output depends only on the seed.
fn gnp(n: usize, p: f64, seed: u64) -> Result<Graph, GraphError> {
    if !(0.0..=1.0).contains(&p) || p.is_nan() {
        return Err(GraphError::InvalidParameter(format!("p = {p} not in [0, 1]")));
    }
    let mut edges = Vec::new();
    if p == 0.0 || n < 2 {
        return Ok(Graph::empty(n));
    }
    if p == 1.0 {
        return generate_graph(&GraphModel::Complete { n }, seed);
    }
    let mut rng = stream_rng(seed, GEN_STREAM, 0);
    let expected = p * (n as f64) * (n as f64 - 1.0) / 2.0;
    edges.reserve((expected * 1.01) as usize + 16);
    let log_q = (1.0 - p).ln();
    let (mut v, mut w): (i64, i64) = (1, -1);
    let n = n as i64;
    while v < n {
        let r: f64 = 1.0 - rng.gen::<f64>();
        w += 1 + (r.ln() / log_q).floor() as i64;
        while w >= v && v < n {
            w -= v;
            v += 1;
        }
        if v < n {
            edges.push((v as NodeId, w as NodeId));
        }
    }
    Ok(Graph::from_edges_unchecked(n as usize, &edges))
}

/// Pairing model that rejects individual bad pairs and restarts when stuck.
fn random_regular(n: usize, d: usize, seed: u64) -> Result<Graph, GraphError> {
    if (n * d) % 2 != 0 {
        return Err(GraphError::Infeasible(format!("n·d = {} is odd", n * d)));
    }
    if d >= n && !(d == 0) {
        return Err(GraphError::Infeasible(format!("degree {d} needs more than {n} nodes")));
    }
    if d == 0 {
        return Ok(Graph::empty(n));
    }
    let mut rng = stream_rng(seed, GEN_STREAM, 1);
    for _attempt in 0..1000 {
        let mut points: Vec<NodeId> = (0..n as NodeId)
            .flat_map(|v| std::iter::repeat(v).take(d))
            .collect();
        let mut adj: Vec<Vec<NodeId>> = vec![Vec::with_capacity(d); n];
        let mut edges = Vec::with_capacity(n * d / 2);
        let mut stuck = false;
        while !points.is_empty() {
            let mut placed = false;
            for _ in 0..(50 * d + 50) {
                let i = rng.gen_range(0..points.len());
                let j = rng.gen_range(0..points.len());
                let (a, b) = (points[i], points[j]);
                if i == j || a == b || adj[a as usize].contains(&b) {
                    continue;
                }
                adj[a as usize].push(b);
                adj[b as usize].push(a);
                edges.push((a, b));
                let (hi, lo) = if i > j { (i, j) } else { (j, i) };
                points.swap_remove(hi);
                points.swap_remove(lo);
                placed = true;
                break;
            }
            if !placed {
                stuck = true;
                break;
            }
        }
        if !stuck {
            return Ok(Graph::from_edges_unchecked(n, &edges));
        }
    }
    Err(GraphError::Infeasible(format!(
        "could not realise a {d}-regular graph on {n} nodes"
    )))
}

fn planted_hubs(n: usize, hubs: usize, hub_degree: usize, seed: u64) -> Result<Graph, GraphError> {
    if hubs == 0 || hubs > n || hub_degree >= n {
        return Err(GraphError::InvalidParameter(format!(
            "planted hubs need 0 < hubs ≤ n and hub_degree < n (n={n}, hubs={hubs}, d={hub_degree})"
        )));
    }
    let mut rng = stream_rng(seed, GEN_STREAM, 2);
    let mut edges = Vec::with_capacity(hubs * hub_degree);
    let mut mark = vec![u32::MAX; n];
    for h in 0..hubs as NodeId {
        mark[h as usize] = h;
        let mut picked = 0;
        while picked < hub_degree {
            let w = rng.gen_range(0..n as NodeId);
            if mark[w as usize] == h {
                continue;
            }
            mark[w as usize] = h;
            edges.push((h, w));
            picked += 1;
        }
    }
    Ok(Graph::from_edges_unchecked(n, &edges))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path3() -> Graph {
        Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap()
    }

    #[test]
    fn complete_graph_degrees() {
        let g = generate_graph(&GraphModel::Complete { n: 4 }, 99).unwrap();
        assert!(g.nodes().all(|v| g.degree(v) == 3));
        assert_eq!(g.num_edges(), 6);
    }

    #[test]
    fn gnp_zero_is_edgeless() {
        let g = generate_graph(&GraphModel::Gnp { n: 5, p: 0.0 }, 3).unwrap();
        assert_eq!(g.num_edges(), 0);
    }

    #[test]
    fn random_regular_degree_two() {
        let g = generate_graph(&GraphModel::RandomRegular { n: 6, d: 2 }, 7).unwrap();
        assert!(g.check_invariants());
        assert!(g.nodes().all(|v| g.degree(v) == 2));
    }

    #[test]
    fn generator_errors() {
        assert!(matches!(
            generate_graph(&GraphModel::Gnp { n: 5, p: 1.5 }, 0),
            Err(GraphError::InvalidParameter(_))
        ));
        assert!(matches!(
            generate_graph(&GraphModel::RandomRegular { n: 5, d: 3 }, 0),
            Err(GraphError::Infeasible(_))
        ));
        assert!(generate_graph(&GraphModel::Path { n: 0 }, 0).is_err());
    }

    #[test]
    fn gnp_density_is_plausible() {
        let g = generate_graph(&GraphModel::gnp_avg_degree(4000, 10.0), 1).unwrap();
        assert!(g.check_invariants());
        let avg = 2.0 * g.num_edges() as f64 / 4000.0;
        assert!((avg - 10.0).abs() < 0.5, "avg degree {avg}");
    }

    #[test]
    fn independence_examples() {
        let g = path3();
        assert!(is_independent(&g, &NodeSet::from_iter(3, [0, 2])));
        assert!(!is_independent(&g, &NodeSet::from_iter(3, [0, 1])));
        assert!(is_independent(&g, &NodeSet::new(3)));
        assert!(is_maximal_independent(&g, &NodeSet::from_iter(3, [1])));
        assert!(!is_maximal_independent(&g, &NodeSet::from_iter(3, [0])));
        let e = Graph::empty(5);
        assert!(is_maximal_independent(&e, &NodeSet::full(5)));
    }

    #[test]
    fn residual_examples() {
        let star = generate_graph(&GraphModel::Star { n: 6 }, 0).unwrap();
        let (r, _) = residual_graph(&star, &NodeSet::from_iter(6, [0])).unwrap();
        assert_eq!(r.n(), 0);

        let p5 = generate_graph(&GraphModel::Path { n: 5 }, 0).unwrap();
        let (r, map) = residual_graph(&p5, &NodeSet::from_iter(5, [0])).unwrap();
        assert_eq!(map, vec![2, 3, 4]);
        assert_eq!(r.edges().collect::<Vec<_>>(), vec![(0, 1), (1, 2)]);

        let k4 = generate_graph(&GraphModel::Complete { n: 4 }, 0).unwrap();
        assert_eq!(residual_graph(&k4, &NodeSet::from_iter(4, [0])).unwrap().0.n(), 0);

        assert!(matches!(
            residual_graph(&p5, &NodeSet::from_iter(5, [1, 2])),
            Err(GraphError::NotIndependent(1, 2))
        ));
    }

    #[test]
    fn edge_list_round_trip() {
        let g = generate_graph(&GraphModel::gnp_avg_degree(50, 4.0), 11).unwrap();
        let mut buf = Vec::new();
        g.write_edge_list(&mut buf).unwrap();
        let h = Graph::read_edge_list(&buf[..]).unwrap();
        assert_eq!(g, h);
        assert!(Graph::read_edge_list(&b"3 2\n0 1\n"[..]).is_err());
    }

    #[test]
    fn from_edges_rejects_loops_and_merges_duplicates() {
        assert!(Graph::from_edges(3, &[(1, 1)]).is_err());
        let g = Graph::from_edges(3, &[(0, 1), (1, 0), (0, 1)]).unwrap();
        assert_eq!(g.num_edges(), 1);
    }

    #[test]
    fn nodeset_basics() {
        let mut s = NodeSet::new(130);
        assert!(s.insert(129));
        assert!(!s.insert(129));
        s.insert(3);
        assert_eq!(s.iter().collect::<Vec<_>>(), vec![3, 129]);
        assert_eq!(s.len(), 2);
        assert!(s.remove(3));
        assert!(!s.contains(3));
    }
}
