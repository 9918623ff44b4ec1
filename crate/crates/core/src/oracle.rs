//! Brute-force oracles for small graphs.

use rand::Rng;
use thiserror::Error;

use crate::graph::{Graph, NodeId};
use crate::rng::stream_rng;

/// Largest `n` for which every labelled graph is listed.
pub const EXHAUSTIVE_MAX_N: usize = 5;
pub const SAMPLED_MAX_N: usize = 8;
/// Graphs drawn per `n` above [`EXHAUSTIVE_MAX_N`].
pub const SAMPLES: usize = 10_000;
pub const MIS_ORACLE_MAX_N: usize = 20;

const SAMPLE_STREAM: u64 = 0x534d_414c;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("n = {n} is above the limit {max}")]
    TooLarge { n: usize, max: usize },
}

fn pairs(n: usize) -> Vec<(NodeId, NodeId)> {
    let mut out = Vec::new();
    for u in 0..n as NodeId {
        for v in u + 1..n as NodeId {
            out.push((u, v));
        }
    }
    out
}

fn graph_from_mask(n: usize, pairs: &[(NodeId, NodeId)], mask: u64) -> Graph {
    let edges: Vec<_> = pairs.iter().enumerate().filter(|&(i, _)| mask >> i & 1 == 1).map(|(_, &e)| e).collect();
    Graph::from_edges(n, &edges).expect("pairs are in range")
}

/// Every labelled graph on `n ≤ 5` nodes, or [`SAMPLES`] uniform labelled
/// graphs (each pair an edge with probability 1/2) for `n` in 6..=8.
pub fn enumerate_small_graphs(n: usize, seed: u64) -> Result<Vec<Graph>, OracleError> {
    if n > SAMPLED_MAX_N {
        return Err(OracleError::TooLarge { n, max: SAMPLED_MAX_N });
    }
    let pairs = pairs(n);
    if n <= EXHAUSTIVE_MAX_N {
        return Ok((0..1u64 << pairs.len()).map(|m| graph_from_mask(n, &pairs, m)).collect());
    }
    let mut rng = stream_rng(seed, SAMPLE_STREAM, n as u64);
    let full = (1u64 << pairs.len()) - 1;
    Ok((0..SAMPLES).map(|_| graph_from_mask(n, &pairs, rng.gen::<u64>() & full)).collect())
}

/// All maximal independent sets of `g`, each sorted, in increasing order of
/// their membership bitmask.
pub fn oracle_all_mis(g: &Graph) -> Result<Vec<Vec<NodeId>>, OracleError> {
    let n = g.n();
    if n > MIS_ORACLE_MAX_N {
        return Err(OracleError::TooLarge { n, max: MIS_ORACLE_MAX_N });
    }
    let adj: Vec<u32> = (0..n as NodeId).map(|v| g.neighbors(v).iter().fold(0, |m, &u| m | 1 << u)).collect();
    let mut out = Vec::new();
    for s in 0u32..1 << n {
        let ok = (0..n).all(|v| {
            if s >> v & 1 == 1 {
                adj[v] & s == 0
            } else {
                adj[v] & s != 0
            }
        });
        if ok {
            out.push((0..n as NodeId).filter(|&v| s >> v & 1 == 1).collect());
        }
    }
    Ok(out)
}
