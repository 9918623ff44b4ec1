use std::collections::BTreeMap;

use sleeping_mis::engine::{EngineConfig, Simulator, Words};
use sleeping_mis::graph::{Graph, NodeId};
use sleeping_mis::trees::{
    elect_root_and_build_tree, ldt_broadcast, ldt_convergecast, merge_stars, ClusterForest,
};

fn sim(g: &Graph) -> Simulator<'_> {
    Simulator::new(g, 1, EngineConfig::default())
}

fn bit(v: u64) -> Words<1> {
    Words { w: [v], bits: 8 }
}

fn path_forest(len: u32, d_bound: u32) -> (Graph, ClusterForest) {
    let edges: Vec<_> = (1..len).map(|i| (i - 1, i)).collect();
    let g = Graph::from_edges(len as usize, &edges).unwrap();
    let parents = (0..len).map(|i| (i, i.checked_sub(1))).collect();
    let f = ClusterForest::from_parents(len as usize, &parents, d_bound).unwrap();
    (g, f)
}

#[test]
fn elect_single_node() {
    let g = Graph::empty(1);
    let mut s = sim(&g);
    let labels = BTreeMap::from([(0, 0)]);
    let f = elect_root_and_build_tree(&mut s, &labels, 1, 4).unwrap();
    assert!(f.is_root(0));
    assert_eq!(f.depth(0), 0);
}

#[test]
fn elect_path_and_star() {
    let g = Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
    let mut s = sim(&g);
    let labels = (0..3).map(|v| (v, 7)).collect();
    let f = elect_root_and_build_tree(&mut s, &labels, 2, 4).unwrap();
    assert_eq!([f.depth(0), f.depth(1), f.depth(2)], [0, 1, 2]);
    assert_eq!(f.cluster(2), 0);
    f.check_invariants(&g).unwrap();

    let edges: Vec<_> = (0..5).map(|l| (9, l)).collect();
    let g = Graph::from_edges(10, &edges).unwrap();
    let mut s = sim(&g);
    let labels = [0, 1, 2, 3, 4, 9].into_iter().map(|v| (v, 9)).collect();
    let f = elect_root_and_build_tree(&mut s, &labels, 2, 4).unwrap();
    assert!(f.is_root(0));
    assert_eq!(f.depth(9), 1);
    assert_eq!(f.max_depth(), 2);
    f.check_invariants(&g).unwrap();
    assert_eq!(s.ledger().awake[9], 5);
}

#[test]
fn elect_reports_disconnected_label() {
    let g = Graph::from_edges(3, &[(0, 1)]).unwrap();
    let mut s = sim(&g);
    let labels = (0..3).map(|v| (v, 0)).collect();
    assert!(elect_root_and_build_tree(&mut s, &labels, 2, 4).is_err());
}

#[test]
fn broadcast_singleton_and_path() {
    let g = Graph::empty(1);
    let f = ClusterForest::singletons(1, &[0], 3);
    let mut s = sim(&g);
    let held = ldt_broadcast(&mut s, &f, |_| true, |_| bit(5)).unwrap();
    assert_eq!(held, vec![Some(bit(5))]);
    assert_eq!(s.ledger().awake, vec![1]);

    let (g, f) = path_forest(4, 3);
    let mut s = sim(&g);
    let b = s.budget_bits();
    let full = Words { w: [0xabc], bits: b };
    let held = ldt_broadcast(&mut s, &f, |_| true, |_| full).unwrap();
    assert!(held.iter().all(|&h| h == Some(full)));
    assert!(s.clock() <= 4);
    assert!(s.ledger().awake.iter().all(|&a| a <= 2));
    assert_eq!(s.messages().unintended_drops, 0);
}

#[test]
fn convergecast_and_min_sum() {
    let (g, f) = path_forest(5, 6);
    let mut s = sim(&g);
    let and = ldt_convergecast(&mut s, &f, |_| true, |_| bit(1), |a, b| bit(a.w[0] & b.w[0])).unwrap();
    assert_eq!(and[&0], bit(1));
    let min = ldt_convergecast(&mut s, &f, |_| true, |v| bit(10 - v as u64), |a, b| bit(a.w[0].min(b.w[0]))).unwrap();
    assert_eq!(min[&0], bit(6));
    assert!(s.ledger().awake.iter().all(|&a| a <= 4));

    let edges: Vec<_> = (1..=10).map(|l| (0, l)).collect();
    let g = Graph::from_edges(11, &edges).unwrap();
    let parents = (0..=10).map(|v| (v, (v > 0).then_some(0))).collect();
    let f = ClusterForest::from_parents(11, &parents, 2).unwrap();
    let mut s = sim(&g);
    let sum = ldt_convergecast(&mut s, &f, |_| true, |v| bit((v > 0) as u64), |a, b| bit(a.w[0] + b.w[0])).unwrap();
    assert_eq!(sum[&0], bit(10));
    assert_eq!(s.messages().unintended_drops, 0);
}

#[test]
fn merge_two_singletons() {
    let g = Graph::from_edges(2, &[(0, 1)]).unwrap();
    let mut f = ClusterForest::singletons(2, &[0, 1], 4);
    let mut s = sim(&g);
    merge_stars(&mut s, &mut f, &[(0, 1)]).unwrap();
    assert_eq!(f.num_clusters(), 1);
    assert_eq!(f.depth(1), 1);
    f.check_invariants(&g).unwrap();
}

#[test]
fn merge_two_depth_one_stars() {
    // stars {0; 1, 2} and {3; 4, 5}, matched along edge (2, 4)
    let g = Graph::from_edges(6, &[(0, 1), (0, 2), (3, 4), (3, 5), (2, 4)]).unwrap();
    let parents = BTreeMap::from([(0, None), (1, Some(0)), (2, Some(0)), (3, None), (4, Some(3)), (5, Some(3))]);
    let mut f = ClusterForest::from_parents(6, &parents, 6).unwrap();
    let mut s = sim(&g);
    merge_stars(&mut s, &mut f, &[(2, 4)]).unwrap();
    f.check_invariants(&g).unwrap();
    assert_eq!(f.num_clusters(), 1);
    assert!(f.is_root(0));
    assert!(f.max_depth() <= 4);
    assert_eq!(f.parent(3), Some(4));
    assert_eq!(f.depth(5), 4);
    assert_eq!(s.messages().unintended_drops, 0);
}

#[test]
fn merge_nine_leaves_into_center() {
    let mut edges = Vec::new();
    for l in 1..=9u32 {
        edges.push((0, l));
    }
    let g = Graph::from_edges(10, &edges).unwrap();
    let mut f = ClusterForest::singletons(10, &(0..10).collect::<Vec<_>>(), 4);
    let mut s = sim(&g);
    let attach: Vec<(NodeId, NodeId)> = (1..=9).map(|l| (0, l)).collect();
    assert_eq!(f.num_clusters(), 10);
    merge_stars(&mut s, &mut f, &attach).unwrap();
    assert_eq!(f.num_clusters(), 1);
    f.check_invariants(&g).unwrap();
}

#[test]
fn merge_rejects_non_star() {
    let g = Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
    let mut f = ClusterForest::singletons(3, &[0, 1, 2], 4);
    let mut s = sim(&g);
    assert!(merge_stars(&mut s, &mut f, &[(0, 1), (1, 2)]).is_err());
}
