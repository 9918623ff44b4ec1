use sleeping_mis::engine::{EngineConfig, Simulator};
use sleeping_mis::graph::{generate_graph, is_independent, is_maximal_independent, Graph, GraphModel, NodeId};
use sleeping_mis::mis_core::{desire_level_mis, packed_parallel_mis, run_luby};

fn all(g: &Graph) -> Vec<NodeId> {
    g.nodes().collect()
}

#[test]
fn luby_small_cases() {
    let g = Graph::empty(1);
    let mut s = Simulator::new(&g, 0, EngineConfig::default());
    let o = run_luby(&mut s, &[0], 1, 0).unwrap();
    assert!(o.in_mis.contains(0));

    let g = Graph::empty(10);
    let mut s = Simulator::new(&g, 0, EngineConfig::default());
    assert_eq!(run_luby(&mut s, &all(&g), 1, 0).unwrap().in_mis.len(), 10);

    let g = Graph::from_edges(2, &[(0, 1)]).unwrap();
    for seed in 0..200 {
        let mut s = Simulator::new(&g, seed, EngineConfig::default());
        let o = run_luby(&mut s, &[0, 1], 40, 0).unwrap();
        assert_eq!(o.in_mis.len(), 1, "seed {seed}");
        assert!(is_maximal_independent(&g, &o.in_mis));
    }
}

#[test]
fn luby_on_random_graph_is_maximal() {
    let g = generate_graph(&GraphModel::gnp_avg_degree(2000, 12.0), 3).unwrap();
    let mut s = Simulator::new(&g, 3, EngineConfig::default());
    let o = run_luby(&mut s, &all(&g), 4 * 11, 0).unwrap();
    assert!(is_maximal_independent(&g, &o.in_mis));
    assert_eq!(s.messages().unintended_drops, 0);
}

#[test]
fn desire_edgeless_and_k2() {
    let g = Graph::empty(10);
    for seed in 0..50 {
        let mut s = Simulator::new(&g, seed, EngineConfig::default());
        let o = desire_level_mis(&mut s, &all(&g), 12, 0).unwrap();
        assert_eq!(o.in_mis.len(), 10, "seed {seed}");
    }
    let g = Graph::from_edges(2, &[(0, 1)]).unwrap();
    let mut done = 0;
    for seed in 0..200 {
        let mut s = Simulator::new(&g, seed, EngineConfig::default());
        let o = desire_level_mis(&mut s, &[0, 1], 20, 0).unwrap();
        assert!(is_independent(&g, &o.in_mis));
        done += o.remaining.is_empty() as u32;
    }
    assert!(done >= 198, "{done}");
}

#[test]
fn desire_shrinks_bounded_degree_graph() {
    let n = 1 << 12;
    let mut good = 0;
    for seed in 0..20 {
        let g = generate_graph(&GraphModel::RandomRegular { n, d: 20 }, seed).unwrap();
        let mut s = Simulator::new(&g, seed, EngineConfig::default());
        let o = desire_level_mis(&mut s, &all(&g), 2 * 5, 0).unwrap();
        assert!(is_independent(&g, &o.in_mis));
        good += (o.remaining.len() <= n / 8) as u32;
    }
    assert!(good >= 19, "{good}");
}

#[test]
fn packed_success_bits_match_oracle() {
    let g = Graph::empty(1);
    let mut s = Simulator::new(&g, 0, EngineConfig::default());
    let o = packed_parallel_mis(&mut s, &[0], 2, 30, 0).unwrap();
    assert_eq!(o.success[0], 0b11);
    // 2k bits per status message must fit the budget
    let mut s = Simulator::new(&g, 0, EngineConfig::default());
    assert!(packed_parallel_mis(&mut s, &[0], 3, 3, 0).is_err());

    let mut any_ok = 0;
    for seed in 0..100 {
        let g = generate_graph(&GraphModel::gnp_avg_degree(60, 5.0), seed).unwrap();
        let mut s = Simulator::new(&g, seed, EngineConfig::default());
        let k = 6;
        let o = packed_parallel_mis(&mut s, &all(&g), k, 12, 0).unwrap();
        let mut found = false;
        for e in 0..k {
            let every = o.success.iter().all(|&b| b >> e & 1 == 1);
            let ex = &o.executions[e];
            assert!(is_independent(&g, &ex.in_mis));
            assert_eq!(every, is_maximal_independent(&g, &ex.in_mis), "seed {seed} exec {e}");
            found |= every;
        }
        any_ok += found as u32;
        assert!(s.violations().is_empty());
    }
    assert!(any_ok >= 99, "{any_ok}");
}
