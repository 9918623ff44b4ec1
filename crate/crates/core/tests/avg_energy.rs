use sleeping_mis::avg_energy::{
    half_degree_cap, half_iterations, phase1half_reduce, phase1half_reduce_with, run_avg_energy_pipeline,
    sparsify_low_degree, sparsify_stages, FailReason, Which,
};
use sleeping_mis::config::Config;
use sleeping_mis::engine::{EngineConfig, Simulator};
use sleeping_mis::graph::{generate_graph, is_independent, is_maximal_independent, Graph, GraphModel, NodeId, NodeSet};

fn set(g: &Graph, v: &[NodeId]) -> NodeSet {
    NodeSet::from_iter(g.n(), v.iter().copied())
}

#[test]
fn iteration_count() {
    // n = 2^16: log log log n = 2, so cap_exp 3 removes 6 doublings
    assert_eq!(half_iterations(1024, 1 << 16, 3.0), 10 - 6);
    assert_eq!(half_iterations(1023, 1 << 16, 3.0), 9 - 6);
    assert!(half_iterations(64, 1 << 16, 3.0) <= 0);
    assert_eq!(half_iterations(0, 1 << 16, 3.0), 0);
    let cfg = Config::desk();
    assert_eq!(half_degree_cap(1024, 1 << 16, 0, &cfg), 1024);
    assert_eq!(half_degree_cap(1024, 1 << 16, 4, &cfg), 64 + 4 * 8 * 4);
    assert_eq!(sparsify_stages(1 << 16), 4);
    assert_eq!(sparsify_stages(4), 0);
}

#[test]
fn edgeless_graph_stays_low_degree() {
    let g = Graph::empty(1 << 12);
    let all: Vec<NodeId> = g.nodes().collect();
    let mut sim = Simulator::new(&g, 3, EngineConfig::default());
    let p = phase1half_reduce(&mut sim, &all, 1 << 10, &Config::desk()).unwrap();
    assert!(p.iterations > 0);
    assert!(p.f.is_empty());
    assert_eq!(p.a_max_degree, 0);
    assert_eq!(p.a.len() + p.joined.len(), all.len());
}

#[test]
fn partition_is_consistent() {
    let cfg = Config::desk();
    let g = generate_graph(&GraphModel::gnp_avg_degree(1 << 14, 200.0), 11).unwrap();
    let all: Vec<NodeId> = g.nodes().collect();
    let d2 = g.max_degree();
    let mut sim = Simulator::new(&g, 11, EngineConfig::default());
    let p = phase1half_reduce(&mut sim, &all, d2, &cfg).unwrap();
    assert!(p.iterations > 0);
    let joined = set(&g, &p.joined);
    assert!(is_independent(&g, &joined));
    let (a, f) = (set(&g, &p.a), set(&g, &p.f));
    for v in g.nodes() {
        let parts = [joined.contains(v), a.contains(v), f.contains(v)];
        assert!(parts.iter().filter(|&&x| x).count() <= 1, "node {v} in two parts");
        if !parts.contains(&true) {
            assert!(g.neighbors(v).iter().any(|&u| joined.contains(u)), "node {v} dropped uncovered");
        }
        if a.contains(v) {
            assert!(!g.neighbors(v).iter().any(|&u| joined.contains(u)));
        }
    }
    let a_deg = p.a.iter().map(|&v| g.neighbors(v).iter().filter(|&&u| a.contains(u)).count()).max().unwrap_or(0);
    assert_eq!(a_deg, p.a_max_degree);
    assert!(a_deg <= p.cap);
    assert_eq!(p.failures.len(), p.f.len());
    assert!(p.f.len() * 4 < g.n());
    assert!(sim.violations().is_empty());
}

#[test]
fn injected_failure_sleeps_after_announcing() {
    let cfg = Config::desk();
    let g = generate_graph(&GraphModel::gnp_avg_degree(1 << 16, 8.0), 2).unwrap();
    let all: Vec<NodeId> = g.nodes().collect();
    let engine = EngineConfig { record_awake_sets: true, ..EngineConfig::default() };
    let mut sim = Simulator::new(&g, 2, engine);
    let victims = [17, 4242];
    let p = phase1half_reduce_with(&mut sim, &all, 1024, &cfg, &victims).unwrap();
    let t = sim.finish();
    let sets = t.awake_sets.unwrap();
    assert!(p.failures.iter().any(|f| f.reason == FailReason::Injected));
    for v in victims {
        let Some(fl) = p.failures.iter().find(|f| f.node == v) else {
            // a victim that joined or was covered before the check cannot fail
            assert!(!p.a.contains(&v));
            continue;
        };
        assert_eq!(fl.reason, FailReason::Injected);
        assert_eq!(fl.iteration, 0);
        assert!(sets.iter().any(|(r, s)| *r == fl.announced && s.contains(&v)));
        assert!(sets.iter().all(|(r, s)| *r <= fl.announced || !s.contains(&v)));
    }
}

#[test]
fn sparsify_stages_shrink_the_rest() {
    let cfg = Config::desk();
    let g = generate_graph(&GraphModel::gnp_avg_degree(1 << 14, 16.0), 4).unwrap();
    let all: Vec<NodeId> = g.nodes().collect();
    let mut sim = Simulator::new(&g, 4, EngineConfig::default());
    let o = sparsify_low_degree(&mut sim, &all, 0, 0, &cfg).unwrap();
    assert!(o.joined.is_empty());
    assert_eq!(o.remaining.len(), all.len());

    let d = g.max_degree();
    let o = sparsify_low_degree(&mut sim, &all, d, 4, &cfg).unwrap();
    assert!(o.remaining.len() as f64 <= cfg.k_s * all.len() as f64 / 16.0);
    assert!(!o.over_bound);
    let j = set(&g, &o.joined);
    assert!(is_independent(&g, &j));
    let rem = set(&g, &o.remaining);
    for v in g.nodes() {
        if !j.contains(v) && !rem.contains(v) {
            assert!(g.neighbors(v).iter().any(|&u| j.contains(u)));
        }
    }

    let e = Graph::empty(100);
    let all: Vec<NodeId> = e.nodes().collect();
    let mut sim = Simulator::new(&e, 4, EngineConfig::default());
    let o = sparsify_low_degree(&mut sim, &all, 0, 1, &cfg).unwrap();
    assert_eq!(o.joined.len(), 100);
    assert!(o.remaining.is_empty());
}

#[test]
fn pipeline_small_cases() {
    let cfg = Config::desk();
    for which in [Which::Alg1, Which::Alg2] {
        let g = Graph::empty(1);
        let (s, r) = run_avg_energy_pipeline(&g, which, &cfg, 0, EngineConfig::default()).unwrap();
        assert!(s.contains(0));
        assert!(r.avg_energy);
        let g = Graph::from_edges(2, &[(0, 1)]).unwrap();
        let (s, _) = run_avg_energy_pipeline(&g, which, &cfg, 0, EngineConfig::default()).unwrap();
        assert_eq!(s.len(), 1);
    }
}

#[test]
fn pipeline_on_sparse_random_graph() {
    let cfg = Config::desk();
    let g = generate_graph(&GraphModel::gnp_avg_degree(1 << 16, 8.0), 6).unwrap();
    for which in [Which::Alg1, Which::Alg2] {
        let (s, r) = run_avg_energy_pipeline(&g, which, &cfg, 6, EngineConfig::default()).unwrap();
        assert!(is_maximal_independent(&g, &s), "{which:?}");
        assert!(r.mean_awake <= cfg.a_max, "{which:?} mean {}", r.mean_awake);
        assert_eq!(r.budget_violations + r.other_violations, 0);
        assert_eq!(r.unintended_drops, 0);
    }
}
