use sleeping_mis::schedule::{build_awake_sets, size_bound, verify_awake_sets};

#[test]
fn every_length_up_to_4096() {
    for t in 1..=4096u64 {
        let sets = build_awake_sets(t).unwrap().sets();
        assert!(verify_awake_sets(t, &sets), "T={t}");
        assert!(sets.iter().all(|s| s.len() <= size_bound(t)), "T={t}");
    }
}
