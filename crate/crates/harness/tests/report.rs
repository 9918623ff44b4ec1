use sleeping_mis::avg_energy::Which;
use sleeping_mis::config::{Config, Profile};
use sleeping_mis::engine::ViolationMode;
use sleeping_mis::record::RunRecord;
use sleeping_mis_harness::report::{fit_rows, quantile, read_records, summarize, write_csv, SUMMARY_HEADER};
use sleeping_mis_harness::settings::{parse_pairs, resolve, SettingsError};
use sleeping_mis_harness::sweep::{run_sweep, AlgSpec, ModelSpec, SweepSpec};

fn record(alg: &str, n: usize, max_awake: u64, maximal: bool) -> RunRecord {
    RunRecord {
        schema_version: 1,
        algorithm: alg.into(),
        avg_energy: false,
        seed: 0,
        graph: "gnp:avg_deg=8".into(),
        n,
        m: 0,
        max_degree: 0,
        config: Config::desk(),
        phases: vec![],
        total_rounds: 10 * max_awake,
        max_awake,
        mean_awake: 1.0,
        mis_size: 1,
        independent: true,
        maximal,
        budget_violations: 0,
        other_violations: 0,
        unintended_drops: 0,
        declared_drops: 0,
        delivered: 0,
        flags: vec![],
        stats: Default::default(),
        wall_clock_ms: 0,
    }
}

#[test]
fn quantiles_interpolate() {
    let v = [1.0, 2.0, 3.0, 4.0];
    assert_eq!(quantile(&v, 0.0), 1.0);
    assert_eq!(quantile(&v, 1.0), 4.0);
    assert_eq!(quantile(&v, 0.5), 2.5);
    assert!(quantile(&[], 0.5).is_nan());
}

#[test]
fn summary_groups_by_algorithm_and_n() {
    let rs = vec![
        record("alg1", 16, 4, true),
        record("alg1", 16, 6, false),
        record("alg1", 32, 5, true),
        record("alg2", 16, 9, true),
    ];
    let rows = summarize(&rs);
    assert_eq!(rows.len(), 3);
    let r = &rows[0];
    assert_eq!((r.algorithm.as_str(), r.n, r.runs), ("alg1", 16, 2));
    assert_eq!(r.max_awake_p50, 5.0);
    assert_eq!(r.max_awake_max, 6.0);
    assert_eq!(r.not_maximal_rate, 0.5);
    assert_eq!(r.rounds_max, 60.0);
    // order of the input does not matter
    let mut rev = rs.clone();
    rev.reverse();
    assert_eq!(summarize(&rev), rows);
}

#[test]
fn empty_report_is_header_only() {
    let mut out = Vec::new();
    write_csv(&mut out, &SUMMARY_HEADER, &summarize(&[])).unwrap();
    let s = String::from_utf8(out).unwrap();
    assert_eq!(s.lines().count(), 1);
    assert!(s.starts_with("schema_version,algorithm,"));
}

#[test]
fn csv_rows_match_header() {
    let mut out = Vec::new();
    write_csv(&mut out, &SUMMARY_HEADER, &summarize(&[record("alg1", 16, 4, true)])).unwrap();
    let s = String::from_utf8(out).unwrap();
    let lines: Vec<&str> = s.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[1].split(',').count(), SUMMARY_HEADER.len());
}

#[test]
fn records_round_trip_through_json_lines() {
    let rs = [record("alg1", 16, 4, true), record("alg2", 64, 7, true)];
    let text: String = rs.iter().map(|r| serde_json::to_string(r).unwrap() + "\n\n").collect();
    let back = read_records(text.as_bytes()).unwrap();
    assert_eq!(back, rs);
    assert!(read_records("{not json}\n".as_bytes()).is_err());
}

#[test]
fn fits_need_three_sizes() {
    let two = [record("alg1", 16, 4, true), record("alg1", 256, 8, true)];
    assert!(fit_rows(&two).is_empty());
    let three = [record("alg1", 16, 4, true), record("alg1", 256, 6, true), record("alg1", 65536, 8, true)];
    let rows = fit_rows(&three);
    let ll = rows.iter().find(|r| r.metric == "max_awake" && r.model == "loglog").unwrap();
    assert!((ll.k - 2.0).abs() < 1e-12);
    assert!(ll.residual < 1e-9);
}

#[test]
fn settings_files() {
    let pairs = parse_pairs("# comment\nc = 3\n\nradius = 2 # inline\nmode = record_and_continue\n").unwrap();
    let s = resolve(Profile::Desk, &pairs).unwrap();
    assert_eq!(s.config.c, 3);
    assert_eq!(s.config.radius, Some(2));
    assert_eq!(s.engine.mode, ViolationMode::RecordAndContinue);
    let s = resolve(Profile::Desk, &parse_pairs("profile = paper").unwrap()).unwrap();
    assert_eq!(s.config, Config::paper());
    assert!(matches!(parse_pairs("just words"), Err(SettingsError::Syntax { line: 1 })));
    assert!(matches!(resolve(Profile::Desk, &parse_pairs("zzz = 1").unwrap()), Err(SettingsError::UnknownKey(_))));
    assert!(matches!(resolve(Profile::Desk, &parse_pairs("c = many").unwrap()), Err(SettingsError::BadValue { .. })));
}

#[test]
fn parallel_sweep_keeps_cell_order() {
    let spec = SweepSpec {
        ns: vec![256, 512],
        models: vec![ModelSpec::Gnp { avg_deg: 6.0 }],
        seeds: 3,
        first_seed: 0,
        algorithms: vec![AlgSpec::full(Which::Alg1, false), AlgSpec::full(Which::Alg2, true)],
        profile: Profile::Desk,
    };
    let settings = resolve(Profile::Desk, &[]).unwrap();
    let collect = |jobs| {
        let mut v = Vec::new();
        run_sweep(&spec, &settings, jobs, |r| v.push(r.canonical())).unwrap();
        v
    };
    let one = collect(1);
    assert_eq!(one.len(), 12);
    assert_eq!(one, collect(3));
    assert!(one.iter().all(|r| r.independent && r.maximal));
    let bad = SweepSpec { seeds: 0, ..spec.clone() };
    assert!(run_sweep(&bad, &settings, 1, |_| {}).is_err());
}
