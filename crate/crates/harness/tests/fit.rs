use sleeping_mis_harness::fit::{fit_growth, FitError, GrowthModel};

fn ns() -> Vec<usize> {
    (10..=20).step_by(2).map(|e| 1usize << e).collect()
}

#[test]
fn exact_loglog_series() {
    let s: Vec<(usize, f64)> = ns().into_iter().map(|n| (n, 5.0 * (n as f64).log2().log2())).collect();
    let f = fit_growth(&s, GrowthModel::Loglog).unwrap();
    assert!((f.k - 5.0).abs() < 1e-12);
    assert!(f.residual < 1e-9);
    assert!(!f.over_model && !f.under_model);
}

#[test]
fn every_model_recovers_its_own_constant() {
    for m in GrowthModel::ALL {
        let s: Vec<(usize, f64)> = ns().into_iter().map(|n| (n, 2.5 * m.shape(n as f64))).collect();
        let f = fit_growth(&s, m).unwrap();
        assert!((f.k - 2.5).abs() < 1e-9, "{m}");
        assert_eq!(m.name().parse::<GrowthModel>().unwrap(), m);
    }
}

#[test]
fn constant_series_is_over_model() {
    let s: Vec<(usize, f64)> = ns().into_iter().map(|n| (n, 10.0)).collect();
    let f = fit_growth(&s, GrowthModel::Loglog).unwrap();
    assert!(f.over_model);
    assert!(f.ratios.windows(2).all(|w| w[1].1 < w[0].1));
    assert!(f.residual > 0.0);
}

#[test]
fn shapes_at_known_points() {
    let n = 65536.0;
    assert_eq!(GrowthModel::Log.shape(n), 16.0);
    assert_eq!(GrowthModel::Loglog.shape(n), 4.0);
    assert_eq!(GrowthModel::Logsq.shape(n), 256.0);
    assert_eq!(GrowthModel::LoglogSq.shape(n), 16.0);
    // log* 65536 = 4
    assert_eq!(GrowthModel::LogLoglogLogstar.shape(n), 16.0 * 4.0 * 4.0);
}

#[test]
fn too_few_points() {
    let s = [(1024, 1.0), (1024, 2.0), (4096, 3.0)];
    assert_eq!(fit_growth(&s, GrowthModel::Log), Err(FitError::InsufficientData(2)));
    assert_eq!(fit_growth(&[], GrowthModel::Log), Err(FitError::InsufficientData(0)));
    assert!(matches!(
        fit_growth(&[(2, 1.0), (4, 1.0), (8, 1.0)], GrowthModel::Loglog),
        Err(FitError::DegenerateShape { n: 2, .. })
    ));
    assert!("cubic".parse::<GrowthModel>().is_err());
}
