use std::fs;

use permstab::lab::oracle::z2_perturbed;
use permstab::lab::{
    nearest_homomorphism_bruteforce, run_experiment, ExperimentConfig, GridConfig, OracleCaps,
};
use permstab::{Error, Rational};

#[test]
fn empty_grid_writes_only_summary() {
    let dir = tempfile::tempdir().unwrap();
    let report = run_experiment(&ExperimentConfig::default(), dir.path()).unwrap();
    assert_eq!(report.instances, 0);
    let names: Vec<String> = fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    assert_eq!(names, vec!["summary.txt".to_string()]);
}

#[test]
fn invalid_window_is_a_config_error() {
    let cfg = ExperimentConfig::from_toml_str("[grid]\nwindow = [\"1/5\", \"1/6\"]\n");
    assert!(matches!(cfg, Err(Error::Config(_))));
    let cfg = ExperimentConfig::from_toml_str("[grid]\nwindow = [\"1/7\", \"2/3\"]\n");
    assert!(matches!(cfg, Err(Error::Config(_))));
    let cfg = ExperimentConfig::from_toml_str("seed = 1\nunknown = 2\n");
    assert!(matches!(cfg, Err(Error::Config(_))));
}

#[test]
fn small_run_reports_every_section() {
    let cfg = ExperimentConfig {
        seed: 5,
        grid: GridConfig {
            flagship_primes: vec![7, 11],
            rounding_instances: 3,
            oracle_points: vec![3],
            ..GridConfig::default()
        },
        ..ExperimentConfig::default()
    };
    let dir = tempfile::tempdir().unwrap();
    let report = run_experiment(&cfg, dir.path()).unwrap();
    assert_eq!(report.violations, 0);
    assert!(report.failures.is_empty(), "{:?}", report.failures);
    // p = 11 has an empty window: recorded as a row, not an abort
    let families = fs::read_to_string(dir.path().join("families.csv")).unwrap();
    assert_eq!(families.lines().count(), 3);
    assert!(families.lines().any(|l| l.starts_with("11,") && l.contains("window-empty")), "{families}");
    let rounding = fs::read_to_string(dir.path().join("rounding.csv")).unwrap();
    assert_eq!(rounding.lines().count(), 1 + 4 * 3);
    assert!(dir.path().join("instances/family_p7.json").exists());
}

#[test]
fn local_search_never_beats_exhaustive() {
    for n in 3..=5 {
        let m = z2_perturbed(n, 1, (0, n / 2)).unwrap();
        let exact = nearest_homomorphism_bruteforce(&m, &OracleCaps::default()).unwrap();
        assert!(exact.exhaustive);
        let caps = OracleCaps { exhaustive_cap: 1, ..OracleCaps::default() };
        let local = nearest_homomorphism_bruteforce(&m, &caps).unwrap();
        assert!(!local.exhaustive);
        assert!(local.best_hom.is_homomorphism().unwrap());
        assert!(local.max_distance >= exact.max_distance);
        assert!(exact.max_distance <= Rational::new(2, n as i64));
    }
    let m = z2_perturbed(9, 2, (0, 4)).unwrap();
    let caps = OracleCaps { allow_fallback: false, ..OracleCaps::default() };
    assert!(matches!(nearest_homomorphism_bruteforce(&m, &caps), Err(Error::Capacity { .. })));
}
