use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn permstab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_permstab")).args(args).output().unwrap()
}

fn json(out: &Output) -> serde_json::Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn small_config() -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/small.toml").display().to_string()
}

#[test]
fn kazhdan_cyclic_is_exact() {
    let v = json(&permstab(&["kazhdan", "cyclic(8)"]));
    let lower = v["bracket"]["lower"].as_f64().unwrap();
    assert!((lower - 2.0 * (std::f64::consts::PI / 8.0).sin()).abs() < 1e-9);
}

#[test]
fn build_family_then_defect_and_oracle_read_the_map() {
    let dir = tempfile::tempdir().unwrap();
    let map = dir.path().join("m.json");
    let v = json(&permstab(&["build-family", "--p", "7", "--out", map.to_str().unwrap()]));
    assert_eq!(v["order"], 336);
    let d = json(&permstab(&["defect", "--map", map.to_str().unwrap()]));
    assert!(d["relator_defects"].as_array().is_some_and(|a| !a.is_empty()));
    let d = json(&permstab(&["defect", "--p", "7"]));
    assert_eq!(d["closed_form_agrees"], true);
}

#[test]
fn empty_window_fails_cleanly() {
    let out = permstab(&["build-family", "--p", "11"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("window"));
}

#[test]
fn oracle_on_small_z2() {
    let v = json(&permstab(&["oracle", "--z2", "4"]));
    assert_eq!(v["exhaustive"], true);
    assert_eq!(v["search_space_size"], 576);
}

#[test]
fn round_recovers_exact_action() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("r.json");
    fs::write(&inst, r#"{"group":"cyclic(6)","y_size":8,"k_gens":[[1,2,3,4,5,0,7,6]]}"#).unwrap();
    let v = json(&permstab(&["round", inst.to_str().unwrap()]));
    assert_eq!(v["x1"].as_array().unwrap().len(), 6);
    assert_eq!(v["bounds"]["moved"], 0);
}

#[test]
fn run_is_deterministic_and_exits_zero() {
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for d in &dirs {
        let out = permstab(&["run", "--config", &small_config(), "--seed", "3", "--out", d.path().to_str().unwrap()]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    for f in ["kazhdan.csv", "families.csv", "rounding.csv", "oracle.csv"] {
        let a = fs::read(dirs[0].path().join(f)).unwrap();
        assert_eq!(a, fs::read(dirs[1].path().join(f)).unwrap(), "{f}");
    }
    assert!(dirs[0].path().join("summary.txt").exists());
}

#[test]
fn run_config_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "[grid]\nwindow = [\"1/3\", \"1/4\"]\n").unwrap();
    let out = permstab(&["run", "--config", bad.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let out = permstab(&["run", "--config", "/nonexistent.toml", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    // no output directory anywhere
    fs::write(&bad, "seed = 1\n").unwrap();
    assert_eq!(permstab(&["run", "--config", bad.to_str().unwrap()]).status.code(), Some(1));
}
