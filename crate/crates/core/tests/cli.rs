use std::process::Command;

use mint_uwb::geometry::generate_vas;
use mint_uwb::harness::{default_plan, ScenarioConfig};

fn mint() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mint"))
}

#[test]
fn vas_lists_every_anchor() {
    let out = mint().args(["vas", "--max-order", "1"]).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("# mint-vas v1"));
    assert_eq!(lines.next(), Some("bs_id,va_id,order,x,y,mirror_walls"));
    let rows: Vec<&str> = lines.collect();
    let c = ScenarioConfig::default();
    let expected: usize = c.base_stations.iter().enumerate().map(|(i, &b)| generate_vas(&default_plan(), b, i, 1).len()).sum();
    assert_eq!(rows.len(), expected);
    assert!(rows[0].starts_with("0,0,0,1,3.5,"));
}

#[test]
fn bad_config_exits_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, "spacing = -1.0\n").unwrap();
    let out = mint().args(["run", "--config"]).arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("mint: error:"));
}

#[test]
fn small_run_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    let c = ScenarioConfig {
        waypoints: vec![[3.0, 1.8].into(), [4.0, 1.8].into()],
        ..ScenarioConfig::default()
    };
    std::fs::write(&cfg, c.to_toml()).unwrap();
    let out_dir = dir.path().join("out");
    let out = mint()
        .args(["run", "--tracker", "mint-gada,ekf-jbsf", "--pulse", "0.5", "--obstruction", "off", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary = std::fs::read_to_string(out_dir.join("summary.csv")).unwrap();
    let lines: Vec<&str> = summary.lines().collect();
    assert_eq!(lines[0], "# mint-summary v1");
    assert_eq!(lines.len(), 4);
    assert!(lines[2].starts_with("mint-gada,0.5,off,"));
    assert!(out_dir.join("trace.csv").exists());
    assert!(out_dir.join("ranging_cdf.csv").exists());
}

#[test]
fn range_test_reports_the_truth() {
    let out = mint().args(["range-test", "--pulse", "1", "--position", "3", "--bs", "1"]).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let truth: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("# true_distance_m="))
        .unwrap()
        .parse()
        .unwrap();
    let ml: f64 = text.lines().find_map(|l| l.strip_prefix("# ml_distance_m=")).unwrap().parse().unwrap();
    assert!((truth - ml).abs() < 0.5);
}

#[test]
fn unknown_pulse_is_an_error() {
    let out = mint().args(["crlb", "--pulse", "3"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}
