//! End-to-end checks of the binary: exit codes, output determinism, and the
//! documented report shapes.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_netform"))
}

fn tmp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!(
        "netform-cli-test-{tag}-{}-{}",
        std::process::id(),
        std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).unwrap().as_nanos()
    ));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write(path: &Path, body: &str) {
    std::fs::write(path, body).unwrap();
}

fn json_of(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "bad json: {e}\nstdout: {}\nstderr: {}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

#[test]
fn stats_on_a_clique_file() {
    let dir = tmp_dir("stats");
    let path = dir.join("tri.edges");
    write(&path, "# triangle\n0 1\n0 2\n1 2\n");
    let out = bin().arg("stats").arg(&path).output().unwrap();
    assert!(out.status.success());
    let v = json_of(&out);
    assert_eq!(v["stats"]["alcc"], 1.0);
    assert_eq!(v["stats"]["gcc"], 1.0);
    assert_eq!(v["stats"]["diameter"], 1);
}

#[test]
fn stats_rejects_bad_edge_lists() {
    let dir = tmp_dir("badstats");
    let path = dir.join("bad.edges");
    write(&path, "0 0\n");
    let out = bin().arg("stats").arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn efficient_two_type_star_example() {
    let out = bin()
        .args([
            "efficient",
            "--two-type",
            "--f-alpha",
            "3",
            "--f-beta",
            "0.5",
            "--c",
            "2",
            "--delta",
            "0.8",
            "--na",
            "1",
            "--nb",
            "3",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let v = json_of(&out);
    assert_eq!(v["case"], "e");
    assert_eq!(v["partition"]["core"], serde_json::json!([0]));
    assert_eq!(v["links"], 3);
    // the same inputs at a low spatial discount give the empty network
    let out = bin()
        .args([
            "efficient",
            "--two-type",
            "--f-alpha",
            "3",
            "--f-beta",
            "0.5",
            "--c",
            "2",
            "--delta",
            "0.1",
            "--na",
            "1",
            "--nb",
            "3",
        ])
        .output()
        .unwrap();
    let v = json_of(&out);
    assert_eq!(v["links"], 0);
}

#[test]
fn oversize_brute_force_exits_with_size_code() {
    let out = bin()
        .args([
            "efficient",
            "--two-type",
            "--f-alpha",
            "3",
            "--f-beta",
            "1",
            "--c",
            "0.4",
            "--delta",
            "0.5",
            "--na",
            "4",
            "--nb",
            "3",
            "--brute",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("limit"), "{msg}");
}

#[test]
fn simulate_requires_a_seed() {
    let dir = tmp_dir("noseed");
    let cfg = dir.join("cfg.json");
    write(
        &cfg,
        r#"{"agents": 3, "strategy": {"kind": "complete", "target": "clique"}}"#,
    );
    let out = bin()
        .args(["simulate", "--mode", "foresighted", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("seed"));
}

#[test]
fn malformed_config_reports_line() {
    let dir = tmp_dir("badjson");
    let cfg = dir.join("cfg.json");
    write(&cfg, "{\n  \"agents\": 3,\n  oops\n}\n");
    let out = bin()
        .args(["simulate", "--mode", "foresighted", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains(":3:"), "expected a line anchor in: {msg}");
}

#[test]
fn simulate_outputs_are_byte_identical_across_reruns() {
    let dir = tmp_dir("determinism");
    let cfg = dir.join("cfg.json");
    write(
        &cfg,
        r#"{
  "seed": 11,
  "agents": 4,
  "gamma": 0.95,
  "epsilon": 0.001,
  "horizon": 300,
  "punishment_k": 5,
  "strategy": {"kind": "complete", "target": "cycle"},
  "deviations": [{"t": 40, "agent": 1, "action": "sever_all"}]
}"#,
    );
    // identical invocations (same manifest) must reproduce identical bytes
    let out_dir = dir.join("out");
    let run = || {
        let res = bin()
            .args(["simulate", "--mode", "foresighted", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(&out_dir)
            .output()
            .unwrap();
        assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    };
    run();
    let first: Vec<Vec<u8>> = ["summary_seed11.json", "trace_seed11.csv"]
        .iter()
        .map(|f| std::fs::read(out_dir.join(f)).unwrap())
        .collect();
    run();
    for (i, file) in ["summary_seed11.json", "trace_seed11.csv"].iter().enumerate() {
        let again = std::fs::read(out_dir.join(file)).unwrap();
        assert_eq!(first[i], again, "{file} differs between reruns");
    }
}

#[test]
fn simulate_seed_batch_writes_merged_summary() {
    let dir = tmp_dir("batch");
    let cfg = dir.join("cfg.json");
    write(
        &cfg,
        r#"{
  "seed": 1,
  "types": {"benefits": [2.0], "counts": [4]},
  "payoff": {"cost": 1.0, "delta": 0.5}
}"#,
    );
    let out = dir.join("runs");
    let res = bin()
        .args(["simulate", "--mode", "myopic", "--config"])
        .arg(&cfg)
        .args(["--seeds", "1..3", "--out"])
        .arg(&out)
        .output()
        .unwrap();
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let batch: serde_json::Value =
        serde_json::from_slice(&std::fs::read(out.join("batch_summary.json")).unwrap()).unwrap();
    assert_eq!(batch["seeds"], serde_json::json!([1, 2, 3]));
    assert!(batch["batch"]["mean_alcc"].is_number());
    for seed in 1..=3 {
        assert!(out.join(format!("summary_seed{seed}.json")).exists());
        assert!(out.join(format!("final_seed{seed}.edges")).exists());
    }
}

#[test]
fn equilibrium_demo_certifies_at_the_documented_point() {
    let out = bin()
        .args(["equilibrium", "--example1", "--gamma", "0.98", "--K", "60"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let v = json_of(&out);
    assert_eq!(v["equilibrium"], true);
    let out = bin()
        .args(["equilibrium", "--example1", "--gamma", "0.5", "--K", "60"])
        .output()
        .unwrap();
    let v = json_of(&out);
    assert_eq!(v["equilibrium"], false);
}

#[test]
fn stability_reports_blocking_witness() {
    let out = bin()
        .args([
            "stability",
            "--f-alpha",
            "11",
            "--f-beta",
            "2",
            "--c",
            "3",
            "--delta",
            "0.5",
            "--na",
            "2",
            "--nb",
            "2",
            "--brute",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let v = json_of(&out);
    assert_eq!(v["case"], "b");
    assert_eq!(v["closed_form_stable"], false);
    assert_eq!(v["brute_force"]["stable"], false);
    assert!(v["brute_force"]["blocking_group"].is_array());
}
