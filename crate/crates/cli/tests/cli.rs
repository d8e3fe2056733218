use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_nevsamp"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli").join(name);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn ok_json(args: &[&str]) -> Value {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("report is JSON")
}

fn error_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stderr).expect("error is JSON")
}

#[test]
fn dyadic_generate_then_hl_analyze() {
    let dir = scratch("dyadic");
    let cfg = dir.join("c.json");
    let cfg = cfg.to_str().unwrap();
    let g = ok_json(&["generate", "--kind", "dyadic", "--depth", "3", "--out", cfg]);
    assert_eq!(g["hashable"]["result"]["points"], 14);
    let big = dir.join("big.json");
    ok_json(&["generate", "--kind", "dyadic", "--depth", "10", "--out", big.to_str().unwrap()]);
    let csv = dir.join("hl.csv");
    let r = ok_json(&["analyze", "--config", big.to_str().unwrap(), "--criterion", "hl", "--zeta", "0", "--delta", "0.4", "--csv", csv.to_str().unwrap()]);
    assert_eq!(r["hashable"]["result"]["series"]["classification"], "Divergent");
    let text = std::fs::read_to_string(csv).unwrap();
    assert_eq!(text.lines().next().unwrap(), "n,count,term,partial_sum");
    assert_eq!(text.lines().count(), 11);
}

#[test]
fn generated_configurations_feed_their_criteria() {
    let dir = scratch("roundtrip");
    let cases: [(&[&str], &str, &str); 3] = [
        (&["--kind", "net", "--g", "pow:0.25"], "net", "NonSampling"),
        (&["--kind", "rings", "--q", "0.5", "--spacing", "geometric:0.5"], "rings", "Sampling"),
        (&["--kind", "disks", "--phi", "expinv:1"], "udisks", "NonSampling"),
    ];
    for (gen, criterion, verdict) in cases {
        let cfg = dir.join(format!("{criterion}.json"));
        let mut args = vec!["generate", "--depth", "6", "--out", cfg.to_str().unwrap()];
        args.extend_from_slice(gen);
        ok_json(&args);
        let r = ok_json(&["analyze", "--config", cfg.to_str().unwrap(), "--criterion", criterion]);
        assert_eq!(r["hashable"]["result"]["verdict"], verdict, "{criterion}");
    }
}

#[test]
fn example1_witness_is_bounded() {
    let r = ok_json(&["witness", "--type", "example1", "--c", "1", "--depth", "12"]);
    let v = &r["hashable"]["result"]["verification"];
    assert_eq!(v["bounded_on_lambda"], true);
    assert!(v["unbounded_radially_indicator"].as_f64().unwrap() > 1.5);
}

#[test]
fn randomized_commands_require_a_seed() {
    let dir = scratch("seed");
    let cfg = dir.join("c.json");
    ok_json(&["generate", "--kind", "dyadic", "--depth", "4", "--out", cfg.to_str().unwrap()]);
    for args in [
        vec!["hm", "--phi", "pow:1", "--levels", "3..4", "--walks", "100"],
        vec!["vuln", "--config", cfg.to_str().unwrap(), "--square", "3,1", "--N", "1", "--mode", "opt"],
        vec!["analyze", "--config", cfg.to_str().unwrap(), "--criterion", "witness", "--dist-random", "1"],
    ] {
        let out = run(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert_eq!(error_json(&out)["error"]["kind"], "usage");
    }
}

#[test]
fn usage_and_precondition_errors_exit_two() {
    let out = run(&["generate", "--kind", "dyadic", "--depth", "3", "--out", "x.json", "--bogus"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));

    // the appendix construction needs a convergent Hayman-Lyons sum; dyadic centers diverge
    let dir = scratch("precondition");
    let cfg = dir.join("c.json");
    ok_json(&["generate", "--kind", "dyadic", "--depth", "10", "--out", cfg.to_str().unwrap()]);
    let out = run(&["witness", "--type", "appendix", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_json(&out)["error"]["kind"], "inapplicable");

    let out = run(&["generate", "--kind", "net", "--depth", "3", "--out", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn hm_csv_layout() {
    let dir = scratch("hm");
    let csv = dir.join("hm.csv");
    ok_json(&["hm", "--phi", "pow:1", "--levels", "2..3", "--walks", "200", "--seed", "3", "--csv", csv.to_str().unwrap()]);
    let text = std::fs::read_to_string(csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "n,R_n,excised_count,escape,stderr,stalled,eps_product_C0.1,eps_product_C0.5,eps_product_C1");
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row.len(), 9);
    // C = 1 exceeds log(1/φ(1/2)) = log 2, so that product is undefined
    assert_eq!(row[8], "NaN");
}

#[test]
fn reports_go_to_files_and_hash_their_manifest() {
    let dir = scratch("files");
    let report = dir.join("r.json");
    let out = run(&["hm", "--phi", "expinv:1", "--levels", "3", "--walks", "300", "--seed", "9", "--report", report.to_str().unwrap()]);
    assert!(out.status.success());
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(r["hashable"]["manifest"]["seed"], 9);
    assert_eq!(r["hashable"]["manifest"]["command"], "hm");
    assert_eq!(r["hash"].as_str().unwrap().len(), 64);
    assert!(r["timestamp_unix"].as_u64().unwrap() > 0);
}
