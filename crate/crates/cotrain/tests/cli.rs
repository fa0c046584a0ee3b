mod common;

use std::fs;
use std::thread;

use common::{cli, free_addresses, repo_root, small_config, tcp_section, MEMORY};
use cotrain::data::read_model;
use cotrain_core::protocol::AbortReport;

#[test]
fn help_and_usage_errors() {
    assert_eq!(cli(&["--help"]), 0);
    assert_eq!(cli(&["simulate", "--help"]), 0);
    assert_eq!(cli(&["simulate", "--config", "x.toml", "--colour"]), 1);
    assert_eq!(cli(&["frobnicate"]), 1);
    assert_eq!(cli(&["simulate", "--config", "/nonexistent/run.toml"]), 1);
}

#[test]
fn simulate_writes_model_and_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), MEMORY);
    assert_eq!(cli(&["simulate", "--config", cfg.to_str().unwrap()]), 0);
    let model = read_model(&dir.path().join("out/model.csv")).unwrap();
    assert_eq!(model.len(), 2);
    let metrics = fs::read_to_string(dir.path().join("out/metrics.csv")).unwrap();
    assert!(metrics.starts_with("metric,value\nl2,"));
    assert!(metrics.contains("verify.bytes_sent,"));
}

#[test]
fn share_shift_script_aborts_with_gadget4_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), MEMORY);
    let script = repo_root().join("configs/share-shift.toml");
    assert_eq!(cli(&["adversary", "--script", script.to_str().unwrap(), "--config", cfg.to_str().unwrap()]), 2);
    let out = dir.path().join("out");
    assert!(!out.join("model.csv").exists());
    let report = AbortReport::parse(&fs::read_to_string(out.join("abort.txt")).unwrap()).unwrap();
    assert_eq!(report.check.id(), "gadget4-mac");
    for i in 0..2 {
        let r = AbortReport::parse(&fs::read_to_string(out.join(format!("abort-party-{i}.txt"))).unwrap()).unwrap();
        assert_eq!(r.reporter, i);
    }
}

#[test]
fn gen_data_then_evaluate() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), MEMORY);
    let data = dir.path().join("data");
    assert_eq!(cli(&["gen-data", "--config", cfg.to_str().unwrap(), "--out", data.to_str().unwrap()]), 0);
    for name in ["party-0.csv", "party-1.csv", "test.csv", "weights.csv"] {
        assert!(data.join(name).exists(), "{name}");
    }
    let weights = data.join("weights.csv");
    let test = data.join("test.csv");
    assert_eq!(cli(&["evaluate", "--model", weights.to_str().unwrap(), "--data", test.to_str().unwrap()]), 0);
    let party = data.join("party-0.csv");
    assert_eq!(cli(&["evaluate", "--model", weights.to_str().unwrap(), "--data", party.to_str().unwrap(), "--label", "nope"]), 1);
}

#[test]
fn dealer_then_tcp_parties_release_one_model() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), &tcp_section(&free_addresses(2)));
    let cfg_s = cfg.to_str().unwrap().to_string();
    assert_eq!(cli(&["dealer", "--config", &cfg_s]), 0);
    let codes: Vec<i32> = thread::scope(|s| {
        let hs: Vec<_> = (0..2).map(|i| {
            let cfg_s = cfg_s.clone();
            s.spawn(move || cli(&["party", "--id", &i.to_string(), "--config", &cfg_s]))
        }).collect();
        hs.into_iter().map(|h| h.join().unwrap()).collect()
    });
    assert_eq!(codes, vec![0, 0]);
    let m0 = read_model(&dir.path().join("out/party-0/model.csv")).unwrap();
    let m1 = read_model(&dir.path().join("out/party-1/model.csv")).unwrap();
    assert_eq!(m0, m1);
    // The dealer material is spent.
    assert_eq!(cli(&["party", "--id", "0", "--config", &cfg_s]), 1);
}
