use galoiscache::cli::{run, EXIT_CONFIG, EXIT_OK};

fn galoiscache(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run(std::iter::once("galoiscache").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn json(args: &[&str]) -> serde_json::Value {
    let (code, out, err) = galoiscache(args);
    assert_eq!(code, EXIT_OK, "{args:?}: {err}");
    serde_json::from_str(&out).unwrap()
}

#[test]
fn verify_reports_both_checks() {
    let v = json(&["verify", "--n", "3", "--a", "3", "--b", "5", "--c", "1"]);
    assert_eq!(v["report"]["holds"], true);
    assert_eq!(v["report"]["diagonalization"]["violations"].as_array().unwrap().len(), 0);
    assert_eq!(v["config"]["field"]["modulus"], "0b1011 (x^3+x+1)");
    assert!(v["generated_at_unix"].is_u64());
}

#[test]
fn invalid_configs_exit_2() {
    for args in [
        &["verify", "--n", "3", "--modulus", "0b1111"][..],
        &["verify", "--n", "2", "--a", "0"],
        &["verify", "--n", "2", "--c", "4"],
        &["verify", "--p", "9"],
        &["verify", "--p", "3", "--n", "2"],
        &["simulate", "/nonexistent/trace"],
        &["attack", "baseline-pp", "--sets", "0"],
        &["attack", "galois-pp", "--replacement", "lru"],
        &["attack", "galois-pp", "--victim-probability", "1.5"],
    ] {
        let (code, _, err) = galoiscache(args);
        assert_eq!(code, EXIT_CONFIG, "{args:?}");
        assert!(!err.is_empty(), "{args:?}");
    }
}

#[test]
fn baseline_detects_every_access() {
    let v = json(&["attack", "baseline-pp", "--sets", "4", "--ways", "4", "--trials", "1000", "--no-timestamp"]);
    assert_eq!(v["report"]["detection_rate"], 1.0);
    assert_eq!(v["config"]["cache"]["replacement"], "lru");
    assert!(v.get("generated_at_unix").is_none());
}

#[test]
fn simulate_trace_and_errors() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.trace");
    std::fs::write(&good, "# warm\n1 R 0x0\n1 R 0x0\n2 W 40\n").unwrap();
    let v = json(&["simulate", good.to_str().unwrap(), "--n", "2"]);
    assert_eq!(v["report"]["accesses"], 3);
    assert_eq!(v["report"]["domains"]["1"]["hits"], 1);
    assert_eq!(v["report"]["domains"]["2"]["misses"], 1);

    let bad = dir.path().join("bad.trace");
    std::fs::write(&bad, "1 R 0x0\n1 X 0x0\n").unwrap();
    let (code, _, err) = galoiscache(&["simulate", bad.to_str().unwrap()]);
    assert_eq!(code, EXIT_CONFIG);
    assert!(err.contains("line 2"), "{err}");

    let foreign = dir.path().join("foreign.trace");
    std::fs::write(&foreign, "7 R 0x0\n").unwrap();
    let (code, _, err) = galoiscache(&["simulate", foreign.to_str().unwrap(), "--n", "2"]);
    assert_eq!(code, EXIT_CONFIG);
    assert!(err.contains("line 1"), "{err}");

    let (code, out, _) = galoiscache(&["simulate", good.to_str().unwrap(), "--format", "csv"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(out.lines().next(), Some("domain,hits,misses,evictions_caused,self_evictions"));
    assert_eq!(out.lines().count(), 3);
}

#[test]
fn attack_csv_has_one_row_per_trial() {
    let (code, out, _) = galoiscache(&["attack", "collusion", "--n", "2", "--trials", "50", "--format", "csv"]);
    assert_eq!(code, EXIT_OK);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("trial,victim_active,victim_set,fired,inferred_set,probe_misses,eviction_way"));
    assert_eq!(lines.count(), 50);
}

#[test]
fn output_file_and_netlists() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("cost.json");
    let nets = dir.path().join("nets");
    let (code, out, _) = galoiscache(&[
        "cost",
        "--n",
        "3",
        "--output",
        report.to_str().unwrap(),
        "--emit-netlists",
        nets.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_OK);
    assert!(out.is_empty());
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["report"]["per_way"].as_array().unwrap().len(), 8);
    for w in 0..8 {
        let text = std::fs::read_to_string(nets.join(format!("way_{w}.net"))).unwrap();
        assert!(text.starts_with(&format!("# netlist mul_w{w}\n")), "{text}");
    }
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("lab.toml");
    std::fs::write(&cfg, "n = 3\ntrials = 20\nseed = 5\nvictim-set = \"random\"\nadversary = [3]\n").unwrap();
    let path = cfg.to_str().unwrap();
    let v = json(&["attack", "galois-pp", "--config", path, "--trials", "30"]);
    assert_eq!(v["config"]["trials"], 30);
    assert_eq!(v["config"]["seed"], 5);
    assert_eq!(v["config"]["field"]["order"], 8);
    assert_eq!(v["config"]["experiment"]["victim_target_set"], "random");
    assert_eq!(v["config"]["experiment"]["adversary_domains"], serde_json::json!([3]));
    assert_eq!(v["report"]["trials"], 30);
}

#[test]
fn seed_changes_results_and_repeats_exactly() {
    let run = |seed: &str| {
        galoiscache(&["attack", "galois-pp", "--n", "3", "--trials", "3000", "--seed", seed, "--no-timestamp"]).1
    };
    assert_eq!(run("1"), run("1"));
    assert_ne!(run("1"), run("2"));
}
