use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
}

fn sjs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sjs"))
        .args(args)
        .output()
        .expect("sjs runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}",
            String::from_utf8_lossy(&out.stdout)
        )
    })
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn validate_golden_prints_frozen_digest() {
    let log = fixture("golden.jsonl");
    let out = sjs(&["validate", path_str(&log)]);
    assert_eq!(code(&out), 0);
    let frozen = fs::read_to_string(fixture("golden.digest")).unwrap();
    let v = stdout_json(&out);
    assert_eq!(v["ok"], true);
    assert_eq!(v["digest"], frozen.trim());
    assert_eq!(v["last_seq"], 40);
}

#[test]
fn validate_corrupt_names_seq_7() {
    let out = sjs(&["validate", path_str(&fixture("golden_corrupt_seq7.jsonl"))]);
    assert_eq!(code(&out), 1);
    let v = stdout_json(&out);
    assert_eq!(v["ok"], false);
    assert_eq!(v["seq"], 7);
    assert_eq!(v["rule"], "UnknownScholar");
    assert!(!out.stderr.is_empty());
}

#[test]
fn validate_missing_file_is_io_error() {
    let out = sjs(&["validate", "/definitely/not/here.jsonl"]);
    assert_eq!(code(&out), 3);
    assert!(out.stdout.is_empty());
}

#[test]
fn validate_malformed_line_is_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("bad.jsonl");
    fs::write(&log, "{not json}\n").unwrap();
    let out = sjs(&["validate", path_str(&log)]);
    assert_eq!(code(&out), 3);
    assert!(out.stdout.is_empty());
}

#[test]
fn unknown_kind_needs_permissive() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("future.jsonl");
    let mut text = fs::read_to_string(fixture("dyad.jsonl")).unwrap();
    let next = text.lines().count() + 1;
    text.push_str(&format!(
        "{{\"at\":\"2024-06-01T00:00:00Z\",\"kind\":\"JournalRenamed\",\"payload\":{{}},\"seq\":{next}}}\n"
    ));
    fs::write(&log, text).unwrap();

    assert_eq!(code(&sjs(&["validate", path_str(&log)])), 3);
    assert_eq!(code(&sjs(&["--strict", "validate", path_str(&log)])), 3);
    let out = sjs(&["--permissive", "validate", path_str(&log)]);
    assert_eq!(code(&out), 0);
    let v = stdout_json(&out);
    assert_eq!(v["skipped"], 1);
    assert_eq!(v["last_seq"], next);
}

#[test]
fn strict_and_permissive_conflict() {
    let out = sjs(&[
        "--strict",
        "--permissive",
        "validate",
        path_str(&fixture("dyad.jsonl")),
    ]);
    assert_eq!(code(&out), 2);
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(code(&sjs(&[])), 2);
    assert_eq!(code(&sjs(&["frobnicate"])), 2);
    assert_eq!(code(&sjs(&["metrics"])), 2);
    assert_eq!(code(&sjs(&["metrics", "x.jsonl", "--format", "xml"])), 2);
}

#[test]
fn metrics_clique_article_importance_is_four() {
    let out = sjs(&[
        "metrics",
        path_str(&fixture("clique5.jsonl")),
        "--article",
        "c01-a0",
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let rows = stdout_json(&out);
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0]["importance"], 4);
}

#[test]
fn metrics_unvoted_article_has_null_fraction() {
    let out = sjs(&["metrics", path_str(&fixture("clique5.jsonl"))]);
    assert_eq!(code(&out), 0);
    let rows = stdout_json(&out);
    for row in rows.as_array().unwrap() {
        assert_eq!(row["validity"]["n"], 0);
        assert!(row["validity"]["fraction"].is_null());
    }
}

#[test]
fn metrics_item_filter_and_bad_uri() {
    let uri = "https://sjs.example.org/articles/c02-a0/";
    let out = sjs(&[
        "metrics",
        path_str(&fixture("clique5.jsonl")),
        "--item",
        uri,
    ]);
    assert_eq!(code(&out), 0);
    let rows = stdout_json(&out);
    assert_eq!(rows[0]["uri"], "https://sjs.example.org/articles/c02-a0");
    assert_eq!(rows[0]["importance"], 4);

    let out = sjs(&[
        "metrics",
        path_str(&fixture("clique5.jsonl")),
        "--item",
        "not a uri",
    ]);
    assert_eq!(code(&out), 2);
}

#[test]
fn metrics_csv_matches_json() {
    let log = fixture("golden.jsonl");
    let json = stdout_json(&sjs(&["metrics", path_str(&log)]));
    let out = sjs(&["metrics", path_str(&log), "--format", "csv"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let headers = reader.headers().unwrap().clone();
    assert_eq!(
        headers.iter().collect::<Vec<_>>(),
        [
            "uri",
            "validity_n",
            "validity_validated",
            "validity_fraction",
            "importance",
            "priority"
        ]
    );
    let records: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    let rows = json.as_array().unwrap();
    assert_eq!(records.len(), rows.len());
    for (rec, row) in records.iter().zip(rows) {
        assert_eq!(&rec[0], row["uri"].as_str().unwrap());
        assert_eq!(
            rec[1].parse::<u64>().unwrap(),
            row["validity"]["n"].as_u64().unwrap()
        );
        assert_eq!(
            rec[2].parse::<u64>().unwrap(),
            row["validity"]["validated"].as_u64().unwrap()
        );
        match row["validity"]["fraction"].as_f64() {
            Some(f) => assert_eq!(rec[3].parse::<f64>().unwrap(), f),
            None => assert_eq!(&rec[3], ""),
        }
        assert_eq!(
            rec[4].parse::<u64>().unwrap(),
            row["importance"].as_u64().unwrap()
        );
        assert_eq!(
            rec[5].parse::<u64>().unwrap(),
            row["priority"].as_u64().unwrap()
        );
    }
}

#[test]
fn metrics_on_invalid_log_exits_1() {
    let out = sjs(&["metrics", path_str(&fixture("golden_corrupt_seq7.jsonl"))]);
    assert_eq!(code(&out), 1);
}

#[test]
fn detect_dyad_flags_one_pair() {
    let out = sjs(&["detect", path_str(&fixture("dyad.jsonl")), "--theta", "0.5"]);
    assert_eq!(code(&out), 0);
    let v = stdout_json(&out);
    let pairs = v["pairs"].as_array().unwrap();
    assert_eq!(pairs.len(), 1);
    assert_eq!(pairs[0]["a"], "d1");
    assert_eq!(pairs[0]["b"], "d2");
}

#[test]
fn detect_rejects_bad_thresholds_before_reading() {
    for args in [
        ["--theta", "1.5"],
        ["--theta", "0"],
        ["--delta", "-0.1"],
        ["--min-share", "2"],
        ["--min-size", "1"],
    ] {
        let out = sjs(&["detect", "/no/such/log.jsonl", args[0], args[1]]);
        assert_eq!(code(&out), 2, "{args:?}");
        assert!(out.stdout.is_empty());
    }
}

#[test]
fn detect_clique_reports_one_group() {
    let out = sjs(&["detect", path_str(&fixture("clique5.jsonl"))]);
    let v = stdout_json(&out);
    let groups = v["groups"].as_array().unwrap();
    assert_eq!(groups.len(), 1);
    assert_eq!(groups[0]["members"].as_array().unwrap().len(), 5);
    assert_eq!(groups[0]["density"], 1.0);
}

#[test]
fn simulate_is_deterministic_and_composes() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("small.json");
    fs::write(
        &config,
        r#"{"seed": 5, "rounds": 12, "agents": [
            {"strategy": "honest", "count": 30},
            {"strategy": "colluder", "count": 5, "clique_size": 5},
            {"strategy": "spammer", "count": 3},
            {"strategy": "friend_biased", "count": 4, "friends": 3},
            {"strategy": "free_rider", "count": 2}
        ]}"#,
    )
    .unwrap();
    let (a, b) = (dir.path().join("a.jsonl"), dir.path().join("b.jsonl"));
    let run_a = sjs(&["simulate", path_str(&config), path_str(&a)]);
    let run_b = sjs(&["simulate", path_str(&config), path_str(&b)]);
    assert_eq!(
        code(&run_a),
        0,
        "{}",
        String::from_utf8_lossy(&run_a.stderr)
    );
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    assert_eq!(run_a.stdout, run_b.stdout);
    let report = stdout_json(&run_a);

    let validated = stdout_json(&sjs(&["validate", path_str(&a)]));
    assert_eq!(validated["ok"], true);
    assert_eq!(validated["digest"], report["digest"]);
    assert_eq!(code(&sjs(&["metrics", path_str(&a), "--format", "csv"])), 0);
    assert_eq!(code(&sjs(&["detect", path_str(&a)])), 0);
    assert_eq!(code(&sjs(&["export-graph", path_str(&a)])), 0);

    let c = dir.path().join("c.jsonl");
    let reseeded = sjs(&["simulate", path_str(&config), path_str(&c), "--seed", "6"]);
    assert_eq!(code(&reseeded), 0);
    assert_ne!(fs::read(&a).unwrap(), fs::read(&c).unwrap());
}

#[test]
fn simulate_zero_rounds_has_no_article_events() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("out.jsonl");
    let out = sjs(&[
        "simulate",
        path_str(&fixture("scenarios/empty_rounds.json")),
        path_str(&log),
    ]);
    assert_eq!(code(&out), 0);
    let report = stdout_json(&out);
    assert_eq!(report["articles"], 0);
    let counts = report["event_counts"].as_object().unwrap();
    assert_eq!(counts.keys().collect::<Vec<_>>(), ["ScholarRegistered"]);
    assert!(report["spearman_importance"].is_null());
}

#[test]
fn simulate_config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("out.jsonl");
    for (name, text) in [
        ("syntax.json", "{"),
        (
            "unknown_field.json",
            r#"{"seed": 1, "rounds": 1, "agents": [], "colour": 3}"#,
        ),
        (
            "no_agents.json",
            r#"{"seed": 1, "rounds": 1, "agents": []}"#,
        ),
        (
            "bad_clique.json",
            r#"{"seed": 1, "rounds": 1, "agents": [{"strategy": "colluder", "count": 7, "clique_size": 5}]}"#,
        ),
    ] {
        let config = dir.path().join(name);
        fs::write(&config, text).unwrap();
        let out = sjs(&["simulate", path_str(&config), path_str(&log)]);
        assert_eq!(code(&out), 2, "{name}");
        assert!(out.stdout.is_empty());
    }
    let out = sjs(&["simulate", "/no/config.json", path_str(&log)]);
    assert_eq!(code(&out), 3);
}

#[test]
fn honest_seed42_scenario_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("honest.jsonl");
    let out = sjs(&[
        "simulate",
        path_str(&fixture("scenarios/honest_seed42.json")),
        path_str(&log),
    ]);
    assert_eq!(code(&out), 0);
    let report = stdout_json(&out);
    assert!(report["spearman_importance"].as_f64().unwrap() > 0.5);

    let detected = stdout_json(&sjs(&["detect", path_str(&log)]));
    assert_eq!(detected["groups"].as_array().unwrap().len(), 0);
}

#[test]
fn export_graph_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("edges.tsv");
    let out = sjs(&[
        "export-graph",
        path_str(&fixture("clique5.jsonl")),
        "--out",
        path_str(&out_path),
    ]);
    assert_eq!(code(&out), 0);
    assert!(out.stdout.is_empty());
    let text = fs::read_to_string(&out_path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("kind\tfrom\tto\tweight"));
    for line in lines {
        assert_eq!(line.split('\t').count(), 4, "{line}");
    }
    let stdout = sjs(&["export-graph", path_str(&fixture("clique5.jsonl"))]);
    assert_eq!(String::from_utf8(stdout.stdout).unwrap(), text);
}
