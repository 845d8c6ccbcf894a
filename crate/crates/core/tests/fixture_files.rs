//! The files under `fixtures/` must match what the library generates.
//! Run with `UPDATE_FIXTURES=1` to rewrite them.

use std::fs;
use std::path::PathBuf;

use selfjournal::fixtures;
use selfjournal::ledger::{load_log, replay, save_log};
use selfjournal::sim::{AgentGroup, ScenarioConfig, StrategyKind};

fn dir() -> PathBuf {
    PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures"))
}

fn scenarios() -> Vec<(&'static str, ScenarioConfig)> {
    vec![
        ("honest_seed42", ScenarioConfig::honest(42, 50, 200)),
        (
            "spammer_majority_seed42",
            ScenarioConfig::new(
                42,
                50,
                vec![
                    AgentGroup::new(StrategyKind::Honest, 80),
                    AgentGroup::new(StrategyKind::Spammer, 120),
                ],
            ),
        ),
        (
            "mixed_seed7",
            ScenarioConfig::new(
                7,
                50,
                vec![
                    AgentGroup::new(StrategyKind::Honest, 180),
                    AgentGroup::colluders(20, 5),
                ],
            ),
        ),
        ("perf_1000x100", ScenarioConfig::honest(1, 100, 1000)),
        ("empty_rounds", ScenarioConfig::honest(42, 0, 10)),
    ]
}

fn expected_files() -> Vec<(PathBuf, Vec<u8>)> {
    let mut files = Vec::new();
    for (name, events) in fixtures::all() {
        files.push((dir().join(format!("{name}.jsonl")), save_log(&events)));
    }
    let digest = replay(&fixtures::golden_log()).unwrap().digest();
    files.push((
        dir().join("golden.digest"),
        format!("{digest}\n").into_bytes(),
    ));
    for (name, config) in scenarios() {
        files.push((
            dir().join("scenarios").join(format!("{name}.json")),
            format!("{}\n", config.to_json_pretty()).into_bytes(),
        ));
    }
    files
}

#[test]
fn fixture_files_are_current() {
    let update = std::env::var_os("UPDATE_FIXTURES").is_some();
    for (path, bytes) in expected_files() {
        if update {
            fs::create_dir_all(path.parent().unwrap()).unwrap();
            fs::write(&path, &bytes).unwrap();
            continue;
        }
        let on_disk = fs::read(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert!(
            on_disk == bytes,
            "{} is stale; rerun with UPDATE_FIXTURES=1",
            path.display()
        );
    }
}

#[test]
fn fixture_logs_round_trip() {
    for (name, events) in fixtures::all() {
        let path = dir().join(format!("{name}.jsonl"));
        let loaded = load_log(&fs::read(&path).unwrap()).unwrap();
        assert_eq!(loaded, events, "{name}");
    }
}

#[test]
fn scenario_configs_parse() {
    for (name, config) in scenarios() {
        let text =
            fs::read_to_string(dir().join("scenarios").join(format!("{name}.json"))).unwrap();
        assert_eq!(ScenarioConfig::from_json(&text).unwrap(), config, "{name}");
    }
}
