//! End-to-end checks of the command-line interface: exit codes, report
//! shape, format consistency, and the validation contract.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_ara-engine")
}

fn run(args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_fixture(dir: &Path, name: &str, contents: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, contents).unwrap();
    path
}

const GAME: &str = r#"{
  "schema_version": 1,
  "structure": "sequential_da",
  "actions_d": ["patch", "monitor"],
  "actions_a": ["phish", "ddos"],
  "outcomes": ["breach", "safe"],
  "prob_d": {
    "patch":   {"phish": [0.2, 0.8], "ddos": [0.4, 0.6]},
    "monitor": {"phish": [0.5, 0.5], "ddos": [0.3, 0.7]}
  },
  "util_d": {
    "patch":   {"phish": [-10, 5], "ddos": [-4, 5]},
    "monitor": {"phish": [-8, 3],  "ddos": [-2, 4]}
  },
  "prob_a": {
    "patch":   {"phish": [0.2, 0.8], "ddos": [0.4, 0.6]},
    "monitor": {"phish": [0.5, 0.5], "ddos": [0.3, 0.7]}
  },
  "util_a": {
    "patch":   {"phish": [6, -1], "ddos": [3, 0]},
    "monitor": {"phish": [7, -2], "ddos": [2, 0]}
  }
}"#;

const JUDGMENTS: &str = r#"{
  "schema_version": 1,
  "attacker": {
    "kind": "factored",
    "util": {"kind": "affine",
             "base": {"patch":   {"phish": [6, -1], "ddos": [3, 0]},
                      "monitor": {"phish": [7, -2], "ddos": [2, 0]}},
             "scale": {"family": "uniform", "lo": 0.5, "hi": 2.0},
             "shift": {"family": "uniform", "lo": -0.5, "hi": 0.5}},
    "prob": {"kind": "dirichlet",
             "alphas": {"patch":   {"phish": [2, 8], "ddos": [4, 6]},
                        "monitor": {"phish": [5, 5], "ddos": [3, 7]}}}
  },
  "belief": {"kind": "dirichlet", "alphas": [1, 1]},
  "non_strategic": {"prior": [0.7, 0.3]},
  "fictitious": {"alphas": [1, 1], "counts": [3, 1]}
}"#;

#[test]
fn stackelberg_solve_happy_path() {
    let dir = tempfile::tempdir().unwrap();
    let game = write_fixture(dir.path(), "game.json", GAME);
    let out_path = dir.path().join("report.json");
    let out = run(&[
        "solve",
        "--game",
        game.to_str().unwrap(),
        "--concept",
        "stackelberg",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(report["result"]["kind"], "stackelberg");
    assert_eq!(report["result"]["defense_label"], "patch");
    // a response per defense is listed
    assert_eq!(report["result"]["response_labels"].as_array().unwrap().len(), 2);
    assert_eq!(report["tool"]["name"], "ara-engine");
    assert!(report["inputs"][0]["sha256"].as_str().unwrap().len() == 64);
}

#[test]
fn missing_level_judgments_exits_2_naming_the_level() {
    let dir = tempfile::tempdir().unwrap();
    let game = write_fixture(dir.path(), "game.json", GAME);
    // level_k config claims depth 2 but supplies no nested level models
    let judgments = write_fixture(
        dir.path(),
        "judgments.json",
        r#"{
          "schema_version": 1,
          "level_k": {"depth": 2, "levels": [], "samples_per_level": 100}
        }"#,
    );
    let out = run(&[
        "solve",
        "--game",
        game.to_str().unwrap(),
        "--judgments",
        judgments.to_str().unwrap(),
        "--concept",
        "level-k",
        "--k",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("level 1 model absent"), "stderr: {msg}");
}

#[test]
fn same_seed_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let game = write_fixture(dir.path(), "game.json", GAME);
    let judgments = write_fixture(dir.path(), "judgments.json", JUDGMENTS);
    let mut payloads = Vec::new();
    for run_ix in 0..2 {
        let out_path = dir.path().join(format!("report{run_ix}.json"));
        let out = run(&[
            "solve",
            "--game",
            game.to_str().unwrap(),
            "--judgments",
            judgments.to_str().unwrap(),
            "--concept",
            "ara",
            "--K",
            "2000",
            "--seed",
            "77",
            "--out",
            out_path.to_str().unwrap(),
        ]);
        assert!(out.status.success());
        payloads.push(fs::read(&out_path).unwrap());
    }
    assert_eq!(payloads[0], payloads[1]);
}

#[test]
fn simulate_csv_has_the_contractual_header() {
    let dir = tempfile::tempdir().unwrap();
    // simultaneous variant so the marginal estimator runs
    let game = write_fixture(
        dir.path(),
        "game.json",
        &GAME.replace("sequential_da", "simultaneous"),
    );
    let judgments = write_fixture(dir.path(), "judgments.json", JUDGMENTS);
    let out = run(&[
        "simulate-attacks",
        "--game",
        game.to_str().unwrap(),
        "--judgments",
        judgments.to_str().unwrap(),
        "--K",
        "1000",
        "--format",
        "csv",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("action,prob,std_err"));
    assert_eq!(lines.count(), 2);
}

#[test]
fn k_equals_one_is_a_point_mass() {
    let dir = tempfile::tempdir().unwrap();
    let game = write_fixture(
        dir.path(),
        "game.json",
        &GAME.replace("sequential_da", "simultaneous"),
    );
    let judgments = write_fixture(dir.path(), "judgments.json", JUDGMENTS);
    let out = run(&[
        "simulate-attacks",
        "--game",
        game.to_str().unwrap(),
        "--judgments",
        judgments.to_str().unwrap(),
        "--K",
        "1",
        "--format",
        "csv",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let probs: Vec<f64> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert!(probs.iter().any(|p| *p == 1.0));
    assert!(probs.iter().all(|p| *p == 0.0 || *p == 1.0));
}

#[test]
fn standard_error_shrinks_with_k() {
    let dir = tempfile::tempdir().unwrap();
    let game = write_fixture(
        dir.path(),
        "game.json",
        &GAME.replace("sequential_da", "simultaneous"),
    );
    let judgments = write_fixture(dir.path(), "judgments.json", JUDGMENTS);
    let sup_of = |k: &str, seed: &str| -> Vec<f64> {
        let out = run(&[
            "simulate-attacks",
            "--game",
            game.to_str().unwrap(),
            "--judgments",
            judgments.to_str().unwrap(),
            "--K",
            k,
            "--seed",
            seed,
            "--format",
            "csv",
        ]);
        assert!(out.status.success());
        String::from_utf8(out.stdout)
            .unwrap()
            .lines()
            .skip(1)
            .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
            .collect()
    };
    let small = sup_of("10000", "5");
    let big = sup_of("40000", "5");
    // sup-norm difference bounded by ~2x the theoretical standard error
    let se = (0.5f64 * 0.5 / 10_000.0).sqrt();
    for (a, b) in small.iter().zip(&big) {
        assert!((a - b).abs() <= 2.0 * 2.0 * se, "{a} vs {b}");
    }
}

#[test]
fn malformed_json_exits_2_with_position() {
    let dir = tempfile::tempdir().unwrap();
    let game = write_fixture(dir.path(), "game.json", "{\n  \"schema_version\": 1,\n  !!\n}");
    let out = run(&["solve", "--game", game.to_str().unwrap(), "--concept", "ne"]);
    assert_eq!(out.status.code(), Some(2));
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("line 3"), "stderr: {msg}");
}

#[test]
fn solver_failures_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    // valid game without attacker tables: NE needs common knowledge
    let stripped = GAME
        .replace("sequential_da", "simultaneous")
        .replace(
            r#""prob_a": {
    "patch":   {"phish": [0.2, 0.8], "ddos": [0.4, 0.6]},
    "monitor": {"phish": [0.5, 0.5], "ddos": [0.3, 0.7]}
  },
  "util_a": {
    "patch":   {"phish": [6, -1], "ddos": [3, 0]},
    "monitor": {"phish": [7, -2], "ddos": [2, 0]}
  }
}"#,
            r#""prob_a": null
}"#,
        );
    let game = write_fixture(dir.path(), "game.json", &stripped);
    let out = run(&["solve", "--game", game.to_str().unwrap(), "--concept", "ne"]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("CK data required"));
}

#[test]
fn json_and_csv_carry_identical_probabilities() {
    let dir = tempfile::tempdir().unwrap();
    let game = write_fixture(dir.path(), "game.json", GAME);
    let judgments = write_fixture(dir.path(), "judgments.json", JUDGMENTS);
    let base = [
        "pipeline",
        "--game",
        game.to_str().unwrap(),
        "--judgments",
        judgments.to_str().unwrap(),
        "--K",
        "1500",
        "--seed",
        "3",
    ];
    let json_out = run(&[&base[..], &["--format", "json"]].concat());
    assert!(json_out.status.success());
    let report: serde_json::Value =
        serde_json::from_slice(&json_out.stdout).unwrap();
    let csv_out = run(&[&base[..], &["--format", "csv"]].concat());
    let csv_text = String::from_utf8(csv_out.stdout).unwrap();

    // every (defense, action, prob) row of the CSV appears in the JSON
    let rows = report["result"]["simulated"]["rows"].as_array().unwrap();
    let defenses = report["result"]["simulated"]["defenses"].as_array().unwrap();
    let mut csv_lines = csv_text.lines().skip(1);
    for (d, row) in defenses.iter().zip(rows) {
        for (i, action) in row["actions"].as_array().unwrap().iter().enumerate() {
            let line = csv_lines.next().unwrap();
            let mut fields = line.split(',');
            assert_eq!(fields.next().unwrap(), d.as_str().unwrap());
            assert_eq!(fields.next().unwrap(), action.as_str().unwrap());
            let p: f64 = fields.next().unwrap().parse().unwrap();
            assert_eq!(p, row["probs"][i].as_f64().unwrap());
        }
    }
}

#[test]
fn pipeline_skip_eliminate_matches_when_nothing_is_eliminable() {
    let dir = tempfile::tempdir().unwrap();
    let game = write_fixture(dir.path(), "game.json", GAME);
    let judgments = write_fixture(dir.path(), "judgments.json", JUDGMENTS);
    let chosen = |extra: &[&str]| -> serde_json::Value {
        let mut args = vec![
            "pipeline",
            "--game",
            game.to_str().unwrap(),
            "--judgments",
            judgments.to_str().unwrap(),
            "--K",
            "2000",
            "--seed",
            "11",
        ];
        args.extend_from_slice(extra);
        let out = run(&args);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
        v["result"]["decision"]["chosen"].clone()
    };
    // affine judgments preserve the base ordering, so nothing separates
    assert_eq!(chosen(&[]), chosen(&["--skip-eliminate"]));
}

#[test]
fn pipeline_on_dominant_solvable_game_embeds_the_log() {
    let dir = tempfile::tempdir().unwrap();
    // d0 dominates d1; against d0 alone, the point-mass judgments separate
    // phish (util 6) strictly above ddos (util 3)
    let game_json = r#"{
      "schema_version": 1,
      "structure": "simultaneous",
      "actions_d": ["d0", "d1"],
      "actions_a": ["phish", "ddos"],
      "outcomes": ["s0"],
      "prob_d": {"d0": {"phish": [1.0], "ddos": [1.0]},
                 "d1": {"phish": [1.0], "ddos": [1.0]}},
      "util_d": {"d0": {"phish": [5.0], "ddos": [6.0]},
                 "d1": {"phish": [1.0], "ddos": [2.0]}}
    }"#;
    let judgments_json = r#"{
      "schema_version": 1,
      "attacker": {
        "kind": "factored",
        "util": {"kind": "per_cell",
                 "cells": {"d0": {"phish": [{"family": "uniform", "lo": 5.5, "hi": 6.5}],
                                   "ddos":  [{"family": "uniform", "lo": 2.5, "hi": 3.5}]},
                           "d1": {"phish": [{"family": "uniform", "lo": 5.5, "hi": 6.5}],
                                   "ddos":  [{"family": "uniform", "lo": 2.5, "hi": 3.5}]}}},
        "prob": {"kind": "fixed",
                 "rows": {"d0": {"phish": [1.0], "ddos": [1.0]},
                          "d1": {"phish": [1.0], "ddos": [1.0]}}}
      },
      "belief": {"kind": "uniform"}
    }"#;
    let game = write_fixture(dir.path(), "game.json", game_json);
    let judgments = write_fixture(dir.path(), "judgments.json", judgments_json);
    let out = run(&[
        "pipeline",
        "--game",
        game.to_str().unwrap(),
        "--judgments",
        judgments.to_str().unwrap(),
        "--K",
        "500",
        "--seed",
        "2",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let log = report["result"]["elimination"]["entries"].as_array().unwrap();
    assert_eq!(log.len(), 2, "defender then attacker elimination: {log:?}");
    assert_eq!(report["result"]["decision"]["chosen"][0], "d0");
    // the consolidated decision embeds the elimination log too
    assert_eq!(
        report["result"]["decision"]["diagnostics"]["elimination_log"]["entries"]
            .as_array()
            .unwrap()
            .len(),
        2
    );
    // deterministic solve on the 1x1 reduction
    assert_eq!(
        report["result"]["simulated"]["actions"][0].as_str().unwrap(),
        "phish"
    );
}

#[test]
fn auction_csv_curve_has_grid_rows() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_fixture(
        dir.path(),
        "auction.json",
        r#"{
          "schema_version": 1,
          "my_value": 175.0,
          "opponent_value_dist": {"family": "triangular", "lo": 140, "mode": 170, "hi": 200},
          "fraction_dist": {"family": "point_mass", "value": 0.9},
          "bid_grid": {"lo": 100, "hi": 200, "points": 101}
        }"#,
    );
    let out = run(&[
        "auction",
        "--spec",
        spec.to_str().unwrap(),
        "--analysis",
        "level1",
        "--format",
        "csv",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("bid,cdf,expected_profit"));
    assert_eq!(lines.count(), 101);

    let json = run(&["auction", "--spec", spec.to_str().unwrap(), "--analysis", "level1"]);
    let report: serde_json::Value = serde_json::from_slice(&json.stdout).unwrap();
    let bid = report["result"]["bid"].as_f64().unwrap();
    // optimal bid against 0.9-scaled triangular opponent bids
    assert!((100.0..175.0).contains(&bid), "bid {bid}");
}

#[test]
fn unknown_concept_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let game = write_fixture(dir.path(), "game.json", GAME);
    let out = run(&["solve", "--game", game.to_str().unwrap(), "--concept", "psychic"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn eliminate_accepts_the_input_alias() {
    let dir = tempfile::tempdir().unwrap();
    let game = write_fixture(dir.path(), "game.json", GAME);
    let judgments = write_fixture(dir.path(), "judgments.json", JUDGMENTS);
    let out = run(&[
        "eliminate",
        "--input",
        game.to_str().unwrap(),
        "--judgments",
        judgments.to_str().unwrap(),
        "--order",
        "defender-first",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["result"]["kind"], "elimination");
}
