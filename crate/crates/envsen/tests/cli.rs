//! CLI contract: subcommands, flags, output files and exit codes.

use std::process::Command;

fn envsen() -> Command {
    Command::new(env!("CARGO_BIN_EXE_envsen"))
}

fn write_small_config(dir: &std::path::Path) -> std::path::PathBuf {
    let cfg = envsen::harness::ExperimentConfig {
        num_sensors: 20,
        layout_seed: 3,
        area_size: 500.0,
        horizon: 10,
        scenario_count: 8,
        scenario_seed: 9,
        spread_rate: 0.3,
        wind_gain: 1.5,
        neighbor_radius: Some(140.0),
        eval_episodes: 4,
        train_episodes: 20,
        master_seed: 42,
        ..Default::default()
    };
    let path = dir.join("config.json");
    std::fs::write(&path, serde_json::to_string_pretty(&cfg).unwrap()).unwrap();
    path
}

#[test]
fn missing_config_file_names_the_path() {
    let out = envsen()
        .args(["simulate", "--config", "/no/such/config.json", "--out", "/tmp/unused_envsen"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(
        stderr.contains("/no/such/config.json"),
        "diagnostic does not name the path: {stderr}"
    );
}

#[test]
fn unknown_subcommand_is_a_usage_error() {
    let out = envsen().arg("frobnicate").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = envsen().args(["simulate", "--no-such-flag"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn simulate_writes_episode_files_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_small_config(dir.path());
    let out_dir = dir.path().join("results");
    let out = envsen()
        .args([
            "simulate",
            "--config",
            config.to_str().unwrap(),
            "--seed",
            "7",
            "--out",
            out_dir.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for k in 0..4 {
        let episode = std::fs::read_to_string(out_dir.join(format!("episode_{k}.csv"))).unwrap();
        assert!(episode.starts_with("step,attempted,succeeded,data_value,energy_cost,error_loss,reward\n"));
        assert_eq!(episode.lines().count(), 11); // header + 10 steps
    }
    let summary = std::fs::read_to_string(out_dir.join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 5);
    // replayable scenario dump parses back
    let scenarios = std::fs::read_to_string(out_dir.join("scenarios.json")).unwrap();
    let parsed: Vec<envsen::fire::FireScenario> = serde_json::from_str(&scenarios).unwrap();
    assert_eq!(parsed.len(), 4);
}

#[test]
fn evaluate_writes_aggregate_with_pinned_header() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_small_config(dir.path());
    let out_dir = dir.path().join("results");
    let status = envsen()
        .args([
            "evaluate",
            "--config",
            config.to_str().unwrap(),
            "--policy",
            "random_p=0.5",
            "--out",
            out_dir.to_str().unwrap(),
        ])
        .status()
        .unwrap();
    assert!(status.success());
    let aggregate = std::fs::read_to_string(out_dir.join("aggregate.csv")).unwrap();
    let mut lines = aggregate.lines();
    assert_eq!(
        lines.next().unwrap(),
        "policy,w,mean_reward,std_reward,mean_value,mean_cost,mean_error_loss"
    );
    let row = lines.next().unwrap();
    assert!(row.starts_with("random_p_0.5,0.2,"));
}

#[test]
fn train_writes_checkpoint_and_curve_then_evaluate_loads_it() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_small_config(dir.path());
    let out_dir = dir.path().join("trained");
    let status = envsen()
        .args([
            "train",
            "--config",
            config.to_str().unwrap(),
            "--policy",
            "iql",
            "--out",
            out_dir.to_str().unwrap(),
        ])
        .status()
        .unwrap();
    assert!(status.success());
    let curve = std::fs::read_to_string(out_dir.join("learning_curve.csv")).unwrap();
    assert!(curve.starts_with("episode,reward\n"));
    assert_eq!(curve.lines().count(), 21); // header + 20 episodes
    let checkpoint = out_dir.join("checkpoint.json");
    assert!(checkpoint.exists());

    // Frozen evaluation through the checkpoint via an override.
    let eval_dir = dir.path().join("eval");
    let status = envsen()
        .args([
            "evaluate",
            "--config",
            config.to_str().unwrap(),
            "--policy",
            "iql",
            "--override",
            &format!("policy.checkpoint={:?}", checkpoint.to_str().unwrap()),
            "--out",
            eval_dir.to_str().unwrap(),
        ])
        .status()
        .unwrap();
    assert!(status.success());
    assert!(eval_dir.join("aggregate.csv").exists());
}

#[test]
fn train_rejects_non_learning_policy() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_small_config(dir.path());
    let out = envsen()
        .args([
            "train",
            "--config",
            config.to_str().unwrap(),
            "--policy",
            "heuristic",
            "--out",
            dir.path().join("x").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not a learning policy"));
}

#[test]
fn oracle_prints_pass_lines() {
    let out = envsen()
        .args(["oracle", "--n", "10", "--instances", "200", "--seed", "3"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("PASS greedy == exhaustive"));
    assert_eq!(stdout.matches("PASS").count(), 3, "{stdout}");
}

#[test]
fn sweep_writes_tradeoff_rows_per_policy_and_weight() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_small_config(dir.path());
    let out_dir = dir.path().join("sweep");
    let status = envsen()
        .args([
            "sweep",
            "--config",
            config.to_str().unwrap(),
            "--override",
            "w_sweep=[0.1,0.4]",
            "--out",
            out_dir.to_str().unwrap(),
        ])
        .status()
        .unwrap();
    assert!(status.success());
    let tradeoff = std::fs::read_to_string(out_dir.join("tradeoff.csv")).unwrap();
    // header + 3 default sweep policies x 2 weights
    assert_eq!(tradeoff.lines().count(), 7);
}
