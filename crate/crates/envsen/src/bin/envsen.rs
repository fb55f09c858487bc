//! Command-line front end: simulate, evaluate, train and sweep experiments
//! from a JSON config, plus exhaustive-search verification of the analytic
//! optima on small instances.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use envsen::harness::csvio;
use envsen::harness::{run_evaluation, sweep_w, ExecMode, Experiment, ExperimentConfig};
use envsen::policy::{brute_force_best_subset, centralized_greedy, optimal_p_uniform, PolicySpec};

#[derive(Parser)]
#[command(
    name = "envsen",
    version,
    about = "Multi-agent IoT sensing simulator: constrained-channel wildfire tracking experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured policy on the held-out episodes and write one CSV
    /// per episode plus a summary
    Simulate(RunArgs),
    /// Evaluate a frozen policy and write the aggregate CSV
    Evaluate(RunArgs),
    /// Train a learning policy; write its checkpoint and learning curve
    Train(RunArgs),
    /// Evaluate the configured policies across the cost-weight sweep and
    /// write the trade-off CSV
    Sweep(RunArgs),
    /// Check the greedy optimum and the optimal transmit probability
    /// against exhaustive search on small instances
    Oracle(OracleArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Experiment config (JSON); defaults are used when omitted
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed override
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory
    #[arg(long, default_value = "results")]
    out: PathBuf,
    /// Policy override by name: heuristic, random_p=<p>, stochastic_uniform,
    /// centralized_greedy, optimal_async, iql, iql_tracking, pg, pg_fb
    #[arg(long)]
    policy: Option<String>,
    /// Config override as key.path=value (repeatable)
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Run episodes sequentially instead of on the worker pool
    #[arg(long)]
    sequential: bool,
}

#[derive(Args)]
struct OracleArgs {
    /// Maximum instance size for the exhaustive subset check
    #[arg(long, default_value_t = 10)]
    n: usize,
    /// Number of random instances
    #[arg(long, default_value_t = 1000)]
    instances: usize,
    /// Seed for instance generation
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

fn parse_policy(name: &str) -> anyhow::Result<PolicySpec> {
    let spec = match name {
        "heuristic" => PolicySpec::Heuristic,
        "stochastic_uniform" => PolicySpec::StochasticUniform,
        "centralized_greedy" => PolicySpec::CentralizedGreedy,
        "optimal_async" => PolicySpec::OptimalAsync {
            staleness: Default::default(),
        },
        "iql" => PolicySpec::Iql(Default::default()),
        "iql_tracking" => PolicySpec::Iql(envsen::learn::IqlConfig {
            reward_mode: envsen::learn::RewardMode::TrackingAccuracy,
            ..Default::default()
        }),
        "pg" => PolicySpec::Pg(envsen::learn::PgConfig {
            feedback: false,
            ..Default::default()
        }),
        "pg_fb" => PolicySpec::Pg(Default::default()),
        other => {
            if let Some(p) = other.strip_prefix("random_p=") {
                let p: f64 = p.parse().context("random_p probability")?;
                PolicySpec::RandomP { p }
            } else {
                bail!("unknown policy name {other:?}");
            }
        }
    };
    Ok(spec)
}

fn load_config(args: &RunArgs) -> anyhow::Result<ExperimentConfig> {
    let mut cfg = match &args.config {
        Some(path) => ExperimentConfig::load(path)
            .with_context(|| format!("loading config {}", path.display()))?,
        None => ExperimentConfig::default(),
    };
    if let Some(name) = &args.policy {
        cfg.policy = parse_policy(name)?;
    }
    if let Some(seed) = args.seed {
        cfg.master_seed = seed;
    }
    if !args.overrides.is_empty() {
        cfg = cfg.with_overrides(&args.overrides)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn exec_mode(args: &RunArgs) -> ExecMode {
    if args.sequential {
        ExecMode::Sequential
    } else {
        ExecMode::Parallel
    }
}

fn simulate(args: &RunArgs) -> anyhow::Result<()> {
    let cfg = load_config(args)?;
    let exp = Experiment::prepare(cfg)?;
    let result = run_evaluation(&exp, exec_mode(args))?;
    for (k, record) in result.episodes.iter().enumerate() {
        csvio::write_file(
            &args.out.join(format!("episode_{k}.csv")),
            &csvio::episode_csv(record),
        )?;
    }
    csvio::write_file(
        &args.out.join("summary.csv"),
        &csvio::summary_csv(&result.episodes),
    )?;
    let scenarios = serde_json::to_string_pretty(exp.eval_scenarios())?;
    csvio::write_file(&args.out.join("scenarios.json"), &scenarios)?;
    println!(
        "simulated {} episodes of policy {} (w={}): mean reward {:.4}, mean error loss {:.4}",
        result.episodes.len(),
        result.aggregate.policy,
        result.aggregate.w,
        result.aggregate.mean_reward,
        result.aggregate.mean_error_loss
    );
    println!("wrote {}", args.out.display());
    Ok(())
}

fn evaluate(args: &RunArgs) -> anyhow::Result<()> {
    let cfg = load_config(args)?;
    let exp = Experiment::prepare(cfg)?;
    let result = run_evaluation(&exp, exec_mode(args))?;
    csvio::write_file(
        &args.out.join("aggregate.csv"),
        &csvio::aggregate_csv(std::slice::from_ref(&result.aggregate)),
    )?;
    println!(
        "{}: mean reward {:.4} +/- {:.4}, value {:.4}, cost {:.4}, error loss {:.4}",
        result.aggregate.policy,
        result.aggregate.mean_reward,
        result.aggregate.std_reward,
        result.aggregate.mean_value,
        result.aggregate.mean_cost,
        result.aggregate.mean_error_loss
    );
    println!("wrote {}", args.out.join("aggregate.csv").display());
    Ok(())
}

fn train(args: &RunArgs) -> anyhow::Result<()> {
    let cfg = load_config(args)?;
    let exp = Experiment::prepare(cfg)?;
    if !exp.config.policy.is_learned() {
        bail!(
            "policy {} is not a learning policy; pick iql, iql_tracking, pg or pg_fb",
            exp.config.policy.name()
        );
    }
    let trained = envsen::harness::train_policy(
        &exp,
        &exp.config.policy,
        exp.config.w,
        exp.config.master_seed,
    )?;
    let checkpoint_path = args.out.join("checkpoint.json");
    trained.checkpoint.save(&checkpoint_path)?;
    csvio::write_file(
        &args.out.join("learning_curve.csv"),
        &csvio::curve_csv(&trained.curve),
    )?;
    // Evaluate the frozen policy so training runs report their outcome.
    let result = envsen::harness::evaluate_runner(
        &exp,
        &trained.runner,
        &exp.config.policy.name(),
        exp.config.w,
        exec_mode(args),
    )?;
    csvio::write_file(
        &args.out.join("aggregate.csv"),
        &csvio::aggregate_csv(std::slice::from_ref(&result.aggregate)),
    )?;
    println!(
        "trained {} for {} episodes; frozen mean reward {:.4}, error loss {:.4}",
        result.aggregate.policy,
        trained.curve.len(),
        result.aggregate.mean_reward,
        result.aggregate.mean_error_loss
    );
    println!("wrote {}", checkpoint_path.display());
    Ok(())
}

fn sweep(args: &RunArgs) -> anyhow::Result<()> {
    let cfg = load_config(args)?;
    let exp = Experiment::prepare(cfg)?;
    let rows = sweep_w(
        &exp,
        &exp.config.w_sweep.clone(),
        &exp.config.sweep_policies.clone(),
        exec_mode(args),
    )?;
    csvio::write_file(&args.out.join("tradeoff.csv"), &csvio::aggregate_csv(&rows))?;
    println!(
        "swept {} policies over {} weights",
        exp.config.sweep_policies.len(),
        exp.config.w_sweep.len()
    );
    println!("wrote {}", args.out.join("tradeoff.csv").display());
    Ok(())
}

fn oracle(args: &OracleArgs) -> anyhow::Result<()> {
    if args.n > 12 {
        bail!("--n must be at most 12 to keep the exhaustive check fast");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let curve = |n: u32| envsen::channel::p_success_bw(n, 2, 0.001).unwrap();
    let mut ok = true;
    let mut worst: f64 = 0.0;
    for _ in 0..args.instances {
        let n = rng.random_range(1..=args.n);
        let values: Vec<f64> = (0..n)
            .map(|_| if rng.random_bool(0.5) { 1.0 } else { 0.0 })
            .collect();
        let costs = vec![0.2; n];
        let greedy = centralized_greedy(&values, &costs, curve)?;
        let brute = brute_force_best_subset(&values, &costs, curve)?;
        let gap = (greedy.objective - brute.objective).abs();
        worst = worst.max(gap);
        if gap != 0.0 {
            ok = false;
            eprintln!(
                "FAIL greedy objective {} != exhaustive {} on values {values:?}",
                greedy.objective, brute.objective
            );
        }
    }
    if ok {
        println!(
            "PASS greedy == exhaustive subset enumeration on {} instances (n <= {}), max gap {worst}",
            args.instances, args.n
        );
    }

    // Transmit-probability check against a fine-grid scan of the binomial
    // objective.
    let n = 30;
    for wc in [0.2, 0.5] {
        let p_impl = optimal_p_uniform(1.0, wc, curve, n);
        let mut best_p = 0.0;
        let mut best = 0.0f64;
        for k in 0..=100_000u64 {
            let q = k as f64 / 100_000.0;
            let mut total = 0.0;
            let mut coeff = 1.0;
            for j in 1..=n {
                coeff *= (n - j + 1) as f64 / j as f64 * q;
                let tail = (1.0 - q).powi((n - j) as i32);
                total += coeff * tail * j as f64 * (curve(j as u32) - wc);
            }
            if total > best {
                best = total;
                best_p = q;
            }
        }
        let gap = (p_impl - best_p).abs();
        if gap <= 1e-3 {
            println!("PASS optimal p {p_impl} matches grid scan {best_p} (wc={wc})");
        } else {
            ok = false;
            eprintln!("FAIL optimal p {p_impl} != grid scan {best_p} (wc={wc})");
        }
    }

    if !ok {
        bail!("oracle checks failed");
    }
    Ok(())
}

fn ensure_out_dir(path: &Path) -> anyhow::Result<()> {
    std::fs::create_dir_all(path)
        .with_context(|| format!("creating output directory {}", path.display()))
}

fn main() {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate(args) => ensure_out_dir(&args.out).and_then(|_| simulate(args)),
        Command::Evaluate(args) => ensure_out_dir(&args.out).and_then(|_| evaluate(args)),
        Command::Train(args) => ensure_out_dir(&args.out).and_then(|_| train(args)),
        Command::Sweep(args) => ensure_out_dir(&args.out).and_then(|_| sweep(args)),
        Command::Oracle(args) => oracle(args),
    };
    if let Err(err) = result {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}
