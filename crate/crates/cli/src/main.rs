//! Experiment runner: execute one scenario (`run`) or a paired
//! mechanism comparison over several seeds (`compare`).

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;
use std::time::Instant;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use simnet::{run_batch, Job, Mechanism, Scenario, SimError};

#[derive(Parser)]
#[command(
    name = "swle-sim",
    about = "Deterministic consensus simulator comparing sliding-window and round-robin leader election",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write per-view CSV plus a JSON summary.
    Run(RunArgs),
    /// Run both mechanisms over several seeds with identical fault and
    /// network schedules and emit a paired comparison.
    Compare(CompareArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Scenario config file (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Override the config's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (default: config's out_dir, or ./out).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the config's mechanism (swle|roundrobin).
    #[arg(long)]
    mechanism: Option<String>,
    /// Override the config's view horizon.
    #[arg(long)]
    views: Option<u64>,
    /// Suppress the stdout summary line.
    #[arg(long)]
    quiet: bool,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long)]
    config: PathBuf,
    /// Number of seeds per mechanism, starting at the config's seed.
    #[arg(long, default_value_t = 5)]
    seeds: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the config's view horizon.
    #[arg(long)]
    views: Option<u64>,
    #[arg(long)]
    quiet: bool,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn config(message: String) -> Self {
        Failure { code: 2, message }
    }

    fn runtime(message: String) -> Self {
        Failure { code: 1, message }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Compare(args) => cmd_compare(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}

fn verbose() -> bool {
    matches!(
        std::env::var("SWLE_LOG").as_deref(),
        Ok("debug") | Ok("trace")
    )
}

fn load_scenario(path: &Path) -> Result<Scenario, Failure> {
    Scenario::from_path(path).map_err(|e| Failure::config(e.to_string()))
}

fn apply_overrides(
    scenario: &mut Scenario,
    mechanism: Option<&str>,
    views: Option<u64>,
) -> Result<(), Failure> {
    if let Some(m) = mechanism {
        scenario.mechanism = Mechanism::from_str(m).map_err(Failure::config)?;
    }
    if let Some(v) = views {
        scenario.views = v;
    }
    scenario
        .validate()
        .map_err(|e| Failure::config(e.to_string()))
}

fn sim_failure(err: SimError) -> Failure {
    match err {
        SimError::Config(e) => Failure::config(e.to_string()),
        SimError::Violation { ref trace, .. } => {
            let mut message = err.to_string();
            message.push_str("\nrecent events (newest first):");
            for line in trace.iter().rev().take(12) {
                message.push_str("\n  ");
                message.push_str(line);
            }
            Failure::runtime(message)
        }
        SimError::Stalled(_) => Failure::runtime(err.to_string()),
    }
}

fn out_dir(arg: Option<PathBuf>, scenario: &Scenario) -> PathBuf {
    arg.or_else(|| scenario.out_dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    (|| -> anyhow::Result<()> {
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))?;
        Ok(())
    })()
    .map_err(|e| Failure::runtime(e.to_string()))
}

fn cmd_run(args: RunArgs) -> Result<(), Failure> {
    let mut scenario = load_scenario(&args.config)?;
    apply_overrides(&mut scenario, args.mechanism.as_deref(), args.views)?;
    let seed = args.seed.unwrap_or(scenario.seed);
    let dir = out_dir(args.out, &scenario);

    let started = Instant::now();
    let report = simnet::run(&scenario, seed).map_err(sim_failure)?;
    if verbose() {
        eprintln!(
            "run finished: {} views in {:.2?} (simulated {:.3} s)",
            report.records.len(),
            started.elapsed(),
            report.sim_end_us as f64 / 1e6
        );
    }

    write_file(&dir.join("per_view.csv"), &report.per_view_csv())?;
    write_file(&dir.join("summary.json"), &report.summary_json())?;
    if !args.quiet {
        let s = &report.summary;
        println!(
            "mechanism={} seed={} views={} throughput={:.1} op/s latency={} faulty_leader={:.2}% timeout={:.2}% v_c={}",
            s.mechanism,
            s.seed,
            s.views,
            s.throughput_avg,
            s.latency_avg
                .map_or_else(|| "n/a".to_string(), |l| format!("{:.1}ms", l / 1000.0)),
            s.faulty_leader_pct,
            s.timeout_pct,
            report.v_c.map_or_else(|| "n/a".to_string(), |v| v.to_string()),
        );
        println!("reports written to {}", dir.display());
    }
    Ok(())
}

fn cmd_compare(args: CompareArgs) -> Result<(), Failure> {
    if args.seeds == 0 {
        return Err(Failure::config("--seeds must be at least 1".into()));
    }
    let mut scenario = load_scenario(&args.config)?;
    apply_overrides(&mut scenario, None, args.views)?;
    let dir = out_dir(args.out, &scenario);

    let mechanisms = [Mechanism::Swle, Mechanism::Roundrobin];
    let mut jobs = Vec::new();
    for seed in scenario.seed..scenario.seed + args.seeds {
        for mechanism in mechanisms {
            let mut s = scenario.clone();
            s.mechanism = mechanism;
            jobs.push(Job { scenario: s, seed });
        }
    }
    let started = Instant::now();
    let results = run_batch(&jobs);
    if verbose() {
        eprintln!("{} runs in {:.2?}", jobs.len(), started.elapsed());
    }

    let mut rows = Vec::new();
    for (pair, seed) in results
        .chunks(2)
        .zip(scenario.seed..scenario.seed + args.seeds)
    {
        let swle = match &pair[0] {
            Ok(report) => report,
            Err(e) => return Err(sim_failure(SimError::Stalled(e.to_string()))),
        };
        let rr = match &pair[1] {
            Ok(report) => report,
            Err(e) => return Err(sim_failure(SimError::Stalled(e.to_string()))),
        };
        rows.push(serde_json::json!({
            "seed": seed,
            "swle": {
                "throughput": swle.summary.throughput_avg,
                "faulty_leader_pct": swle.summary.faulty_leader_pct,
                "timeout_pct": swle.summary.timeout_pct,
                "v_c": swle.v_c,
            },
            "roundrobin": {
                "throughput": rr.summary.throughput_avg,
                "faulty_leader_pct": rr.summary.faulty_leader_pct,
                "timeout_pct": rr.summary.timeout_pct,
            },
            "throughput_ratio": swle.summary.throughput_avg / rr.summary.throughput_avg,
        }));
    }

    let mean = |f: &dyn Fn(&serde_json::Value) -> f64| {
        rows.iter().map(f).sum::<f64>() / rows.len() as f64
    };
    let comparison = serde_json::json!({
        "config": args.config.display().to_string(),
        "seeds": args.seeds,
        "views": scenario.views,
        "rows": rows,
        "mean": {
            "throughput_ratio": mean(&|r| r["throughput_ratio"].as_f64().unwrap()),
            "swle_faulty_leader_pct": mean(&|r| r["swle"]["faulty_leader_pct"].as_f64().unwrap()),
            "roundrobin_faulty_leader_pct":
                mean(&|r| r["roundrobin"]["faulty_leader_pct"].as_f64().unwrap()),
            "swle_throughput": mean(&|r| r["swle"]["throughput"].as_f64().unwrap()),
            "roundrobin_throughput": mean(&|r| r["roundrobin"]["throughput"].as_f64().unwrap()),
        },
    });
    let mut bytes = serde_json::to_vec_pretty(&comparison).expect("comparison serializes");
    bytes.push(b'\n');
    write_file(&dir.join("comparison.json"), &bytes)?;

    if !args.quiet {
        println!("seed    swle op/s     rr op/s   ratio   swle faulty%   rr faulty%");
        for row in comparison["rows"].as_array().unwrap() {
            println!(
                "{:<6} {:>10.1} {:>11.1} {:>7.2} {:>14.2} {:>12.2}",
                row["seed"],
                row["swle"]["throughput"].as_f64().unwrap(),
                row["roundrobin"]["throughput"].as_f64().unwrap(),
                row["throughput_ratio"].as_f64().unwrap(),
                row["swle"]["faulty_leader_pct"].as_f64().unwrap(),
                row["roundrobin"]["faulty_leader_pct"].as_f64().unwrap(),
            );
        }
        let m = &comparison["mean"];
        println!(
            "mean throughput ratio {:.2} | faulty leaders: swle {:.2}% vs roundrobin {:.2}%",
            m["throughput_ratio"].as_f64().unwrap(),
            m["swle_faulty_leader_pct"].as_f64().unwrap(),
            m["roundrobin_faulty_leader_pct"].as_f64().unwrap(),
        );
        println!("comparison written to {}", dir.display());
    }
    Ok(())
}
