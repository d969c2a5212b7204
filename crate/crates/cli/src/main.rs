//! Command-line front end: single runs, batches and plots.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use eroas::harness::{
    batch, emit_plots, load_scenario_dir, run_batch, run_episode_with, Algorithm, Dumps, Metrics, Outcome, Scenario,
    TrajectoryLog,
};
use eroas::{Error, Result};

#[derive(Parser)]
#[command(name = "eroas", version, about = "Closed-loop testbed for sonar-driven 3D obstacle avoidance")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one episode and write its trajectory log and metrics.
    Run {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, default_value = "eroas")]
        algo: Algorithm,
        /// Overrides the scenario seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Also write every sonar scan.
        #[arg(long)]
        dump_scans: bool,
        /// Also write every policy decision as JSON lines.
        #[arg(long)]
        dump_decisions: bool,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Run every scenario in a directory with each algorithm and seed.
    Batch {
        #[arg(long)]
        scenarios: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "eroas,apf,dwa")]
        algos: Vec<Algorithm>,
        #[arg(long, default_value_t = 5)]
        reps: usize,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Render top view, side profile and yaw-rate figures from logs.
    Plot {
        #[arg(long = "log", required = true, num_args = 1..)]
        logs: Vec<PathBuf>,
        /// Scenario whose obstacles are drawn in the top view.
        #[arg(long)]
        scenario: Option<PathBuf>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.to_path_buf(),
        source: e,
    })
}

fn write_metrics(m: &Metrics, path: &Path) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, m)?;
    writeln!(w).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    Ok(())
}

fn run(
    scenario: &Path,
    algo: Algorithm,
    seed: Option<u64>,
    dump_scans: bool,
    dump_decisions: bool,
    out: &Path,
) -> Result<Outcome> {
    let sc = Scenario::load(scenario, seed)?;
    ensure_dir(out)?;
    let stem = format!("{}_{}_s{}", sc.name, algo, sc.seed);
    let mut scans = dump_scans.then(|| create(&out.join(format!("{stem}_scans.csv")))).transpose()?;
    let mut decisions = dump_decisions
        .then(|| create(&out.join(format!("{stem}_decisions.jsonl"))))
        .transpose()?;
    let dumps = Dumps {
        scans: scans.as_mut().map(|w| w as &mut dyn Write),
        decisions: decisions.as_mut().map(|w| w as &mut dyn Write),
    };
    let (log, metrics) = run_episode_with(&sc, algo, dumps)?;
    let log_path = out.join(format!("{stem}.csv"));
    log.save(&log_path)?;
    let metrics_path = out.join(format!("{stem}_metrics.json"));
    write_metrics(&metrics, &metrics_path)?;

    let outcome = metrics.outcome.unwrap_or(Outcome::Timeout);
    println!(
        "{} {} seed {}: {} after {:.1} s, path {:.2} m, min clearance {:.2} m, jerk {:.4} rad/s^3, pivots {}",
        sc.name,
        algo,
        sc.seed,
        outcome.name(),
        metrics.travel_time,
        metrics.path_length,
        metrics.min_clearance,
        metrics.mean_angular_jerk,
        metrics.pivots
    );
    if metrics.pivots_occurred && metrics.sweep_time_cost == 0.0 {
        println!("note: pivot sweeps were charged no time");
    }
    println!("log: {}", log_path.display());
    println!("metrics: {}", metrics_path.display());
    Ok(outcome)
}

fn batch_cmd(dir: &Path, algos: &[Algorithm], reps: usize, out: &Path) -> Result<()> {
    let scenarios = load_scenario_dir(dir)?;
    if scenarios.is_empty() {
        return Err(Error::Config(format!("no .toml scenarios in {}", dir.display())));
    }
    ensure_dir(out)?;
    let result = run_batch(&scenarios, algos, reps);
    batch::write_csv(&result.rows, &out.join("batch_runs.csv"))?;
    batch::write_csv(&result.summary, &out.join("batch_summary.csv"))?;
    println!(
        "{:<22} {:<6} {:>5} {:>9} {:>12} {:>12} {:>10}",
        "scenario", "algo", "runs", "success", "median len", "median jerk", "min clear"
    );
    for s in &result.summary {
        println!(
            "{:<22} {:<6} {:>5} {:>9} {:>12.2} {:>12.4} {:>10.2}",
            s.scenario, s.algo, s.runs, s.successes, s.median_path_length, s.median_angular_jerk, s.min_clearance
        );
    }
    for r in result.rows.iter().filter(|r| !r.error.is_empty()) {
        eprintln!("{} {} seed {}: {}", r.scenario, r.algo, r.seed, r.error);
    }
    println!("rows: {}", out.join("batch_runs.csv").display());
    Ok(())
}

fn plot_cmd(logs: &[PathBuf], scenario: Option<&Path>, out: &Path) -> Result<()> {
    let loaded: Vec<TrajectoryLog> = logs.iter().map(|p| TrajectoryLog::load(p)).collect::<Result<_>>()?;
    let sc = scenario.map(|p| Scenario::load(p, Some(loaded[0].seed))).transpose()?;
    let stem = if loaded.len() == 1 {
        logs[0]
            .file_stem()
            .map_or_else(|| "plot".to_string(), |s| s.to_string_lossy().into_owned())
    } else {
        format!("{}_overlay", loaded[0].scenario)
    };
    for p in emit_plots(&loaded, sc.as_ref().map(|s| &s.world), out, &stem)? {
        println!("{}", p.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Run {
            scenario,
            algo,
            seed,
            dump_scans,
            dump_decisions,
            out,
        } => run(&scenario, algo, seed, dump_scans, dump_decisions, &out).map(|o| match o {
            Outcome::Success => 0,
            Outcome::Collision => 2,
            Outcome::Timeout => 3,
        }),
        Command::Batch {
            scenarios,
            algos,
            reps,
            out,
        } => batch_cmd(&scenarios, &algos, reps, &out).map(|_| 0),
        Command::Plot { logs, scenario, out } => plot_cmd(&logs, scenario.as_deref(), &out).map(|_| 0),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
