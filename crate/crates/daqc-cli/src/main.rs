//! `daqc` command-line front end.

mod config;
mod experiment;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand, ValueEnum};
use daqc::verify::{run_golden_suite, Perturbation};
use daqc::DaqcError;
use serde_json::json;

use config::{Experiment, Overrides, RunConfig};
use experiment::{run_experiment, Problem};
use output::{csv_table, svg_plot, sweep_csv, write_atomic, COUPLINGS_HEADER, RUNS_HEADER};

#[derive(Parser, Debug)]
#[command(name = "daqc", version, about = "Digital-analog schedule compiler and simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compile the target into a schedule and a report.
    Compile(Args),
    /// Evaluate the first point of every sweep list.
    Run(Args),
    /// Evaluate the full sweep.
    Sweep(Args),
    /// Run the golden checks.
    Verify(VerifyArgs),
}

#[derive(clap::Args, Debug)]
struct Args {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    no_noise: bool,
    #[arg(long)]
    allow_fallback: bool,
}

#[derive(clap::Args, Debug)]
struct VerifyArgs {
    /// Accepted for symmetry with the other commands; unused.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum, hide = true)]
    perturb: Option<PerturbKind>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum PerturbKind {
    SignMatrix,
}

/// An error with its process exit code.
struct Failure {
    code: u8,
    err: anyhow::Error,
}

impl Failure {
    fn config(err: anyhow::Error) -> Failure {
        Failure { code: 2, err }
    }

    fn compile(err: anyhow::Error) -> Failure {
        Failure { code: 3, err }
    }

    fn other(err: anyhow::Error) -> Failure {
        Failure { code: 1, err }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = init_threads().and_then(|_| match cli.command {
        Command::Compile(a) => cmd_compile(&a),
        Command::Run(a) => cmd_sweep(&a, true),
        Command::Sweep(a) => cmd_sweep(&a, false),
        Command::Verify(a) => cmd_verify(&a),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.err);
            ExitCode::from(f.code)
        }
    }
}

fn init_threads() -> Result<(), Failure> {
    let Ok(v) = std::env::var("DAQC_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::config(anyhow!("DAQC_THREADS must be a positive integer, got `{v}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::other(e.into()))
}

fn load(a: &Args) -> Result<RunConfig, Failure> {
    let mut cfg = RunConfig::load(&a.config).map_err(Failure::config)?;
    cfg.apply(&Overrides {
        seed: a.seed,
        out: a.out.clone(),
        runs: a.runs,
        no_noise: a.no_noise,
        allow_fallback: a.allow_fallback,
    });
    cfg.validate()
        .with_context(|| format!("invalid config {}", a.config.display()))
        .map_err(Failure::config)?;
    Ok(cfg)
}

fn write_resolved(cfg: &RunConfig, dir: &Path) -> Result<(), Failure> {
    let text = cfg.to_toml().map_err(Failure::other)?;
    write_atomic(&dir.join("config.resolved.toml"), text.as_bytes()).map_err(Failure::other)
}

fn cmd_compile(a: &Args) -> Result<(), Failure> {
    let cfg = load(a)?;
    let dir = cfg.out_dir();
    let n_steps = cfg.n_steps[0];
    let mut problem = Problem::new(&cfg, cfg.n_qubits).map_err(Failure::config)?;
    let compiled = problem
        .prepare()
        .and_then(|_| problem.compile(n_steps))
        .map_err(|e| {
            let hint = match e {
                DaqcError::SingularGeneratorSet { .. } => " (rerun with --allow-fallback)",
                _ => "",
            };
            Failure::compile(anyhow!(e).context(format!("compilation failed{hint}")))
        })?;
    for w in &compiled.warnings {
        eprintln!("warning: {w}");
    }
    let s = &compiled.schedule;
    let report = json!({
        "name": cfg.name,
        "target": cfg.target.kind(),
        "n_qubits": cfg.n_qubits,
        "n_steps": n_steps,
        "t_final": cfg.t_final,
        "analog_blocks": s.analog_count(),
        "rotation_layers": s.layer_count(),
        "total_analog_time": s.total_analog_time(),
        "inverted_blocks": s.has_inverted_blocks(),
        "warnings": compiled.warnings,
        "details": compiled.details,
    });
    let schedule_json = s.to_json().map_err(|e| Failure::other(e.into()))?;
    let report_json = serde_json::to_string_pretty(&report).map_err(|e| Failure::other(e.into()))?;
    write_atomic(&dir.join("schedule.json"), schedule_json.as_bytes()).map_err(Failure::other)?;
    write_atomic(&dir.join("report.json"), report_json.as_bytes()).map_err(Failure::other)?;
    write_resolved(&cfg, &dir)?;
    println!(
        "compiled {} target on {} qubits: {} analog blocks, {} layers, analog time {:.6}; wrote {}",
        cfg.target.kind(),
        cfg.n_qubits,
        s.analog_count(),
        s.layer_count(),
        s.total_analog_time(),
        dir.display()
    );
    Ok(())
}

fn cmd_sweep(a: &Args, single: bool) -> Result<(), Failure> {
    let mut cfg = load(a)?;
    if single {
        cfg.n_steps.truncate(1);
        cfg.dt.truncate(1);
        cfg.n_qubits_list.truncate(1);
    }
    let dir = cfg.out_dir();
    let results = run_experiment(&cfg).map_err(Failure::config)?;
    let csv_name = if cfg.experiment == Experiment::Couplings {
        let text = csv_table(COUPLINGS_HEADER, &results.couplings).map_err(Failure::other)?;
        write_atomic(&dir.join("couplings.csv"), text.as_bytes()).map_err(Failure::other)?;
        "couplings.csv"
    } else {
        let text = sweep_csv(&results.rows).map_err(Failure::other)?;
        write_atomic(&dir.join("results.csv"), text.as_bytes()).map_err(Failure::other)?;
        "results.csv"
    };
    if cfg.output.raw && cfg.experiment == Experiment::Fidelity {
        let text = csv_table(RUNS_HEADER, &results.runs).map_err(Failure::other)?;
        write_atomic(&dir.join("runs.csv"), text.as_bytes()).map_err(Failure::other)?;
    }
    if cfg.output.plot {
        let (x, y) = match cfg.experiment {
            Experiment::Fidelity => ("Trotter steps", "mean fidelity"),
            Experiment::Times => ("qubits", "time per Trotter step"),
            Experiment::BlockTimes => ("block or term index", "time"),
            Experiment::Couplings => ("|j-k|", "coupling"),
        };
        let svg = svg_plot(&cfg.name, x, y, &results.series(cfg.experiment));
        write_atomic(&dir.join("results.svg"), svg.as_bytes()).map_err(Failure::other)?;
    }
    write_resolved(&cfg, &dir)?;
    for r in results.rows.iter().filter(|r| !r.is_ok()) {
        eprintln!("point {} {} failed: {}", r.sweep_var, r.mode, r.status);
    }
    let n = results.rows.len().max(results.couplings.len());
    println!(
        "{}: {n} rows ({} failed); wrote {}",
        cfg.name,
        results.failures(),
        dir.join(csv_name).display()
    );
    Ok(())
}

fn cmd_verify(a: &VerifyArgs) -> Result<(), Failure> {
    let perturb = Perturbation {
        sign_matrix: matches!(a.perturb, Some(PerturbKind::SignMatrix)),
    };
    let checks = run_golden_suite(perturb);
    for c in &checks {
        let tag = if c.passed { "PASS" } else { "FAIL" };
        println!("{tag} {} [{}]: {}", c.name, c.module, c.detail);
    }
    let failed: Vec<&str> = checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
    if failed.is_empty() {
        println!("all {} checks passed", checks.len());
        Ok(())
    } else {
        Err(Failure::other(anyhow!("verify failed: {}", failed.join(", "))))
    }
}
