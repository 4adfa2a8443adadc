//! Scenario orchestration CLI: cell problems → effective tensor → bulk
//! invariants → edge spectra → homogenization bench, with plot-ready CSV and
//! JSON artifacts per stage.

mod config;
mod stages;

use clap::{Parser, Subcommand};
use config::ScenarioConfig;
use stages::{Pipeline, Stage};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "dirac-homog",
    version,
    about = "Homogenization pipeline for regularized 2D Dirac operators with domain walls"
)]
struct Cli {
    /// Scenario config (JSON; see schema/scenario.schema.json).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory (defaults to the config's output_dir).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads (falls back to DIRAC_HOMOG_THREADS, then all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the periodic cell problems and dump the corrector fields.
    Cell,
    /// Compute the effective tensor, Pauli components and masses.
    Tensor,
    /// Bulk gaps, Chern numbers and sign-formula indices.
    Bulk,
    /// Domain-wall edge bands, spectral flow and interface conductivity.
    Edge,
    /// Resolvent convergence study of the oscillatory vs homogenized operator.
    Bench,
    /// Run every stage in dependency order.
    All {
        /// Comma-separated subset of stages (cell,tensor,bulk,edge,bench).
        #[arg(long, value_delimiter = ',')]
        stages: Option<Vec<String>>,
    },
    /// Collate existing stage outputs into the scenario report.
    Report,
}

fn main() -> ExitCode {
    let cli = Cli::parse();

    let threads = cli.threads.or_else(|| {
        std::env::var("DIRAC_HOMOG_THREADS")
            .ok()
            .and_then(|v| v.parse().ok())
    });
    // Keep LAPACK single-threaded per solve; parallelism lives in the
    // momentum sweeps and solve batches above it.
    std::env::set_var("OPENBLAS_NUM_THREADS", "1");
    #[cfg(feature = "parallel")]
    if let Some(k) = threads {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global();
    }
    #[cfg(not(feature = "parallel"))]
    let _ = threads;

    let stages: Vec<Stage> = match &cli.command {
        Command::Cell => vec![Stage::Cell],
        Command::Tensor => vec![Stage::Cell, Stage::Tensor],
        Command::Bulk => vec![Stage::Cell, Stage::Tensor, Stage::Bulk],
        Command::Edge => vec![Stage::Cell, Stage::Tensor, Stage::Bulk, Stage::Edge],
        Command::Bench => vec![Stage::Cell, Stage::Tensor, Stage::Bench],
        Command::All { stages } => match stages {
            None => Stage::all(),
            Some(names) => {
                let mut out = Vec::new();
                for name in names {
                    match Stage::parse(name) {
                        Some(s) => out.push(s),
                        None => {
                            eprintln!(
                                "unknown stage '{name}' (expected cell,tensor,bulk,edge,bench)"
                            );
                            return ExitCode::from(2);
                        }
                    }
                }
                out
            }
        },
        Command::Report => vec![],
    };

    let config_path = match &cli.config {
        Some(p) => p.clone(),
        None => {
            eprintln!("--config <path> is required");
            return ExitCode::from(2);
        }
    };
    let config = match ScenarioConfig::load(&config_path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config error: {e}");
            return ExitCode::from(2);
        }
    };

    if matches!(cli.command, Command::Report) {
        return collate_report(&config, cli.out);
    }

    let mut pipeline = Pipeline::new(config, cli.out);
    let (report, failure) = pipeline.run(&stages);

    for check in &report.checks {
        let status = if check.passed { "pass" } else { "FAIL" };
        let kind = if check.gating { "" } else { " (exploratory)" };
        println!(
            "[{status}]{kind} {}: value {:.6e}, tolerance {}",
            check.name, check.value, check.tolerance
        );
    }
    if let Some(f) = &failure {
        eprintln!("stage failure: {f}");
        return ExitCode::from(f.exit_code() as u8);
    }
    if !report.passed {
        eprintln!("numerical checks failed (see scenario_report.json)");
        return ExitCode::from(3);
    }
    println!(
        "all gating checks passed; report at {}",
        pipeline.out_dir.join("scenario_report.json").display()
    );
    ExitCode::SUCCESS
}

/// Rebuild scenario_report.json from stage artifacts already on disk.
fn collate_report(config: &ScenarioConfig, out: Option<PathBuf>) -> ExitCode {
    let out_dir = out.unwrap_or_else(|| config.output_dir.clone());
    let mut stage_outputs = std::collections::BTreeMap::new();
    for name in ["cell", "tensor", "bulk", "edge", "bench"] {
        let path = out_dir.join(format!("{name}.json"));
        if let Ok(text) = std::fs::read_to_string(&path) {
            if let Ok(v) = serde_json::from_str::<serde_json::Value>(&text) {
                stage_outputs.insert(name.to_string(), v);
            }
        }
    }
    if stage_outputs.is_empty() {
        eprintln!("no stage artifacts found under {}", out_dir.display());
        return ExitCode::from(2);
    }
    #[derive(serde::Serialize)]
    struct Collated {
        tool_version: String,
        config_hash: String,
        stage_outputs: std::collections::BTreeMap<String, serde_json::Value>,
    }
    let collated = Collated {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        config_hash: dirac_homog::report::stable_hash(config),
        stage_outputs,
    };
    match dirac_homog::report::write_json(&collated, &out_dir.join("scenario_report.json")) {
        Ok(()) => {
            println!(
                "report collated at {}",
                out_dir.join("scenario_report.json").display()
            );
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("cannot write report: {e}");
            ExitCode::from(4)
        }
    }
}
