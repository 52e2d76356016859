use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use noisy_clustering::eval::misclassification_error;
use noisy_clustering::experiment::{
    budget_violations, rows_to_string, run_algorithm, run_experiment, summarize, summary_path, summary_to_string, Algo,
    ConstantsProfile, ExperimentConfig, OutputFormat,
};
use noisy_clustering::oracle::{sample_instance, write_instance, FaultyOracle, InstanceSpec, QueryStats, SameClusterOracle};
use noisy_clustering::verify::{verify, Level};
use noisy_clustering::{Cluster, Execution, Vertex};

const EXIT_INVARIANT: u8 = 1;
const EXIT_CONFIG: u8 = 2;

#[derive(Parser)]
#[command(name = "noisy-clustering", version, about = "Clustering with a faulty same-cluster oracle")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a planted instance file.
    GenInstance(GenArgs),
    /// Run one pipeline (first delta, first seed) and print the clustering.
    Run(RunArgs),
    /// Run every (delta, seed) cell and write result rows plus a summary.
    Sweep(RunArgs),
    /// Run the self-check suite.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct GenArgs {
    /// Config whose `instance` table describes the instance.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Cluster sizes, used instead of a config.
    #[arg(long, value_delimiter = ',')]
    sizes: Option<Vec<usize>>,
    /// Seed for the random label assignment.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
    #[arg(long, value_enum)]
    constants: Option<ConstantsProfile>,
    #[arg(long)]
    scale: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    #[arg(long, value_delimiter = ',')]
    deltas: Option<Vec<f64>>,
    #[arg(long, value_enum)]
    algo: Option<Algo>,
    /// Fill the wall_ms column.
    #[arg(long)]
    timing: bool,
    /// Run cells one at a time.
    #[arg(long)]
    sequential: bool,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, value_enum, default_value = "quick")]
    level: Level,
}

enum Failure {
    Config(String),
    Invariant(String),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::GenInstance(a) => gen_instance(a),
        Command::Run(a) => run(a),
        Command::Sweep(a) => sweep(a),
        Command::Verify(a) => run_verify(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(Failure::Invariant(msg)) => {
            eprintln!("invariant failure: {msg}");
            ExitCode::from(EXIT_INVARIANT)
        }
    }
}

fn config_err(e: impl std::fmt::Display) -> Failure {
    Failure::Config(e.to_string())
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| config_err(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn gen_instance(a: GenArgs) -> Result<(), Failure> {
    let (spec, seed) = match (a.sizes, a.config) {
        (Some(sizes), None) => (InstanceSpec::ExactSizes { sizes }, a.seed),
        (None, Some(path)) => {
            let config = ExperimentConfig::load(&path).map_err(config_err)?;
            let spec = config.instance.ok_or_else(|| config_err("config has no `instance` table"))?;
            (spec, config.instance_seed)
        }
        _ => return Err(config_err("give exactly one of --config or --sizes")),
    };
    let truth = sample_instance(&spec, seed).map_err(config_err)?;
    match a.out {
        Some(path) => write_instance(&path, &truth).map_err(|e| config_err(format!("{}: {e}", path.display()))),
        None => emit(None, &(truth.to_file().to_json() + "\n")),
    }
}

fn load_config(a: &RunArgs) -> Result<ExperimentConfig, Failure> {
    let mut c = ExperimentConfig::load(&a.config).map_err(config_err)?;
    if let Some(v) = &a.out {
        c.out = Some(v.clone());
    }
    if let Some(v) = a.format {
        c.format = v;
    }
    if let Some(v) = a.constants {
        c.constants = v;
    }
    if let Some(v) = a.scale {
        c.scale = v;
    }
    if let Some(v) = &a.seeds {
        c.seeds = v.clone();
    }
    if let Some(v) = &a.deltas {
        c.deltas = v.clone();
    }
    if let Some(v) = a.algo {
        c.algo = v;
    }
    c.timing |= a.timing;
    if a.sequential {
        c.execution = Execution::Sequential;
    }
    c.validate().map_err(config_err)?;
    Ok(c)
}

#[derive(Serialize)]
struct RunReport<'a> {
    delta: f64,
    seed: u64,
    algo: Algo,
    status: &'a str,
    error: Option<String>,
    misclassification: f64,
    exact: bool,
    queries: QueryStats,
    clusters: &'a [Cluster],
    remainder: &'a [Vertex],
}

fn run(a: RunArgs) -> Result<(), Failure> {
    let config = load_config(&a)?;
    let truth = config.ground_truth().map_err(config_err)?;
    let (delta, seed) = (config.deltas[0], config.seeds[0]);
    let consts = config.algorithm_constants();
    let mut oracle = FaultyOracle::new(truth.clone(), delta, seed).map_err(config_err)?;
    let outcome = run_algorithm(&mut oracle, &truth, config.algo, delta, config.balance, &consts);
    let eval = misclassification_error(&outcome.clustering, &truth).map_err(config_err)?;
    let status = format!("{:?}", outcome.status).to_lowercase();
    let report = RunReport {
        delta,
        seed,
        algo: config.algo,
        status: &status,
        error: outcome.error.as_ref().map(ToString::to_string),
        misclassification: eval.misclassification,
        exact: eval.exact,
        queries: oracle.query_stats(),
        clusters: outcome.clustering.clusters(),
        remainder: outcome.clustering.remainder(),
    };
    let text = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
    emit(config.out.as_deref(), &text)
}

fn sweep(a: RunArgs) -> Result<(), Failure> {
    let config = load_config(&a)?;
    let rows = run_experiment(&config).map_err(config_err)?;
    emit(config.out.as_deref(), &rows_to_string(&rows, config.format))?;
    let summary = summary_to_string(&summarize(&rows), config.format);
    match &config.out {
        Some(out) => emit(Some(&summary_path(out, config.format)), &summary)?,
        None => eprint!("{summary}"),
    }
    let bad = budget_violations(&rows);
    if !bad.is_empty() {
        return Err(Failure::Invariant(format!(
            "{} rows exceed n(n-1)/2 distinct pairs (first: delta {}, seed {})",
            bad.len(),
            bad[0].delta,
            bad[0].seed
        )));
    }
    Ok(())
}

fn run_verify(a: VerifyArgs) -> Result<(), Failure> {
    let report = verify(a.level);
    print!("{}", report.render());
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::Invariant("one or more checks failed".into()))
    }
}
