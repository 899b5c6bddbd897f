//! Experiment harness: load graphs, run any algorithm with configured
//! parameters, compare against exact oracles, emit machine-readable
//! metrics (JSON reports or CSV sweep rows), and run the statistical DP
//! smoke test.
//!
//! Exit codes: 0 ok, 1 algorithm error, 2 usage error.

mod report;
mod smoke;

use clap::{Args, Parser, Subcommand};
use report::{Algorithm, RunConfig};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

/// Environment variable that prefixes relative `--output` paths.
const OUT_DIR_ENV: &str = "PRIVGRAPH_OUT_DIR";

#[derive(Parser)]
#[command(
    name = "privgraph",
    version,
    about = "Edge-DP and locally-edge-DP graph algorithms: k-core decomposition, \
             low out-degree ordering, and densest subgraph."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one algorithm on an edge-list graph and emit a JSON report.
    Run(RunArgs),
    /// Run an epsilon grid x seed grid and emit CSV summary rows.
    Sweep(SweepArgs),
    /// Statistical DP smoke test on the built-in 3-node neighboring pair.
    Smoke(SmokeArgs),
}

#[derive(Args)]
struct AlgoArgs {
    #[arg(long, value_enum)]
    algorithm: Algorithm,
    /// Privacy budget.
    #[arg(long, default_value_t = 1.0)]
    epsilon: f64,
    /// MWU density approximation parameter (densest-dp only).
    #[arg(long, default_value_t = 0.05)]
    eta: f64,
    /// Level-structure threshold base parameter.
    #[arg(long, default_value_t = 0.5)]
    psi: f64,
    /// Core-estimate multiplicative slack parameter.
    #[arg(long, default_value_t = 0.25)]
    lambda: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Force all noise draws to zero (utility testing; not private).
    #[arg(long)]
    noiseless: bool,
    /// Use the paper's literal estimate divisor instead of the semantic one.
    #[arg(long)]
    strict_paper_estimate: bool,
    /// MWU phase-count constant.
    #[arg(long, default_value_t = 1.0)]
    c0: f64,
    /// MWU candidate-test additive constant.
    #[arg(long, default_value_t = 1.0)]
    c1: f64,
    /// MWU density-test additive constant.
    #[arg(long, default_value_t = 1.0)]
    c2: f64,
    /// Output-correction constant.
    #[arg(long, default_value_t = 1.0)]
    c: f64,
}

impl AlgoArgs {
    fn config(&self, input: &Path, epsilon: f64, seed: u64) -> RunConfig {
        RunConfig {
            algorithm: self.algorithm,
            epsilon,
            eta: self.eta,
            psi: self.psi,
            lambda: self.lambda,
            seed,
            noiseless: self.noiseless,
            strict_paper_estimate: self.strict_paper_estimate,
            consts: [self.c0, self.c1, self.c2, self.c],
            input: input.display().to_string(),
        }
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    algo: AlgoArgs,
    /// Edge-list file: lines "u v", '#' comments.
    #[arg(long)]
    input: PathBuf,
    /// Report destination (stdout if omitted). Relative paths are joined
    /// under $PRIVGRAPH_OUT_DIR when it is set.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    algo: AlgoArgs,
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: Option<PathBuf>,
    /// Comma-separated epsilon grid, e.g. "0.5,1,2".
    #[arg(long, value_delimiter = ',')]
    epsilons: Vec<f64>,
    /// Comma-separated seed grid, e.g. "0,1,2".
    #[arg(long, value_delimiter = ',')]
    seeds: Vec<u64>,
}

#[derive(Args)]
struct SmokeArgs {
    #[arg(long, value_enum, default_value_t = Algorithm::CoreLedp)]
    algorithm: Algorithm,
    #[arg(long, default_value_t = 1.0)]
    epsilon: f64,
    #[arg(long, default_value_t = smoke::MIN_TRIALS)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Always refused: noiseless runs are not private.
    #[arg(long)]
    noiseless: bool,
    #[arg(long)]
    output: Option<PathBuf>,
}

fn resolve_output(path: &Path) -> PathBuf {
    match std::env::var_os(OUT_DIR_ENV) {
        Some(dir) if path.is_relative() => PathBuf::from(dir).join(path),
        _ => path.to_path_buf(),
    }
}

fn emit(text: &str, output: Option<&Path>) -> std::io::Result<()> {
    match output {
        Some(path) => std::fs::write(resolve_output(path), text),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn usage_error(msg: &str) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(2)
}

fn algorithm_error(err: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {err}");
    ExitCode::from(1)
}

fn cmd_run(args: &RunArgs) -> ExitCode {
    let config = args.algo.config(&args.input, args.algo.epsilon, args.algo.seed);
    if let Err(msg) = config.validate() {
        return usage_error(&msg);
    }
    let report = match report::run(&config) {
        Ok(r) => r,
        Err(e) => return algorithm_error(format!("{e:#}")),
    };
    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    match emit(&json, args.output.as_deref()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => algorithm_error(e),
    }
}

const SWEEP_HEADER: &str = "algorithm,epsilon,seed,n,m,max_multiplicative_error,\
max_additive_error,achieved_density,optimal_density,max_outdegree,rounds,\
max_message_bits,ledger_total,wall_ms";

fn csv_opt<T: std::fmt::Display>(v: &Option<T>) -> String {
    v.as_ref().map_or(String::new(), |x| x.to_string())
}

fn cmd_sweep(args: &SweepArgs) -> ExitCode {
    if args.epsilons.is_empty() || args.seeds.is_empty() {
        return usage_error("sweep requires nonempty --epsilons and --seeds grids");
    }
    let mut rows = vec![SWEEP_HEADER.to_string()];
    for &eps in &args.epsilons {
        for &seed in &args.seeds {
            let config = args.algo.config(&args.input, eps, seed);
            if let Err(msg) = config.validate() {
                return usage_error(&msg);
            }
            let r = match report::run(&config) {
                Ok(r) => r,
                Err(e) => return algorithm_error(format!("{e:#}")),
            };
            let ledger_total = r
                .ledger
                .as_ref()
                .and_then(|l| l.get("total"))
                .and_then(|t| t.as_str())
                .map(str::to_string);
            rows.push(format!(
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{:.3}",
                serde_json::to_value(config.algorithm)
                    .expect("serializes")
                    .as_str()
                    .expect("string"),
                eps,
                seed,
                r.n,
                r.m,
                csv_opt(&r.errors.max_multiplicative),
                csv_opt(&r.errors.max_additive),
                csv_opt(&r.density.achieved_value),
                csv_opt(&r.density.optimal),
                csv_opt(&r.outputs.max_outdegree),
                csv_opt(&r.rounds),
                csv_opt(&r.max_message_bits),
                csv_opt(&ledger_total),
                r.wall_ms,
            ));
        }
    }
    let mut text = rows.join("\n");
    text.push('\n');
    match emit(&text, args.output.as_deref()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => algorithm_error(e),
    }
}

fn cmd_smoke(args: &SmokeArgs) -> ExitCode {
    let report = match smoke::dp_smoke_test(
        args.algorithm,
        args.epsilon,
        args.trials,
        args.seed,
        args.noiseless,
    ) {
        Ok(r) => r,
        Err(msg) => return usage_error(&msg),
    };
    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    let flagged = !report.pass;
    if let Err(e) = emit(&json, args.output.as_deref()) {
        return algorithm_error(e);
    }
    if flagged {
        eprintln!(
            "error: empirical ratio {} exceeds bound {}",
            report.max_ratio, report.bound
        );
        return ExitCode::from(1);
    }
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match &cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Smoke(args) => cmd_smoke(args),
    }
}
