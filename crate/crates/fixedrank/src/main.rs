//! Command-line front end for the batch workflows: generate problems,
//! solve them, certify solutions, and run the experiment sweeps. All
//! heavy lifting lives in the library; this binary parses arguments,
//! wires files together, and reports errors as JSON on stderr.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use fixedrank::error::{Error, Result};
use fixedrank::io::{load_problem, read_matrix_csv, save_problem, write_matrix_csv, write_trace_jsonl};
use fixedrank::problems::SyntheticSpec;
use fixedrank::solvers::{gist_solve, is_stationary, nuclear_solve, SolverConfig};
use fixedrank::sweep::{
    run_noise_sweep, run_nrsfm_sweep, write_records_csv, NoiseSweepConfig, NrsfmSweepConfig,
};

#[derive(Parser)]
#[command(
    name = "fixedrank",
    about = "Fixed-rank matrix recovery: problem generation, solving, certification, and experiment sweeps",
    version
)]
struct Cli {
    /// Seed override applied to the generated spec or sweep config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// JSON config file for the sweep subcommands.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (default: current directory).
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a problem bundle from a synthetic spec file.
    Gen {
        /// JSON file holding the synthetic spec.
        #[arg(long)]
        spec: PathBuf,
    },
    /// Solve a problem bundle and write solution, trace, and report.
    Solve {
        /// Bundle written by `gen`.
        #[arg(long)]
        problem: PathBuf,
        /// Solver: the rank-aware relaxation or the nuclear baseline.
        #[arg(long, default_value = "rr", value_parser = ["rr", "nuclear"])]
        method: String,
        /// Nuclear regularization weight (nuclear method only).
        #[arg(long)]
        mu: Option<f64>,
        /// Target rank override.
        #[arg(long)]
        rank: Option<usize>,
        /// Iteration cap override.
        #[arg(long)]
        max_iters: Option<usize>,
    },
    /// Evaluate the stationarity and uniqueness certificate of a solution.
    Certify {
        #[arg(long)]
        problem: PathBuf,
        /// Solution matrix as headerless CSV.
        #[arg(long)]
        solution: PathBuf,
    },
    /// Noise sweep comparing the rank-aware solver with the nuclear baseline.
    NoiseSweep,
    /// Rank/regularization sweep on a structure-from-motion scene.
    NrsfmSweep {
        /// Dataset file override (JSON scene).
        #[arg(long)]
        dataset: Option<PathBuf>,
    },
}

#[derive(Serialize)]
struct SolveReport {
    method: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    mu: Option<f64>,
    target_rank: usize,
    rank: usize,
    fit: f64,
    objective: f64,
    iterations: usize,
    final_stationarity: f64,
    operator_norm: f64,
    certificate: Option<fixedrank::Certificate>,
}

#[derive(Serialize)]
struct CertifyReport {
    verdict: String,
    stationary: bool,
    stationarity_residual: f64,
    certificate: Option<fixedrank::Certificate>,
}

fn load_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

fn cmd_gen(spec_path: &Path, out: &Path, seed: Option<u64>) -> Result<()> {
    let mut spec: SyntheticSpec = load_json(spec_path)?;
    if let Some(seed) = seed {
        spec.seed = seed;
    }
    spec.validate()?;
    let problem = spec.realize()?;
    let bundle = save_problem(out, &spec, &problem)?;
    println!("wrote {}", bundle.display());
    Ok(())
}

fn cmd_solve(
    problem_path: &Path,
    method: &str,
    mu: Option<f64>,
    rank: Option<usize>,
    max_iters: Option<usize>,
    out: &Path,
) -> Result<()> {
    let mut problem = load_problem(problem_path)?;
    if let Some(r) = rank {
        let (m, n) = problem.operator.input_shape();
        if r < 1 || r > m.min(n) {
            return Err(Error::InvalidInput(format!(
                "rank override {r} out of range for {m}x{n} variables"
            )));
        }
        problem.target_rank = r;
    }
    let mut config = SolverConfig::default();
    if let Some(iters) = max_iters {
        config.max_iters = iters;
    }
    let (x, trace, mu_used) = match method {
        "rr" => {
            let (x, trace) = gist_solve(&problem, &config)?;
            (x, trace, None)
        }
        "nuclear" => {
            let mu = mu.ok_or_else(|| {
                Error::InvalidInput("the nuclear method requires --mu".into())
            })?;
            let (x, trace) = nuclear_solve(&problem, mu, &config)?;
            (x, trace, Some(mu))
        }
        other => {
            return Err(Error::InvalidInput(format!("unknown method {other}")));
        }
    };
    std::fs::create_dir_all(out)?;
    write_matrix_csv(&out.join("solution.csv"), &x)?;
    write_trace_jsonl(&out.join("trace.jsonl"), &trace)?;
    let report = SolveReport {
        method: method.to_string(),
        mu: mu_used,
        target_rank: problem.target_rank,
        rank: fixedrank::numerical_rank(&x)?,
        fit: problem.fit(&x)?,
        objective: *trace.objectives.last().expect("nonempty trace"),
        iterations: trace.iterations,
        final_stationarity: trace.final_stationarity,
        operator_norm: problem.operator.norm_est(100),
        certificate: trace.certificate.clone(),
    };
    std::fs::write(
        out.join("report.json"),
        serde_json::to_string_pretty(&report)?,
    )?;
    println!(
        "method={} fit={:.6e} rank={} iterations={}",
        report.method, report.fit, report.rank, report.iterations
    );
    Ok(())
}

fn cmd_certify(problem_path: &Path, solution_path: &Path, out: &Path) -> Result<()> {
    let problem = load_problem(problem_path)?;
    let x = read_matrix_csv(solution_path)?;
    let (stationary, _, certificate) = is_stationary(&x, &problem, 1e-6)?;
    let verdict = match &certificate {
        Some(c) if c.certified => "certified",
        Some(_) => "uncertified",
        None => "unknown",
    };
    let report = CertifyReport {
        verdict: verdict.to_string(),
        stationary,
        stationarity_residual: {
            let z = fixedrank::gradient_step(&x, &problem, 1.0)?;
            (&x - fixedrank::truncate_rank(&z, problem.target_rank)?).norm()
        },
        certificate,
    };
    let json = serde_json::to_string_pretty(&report)?;
    println!("{json}");
    if out != Path::new(".") {
        std::fs::create_dir_all(out)?;
        std::fs::write(out.join("certificate.json"), &json)?;
    }
    Ok(())
}

fn cmd_noise_sweep(config_path: Option<&Path>, seed: Option<u64>, out: &Path) -> Result<()> {
    let mut config = match config_path {
        Some(path) => load_json::<NoiseSweepConfig>(path)?,
        None => NoiseSweepConfig::default(),
    };
    if let Some(seed) = seed {
        config.seed = seed;
    }
    let records = run_noise_sweep(&config)?;
    std::fs::create_dir_all(out)?;
    let path = out.join("noise_sweep.csv");
    write_records_csv(&path, &records)?;
    println!("wrote {} ({} noise levels)", path.display(), records.len());
    Ok(())
}

fn cmd_nrsfm_sweep(
    config_path: Option<&Path>,
    dataset: Option<PathBuf>,
    seed: Option<u64>,
    out: &Path,
) -> Result<()> {
    let mut config = match config_path {
        Some(path) => load_json::<NrsfmSweepConfig>(path)?,
        None => NrsfmSweepConfig::default(),
    };
    if dataset.is_some() {
        config.dataset = dataset;
    }
    if let Some(seed) = seed {
        config.synthetic.seed = seed;
    }
    let (rank_records, mu_records) = run_nrsfm_sweep(&config)?;
    std::fs::create_dir_all(out)?;
    let rank_path = out.join("nrsfm_sweep_rr.csv");
    let mu_path = out.join("nrsfm_sweep_nuclear.csv");
    write_records_csv(&rank_path, &rank_records)?;
    write_records_csv(&mu_path, &mu_records)?;
    println!(
        "wrote {} ({} solves) and {} ({} solves)",
        rank_path.display(),
        rank_records.len(),
        mu_path.display(),
        mu_records.len()
    );
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Gen { spec } => cmd_gen(&spec, &cli.out, cli.seed),
        Command::Solve {
            problem,
            method,
            mu,
            rank,
            max_iters,
        } => cmd_solve(&problem, &method, mu, rank, max_iters, &cli.out),
        Command::Certify { problem, solution } => cmd_certify(&problem, &solution, &cli.out),
        Command::NoiseSweep => cmd_noise_sweep(cli.config.as_deref(), cli.seed, &cli.out),
        Command::NrsfmSweep { dataset } => {
            cmd_nrsfm_sweep(cli.config.as_deref(), dataset, cli.seed, &cli.out)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let payload = serde_json::json!({
                "error": { "kind": err.kind(), "message": err.to_string() }
            });
            eprintln!("{payload}");
            ExitCode::FAILURE
        }
    }
}
