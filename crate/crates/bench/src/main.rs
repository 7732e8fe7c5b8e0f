use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ippa_bench::{
    default_alpha_sweep, emit_csv, emit_json, emit_plot_data, run_grid_with_threads, run_verify,
    solve_one, BenchError, Cell, RunConfig, SolverConfig, VerifySettings,
};
use ippa_core::numkit::TransformKind;

#[derive(Parser)]
#[command(name = "ippa", version, about = "Inertial linearized ADMM experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one CPCP instance and print the result as JSON.
    Solve(SolveArgs),
    /// Run a grid of paired trials from a config file.
    Bench(GridArgs),
    /// Run the grid for a range of inertial weights.
    SweepAlpha(SweepArgs),
    /// Check convergence invariants on small fixtures.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct SolverFlags {
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    /// Initial penalty; defaults to 0.1·q/‖b‖₁.
    #[arg(long)]
    beta0: Option<f64>,
    /// Objective scale in the penalty update.
    #[arg(long)]
    scale: Option<f64>,
}

impl SolverFlags {
    fn apply(&self, s: &mut SolverConfig) {
        if let Some(v) = self.tau {
            s.tau = v;
        }
        if let Some(v) = self.eta {
            s.eta = v;
        }
        if let Some(v) = self.tol {
            s.tol = v;
        }
        if let Some(v) = self.max_iter {
            s.max_iter = v;
        }
        if self.beta0.is_some() {
            s.beta0 = self.beta0;
        }
        if self.scale.is_some() {
            s.scale = self.scale;
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long, default_value_t = 64)]
    m: usize,
    /// Defaults to `m`.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 2)]
    r: usize,
    #[arg(long, default_value_t = 0.05)]
    nnz_ratio: f64,
    #[arg(long, default_value_t = 0.6)]
    q_ratio: f64,
    #[arg(long, default_value = "dct2")]
    kind: TransformKind,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Inertial weight; 0 gives plain linearized ADMM.
    #[arg(long, default_value_t = 0.28)]
    alpha: f64,
    #[command(flatten)]
    solver: SolverFlags,
}

#[derive(Args)]
struct GridArgs {
    #[arg(long, short)]
    config: PathBuf,
    /// Output directory, overriding the config and the environment.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    /// Worker threads; defaults to the number of cores.
    #[arg(long)]
    threads: Option<usize>,
    #[command(flatten)]
    solver: SolverFlags,
}

impl GridArgs {
    fn load(&self) -> ippa_bench::Result<RunConfig> {
        let mut cfg = RunConfig::load(&self.config)?;
        if let Some(out) = &self.out {
            cfg.output.dir = Some(out.clone());
        }
        if let Some(seeds) = &self.seeds {
            cfg.seeds = seeds.clone();
        }
        self.solver.apply(&mut cfg.solver);
        Ok(cfg)
    }
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    grid: GridArgs,
    /// Inertial weights; defaults to 0.05, 0.10, …, 0.35.
    #[arg(long, value_delimiter = ',')]
    alphas: Option<Vec<f64>>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 20)]
    fixtures: usize,
    #[arg(long, default_value_t = 500)]
    iterations: usize,
    #[arg(long, default_value_t = 2024)]
    seed: u64,
}

enum Outcome {
    Ok,
    Violation,
}

fn run_and_write(cfg: &RunConfig, threads: Option<usize>) -> ippa_bench::Result<()> {
    cfg.validate()?;
    let threads = threads.unwrap_or_else(rayon::current_num_threads);
    let records = run_grid_with_threads(cfg, threads)?;
    let out = &cfg.output;
    emit_csv(&records, &out.csv_path())?;
    emit_plot_data(&records, &out.plot_path())?;
    emit_json(&records, &out.records_path())?;
    for r in &records {
        for (seed, e) in &r.failures {
            log::error!("seed {seed} failed: {e}");
        }
    }
    println!("{}", out.csv_path().display());
    Ok(())
}

fn run(cli: Cli) -> ippa_bench::Result<Outcome> {
    match cli.command {
        Command::Solve(a) => {
            let cell = Cell {
                m: a.m,
                n: a.n.unwrap_or(a.m),
                r: a.r,
                nnz_ratio: a.nnz_ratio,
                q_ratio: a.q_ratio,
                kind: a.kind,
            };
            let mut solver = SolverConfig {
                alphas: vec![a.alpha],
                bounded_inertia: false,
                ..Default::default()
            };
            a.solver.apply(&mut solver);
            solver.validate()?;
            let rec = solve_one(&cell, a.seed, a.alpha, &solver)?;
            println!("{}", serde_json::to_string_pretty(&rec)?);
        }
        Command::Bench(a) => {
            let cfg = a.load()?;
            run_and_write(&cfg, a.threads)?;
        }
        Command::SweepAlpha(a) => {
            let mut cfg = a.grid.load()?;
            cfg.solver.alphas = a.alphas.unwrap_or_else(default_alpha_sweep);
            cfg.solver.bounded_inertia = false;
            run_and_write(&cfg, a.grid.threads)?;
        }
        Command::Verify(a) => {
            if a.fixtures == 0 || a.iterations < 200 {
                return Err(BenchError::config(
                    "verify needs at least one fixture and 200 iterations",
                ));
            }
            let settings = VerifySettings {
                fixtures: a.fixtures,
                iterations: a.iterations,
                seed: a.seed,
                ..Default::default()
            };
            let checks = run_verify(&settings)?;
            for c in &checks {
                println!("{}", c.line());
            }
            if checks.iter().any(|c| !c.passed) {
                return Ok(Outcome::Violation);
            }
        }
    }
    Ok(Outcome::Ok)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::Violation) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_usage() { 2 } else { 1 })
        }
    }
}
