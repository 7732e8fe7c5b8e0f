//! Paired LADMM / inertial LADMM trials over a problem grid.

use std::time::Instant;

use ippa_core::cpcp::{
    generate_instance, iladmm_cpcp, ladmm_cpcp, recovery_metrics, CpcpInstance, RecoveryMetrics,
};
use ippa_core::numkit::rng::ALGORITHM_ID;
use ippa_core::vi_core::AlphaRule;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{Cell, RunConfig, SolverConfig};
use crate::error::{BenchError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub rng_algorithm: String,
    pub version: String,
}

impl Default for Environment {
    fn default() -> Self {
        Self {
            rng_algorithm: ALGORITHM_ID.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub iters: usize,
    pub rel_l: f64,
    pub rel_s: f64,
    pub converged: bool,
    pub feasibility: f64,
    pub final_beta: f64,
    pub wall_time_s: f64,
}

impl TrialOutcome {
    fn new(m: &RecoveryMetrics, final_beta: f64, wall_time_s: f64) -> Self {
        Self {
            iters: m.iters,
            rel_l: m.rel_l,
            rel_s: m.rel_s,
            converged: m.converged,
            feasibility: m.feasibility,
            final_beta,
            wall_time_s,
        }
    }
}

/// Both solvers on the instance generated from `seed`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialPair {
    pub seed: u64,
    pub ladmm: TrialOutcome,
    pub iladmm: TrialOutcome,
}

/// Averages over the trials of one record. Iteration means are `None` when some trial hit
/// the iteration cap.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub trials: usize,
    /// Mean LADMM iterations.
    pub iter1: Option<f64>,
    /// Mean inertial LADMM iterations.
    pub iter2: Option<f64>,
    /// `iter2 / iter1`
    pub ratio: Option<f64>,
    pub rel_l_ladmm: f64,
    pub rel_s_ladmm: f64,
    pub rel_l_iladmm: f64,
    pub rel_s_iladmm: f64,
}

impl Aggregate {
    pub fn from_trials(trials: &[TrialPair]) -> Self {
        let n = trials.len();
        let mean = |f: &dyn Fn(&TrialPair) -> f64| {
            if n == 0 {
                f64::NAN
            } else {
                trials.iter().map(f).sum::<f64>() / n as f64
            }
        };
        let iters = |pick: &dyn Fn(&TrialPair) -> &TrialOutcome| {
            (n > 0 && trials.iter().all(|t| pick(t).converged))
                .then(|| mean(&|t| pick(t).iters as f64))
        };
        let iter1 = iters(&|t| &t.ladmm);
        let iter2 = iters(&|t| &t.iladmm);
        Self {
            trials: n,
            iter1,
            iter2,
            ratio: iter1.zip(iter2).map(|(a, b)| b / a),
            rel_l_ladmm: mean(&|t| t.ladmm.rel_l),
            rel_s_ladmm: mean(&|t| t.ladmm.rel_s),
            rel_l_iladmm: mean(&|t| t.iladmm.rel_l),
            rel_s_iladmm: mean(&|t| t.iladmm.rel_s),
        }
    }
}

/// One grid cell at one inertial weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub cell: Cell,
    pub q: usize,
    pub dof: usize,
    pub q_over_dof: f64,
    pub alpha: f64,
    pub solver: SolverConfig,
    pub trials: Vec<TrialPair>,
    /// Seeds whose instance or solve failed, with the error.
    pub failures: Vec<(u64, String)>,
    pub aggregate: Aggregate,
    pub environment: Environment,
}

impl RunRecord {
    /// The record with wall times zeroed, for comparing runs.
    pub fn without_timing(&self) -> Self {
        let mut r = self.clone();
        for t in &mut r.trials {
            t.ladmm.wall_time_s = 0.0;
            t.iladmm.wall_time_s = 0.0;
        }
        r
    }
}

/// Result of one `(cell, seed)` job: LADMM once, then the inertial method at every α.
type Job = std::result::Result<(TrialOutcome, Vec<TrialOutcome>), String>;

fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed().as_secs_f64())
}

fn solve_pair(
    inst: &CpcpInstance,
    solver: &SolverConfig,
) -> Result<(TrialOutcome, Vec<TrialOutcome>)> {
    let stop = solver.stop_rule();
    let ctrl = solver.controller(inst)?;
    let (res, t) = timed(|| ladmm_cpcp(inst, solver.tau, solver.eta, ctrl, stop));
    let (state, trace) = res?;
    let plain = TrialOutcome::new(&recovery_metrics(inst, &state, &trace)?, state.beta, t);
    let mut inertial = Vec::with_capacity(solver.alphas.len());
    for &alpha in &solver.alphas {
        let (res, t) = timed(|| {
            iladmm_cpcp(
                inst,
                solver.tau,
                solver.eta,
                AlphaRule::Constant(alpha),
                ctrl,
                stop,
            )
        });
        let (state, trace) = res?;
        inertial.push(TrialOutcome::new(
            &recovery_metrics(inst, &state, &trace)?,
            state.beta,
            t,
        ));
    }
    Ok((plain, inertial))
}

fn run_job(cell: &Cell, seed: u64, solver: &SolverConfig) -> Job {
    let inst = cell
        .spec(seed)
        .and_then(|spec| Ok(generate_instance(spec)?))
        .map_err(|e| e.to_string())?;
    let out = solve_pair(&inst, solver).map_err(|e| e.to_string());
    match &out {
        Ok((plain, _)) => log::info!(
            "m={} r={} nnz={} q={} {} seed {seed}: ladmm {} iterations",
            cell.m,
            cell.r,
            cell.nnz_ratio,
            cell.q_ratio,
            cell.kind,
            plain.iters
        ),
        Err(e) => log::warn!("seed {seed}: {e}"),
    }
    out
}

/// Runs every `(cell, seed)` pair, LADMM and the inertial method on the same instance.
///
/// Records come out cell-major, then by α in configuration order. Trials run on the current
/// rayon pool; the output does not depend on its size except for wall times.
pub fn run_grid(config: &RunConfig) -> Result<Vec<RunRecord>> {
    config.validate()?;
    let cells = config.cells();
    let jobs: Vec<(usize, u64)> = (0..cells.len())
        .flat_map(|c| config.seeds.iter().map(move |&s| (c, s)))
        .collect();
    let results: Vec<Job> = jobs
        .par_iter()
        .map(|&(c, seed)| run_job(&cells[c], seed, &config.solver))
        .collect();

    let mut records = Vec::new();
    let per_cell = config.seeds.len();
    for (c, cell) in cells.iter().enumerate() {
        let spec = cell.spec(0)?;
        let chunk = &results[c * per_cell..(c + 1) * per_cell];
        for (ai, &alpha) in config.solver.alphas.iter().enumerate() {
            let mut trials = Vec::new();
            let mut failures = Vec::new();
            for (&seed, job) in config.seeds.iter().zip(chunk) {
                match job {
                    Ok((plain, inertial)) => trials.push(TrialPair {
                        seed,
                        ladmm: plain.clone(),
                        iladmm: inertial[ai].clone(),
                    }),
                    Err(e) => failures.push((seed, e.clone())),
                }
            }
            records.push(RunRecord {
                cell: *cell,
                q: spec.q,
                dof: spec.dof(),
                q_over_dof: spec.q_over_dof(),
                alpha,
                solver: config.solver.clone(),
                aggregate: Aggregate::from_trials(&trials),
                trials,
                failures,
                environment: Environment::default(),
            });
        }
    }
    Ok(records)
}

/// [`run_grid`] on a dedicated pool of `threads` workers.
pub fn run_grid_with_threads(config: &RunConfig, threads: usize) -> Result<Vec<RunRecord>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| BenchError::config(format!("thread pool: {e}")))?;
    pool.install(|| run_grid(config))
}

/// A single solve, as reported by `ippa solve`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveRecord {
    pub cell: Cell,
    pub seed: u64,
    pub alpha: f64,
    pub tau: f64,
    pub eta: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub metrics: RecoveryMetrics,
    pub final_beta: f64,
    pub environment: Environment,
}

/// Solves one instance; `α = 0` is plain LADMM.
pub fn solve_one(cell: &Cell, seed: u64, alpha: f64, solver: &SolverConfig) -> Result<SolveRecord> {
    let inst = generate_instance(cell.spec(seed)?)?;
    let (state, trace) = iladmm_cpcp(
        &inst,
        solver.tau,
        solver.eta,
        AlphaRule::Constant(alpha),
        solver.controller(&inst)?,
        solver.stop_rule(),
    )?;
    Ok(SolveRecord {
        cell: *cell,
        seed,
        alpha,
        tau: solver.tau,
        eta: solver.eta,
        tol: solver.tol,
        max_iter: solver.max_iter,
        metrics: recovery_metrics(&inst, &state, &trace)?,
        final_beta: state.beta,
        environment: Environment::default(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn outcome(iters: usize, converged: bool) -> TrialOutcome {
        TrialOutcome {
            iters,
            rel_l: 1e-5,
            rel_s: 2e-5,
            converged,
            feasibility: 0.0,
            final_beta: 1.0,
            wall_time_s: 0.1,
        }
    }

    #[test]
    fn aggregate_means_and_dash() {
        let t = vec![
            TrialPair {
                seed: 0,
                ladmm: outcome(100, true),
                iladmm: outcome(70, true),
            },
            TrialPair {
                seed: 1,
                ladmm: outcome(120, true),
                iladmm: outcome(80, true),
            },
        ];
        let a = Aggregate::from_trials(&t);
        assert_eq!(a.iter1, Some(110.0));
        assert_eq!(a.iter2, Some(75.0));
        assert_eq!(a.ratio, Some(75.0 / 110.0));
        assert_eq!(a.trials, 2);

        let mut capped = t.clone();
        capped[1].iladmm.converged = false;
        let a = Aggregate::from_trials(&capped);
        assert_eq!(a.iter1, Some(110.0));
        assert_eq!((a.iter2, a.ratio), (None, None));

        let empty = Aggregate::from_trials(&[]);
        assert_eq!((empty.iter1, empty.trials), (None, 0));
    }
}
