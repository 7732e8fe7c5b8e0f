use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkit::vecops;
use crate::vi_core::{InertialSchedule, MixedViProblem, WeightOperator};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StopRule {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for StopRule {
    fn default() -> Self {
        Self {
            tol: 1e-5,
            max_iter: 1000,
        }
    }
}

impl StopRule {
    /// Run exactly `max_iter` iterations.
    pub fn fixed(max_iter: usize) -> Self {
        Self { tol: 0.0, max_iter }
    }
}

/// Per-iteration record of an inertial run.
///
/// After `k` iterations `iterates` holds `w⁰ … wᵏ` (and `phi`, when present, the matching
/// `‖wⁱ − w*‖²_G`). The per-step vectors hold one entry per iteration `i = 0 … k−1`.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct SolverTrace {
    pub iterates: Vec<Vec<f64>>,
    /// `w̄ⁱ`
    pub extrapolated: Vec<Vec<f64>>,
    pub phi: Option<Vec<f64>>,
    /// `δᵢ = 2αᵢ‖wⁱ − wⁱ⁻¹‖²_G`
    pub delta: Vec<f64>,
    /// `‖wⁱ⁺¹ − w̄ⁱ‖²_G`
    pub step_residuals: Vec<f64>,
    /// Relative Euclidean residual used by the stop test.
    pub stop_residuals: Vec<f64>,
    pub alphas: Vec<f64>,
    pub lambdas: Vec<f64>,
    pub objective: Option<Vec<f64>>,
    pub t_seq: Option<Vec<f64>>,
    pub iterations: usize,
    pub converged: bool,
}

impl SolverTrace {
    pub fn last(&self) -> &[f64] {
        self.iterates.last().expect("trace always holds w⁰")
    }

    pub fn is_consistent(&self) -> bool {
        let k = self.iterations;
        let per_step = [
            self.extrapolated.len(),
            self.delta.len(),
            self.step_residuals.len(),
            self.stop_residuals.len(),
            self.alphas.len(),
            self.lambdas.len(),
        ];
        self.iterates.len() == k + 1
            && per_step.iter().all(|&l| l == k)
            && self.phi.as_ref().is_none_or(|p| p.len() == k + 1)
    }
}

fn check_dims(n: usize, vs: &[&[f64]]) -> Result<()> {
    for v in vs {
        if v.len() != n {
            return Err(Error::shape(n, v.len()));
        }
        if !vecops::all_finite(v) {
            return Err(Error::NonFinite("iterate"));
        }
    }
    Ok(())
}

/// One step: `w̄ = wᵏ + αₖ(wᵏ − wᵏ⁻¹)`, `wᵏ⁺¹ = resolvent(w̄, λₖ, G)`.
pub fn inertial_ppa_step(
    problem: &dyn MixedViProblem,
    g: &dyn WeightOperator,
    w_k: &[f64],
    w_km1: &[f64],
    alpha: f64,
    lambda: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = problem.dim();
    check_dims(n, &[w_k, w_km1])?;
    if g.dim() != n {
        return Err(Error::shape(n, g.dim()));
    }
    if !(alpha >= 0.0) || !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::invalid(format!(
            "need α ≥ 0 and λ > 0, got α = {alpha}, λ = {lambda}"
        )));
    }
    let w_bar = vecops::extrapolate(w_k, w_km1, alpha);
    let w_next = problem.resolvent(&w_bar, lambda, g)?;
    if w_next.len() != n {
        return Err(Error::Resolvent(format!(
            "returned length {} for dimension {n}",
            w_next.len()
        )));
    }
    if !vecops::all_finite(&w_next) {
        return Err(Error::Resolvent("non-finite output".into()));
    }
    if !problem.contains(&w_next) {
        return Err(Error::Resolvent("output outside Ω".into()));
    }
    Ok((w_bar, w_next))
}

/// Runs the general inertial PPA from `w⁰ = w⁻¹`.
///
/// Stops when `‖wᵏ⁺¹ − w̄ᵏ‖ / (1 + ‖w̄ᵏ‖) < tol` or after `max_iter` steps. When `w_star` is
/// given the trace records `φₖ = ‖wᵏ − w*‖²_G`.
pub fn run_inertial_ppa(
    problem: &dyn MixedViProblem,
    g: &dyn WeightOperator,
    schedule: &InertialSchedule,
    w0: &[f64],
    stop: StopRule,
    w_star: Option<&[f64]>,
) -> Result<SolverTrace> {
    let n = problem.dim();
    check_dims(n, &[w0])?;
    if let Some(ws) = w_star {
        check_dims(n, &[ws])?;
    }
    if !problem.contains(w0) {
        return Err(Error::invalid("initial point outside Ω"));
    }
    let phi_of = |w: &[f64]| w_star.map(|ws| g.quad(&vecops::sub(w, ws)));

    let mut tr = SolverTrace {
        iterates: vec![w0.to_vec()],
        phi: phi_of(w0).map(|p| vec![p]),
        ..Default::default()
    };
    let mut w_prev = w0.to_vec();
    let mut w = w0.to_vec();
    for k in 0..stop.max_iter {
        let diff_sq = g.quad(&vecops::sub(&w, &w_prev));
        let alpha = schedule.alpha.alpha(k, diff_sq);
        let lambda = schedule.lambda.lambda(k);
        let (w_bar, w_next) = inertial_ppa_step(problem, g, &w, &w_prev, alpha, lambda)?;

        let step = vecops::sub(&w_next, &w_bar);
        let rel = vecops::norm(&step) / (1.0 + vecops::norm(&w_bar));
        tr.delta.push(2.0 * alpha * diff_sq);
        tr.step_residuals.push(g.quad(&step));
        tr.stop_residuals.push(rel);
        tr.alphas.push(alpha);
        tr.lambdas.push(lambda);
        if let (Some(p), Some(v)) = (tr.phi.as_mut(), phi_of(&w_next)) {
            p.push(v);
        }
        tr.extrapolated.push(w_bar);
        tr.iterates.push(w_next.clone());
        tr.iterations = k + 1;

        w_prev = std::mem::replace(&mut w, w_next);
        if rel < stop.tol {
            tr.converged = true;
            break;
        }
    }
    if !tr.converged {
        log::debug!("inertial PPA stopped at max_iter = {}", stop.max_iter);
    }
    Ok(tr)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::DenseMatrix;
    use crate::vi_core::{AffineVi, ScaledIdentity};

    fn half_norm_problem(n: usize) -> AffineVi {
        AffineVi::unconstrained(
            DenseMatrix::zeros(n, n),
            vec![0.0; n],
            DenseMatrix::identity(n),
            vec![0.0; n],
        )
        .unwrap()
    }

    #[test]
    fn identity_map_halves() {
        let p = half_norm_problem(3);
        let g = ScaledIdentity::identity(3);
        let w0 = [2.0, -4.0, 1.0];
        let (bar, next) = inertial_ppa_step(&p, &g, &w0, &w0, 0.0, 1.0).unwrap();
        assert_eq!(bar, w0.to_vec());
        for (a, b) in next.iter().zip(w0) {
            assert!((a - b / 2.0).abs() < 1e-15);
        }
    }

    #[test]
    fn one_dimensional_hand_value() {
        let p = half_norm_problem(1);
        let g = ScaledIdentity::identity(1);
        let (bar, next) = inertial_ppa_step(&p, &g, &[1.0], &[0.0], 0.28, 1.0).unwrap();
        assert!((bar[0] - 1.28).abs() < 1e-15);
        assert!((next[0] - 0.64).abs() < 1e-15);
    }

    #[test]
    fn fixed_point_and_immediate_stop() {
        let p = half_norm_problem(2);
        let g = ScaledIdentity::identity(2);
        let (_, next) = inertial_ppa_step(&p, &g, &[0.0, 0.0], &[0.0, 0.0], 0.3, 2.0).unwrap();
        assert_eq!(next, vec![0.0, 0.0]);
        let s = InertialSchedule::constant(0.28, 1.0).unwrap();
        let tr = run_inertial_ppa(&p, &g, &s, &[0.0, 0.0], StopRule::default(), None).unwrap();
        assert_eq!(tr.iterations, 1);
        assert!(tr.converged && tr.is_consistent());
    }

    #[test]
    fn bad_arguments() {
        let p = half_norm_problem(2);
        let g = ScaledIdentity::identity(2);
        assert!(inertial_ppa_step(&p, &g, &[0.0], &[0.0, 0.0], 0.0, 1.0).is_err());
        assert!(inertial_ppa_step(&p, &g, &[0.0, 0.0], &[0.0, 0.0], -0.1, 1.0).is_err());
        assert!(inertial_ppa_step(&p, &g, &[0.0, 0.0], &[0.0, 0.0], 0.1, 0.0).is_err());
        assert!(inertial_ppa_step(&p, &g, &[f64::NAN, 0.0], &[0.0, 0.0], 0.1, 1.0).is_err());
    }

    #[test]
    fn max_iter_flags_non_convergence() {
        let p = half_norm_problem(2);
        let g = ScaledIdentity::identity(2);
        let s = InertialSchedule::classical(1.0).unwrap();
        let tr = run_inertial_ppa(
            &p,
            &g,
            &s,
            &[1.0, 1.0],
            StopRule::fixed(5),
            Some(&[0.0, 0.0]),
        )
        .unwrap();
        assert!(!tr.converged);
        assert_eq!(tr.iterations, 5);
        assert!(tr.is_consistent());
        assert!((tr.phi.as_ref().unwrap()[5] - 2.0 / 1024.0).abs() < 1e-15);
    }
}
