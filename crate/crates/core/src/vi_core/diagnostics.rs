use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkit::{vecops, SeededRng};
use crate::vi_core::{MixedViProblem, SolverTrace, WeightOperator, INERTIA_LIMIT};

/// `1 + 2/(1 − 3α)`
pub fn inertial_rate_constant(alpha: f64) -> f64 {
    1.0 + 2.0 / (1.0 - 3.0 * alpha)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InertialRateReport {
    pub alpha: f64,
    pub constant: f64,
    pub phi0: f64,
    /// First `k` (1-based) where `min_{i<k} ‖wⁱ⁺¹ − w̄ⁱ‖²_G` exceeded the bound.
    pub first_violation: Option<usize>,
    /// `k · min_{i<k} ‖wⁱ⁺¹ − w̄ⁱ‖²_G` for `k = 1 … K`; should tend to zero.
    pub k_min_residual: Vec<f64>,
    /// Whether `Σᵢ ‖wⁱ⁺¹ − w̄ⁱ‖²_G ≤ constant·φ₀` held for every partial sum.
    pub partial_sums_bounded: bool,
}

impl InertialRateReport {
    pub fn holds(&self) -> bool {
        self.first_violation.is_none() && self.partial_sums_bounded
    }
}

/// Checks the min-residual bound `min_{i<k} ‖wⁱ⁺¹ − w̄ⁱ‖²_G ≤ (1 + 2/(1−3α))·‖w⁰ − w*‖²_G / k`,
/// with `α = maxₖ αₖ` taken from the trace.
pub fn check_inertial_rate_bound(
    trace: &SolverTrace,
    g: &dyn WeightOperator,
    w_star: &[f64],
) -> Result<InertialRateReport> {
    let alpha = trace.alphas.iter().copied().fold(0.0, f64::max);
    if alpha >= INERTIA_LIMIT {
        return Err(Error::invalid(format!(
            "α = {alpha} outside the α < 1/3 regime"
        )));
    }
    if trace.alphas.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::invalid("inertial weights are not nondecreasing"));
    }
    let w0 = trace
        .iterates
        .first()
        .ok_or_else(|| Error::invalid("empty trace"))?;
    if w0.len() != w_star.len() {
        return Err(Error::shape(w0.len(), w_star.len()));
    }
    let constant = inertial_rate_constant(alpha);
    let phi0 = g.quad(&vecops::sub(w0, w_star));
    let mut first_violation = None;
    let mut k_min_residual = Vec::with_capacity(trace.step_residuals.len());
    let mut min_res = f64::INFINITY;
    let mut sum = 0.0;
    let mut partial_sums_bounded = true;
    for (i, &res) in trace.step_residuals.iter().enumerate() {
        let k = (i + 1) as f64;
        min_res = min_res.min(res);
        sum += res;
        if min_res > constant * phi0 / k + 1e-10 && first_violation.is_none() {
            first_violation = Some(i + 1);
        }
        if sum > constant * phi0 + 1e-10 {
            partial_sums_bounded = false;
        }
        k_min_residual.push(k * min_res);
    }
    Ok(InertialRateReport {
        alpha,
        constant,
        phi0,
        first_violation,
        k_min_residual,
        partial_sums_bounded,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FejerReport {
    pub alpha: f64,
    pub first_violation: Option<usize>,
    /// `maxₖ φₖ − (αᵏφ₀ + φ₀/(1−α))`
    pub max_excess: f64,
}

impl FejerReport {
    pub fn holds(&self) -> bool {
        self.first_violation.is_none()
    }
}

/// Checks `φₖ ≤ αᵏφ₀ + φ₀/(1 − α)` on a trace recorded with a known solution.
pub fn check_fejer_bound(trace: &SolverTrace) -> Result<FejerReport> {
    let phi = trace
        .phi
        .as_ref()
        .ok_or_else(|| Error::invalid("trace has no φ values; rerun with a known solution"))?;
    let alpha = trace.alphas.iter().copied().fold(0.0, f64::max);
    if alpha >= 1.0 {
        return Err(Error::invalid("α must be below 1"));
    }
    let phi0 = phi[0];
    let mut first_violation = None;
    let mut max_excess = f64::NEG_INFINITY;
    for (k, &p) in phi.iter().enumerate() {
        let bound = alpha.powi(k as i32) * phi0 + phi0 / (1.0 - alpha);
        let excess = p - bound;
        max_excess = max_excess.max(excess);
        if excess > 1e-8 && first_violation.is_none() {
            first_violation = Some(k);
        }
    }
    Ok(FejerReport {
        alpha,
        first_violation,
        max_excess,
    })
}

/// Minimum over `probes` of the proximal VI slack
/// `θ(w) − θ(w⁺) + ⟨w − w⁺, F(w⁺) + λ⁻¹G(w⁺ − w̄)⟩`. Nonnegative up to round-off when
/// `w⁺` is the resolvent at `w̄`.
pub fn vi_slack(
    problem: &dyn MixedViProblem,
    g: &dyn WeightOperator,
    w_bar: &[f64],
    w_next: &[f64],
    lambda: f64,
    probes: &[Vec<f64>],
) -> f64 {
    let f = problem.operator(w_next);
    let gd = g.apply(&vecops::sub(w_next, w_bar));
    let dir: Vec<f64> = f.iter().zip(&gd).map(|(a, b)| a + b / lambda).collect();
    let theta_next = problem.theta(w_next);
    probes
        .iter()
        .map(|w| problem.theta(w) - theta_next + vecops::dot(&vecops::sub(w, w_next), &dir))
        .fold(f64::INFINITY, f64::min)
}

/// Points drawn uniformly from the cube of half-width `radius` around `center`, projected onto Ω.
pub fn sample_probes(
    problem: &dyn MixedViProblem,
    center: &[f64],
    count: usize,
    radius: f64,
    rng: &mut SeededRng,
) -> Result<Vec<Vec<f64>>> {
    (0..count)
        .map(|_| {
            let offs = rng.uniform_vec(-radius, radius, center.len())?;
            Ok(problem.project(&vecops::add(center, &offs)))
        })
        .collect()
}

/// `min ⟨u − v, F(u) − F(v)⟩ − ‖u − v‖²_H` over `pairs` random pairs around `center`.
/// `H = 0` when the problem does not declare one.
pub fn h_monotonicity_margin(
    problem: &dyn MixedViProblem,
    center: &[f64],
    pairs: usize,
    rng: &mut SeededRng,
) -> Result<f64> {
    let pts = sample_probes(problem, center, 2 * pairs, 10.0, rng)?;
    Ok(pts
        .chunks(2)
        .map(|uv| {
            let d = vecops::sub(&uv[0], &uv[1]);
            let df = vecops::sub(&problem.operator(&uv[0]), &problem.operator(&uv[1]));
            let h = problem.h_weight().map_or(0.0, |h| h.quad(&d));
            vecops::dot(&d, &df) - h
        })
        .fold(f64::INFINITY, f64::min))
}
