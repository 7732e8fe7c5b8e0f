use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkit::vecops;
use crate::splitting::{lagrangian, LadmmParams, PrimalDualPoint, SeparableProblem};
use crate::vi_core::{SolverTrace, WeightOperator};

/// Minimum over `probes` of `θ(w) − θ(wᵏ⁺¹) + ⟨w − wᵏ⁺¹, F(wᵏ⁺¹) + G(wᵏ⁺¹ − wᵏ)⟩`
/// with `G` the linearized ADMM metric. Nonnegative up to round-off after a linearized ADMM step.
pub fn vi_residual_check(
    prob: &SeparableProblem,
    params: &LadmmParams,
    w_k: &PrimalDualPoint,
    w_kp1: &PrimalDualPoint,
    probes: &[Vec<f64>],
) -> f64 {
    let g = params.weight(prob);
    let next = w_kp1.to_vec();
    let f = prob.operator(w_kp1).to_vec();
    let gd = g.apply(&vecops::sub(&next, &w_k.to_vec()));
    let dir = vecops::add(&f, &gd);
    let theta_next = prob.theta(w_kp1);
    let (n1, n2) = (prob.n1(), prob.n2());
    probes
        .iter()
        .map(|w| {
            let pt = PrimalDualPoint::from_slice(w, n1, n2).expect("probe dimension");
            prob.theta(&pt) - theta_next + vecops::dot(&vecops::sub(w, &next), &dir)
        })
        .fold(f64::INFINITY, f64::min)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ContractionReport {
    /// First `k` with `φₖ₊₁ > φₖ − ‖wᵏ⁺¹ − wᵏ‖²_G + 1e−10`.
    pub first_violation: Option<usize>,
    pub max_excess: f64,
}

/// Checks `‖wᵏ⁺¹ − w*‖²_G ≤ ‖wᵏ − w*‖²_G − ‖wᵏ⁺¹ − wᵏ‖²_G` along a plain trace.
pub fn contraction_report(
    trace: &SolverTrace,
    g: &dyn WeightOperator,
    w_star: &[f64],
) -> ContractionReport {
    let phi: Vec<f64> = trace
        .iterates
        .iter()
        .map(|w| g.quad(&vecops::sub(w, w_star)))
        .collect();
    let mut first_violation = None;
    let mut max_excess = f64::NEG_INFINITY;
    for k in 0..trace.iterates.len().saturating_sub(1) {
        let step = g.quad(&vecops::sub(&trace.iterates[k + 1], &trace.iterates[k]));
        let excess = phi[k + 1] - (phi[k] - step);
        max_excess = max_excess.max(excess);
        if excess > 1e-10 && first_violation.is_none() {
            first_violation = Some(k);
        }
    }
    ContractionReport {
        first_violation,
        max_excess,
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ErgodicReport {
    pub k: usize,
    /// `(ℒ(x̄ᵏ, ȳᵏ, p) − ℒ(x, y, p̄ᵏ), ‖w − w⁰‖²_G / (2(k+1)))` per probe.
    pub gaps: Vec<(f64, f64)>,
}

impl ErgodicReport {
    pub fn max_excess(&self) -> f64 {
        self.gaps
            .iter()
            .map(|(g, b)| g - b)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn holds(&self) -> bool {
        self.max_excess() <= 1e-8
    }
}

/// Ergodic saddle gap at the average `w̄ᵏ = (1/(k+1)) Σ_{i=0}^{k} wⁱ⁺¹` of a plain trace.
pub fn ergodic_report(
    trace: &SolverTrace,
    prob: &SeparableProblem,
    g: &dyn WeightOperator,
    k: usize,
    probes: &[Vec<f64>],
) -> Result<ErgodicReport> {
    if trace.iterates.len() < k + 2 {
        return Err(Error::invalid(format!(
            "trace has {} iterations, need {}",
            trace.iterations,
            k + 1
        )));
    }
    let n = prob.dim();
    let mut avg = vec![0.0; n];
    for w in &trace.iterates[1..=k + 1] {
        vecops::axpy(1.0, w, &mut avg);
    }
    let avg = vecops::scale(1.0 / (k + 1) as f64, &avg);
    let (n1, n2) = (prob.n1(), prob.n2());
    let bar = PrimalDualPoint::from_slice(&avg, n1, n2)?;
    let w0 = &trace.iterates[0];
    let gaps = probes
        .iter()
        .map(|w| {
            let pt = PrimalDualPoint::from_slice(w, n1, n2)?;
            let gap =
                lagrangian(prob, &bar.x, &bar.y, &pt.p) - lagrangian(prob, &pt.x, &pt.y, &bar.p);
            let bound = g.quad(&vecops::sub(w, w0)) / (2.0 * (k + 1) as f64);
            Ok((gap, bound))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ErgodicReport { k, gaps })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NonergodicReport {
    /// `‖wᵏ − wᵏ⁻¹‖²_G` for `k = 1 … K` (index `k − 1`).
    pub diffs: Vec<f64>,
    /// `k‖wᵏ − wᵏ⁻¹‖²_G`
    pub k_diffs: Vec<f64>,
    pub phi0: f64,
    /// First `k` where `‖wᵏ⁺¹ − wᵏ‖_G` exceeded `‖wᵏ − wᵏ⁻¹‖_G`.
    pub monotonicity_violation: Option<usize>,
    /// First `k` where `k‖wᵏ − wᵏ⁻¹‖²_G > ‖w⁰ − w*‖²_G + 1e−8`.
    pub rate_violation: Option<usize>,
}

impl NonergodicReport {
    pub fn holds(&self) -> bool {
        self.monotonicity_violation.is_none() && self.rate_violation.is_none()
    }
}

/// Last-iterate diagnostics of a plain linearized ADMM trace.
///
/// Monotonicity of `‖wᵏ − wᵏ⁻¹‖_G` is checked with tolerance `1e−12·(1 + ‖wᵏ‖)`, i.e. relative
/// to the size of the iterates, which is the resolution at which differences are representable.
pub fn nonergodic_report(
    trace: &SolverTrace,
    g: &dyn WeightOperator,
    w_star: &[f64],
) -> NonergodicReport {
    let its = &trace.iterates;
    let phi0 = g.quad(&vecops::sub(&its[0], w_star));
    let diffs: Vec<f64> = its
        .windows(2)
        .map(|w| g.quad(&vecops::sub(&w[1], &w[0])).max(0.0))
        .collect();
    let k_diffs: Vec<f64> = diffs
        .iter()
        .enumerate()
        .map(|(i, d)| (i + 1) as f64 * d)
        .collect();
    let monotonicity_violation = (1..diffs.len())
        .find(|&i| diffs[i].sqrt() > diffs[i - 1].sqrt() + 1e-12 * (1.0 + vecops::norm(&its[i])))
        .map(|i| i + 1);
    let rate_violation = k_diffs
        .iter()
        .position(|&kd| kd > phi0 + 1e-8)
        .map(|i| i + 1);
    NonergodicReport {
        diffs,
        k_diffs,
        phi0,
        monotonicity_violation,
        rate_violation,
    }
}
