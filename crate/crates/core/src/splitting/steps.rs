use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkit::vecops;
use crate::prox::{ProxOracle, QuadraticParts};
use crate::splitting::{GLadmm, LinearOp, PrimalDualPoint, SeparableProblem};
use crate::vi_core::{
    solve_box_affine_vi, InertialSchedule, SolverTrace, StopRule, WeightOperator,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LadmmParams {
    pub beta: f64,
    pub tau: f64,
    pub eta: f64,
    pub schedule: InertialSchedule,
}

/// Where `(τ, η)` sit relative to `1/ρ(AᵀA)`, `1/ρ(BᵀB)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StepRegime {
    /// Both strictly inside: `G` positive definite.
    Interior,
    /// At least one on the boundary, none outside.
    Boundary,
    Outside,
}

impl LadmmParams {
    pub fn new(beta: f64, tau: f64, eta: f64, schedule: InertialSchedule) -> Result<Self> {
        for (name, v) in [("β", beta), ("τ", tau), ("η", eta)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::invalid(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(Self {
            beta,
            tau,
            eta,
            schedule,
        })
    }

    /// Plain linearized ADMM (`α ≡ 0`).
    pub fn plain(beta: f64, tau: f64, eta: f64) -> Result<Self> {
        Self::new(beta, tau, eta, InertialSchedule::classical(1.0)?)
    }

    pub fn inertial(beta: f64, tau: f64, eta: f64, alpha: f64) -> Result<Self> {
        Self::new(beta, tau, eta, InertialSchedule::constant(alpha, 1.0)?)
    }

    pub fn regime(&self, prob: &SeparableProblem) -> StepRegime {
        let ta = self.tau * prob.rho_ata;
        let eb = self.eta * prob.rho_btb;
        if ta > 1.0 || eb > 1.0 {
            StepRegime::Outside
        } else if ta == 1.0 || eb == 1.0 {
            StepRegime::Boundary
        } else {
            StepRegime::Interior
        }
    }

    pub fn weight(&self, prob: &SeparableProblem) -> GLadmm {
        GLadmm::new(prob, self.beta, self.tau, self.eta)
    }
}

/// One linearized ADMM step in `x → p → y` order.
///
/// The x-subproblem `f(x) − ⟨pᵏ, Ax⟩ + (β/2τ)‖x − (xᵏ − τuᵏ)‖²` equals, after completing the
/// square, `f(x) + (β/2τ)‖x − (xᵏ − τuᵏ + (τ/β)Aᵀpᵏ)‖²`, i.e. a prox step of length `τ/β`.
/// The y-subproblem is handled the same way with `η` and `pᵏ⁺¹`.
pub fn ladmm_step(
    prob: &SeparableProblem,
    params: &LadmmParams,
    w: &PrimalDualPoint,
) -> Result<PrimalDualPoint> {
    prob.check_point(w)?;
    let (beta, tau, eta) = (params.beta, params.tau, params.eta);
    let r = prob.residual(&w.x, &w.y);
    let u = prob.a.adjoint(&r);
    let atp = prob.a.adjoint(&w.p);
    let zx: Vec<f64> = (0..w.x.len())
        .map(|i| w.x[i] - tau * u[i] + tau / beta * atp[i])
        .collect();
    let x = prob.f.prox(&zx, tau / beta);

    let r2 = prob.residual(&x, &w.y);
    let p: Vec<f64> = w.p.iter().zip(&r2).map(|(pi, ri)| pi - beta * ri).collect();
    let v = prob.b_op.adjoint(&r2);
    let btp = prob.b_op.adjoint(&p);
    let zy: Vec<f64> = (0..w.y.len())
        .map(|i| w.y[i] - eta * v[i] + eta / beta * btp[i])
        .collect();
    let y = prob.g.prox(&zy, eta / beta);

    let next = PrimalDualPoint { x, y, p };
    if !next.is_finite() {
        return Err(Error::NonFinite("linearized ADMM iterate"));
    }
    Ok(next)
}

/// Inertial step: extrapolate `(x, y, p)` by `αₖ`, then one linearized ADMM step from the
/// extrapolated point. Returns `(w̄ᵏ, wᵏ⁺¹)`.
pub fn iladmm_step(
    prob: &SeparableProblem,
    params: &LadmmParams,
    w_k: &PrimalDualPoint,
    w_km1: &PrimalDualPoint,
    alpha: f64,
) -> Result<(PrimalDualPoint, PrimalDualPoint)> {
    if !(alpha >= 0.0) {
        return Err(Error::invalid(format!(
            "inertial weight must be nonnegative, got {alpha}"
        )));
    }
    prob.check_point(w_km1)?;
    let bar = w_k.extrapolate(w_km1, alpha);
    let next = ladmm_step(prob, params, &bar)?;
    Ok((bar, next))
}

/// `argmin_{v ∈ box} φ(v) − ⟨p, Mv⟩ + (β/2)‖Mv + c‖²` for the exact ADMM subproblems.
fn exact_block(
    oracle: &dyn ProxOracle,
    op: &dyn LinearOp,
    p: &[f64],
    shift: &[f64],
    beta: f64,
    which: &str,
) -> Result<Vec<f64>> {
    if let Some(QuadraticParts { q, c, lo, hi }) = oracle.quadratic_parts() {
        // (Q + βMᵀM)v + c − Mᵀp + βMᵀshift ⟂ box
        let mm = op.to_dense();
        let mut k = mm.t_matmul(&mm)?.scale(beta);
        k = &k + &q;
        let mtp = op.adjoint(p);
        let mts = op.adjoint(shift);
        let d: Vec<f64> = (0..c.len())
            .map(|i| c[i] - mtp[i] + beta * mts[i])
            .collect();
        return solve_box_affine_vi(&k, &d, &lo, &hi);
    }
    if op.is_identity() {
        // φ(v) + (β/2)‖v − (p/β − shift)‖²
        let z: Vec<f64> = p.iter().zip(shift).map(|(pi, si)| pi / beta - si).collect();
        return Ok(oracle.prox(&z, 1.0 / beta));
    }
    Err(Error::Unsupported(format!(
        "exact {which}-subproblem needs a quadratic objective or an identity operator"
    )))
}

/// One classical ADMM step in `x → p → y` order with exact subproblem solves.
pub fn admm_step(
    prob: &SeparableProblem,
    beta: f64,
    w: &PrimalDualPoint,
) -> Result<PrimalDualPoint> {
    prob.check_point(w)?;
    if !(beta > 0.0) {
        return Err(Error::invalid("β must be positive"));
    }
    let shift_x = vecops::sub(&prob.b_op.apply(&w.y), &prob.b);
    let x = exact_block(prob.f.as_ref(), prob.a.as_ref(), &w.p, &shift_x, beta, "x")?;
    let r = prob.residual(&x, &w.y);
    let p: Vec<f64> = w.p.iter().zip(&r).map(|(pi, ri)| pi - beta * ri).collect();
    let shift_y = vecops::sub(&prob.a.apply(&x), &prob.b);
    let y = exact_block(prob.g.as_ref(), prob.b_op.as_ref(), &p, &shift_y, beta, "y")?;
    Ok(PrimalDualPoint { x, y, p })
}

/// Runs (inertial) linearized ADMM from `w⁰ = w⁻¹`.
///
/// Residuals are measured in the `G` of [`GLadmm`]. With `α ≡ 0`, `step_residuals[k]` is
/// `‖wᵏ⁺¹ − wᵏ‖²_G`. The stop test is `‖wᵏ⁺¹ − w̄ᵏ‖/(1 + ‖w̄ᵏ‖) < tol`.
pub fn run_ladmm(
    prob: &SeparableProblem,
    params: &LadmmParams,
    w0: &PrimalDualPoint,
    stop: StopRule,
    w_star: Option<&PrimalDualPoint>,
) -> Result<SolverTrace> {
    prob.check_point(w0)?;
    match params.regime(prob) {
        StepRegime::Interior => {}
        StepRegime::Boundary => log::warn!("τ or η on the 1/ρ boundary; G is only semidefinite"),
        StepRegime::Outside => {
            log::warn!("τ or η above 1/ρ; G is indefinite and no convergence is guaranteed")
        }
    }
    let g = params.weight(prob);
    let ws = w_star.map(PrimalDualPoint::to_vec);
    let phi_of = |w: &[f64]| ws.as_ref().map(|s| g.quad(&vecops::sub(w, s)));

    let v0 = w0.to_vec();
    let mut tr = SolverTrace {
        phi: phi_of(&v0).map(|p| vec![p]),
        iterates: vec![v0],
        ..Default::default()
    };
    let mut prev = w0.clone();
    let mut cur = w0.clone();
    for k in 0..stop.max_iter {
        let diff = vecops::sub(&cur.to_vec(), &prev.to_vec());
        let diff_sq = g.quad(&diff);
        let alpha = params.schedule.alpha.alpha(k, diff_sq);
        let (bar, next) = iladmm_step(prob, params, &cur, &prev, alpha)?;
        let (bar_v, next_v) = (bar.to_vec(), next.to_vec());
        let step = vecops::sub(&next_v, &bar_v);
        let rel = vecops::norm(&step) / (1.0 + vecops::norm(&bar_v));

        tr.delta.push(2.0 * alpha * diff_sq);
        tr.step_residuals.push(g.quad(&step));
        tr.stop_residuals.push(rel);
        tr.alphas.push(alpha);
        tr.lambdas.push(1.0);
        if let (Some(p), Some(v)) = (tr.phi.as_mut(), phi_of(&next_v)) {
            p.push(v);
        }
        tr.extrapolated.push(bar_v);
        tr.iterates.push(next_v);
        tr.iterations = k + 1;
        prev = std::mem::replace(&mut cur, next);
        if rel < stop.tol {
            tr.converged = true;
            break;
        }
    }
    Ok(tr)
}
