use serde::{Deserialize, Serialize};

use crate::cpcp::CpcpInstance;
use crate::error::{Error, Result};
use crate::numkit::{svd, vecops, DenseMatrix};
use crate::prox::{shrink, SvtWorkspace};
use crate::vi_core::{AlphaRule, InertialSchedule, LambdaRule, SolverTrace, StopRule};

pub const BETA_MIN: f64 = 1e-3;
pub const BETA_MAX: f64 = 1e2;
/// Number of iterations during which β is tuned.
pub const BETA_TUNING_ITERS: usize = 30;

#[derive(Debug, Clone, PartialEq)]
pub struct CpcpState {
    pub l: DenseMatrix,
    pub s: DenseMatrix,
    /// Multiplier in measurement space.
    pub p: Vec<f64>,
    pub beta: f64,
    pub iter: usize,
}

impl CpcpState {
    pub fn zeros(inst: &CpcpInstance, beta: f64) -> Self {
        let (m, n) = (inst.spec.m, inst.spec.n);
        Self {
            l: DenseMatrix::zeros(m, n),
            s: DenseMatrix::zeros(m, n),
            p: vec![0.0; inst.q()],
            beta,
            iter: 0,
        }
    }

    /// `√(‖L‖²_F + ‖S‖²_F + ‖p‖²)`
    pub fn norm(&self) -> f64 {
        (vecops::norm_sq(self.l.as_slice())
            + vecops::norm_sq(self.s.as_slice())
            + vecops::norm_sq(&self.p))
        .sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.l.is_finite() && self.s.is_finite() && vecops::all_finite(&self.p)
    }
}

/// `‖(L⁺, S⁺, p⁺) − ref‖ / (1 + ‖ref‖)`
pub fn stopping_residual(next: &CpcpState, reference: &CpcpState) -> f64 {
    let d = vecops::norm_sq(&vecops::sub(next.l.as_slice(), reference.l.as_slice()))
        + vecops::norm_sq(&vecops::sub(next.s.as_slice(), reference.s.as_slice()))
        + vecops::norm_sq(&vecops::sub(&next.p, &reference.p));
    d.sqrt() / (1.0 + reference.norm())
}

/// Penalty tuning during the first [`BETA_TUNING_ITERS`] iterations:
/// halve β when `r < 0.1`, double it when `r > 5`, where
/// `r = β‖𝒜(L + S) − b‖² / (2s(‖L‖_* + λ‖S‖₁))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaController {
    pub beta: f64,
    /// Objective scale `s`.
    pub scale: f64,
    pub active: bool,
    pub updates: usize,
}

impl BetaController {
    pub fn new(beta0: f64) -> Result<Self> {
        if !(beta0 > 0.0) {
            return Err(Error::invalid(format!(
                "initial β must be positive, got {beta0}"
            )));
        }
        Ok(Self {
            beta: beta0.clamp(BETA_MIN, BETA_MAX),
            scale: 1.0,
            active: true,
            updates: 0,
        })
    }

    /// `β₀ = 0.1·q/‖b‖₁`, clamped to the admissible range.
    pub fn for_instance(inst: &CpcpInstance) -> Self {
        let b0 = inst.default_beta();
        Self::new(if b0.is_finite() { b0 } else { BETA_MAX }).expect("q > 0")
    }

    /// β held constant for the whole run.
    pub fn fixed(beta: f64) -> Result<Self> {
        let mut c = Self::new(beta)?;
        c.active = false;
        Ok(c)
    }

    pub fn with_scale(mut self, s: f64) -> Result<Self> {
        if !(s > 0.0) {
            return Err(Error::invalid("objective scale must be positive"));
        }
        self.scale = s;
        Ok(self)
    }

    /// `r`; zero when the objective vanishes.
    pub fn ratio(&self, resid_sq: f64, objective: f64) -> f64 {
        if objective > 0.0 {
            self.beta * resid_sq / (2.0 * self.scale * objective)
        } else {
            0.0
        }
    }

    /// Applies the rule to the current iterate's residual and objective and returns the new β.
    pub fn observe(&mut self, resid_sq: f64, objective: f64) -> f64 {
        if !self.active {
            return self.beta;
        }
        let r = self.ratio(resid_sq, objective);
        if r < 0.1 {
            self.beta = (0.5 * self.beta).max(BETA_MIN);
        } else if r > 5.0 {
            self.beta = (2.0 * self.beta).min(BETA_MAX);
        }
        self.updates += 1;
        if self.updates >= BETA_TUNING_ITERS {
            self.active = false;
        }
        self.beta
    }

    /// [`observe`](Self::observe) with residual and objective computed from `state`.
    pub fn update_beta(&mut self, state: &CpcpState, inst: &CpcpInstance) -> Result<f64> {
        let resid = vecops::sub(&inst.meas.apply(&(&state.l + &state.s))?, &inst.b);
        let nuc: f64 = svd(&state.l)?.s.iter().sum();
        let objective = nuc + inst.lambda * state.s.sum_abs();
        Ok(self.observe(vecops::norm_sq(&resid), objective))
    }
}

/// One linearized step from `w` with penalty `β`, written out directly (no cached transforms):
/// ```text
/// U  = 𝒜*(𝒜(L + S) − b)
/// L⁺ = svt(L − τU + (τ/β)𝒜*(p), τ/β)
/// p⁺ = p − β(𝒜(L⁺ + S) − b)
/// V  = 𝒜*(𝒜(L⁺ + S) − b)
/// S⁺ = shrink(S − ηV + (η/β)𝒜*(p⁺), λη/β)
/// ```
pub fn cpcp_step(
    inst: &CpcpInstance,
    tau: f64,
    eta: f64,
    beta: f64,
    w: &CpcpState,
) -> Result<CpcpState> {
    let meas = &inst.meas;
    let u = meas.adjoint(&vecops::sub(&meas.apply(&(&w.l + &w.s))?, &inst.b))?;
    let mut zl = w.l.clone();
    zl.axpy_mut(-tau, &u);
    zl.axpy_mut(tau / beta, &meas.adjoint(&w.p)?);
    let l = SvtWorkspace::default().apply(&zl, tau / beta)?.matrix;

    let r = vecops::sub(&meas.apply(&(&l + &w.s))?, &inst.b);
    let p: Vec<f64> = w.p.iter().zip(&r).map(|(pi, ri)| pi - beta * ri).collect();
    let v = meas.adjoint(&r)?;
    let mut zs = w.s.clone();
    zs.axpy_mut(-eta, &v);
    zs.axpy_mut(eta / beta, &meas.adjoint(&p)?);
    let kappa = inst.lambda * eta / beta;
    zs.as_mut_slice()
        .iter_mut()
        .for_each(|x| *x = shrink(*x, kappa));
    Ok(CpcpState {
        l,
        s: zs,
        p,
        beta,
        iter: w.iter + 1,
    })
}

/// Linearized ADMM on the CPCP model, `L → p → S` order, from `(L, S, p) = 0`.
pub fn ladmm_cpcp(
    inst: &CpcpInstance,
    tau: f64,
    eta: f64,
    controller: BetaController,
    stop: StopRule,
) -> Result<(CpcpState, SolverTrace)> {
    iladmm_cpcp(inst, tau, eta, AlphaRule::Constant(0.0), controller, stop)
}

/// Inertial linearized ADMM: extrapolate `(L, S, p)` by `αₖ`, then one linearized step from the
/// extrapolated point. The stop test is measured against the extrapolated point.
///
/// The trace does not keep the matrix iterates. Per iteration it records the stop residual,
/// `‖wᵏ⁺¹ − w̄ᵏ‖²` (Euclidean) in `step_residuals`, `αₖ`, the β used (in `lambdas`) and the
/// objective `‖L‖_* + λ‖S‖₁` of the new iterate.
pub fn iladmm_cpcp(
    inst: &CpcpInstance,
    tau: f64,
    eta: f64,
    alpha: AlphaRule,
    mut controller: BetaController,
    stop: StopRule,
) -> Result<(CpcpState, SolverTrace)> {
    for (name, v) in [("τ", tau), ("η", eta)] {
        if !(v > 0.0 && v <= 1.0) {
            return Err(Error::invalid(format!(
                "{name} must lie in (0, 1], got {v}"
            )));
        }
    }
    InertialSchedule::new(alpha, LambdaRule::Constant(1.0))?;
    let meas = &inst.meas;
    let lambda = inst.lambda;
    let b = &inst.b;

    let mut cur = CpcpState::zeros(inst, controller.beta);
    let mut prev = cur.clone();
    // 𝒜(L) and 𝒜(S) of the current and previous iterates
    let (mut al, mut as_) = (vec![0.0; b.len()], vec![0.0; b.len()]);
    let (mut al_prev, mut as_prev) = (al.clone(), as_.clone());
    let mut svt = SvtWorkspace::warm();
    let mut tr = SolverTrace {
        objective: Some(Vec::new()),
        ..Default::default()
    };

    for k in 0..stop.max_iter {
        let beta = controller.beta;
        let diff_sq = vecops::norm_sq(&vecops::sub(cur.l.as_slice(), prev.l.as_slice()))
            + vecops::norm_sq(&vecops::sub(cur.s.as_slice(), prev.s.as_slice()))
            + vecops::norm_sq(&vecops::sub(&cur.p, &prev.p));
        let a = alpha.alpha(k, diff_sq);

        let bar = CpcpState {
            l: extrapolate(&cur.l, &prev.l, a),
            s: extrapolate(&cur.s, &prev.s, a),
            p: vecops::extrapolate(&cur.p, &prev.p, a),
            beta,
            iter: k,
        };
        let al_bar = vecops::extrapolate(&al, &al_prev, a);
        let as_bar = vecops::extrapolate(&as_, &as_prev, a);

        // L̄ − τU + (τ/β)𝒜*(p̄) = L̄ − τ𝒜*(𝒜(L̄ + S̄) − b − p̄/β)
        let g: Vec<f64> = (0..b.len())
            .map(|i| al_bar[i] + as_bar[i] - b[i] - bar.p[i] / beta)
            .collect();
        let mut zl = bar.l.clone();
        zl.axpy_mut(-tau, &meas.adjoint(&g)?);
        let out = svt.apply(&zl, tau / beta)?;
        let l_next = out.matrix;
        let al_next = meas.apply(&l_next)?;

        let r2: Vec<f64> = (0..b.len())
            .map(|i| al_next[i] + as_bar[i] - b[i])
            .collect();
        let p_next: Vec<f64> = bar.p.iter().zip(&r2).map(|(p, r)| p - beta * r).collect();

        // S̄ − ηV + (η/β)𝒜*(p⁺) = S̄ − η𝒜*(r₂ − p⁺/β)
        let h: Vec<f64> = r2.iter().zip(&p_next).map(|(r, p)| r - p / beta).collect();
        let mut zs = bar.s.clone();
        zs.axpy_mut(-eta, &meas.adjoint(&h)?);
        let kappa = lambda * eta / beta;
        zs.as_mut_slice()
            .iter_mut()
            .for_each(|v| *v = shrink(*v, kappa));
        let s_next = zs;
        let as_next = meas.apply(&s_next)?;

        let next = CpcpState {
            l: l_next,
            s: s_next,
            p: p_next,
            beta,
            iter: k + 1,
        };
        if !next.is_finite() {
            return Err(Error::NonFinite("CPCP iterate"));
        }
        let rel = stopping_residual(&next, &bar);
        let step_sq = (rel * (1.0 + bar.norm())).powi(2);
        let objective = out.singular_values.iter().sum::<f64>() + lambda * next.s.sum_abs();
        let resid_sq: f64 = (0..b.len())
            .map(|i| (al_next[i] + as_next[i] - b[i]).powi(2))
            .sum();

        tr.delta.push(2.0 * a * diff_sq);
        tr.step_residuals.push(step_sq);
        tr.stop_residuals.push(rel);
        tr.alphas.push(a);
        tr.lambdas.push(beta);
        tr.objective.as_mut().expect("initialized").push(objective);
        tr.iterations = k + 1;
        log::trace!("iter {k}: rel {rel:.3e}, β {beta:.3e}, obj {objective:.6e}");

        prev = std::mem::replace(&mut cur, next);
        al_prev = std::mem::replace(&mut al, al_next);
        as_prev = std::mem::replace(&mut as_, as_next);
        if rel < stop.tol {
            tr.converged = true;
            break;
        }
        cur.beta = controller.observe(resid_sq, objective);
    }
    Ok((cur, tr))
}

fn extrapolate(cur: &DenseMatrix, prev: &DenseMatrix, a: f64) -> DenseMatrix {
    let mut out = cur.clone();
    if a != 0.0 {
        out.axpy_mut(a, &(cur - prev));
    }
    out
}
