use crate::error::{Error, Result};
use crate::numkit::vecops;
use crate::prox::ProxOracle;
use crate::vi_core::{LambdaRule, SolverTrace};

/// `t_{k+1} = (1 + √(1 + 4tₖ²))/2`
pub fn nesterov_t_next(t: f64) -> f64 {
    0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt())
}

/// Inertial PPA with weights `αₖ = (tₖ − 1)/t_{k+1}`, `t₀ = 1`, `w⁻¹ = w⁰`, run for `iters` steps.
///
/// The trace records `t₀ … t_K`, the weights, and `f(wᵏ)` for every iterate. The stop residual
/// is recorded but never used to terminate early.
pub fn nesterov_ippa(
    prox: &dyn ProxOracle,
    lambda: &LambdaRule,
    w0: &[f64],
    iters: usize,
) -> Result<SolverTrace> {
    if w0.len() != prox.dim() {
        return Err(Error::shape(prox.dim(), w0.len()));
    }
    if lambda.floor() <= 0.0 {
        return Err(Error::invalid("proximal steps must be positive"));
    }
    let mut t = 1.0;
    let mut tr = SolverTrace {
        iterates: vec![w0.to_vec()],
        objective: Some(vec![prox.value(w0)]),
        t_seq: Some(vec![t]),
        ..Default::default()
    };
    let mut w_prev = w0.to_vec();
    let mut w = w0.to_vec();
    for k in 0..iters {
        let t_next = nesterov_t_next(t);
        let alpha = (t - 1.0) / t_next;
        let lam = lambda.lambda(k);
        let w_bar = vecops::extrapolate(&w, &w_prev, alpha);
        let w_next = prox.prox(&w_bar, lam);
        let step = vecops::sub(&w_next, &w_bar);
        let diff = vecops::sub(&w, &w_prev);

        tr.delta.push(2.0 * alpha * vecops::norm_sq(&diff));
        tr.step_residuals.push(vecops::norm_sq(&step));
        tr.stop_residuals
            .push(vecops::norm(&step) / (1.0 + vecops::norm(&w_bar)));
        tr.alphas.push(alpha);
        tr.lambdas.push(lam);
        tr.objective.as_mut().unwrap().push(prox.value(&w_next));
        tr.t_seq.as_mut().unwrap().push(t_next);
        tr.extrapolated.push(w_bar);
        tr.iterates.push(w_next.clone());
        tr.iterations = k + 1;

        w_prev = std::mem::replace(&mut w, w_next);
        t = t_next;
    }
    Ok(tr)
}
