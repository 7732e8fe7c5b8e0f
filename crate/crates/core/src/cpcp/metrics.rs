use serde::{Deserialize, Serialize};

use crate::cpcp::{CpcpInstance, CpcpState};
use crate::error::Result;
use crate::numkit::{vecops, DenseMatrix};
use crate::vi_core::SolverTrace;

/// Recovery is only expected once `q/dof` reaches this value.
pub const RECOVERY_Q_OVER_DOF: f64 = 3.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryMetrics {
    /// `‖L − L₀‖_F / ‖L₀‖_F`, or the absolute error when `L₀ = 0` (see `rel_l_absolute`)
    pub rel_l: f64,
    pub rel_s: f64,
    pub rel_l_absolute: bool,
    pub rel_s_absolute: bool,
    pub iters: usize,
    pub converged: bool,
    pub q_over_dof: f64,
    /// `q/dof < 3.5`: failure to recover is expected.
    pub expected_failure: bool,
    /// `‖𝒜(L + S) − b‖ / ‖b‖`
    pub feasibility: f64,
}

fn relative(x: &DenseMatrix, x0: &DenseMatrix) -> (f64, bool) {
    let err = (x - x0).frobenius_norm();
    let n0 = x0.frobenius_norm();
    if n0 == 0.0 {
        (err, true)
    } else {
        (err / n0, false)
    }
}

pub fn recovery_metrics(
    inst: &CpcpInstance,
    state: &CpcpState,
    trace: &SolverTrace,
) -> Result<RecoveryMetrics> {
    let (rel_l, rel_l_absolute) = relative(&state.l, &inst.l0);
    let (rel_s, rel_s_absolute) = relative(&state.s, &inst.s0);
    let resid = vecops::sub(&inst.meas.apply(&(&state.l + &state.s))?, &inst.b);
    let bn = vecops::norm(&inst.b);
    let q_over_dof = inst.q_over_dof();
    Ok(RecoveryMetrics {
        rel_l,
        rel_s,
        rel_l_absolute,
        rel_s_absolute,
        iters: trace.iterations,
        converged: trace.converged,
        q_over_dof,
        expected_failure: q_over_dof < RECOVERY_Q_OVER_DOF,
        feasibility: if bn > 0.0 {
            vecops::norm(&resid) / bn
        } else {
            vecops::norm(&resid)
        },
    })
}
