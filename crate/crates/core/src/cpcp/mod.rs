//! Compressive principal component pursuit
//! `min ‖L‖_* + λ‖S‖₁  s.t.  𝒜(L + S) = b`
//! with `𝒜` a partial orthonormal transform (`𝒜𝒜* = I`).
//!
//! Both solvers start from `(L, S, p) = 0`, tune β during the first 30 iterations and stop on
//! the relative change of `(L, S, p)`.

mod instance;
mod metrics;
mod solver;

pub use instance::{generate_instance, CpcpInstance, CpcpSpec, InstanceRecord};
pub use metrics::{recovery_metrics, RecoveryMetrics, RECOVERY_Q_OVER_DOF};
pub use solver::{
    cpcp_step, iladmm_cpcp, ladmm_cpcp, stopping_residual, BetaController, CpcpState, BETA_MAX,
    BETA_MIN, BETA_TUNING_ITERS,
};
