//! Two-block separable problems `min f(x) + g(y) s.t. Ax + By = b`.
//!
//! Classical ADMM, linearized ADMM and inertial linearized ADMM, all in `x → p → y` order,
//! together with the metrics `G` that make each step a proximal point step of the
//! mixed-VI reformulation, and the rate diagnostics built on them.
//!
//! In the inertial method the multiplier is extrapolated like the other blocks,
//! `p̄ᵏ = pᵏ + αₖ(pᵏ − pᵏ⁻¹)`.

mod fixtures;
mod linear_op;
mod problem;
mod reports;
mod steps;
mod weights;

pub use fixtures::{kkt_solve, QpFixture};
pub use linear_op::{adjoint_mismatch, estimate_spectral_radius, IdentityOp, LinearOp};
pub use problem::{
    aug_lagrangian, lagrangian, to_mixed_vi, PrimalDualPoint, SeparableProblem, SplittingVi,
};
pub use reports::{
    contraction_report, ergodic_report, nonergodic_report, vi_residual_check, ContractionReport,
    ErgodicReport, NonergodicReport,
};
pub use steps::{admm_step, iladmm_step, ladmm_step, run_ladmm, LadmmParams, StepRegime};
pub use weights::{GAdm, GLadmm};
