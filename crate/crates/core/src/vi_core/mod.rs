//! General inertial proximal point method for mixed variational inequalities.
//!
//! The problem is: find `w* ∈ Ω` with
//! `θ(w) − θ(w*) + ⟨w − w*, F(w*)⟩ ≥ 0` for all `w ∈ Ω`.
//! One step extrapolates `w̄ᵏ = wᵏ + αₖ(wᵏ − wᵏ⁻¹)` and then solves the
//! regularized problem `θ(w) − θ(w⁺) + ⟨w − w⁺, F(w⁺) + λₖ⁻¹G(w⁺ − w̄ᵏ)⟩ ≥ 0`
//! through the problem's resolvent oracle.

mod diagnostics;
mod engine;
mod nesterov;
mod problems;
mod schedule;
mod weights;

pub use diagnostics::{
    check_fejer_bound, check_inertial_rate_bound, h_monotonicity_margin, inertial_rate_constant,
    sample_probes, vi_slack, FejerReport, InertialRateReport,
};
pub use engine::{inertial_ppa_step, run_inertial_ppa, SolverTrace, StopRule};
pub use nesterov::{nesterov_ippa, nesterov_t_next};
pub use problems::{solve_box_affine_vi, AffineVi, L1RegularizedVi};
pub use schedule::{
    hbf_params, summable_alpha, AlphaRule, InertialSchedule, LambdaRule, INERTIA_LIMIT,
};
pub use weights::{DenseWeight, ScaledIdentity};

use crate::error::Result;
use crate::numkit::{vecops, DenseMatrix};

/// Absolute tolerance for membership in Ω.
pub const OMEGA_TOL: f64 = 1e-10;

/// A symmetric positive semidefinite weighting `G`, available through products only.
pub trait WeightOperator: Send + Sync {
    fn dim(&self) -> usize;

    fn apply(&self, v: &[f64]) -> Vec<f64>;

    /// `‖v‖²_G = vᵀGv`
    fn quad(&self, v: &[f64]) -> f64 {
        vecops::dot(v, &self.apply(v))
    }

    fn declared_psd(&self) -> bool {
        true
    }

    /// `Some(s)` when `G = s·I`.
    fn scalar_identity(&self) -> Option<f64> {
        None
    }

    /// Dense copy, built column by column from `apply`. Only sensible at small dimension.
    fn materialize(&self) -> DenseMatrix {
        let n = self.dim();
        let mut cols = Vec::with_capacity(n * n);
        let mut e = vec![0.0; n];
        for j in 0..n {
            e[j] = 1.0;
            cols.extend(self.apply(&e));
            e[j] = 0.0;
        }
        DenseMatrix::from_col_major(n, n, &cols)
    }
}

/// Oracles defining a mixed VI over a closed convex set Ω.
pub trait MixedViProblem: Send + Sync {
    fn dim(&self) -> usize;

    /// Convex part `θ(w)`; `+∞` outside its domain.
    fn theta(&self, w: &[f64]) -> f64;

    /// Monotone map `F(w)`.
    fn operator(&self, w: &[f64]) -> Vec<f64>;

    /// Unique `w⁺ ∈ Ω` solving the proximal subproblem centred at `z` with step `λ` and weight `G`.
    fn resolvent(&self, z: &[f64], lambda: f64, g: &dyn WeightOperator) -> Result<Vec<f64>>;

    /// Membership in Ω up to [`OMEGA_TOL`].
    fn contains(&self, w: &[f64]) -> bool;

    /// Euclidean projection onto Ω.
    fn project(&self, w: &[f64]) -> Vec<f64>;

    /// `H` with `⟨u − v, F(u) − F(v)⟩ ≥ ‖u − v‖²_H`, when known.
    fn h_weight(&self) -> Option<&dyn WeightOperator> {
        None
    }
}
