use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Inertial weights must stay strictly below this for the `O(1/k)` / `o(1/k)` rate guarantees.
pub const INERTIA_LIMIT: f64 = 1.0 / 3.0;

/// How the extrapolation weight `αₖ` is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum AlphaRule {
    /// `αₖ ≡ α`
    Constant(f64),
    /// `αₖ = cap · k/(k+1)`: nondecreasing, tends to `cap`.
    NondecreasingCapped(f64),
    /// `αₖ = min(cap, C / (k² ‖wᵏ − wᵏ⁻¹‖²_G))`, keeping `Σ αₖ‖wᵏ − wᵏ⁻¹‖²_G ≤ C·π²/6`.
    SummableGuard { cap: f64, c: f64 },
}

impl AlphaRule {
    pub fn cap(&self) -> f64 {
        match *self {
            AlphaRule::Constant(a) | AlphaRule::NondecreasingCapped(a) => a,
            AlphaRule::SummableGuard { cap, .. } => cap,
        }
    }

    fn validate(&self) -> Result<()> {
        let cap = self.cap();
        if !(0.0..1.0).contains(&cap) {
            return Err(Error::invalid(format!(
                "inertial weight {cap} outside [0, 1)"
            )));
        }
        if let AlphaRule::SummableGuard { c, .. } = *self {
            if !(c > 0.0) {
                return Err(Error::invalid("summable guard constant must be positive"));
            }
        }
        Ok(())
    }

    /// `αₖ` given `‖wᵏ − wᵏ⁻¹‖²_G`.
    pub fn alpha(&self, k: usize, diff_sq_g: f64) -> f64 {
        match *self {
            AlphaRule::Constant(a) => a,
            AlphaRule::NondecreasingCapped(cap) => cap * k as f64 / (k as f64 + 1.0),
            AlphaRule::SummableGuard { cap, c } => summable_alpha(k.max(1), diff_sq_g, cap, c),
        }
    }

    /// True when the rule produces a nondecreasing sequence bounded by some `α < 1/3`.
    pub fn has_rate_guarantee(&self) -> bool {
        match *self {
            AlphaRule::Constant(a) | AlphaRule::NondecreasingCapped(a) => a < INERTIA_LIMIT,
            AlphaRule::SummableGuard { .. } => false,
        }
    }
}

/// Proximal step lengths `λₖ ≥ λ_floor > 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum LambdaRule {
    Constant(f64),
    /// `λₖ = base · growthᵏ` with `growth ≥ 1`.
    Geometric {
        base: f64,
        growth: f64,
    },
    /// Explicit values; the last one is repeated.
    Table(Vec<f64>),
}

impl LambdaRule {
    pub fn lambda(&self, k: usize) -> f64 {
        match self {
            LambdaRule::Constant(l) => *l,
            LambdaRule::Geometric { base, growth } => {
                base * growth.powi(k.min(i32::MAX as usize) as i32)
            }
            LambdaRule::Table(v) => v[k.min(v.len() - 1)],
        }
    }

    pub fn floor(&self) -> f64 {
        match self {
            LambdaRule::Constant(l) => *l,
            LambdaRule::Geometric { base, .. } => *base,
            LambdaRule::Table(v) => v.iter().copied().fold(f64::INFINITY, f64::min),
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match self {
            LambdaRule::Constant(l) => *l > 0.0 && l.is_finite(),
            LambdaRule::Geometric { base, growth } => *base > 0.0 && *growth >= 1.0,
            LambdaRule::Table(v) => !v.is_empty() && v.iter().all(|l| *l > 0.0 && l.is_finite()),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::invalid(format!(
                "invalid proximal step rule {self:?}"
            )))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InertialSchedule {
    pub alpha: AlphaRule,
    pub lambda: LambdaRule,
}

impl InertialSchedule {
    pub fn new(alpha: AlphaRule, lambda: LambdaRule) -> Result<Self> {
        alpha.validate()?;
        lambda.validate()?;
        Ok(Self { alpha, lambda })
    }

    pub fn constant(alpha: f64, lambda: f64) -> Result<Self> {
        Self::new(AlphaRule::Constant(alpha), LambdaRule::Constant(lambda))
    }

    /// Classical proximal point method (`α ≡ 0`).
    pub fn classical(lambda: f64) -> Result<Self> {
        Self::constant(0.0, lambda)
    }
}

/// Online inertial weight keeping `Σ αₖ‖wᵏ − wᵏ⁻¹‖²_G` summable:
/// `αₖ = min(α_max, C / (k² · max(‖wᵏ − wᵏ⁻¹‖²_G, ε_machine)))`.
pub fn summable_alpha(k: usize, diff_sq_g: f64, alpha_max: f64, c: f64) -> f64 {
    debug_assert!(k >= 1 && c > 0.0 && alpha_max < 1.0);
    let k = k as f64;
    alpha_max.min(c / (k * k * diff_sq_g.max(f64::EPSILON)))
}

/// Step and inertia `(λ, α)` from an implicit discretization of the heavy-ball-with-friction
/// dynamics with time step `h` and friction `γ`: `λ = h²/(1+γh)`, `α = 1/(1+γh)`.
pub fn hbf_params(h: f64, gamma: f64) -> Result<(f64, f64)> {
    if !(h > 0.0) || !(gamma > 0.0) || !h.is_finite() || !gamma.is_finite() {
        return Err(Error::invalid(format!(
            "need h > 0 and γ > 0, got h = {h}, γ = {gamma}"
        )));
    }
    let d = 1.0 + gamma * h;
    Ok((h * h / d, 1.0 / d))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hbf_examples() {
        assert_eq!(hbf_params(1.0, 1.0).unwrap(), (0.5, 0.5));
        assert_eq!(hbf_params(2.0, 0.5).unwrap(), (2.0, 0.5));
        let (_, a_small) = hbf_params(1.0, 1e3).unwrap();
        let (_, a_big) = hbf_params(1.0, 1.0).unwrap();
        assert!(a_small < a_big && a_small > 0.0 && a_small < 1e-2);
        assert!(hbf_params(0.0, 1.0).is_err());
        assert!(hbf_params(1.0, -1.0).is_err());
    }

    #[test]
    fn summable_alpha_examples() {
        assert_eq!(summable_alpha(5, 0.0, 0.9, 1.0), 0.9);
        assert_eq!(summable_alpha(1, 1.0, 0.9, 1.0), 0.9);
        assert_eq!(summable_alpha(1, 2.0, 0.9, 2.0), 0.9_f64.min(1.0));
        assert_eq!(summable_alpha(2, 1.0, 0.9, 1.0), 0.25);
    }

    #[test]
    fn summable_series_is_bounded_by_basel_constant() {
        // synthetic trajectory with large, erratic differences
        let c = 1.0;
        let mut sum = 0.0;
        for k in 1..=10_000usize {
            let diff = 1.0 + 50.0 * ((k as f64) * 0.37).sin().abs();
            sum += summable_alpha(k, diff, 0.95, c) * diff;
        }
        assert!(sum <= c * std::f64::consts::PI.powi(2) / 6.0);
    }

    #[test]
    fn nondecreasing_rule_is_monotone_and_capped() {
        let r = AlphaRule::NondecreasingCapped(0.3);
        let a: Vec<f64> = (0..100).map(|k| r.alpha(k, 1.0)).collect();
        assert_eq!(a[0], 0.0);
        assert!(a.windows(2).all(|w| w[0] <= w[1]));
        assert!(a.iter().all(|&x| x < 0.3));
        assert!(r.has_rate_guarantee());
        assert!(!AlphaRule::Constant(0.35).has_rate_guarantee());
    }

    #[test]
    fn schedule_validation() {
        assert!(InertialSchedule::constant(1.0, 1.0).is_err());
        assert!(InertialSchedule::constant(-0.1, 1.0).is_err());
        assert!(InertialSchedule::constant(0.2, 0.0).is_err());
        assert!(InertialSchedule::new(
            AlphaRule::SummableGuard { cap: 0.5, c: 0.0 },
            LambdaRule::Constant(1.0)
        )
        .is_err());
        assert!(InertialSchedule::new(
            AlphaRule::Constant(0.1),
            LambdaRule::Geometric {
                base: 1.0,
                growth: 0.5
            }
        )
        .is_err());
        let s = InertialSchedule::new(
            AlphaRule::Constant(0.1),
            LambdaRule::Table(vec![2.0, 1.0, 3.0]),
        )
        .unwrap();
        assert_eq!(s.lambda.lambda(10), 3.0);
        assert_eq!(s.lambda.floor(), 1.0);
    }
}
