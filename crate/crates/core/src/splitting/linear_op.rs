use crate::error::{Error, Result};
use crate::numkit::{power_iteration, sym_eigen, vecops, DenseMatrix, SeededRng};

/// A linear map `ℝⁿ → ℝᵐ` together with its adjoint.
pub trait LinearOp: Send + Sync + std::fmt::Debug {
    /// `m`
    fn rows(&self) -> usize;
    /// `n`
    fn cols(&self) -> usize;
    fn apply(&self, x: &[f64]) -> Vec<f64>;
    fn adjoint(&self, y: &[f64]) -> Vec<f64>;

    fn is_identity(&self) -> bool {
        false
    }

    /// Exact `ρ(AᵀA)` when it is cheap to compute.
    fn exact_spectral_radius(&self) -> Option<f64> {
        None
    }

    fn to_dense(&self) -> DenseMatrix {
        let (m, n) = (self.rows(), self.cols());
        let mut cm = Vec::with_capacity(m * n);
        let mut e = vec![0.0; n];
        for j in 0..n {
            e[j] = 1.0;
            cm.extend(self.apply(&e));
            e[j] = 0.0;
        }
        DenseMatrix::from_col_major(m, n, &cm)
    }
}

impl LinearOp for DenseMatrix {
    fn rows(&self) -> usize {
        DenseMatrix::rows(self)
    }

    fn cols(&self) -> usize {
        DenseMatrix::cols(self)
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.matvec(x).expect("operator dimension mismatch")
    }

    fn adjoint(&self, y: &[f64]) -> Vec<f64> {
        self.t_matvec(y).expect("operator dimension mismatch")
    }

    fn exact_spectral_radius(&self) -> Option<f64> {
        if DenseMatrix::cols(self) > 256 {
            return None;
        }
        let ata = self.t_matmul(self).ok()?;
        sym_eigen(&ata)
            .ok()
            .map(|(v, _)| v.last().copied().unwrap_or(0.0).max(0.0))
    }

    fn to_dense(&self) -> DenseMatrix {
        self.clone()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct IdentityOp {
    pub dim: usize,
}

impl LinearOp for IdentityOp {
    fn rows(&self) -> usize {
        self.dim
    }

    fn cols(&self) -> usize {
        self.dim
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        x.to_vec()
    }

    fn adjoint(&self, y: &[f64]) -> Vec<f64> {
        y.to_vec()
    }

    fn is_identity(&self) -> bool {
        true
    }

    fn exact_spectral_radius(&self) -> Option<f64> {
        Some(if self.dim == 0 { 0.0 } else { 1.0 })
    }
}

/// Largest `|⟨Ax, y⟩ − ⟨x, Aᵀy⟩| / (‖x‖‖y‖ + 1)` over `trials` random pairs.
pub fn adjoint_mismatch(op: &dyn LinearOp, trials: usize, rng: &mut SeededRng) -> f64 {
    (0..trials)
        .map(|_| {
            let x = rng.normal_vec(op.cols());
            let y = rng.normal_vec(op.rows());
            let lhs = vecops::dot(&op.apply(&x), &y);
            let rhs = vecops::dot(&x, &op.adjoint(&y));
            (lhs - rhs).abs() / (vecops::norm(&x) * vecops::norm(&y) + 1.0)
        })
        .fold(0.0, f64::max)
}

/// Power-iteration estimate of `ρ(AᵀA)` (a lower bound that converges from below).
pub fn estimate_spectral_radius(op: &dyn LinearOp, iters: usize, rng: &mut SeededRng) -> f64 {
    power_iteration(op.cols(), |x| op.adjoint(&op.apply(x)), iters, rng)
}

/// Checks that `rho` is not below the power-iteration estimate of `ρ(AᵀA)`.
pub(crate) fn check_spectral_bound(op: &dyn LinearOp, rho: f64, rng: &mut SeededRng) -> Result<()> {
    let est = estimate_spectral_radius(op, 200, rng);
    if !(rho >= est * (1.0 - 1e-9)) {
        return Err(Error::invalid(format!(
            "declared spectral bound {rho} is below the estimate {est}"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dense_adjoint_and_radius() {
        let mut rng = SeededRng::new(5);
        let a = rng.normal_matrix(4, 6);
        assert!(adjoint_mismatch(&a, 20, &mut rng) < 1e-12);
        let exact = a.exact_spectral_radius().unwrap();
        let est = estimate_spectral_radius(&a, 500, &mut rng);
        assert!(est <= exact * (1.0 + 1e-12) && est > 0.99 * exact);
        assert!(check_spectral_bound(&a, exact, &mut rng).is_ok());
        assert!(check_spectral_bound(&a, 0.5 * exact, &mut rng).is_err());
        assert_eq!(
            LinearOp::to_dense(&IdentityOp { dim: 3 }),
            DenseMatrix::identity(3)
        );
    }
}
