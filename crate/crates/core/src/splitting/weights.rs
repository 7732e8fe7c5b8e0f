use std::sync::Arc;

use crate::numkit::vecops;
use crate::splitting::{LinearOp, SeparableProblem};
use crate::vi_core::WeightOperator;

/// Linearized ADMM metric
/// ```text
/// G = [ β(I/τ − AᵀA)   0      0   ]
///     [ 0              βI/η  −Bᵀ  ]
///     [ 0             −B     I/β  ]
/// ```
/// acting on stacked `(x, y, p)`. Only operator products are used.
#[derive(Debug, Clone)]
pub struct GLadmm {
    a: Arc<dyn LinearOp>,
    b: Arc<dyn LinearOp>,
    pub beta: f64,
    pub tau: f64,
    pub eta: f64,
    psd: bool,
}

impl GLadmm {
    pub fn new(prob: &SeparableProblem, beta: f64, tau: f64, eta: f64) -> Self {
        let psd = tau * prob.rho_ata <= 1.0 && eta * prob.rho_btb <= 1.0;
        Self {
            a: prob.a.clone(),
            b: prob.b_op.clone(),
            beta,
            tau,
            eta,
            psd,
        }
    }

    fn split<'v>(&self, v: &'v [f64]) -> (&'v [f64], &'v [f64], &'v [f64]) {
        let (n1, n2) = (self.a.cols(), self.b.cols());
        (&v[..n1], &v[n1..n1 + n2], &v[n1 + n2..])
    }
}

impl WeightOperator for GLadmm {
    fn dim(&self) -> usize {
        self.a.cols() + self.b.cols() + self.a.rows()
    }

    fn apply(&self, v: &[f64]) -> Vec<f64> {
        let (x, y, p) = self.split(v);
        let (beta, tau, eta) = (self.beta, self.tau, self.eta);
        let atax = self.a.adjoint(&self.a.apply(x));
        let gx: Vec<f64> = x
            .iter()
            .zip(&atax)
            .map(|(xi, ai)| beta * (xi / tau - ai))
            .collect();
        let btp = self.b.adjoint(p);
        let gy: Vec<f64> = y
            .iter()
            .zip(&btp)
            .map(|(yi, bi)| beta / eta * yi - bi)
            .collect();
        let by = self.b.apply(y);
        let gp: Vec<f64> = p.iter().zip(&by).map(|(pi, bi)| pi / beta - bi).collect();
        [gx, gy, gp].concat()
    }

    /// `β(‖x‖²/τ − ‖Ax‖²) + (β/η)‖y‖² − 2⟨By, p⟩ + ‖p‖²/β`
    fn quad(&self, v: &[f64]) -> f64 {
        let (x, y, p) = self.split(v);
        let (beta, tau, eta) = (self.beta, self.tau, self.eta);
        beta * (vecops::norm_sq(x) / tau - vecops::norm_sq(&self.a.apply(x)))
            + beta / eta * vecops::norm_sq(y)
            - 2.0 * vecops::dot(&self.b.apply(y), p)
            + vecops::norm_sq(p) / beta
    }

    fn declared_psd(&self) -> bool {
        self.psd
    }
}

/// Classical ADMM metric `[0, 0, 0; 0, βBᵀB, −Bᵀ; 0, −B, I/β]`: positive semidefinite, never definite.
#[derive(Debug, Clone)]
pub struct GAdm {
    n1: usize,
    b: Arc<dyn LinearOp>,
    pub beta: f64,
}

impl GAdm {
    pub fn new(prob: &SeparableProblem, beta: f64) -> Self {
        Self {
            n1: prob.n1(),
            b: prob.b_op.clone(),
            beta,
        }
    }
}

impl WeightOperator for GAdm {
    fn dim(&self) -> usize {
        self.n1 + self.b.cols() + self.b.rows()
    }

    fn apply(&self, v: &[f64]) -> Vec<f64> {
        let n2 = self.b.cols();
        let (y, p) = (&v[self.n1..self.n1 + n2], &v[self.n1 + n2..]);
        // By − p/β, then Bᵀ(·) scaled
        let by = self.b.apply(y);
        let t: Vec<f64> = by.iter().zip(p).map(|(b, q)| self.beta * b - q).collect();
        let gy = self.b.adjoint(&t);
        let gp: Vec<f64> = by.iter().zip(p).map(|(b, q)| q / self.beta - b).collect();
        [vec![0.0; self.n1], gy, gp].concat()
    }

    /// `‖√β·By − p/√β‖²`
    fn quad(&self, v: &[f64]) -> f64 {
        let n2 = self.b.cols();
        let (y, p) = (&v[self.n1..self.n1 + n2], &v[self.n1 + n2..]);
        let s = self.beta.sqrt();
        self.b
            .apply(y)
            .iter()
            .zip(p)
            .map(|(b, q)| (s * b - q / s).powi(2))
            .sum()
    }
}
