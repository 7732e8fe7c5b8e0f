use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkit::{vecops, DenseMatrix, SeededRng};
use crate::prox::ProxOracle;
use crate::splitting::linear_op::{
    adjoint_mismatch, check_spectral_bound, estimate_spectral_radius, LinearOp,
};
use crate::vi_core::{AffineVi, MixedViProblem, WeightOperator, OMEGA_TOL};

/// `w = (x, y, p)`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrimalDualPoint {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub p: Vec<f64>,
}

impl PrimalDualPoint {
    pub fn zeros(n1: usize, n2: usize, m: usize) -> Self {
        Self {
            x: vec![0.0; n1],
            y: vec![0.0; n2],
            p: vec![0.0; m],
        }
    }

    pub fn to_vec(&self) -> Vec<f64> {
        [self.x.as_slice(), &self.y, &self.p].concat()
    }

    pub fn from_slice(w: &[f64], n1: usize, n2: usize) -> Result<Self> {
        if w.len() < n1 + n2 {
            return Err(Error::shape(format!("at least {}", n1 + n2), w.len()));
        }
        Ok(Self {
            x: w[..n1].to_vec(),
            y: w[n1..n1 + n2].to_vec(),
            p: w[n1 + n2..].to_vec(),
        })
    }

    pub fn is_finite(&self) -> bool {
        vecops::all_finite(&self.x) && vecops::all_finite(&self.y) && vecops::all_finite(&self.p)
    }

    /// `self + α(self − prev)` blockwise.
    pub fn extrapolate(&self, prev: &Self, alpha: f64) -> Self {
        Self {
            x: vecops::extrapolate(&self.x, &prev.x, alpha),
            y: vecops::extrapolate(&self.y, &prev.y, alpha),
            p: vecops::extrapolate(&self.p, &prev.p, alpha),
        }
    }
}

/// `min f(x) + g(y)  s.t.  Ax + By = b`, with `x ∈ 𝒳`, `y ∈ 𝒴` folded into `f`, `g`.
#[derive(Debug, Clone)]
pub struct SeparableProblem {
    pub a: Arc<dyn LinearOp>,
    pub b_op: Arc<dyn LinearOp>,
    pub b: Vec<f64>,
    pub f: Arc<dyn ProxOracle>,
    pub g: Arc<dyn ProxOracle>,
    /// Upper bound on `ρ(AᵀA)`.
    pub rho_ata: f64,
    /// Upper bound on `ρ(BᵀB)`.
    pub rho_btb: f64,
}

impl SeparableProblem {
    /// Builds the problem; spectral bounds are computed exactly for small dense operators and
    /// otherwise estimated by power iteration with a small safety margin.
    pub fn new(
        a: Arc<dyn LinearOp>,
        b_op: Arc<dyn LinearOp>,
        b: Vec<f64>,
        f: Arc<dyn ProxOracle>,
        g: Arc<dyn ProxOracle>,
    ) -> Result<Self> {
        let mut rng = SeededRng::new(0).split("spectral-bound");
        let mut bound = |op: &dyn LinearOp| {
            op.exact_spectral_radius()
                .unwrap_or_else(|| estimate_spectral_radius(op, 500, &mut rng) * (1.0 + 1e-6))
        };
        let rho_ata = bound(a.as_ref());
        let rho_btb = bound(b_op.as_ref());
        Self::with_bounds(a, b_op, b, f, g, rho_ata, rho_btb)
    }

    /// Builds the problem with caller-supplied spectral bounds, validated by power iteration.
    pub fn with_bounds(
        a: Arc<dyn LinearOp>,
        b_op: Arc<dyn LinearOp>,
        b: Vec<f64>,
        f: Arc<dyn ProxOracle>,
        g: Arc<dyn ProxOracle>,
        rho_ata: f64,
        rho_btb: f64,
    ) -> Result<Self> {
        let m = b.len();
        if a.rows() != m || b_op.rows() != m {
            return Err(Error::shape(
                m,
                format!("A: {}, B: {}", a.rows(), b_op.rows()),
            ));
        }
        if f.dim() != a.cols() || g.dim() != b_op.cols() {
            return Err(Error::invalid(
                "prox oracle dimensions do not match the operators",
            ));
        }
        if !vecops::all_finite(&b) {
            return Err(Error::NonFinite("b"));
        }
        let mut rng = SeededRng::new(0).split("adjoint-check");
        for (name, op) in [("A", &a), ("B", &b_op)] {
            let mismatch = adjoint_mismatch(op.as_ref(), 10, &mut rng);
            if mismatch > 1e-12 {
                return Err(Error::invalid(format!(
                    "{name} and its adjoint disagree by {mismatch:e}"
                )));
            }
        }
        check_spectral_bound(a.as_ref(), rho_ata, &mut rng)?;
        check_spectral_bound(b_op.as_ref(), rho_btb, &mut rng)?;
        Ok(Self {
            a,
            b_op,
            b,
            f,
            g,
            rho_ata,
            rho_btb,
        })
    }

    pub fn n1(&self) -> usize {
        self.a.cols()
    }

    pub fn n2(&self) -> usize {
        self.b_op.cols()
    }

    pub fn m(&self) -> usize {
        self.b.len()
    }

    pub fn dim(&self) -> usize {
        self.n1() + self.n2() + self.m()
    }

    /// `Ax + By − b`
    pub fn residual(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let mut r = self.a.apply(x);
        vecops::axpy(1.0, &self.b_op.apply(y), &mut r);
        vecops::axpy(-1.0, &self.b, &mut r);
        r
    }

    pub fn check_point(&self, w: &PrimalDualPoint) -> Result<()> {
        if w.x.len() != self.n1() || w.y.len() != self.n2() || w.p.len() != self.m() {
            return Err(Error::shape(
                format!("({}, {}, {})", self.n1(), self.n2(), self.m()),
                format!("({}, {}, {})", w.x.len(), w.y.len(), w.p.len()),
            ));
        }
        if !w.is_finite() {
            return Err(Error::NonFinite("primal-dual point"));
        }
        Ok(())
    }

    /// `θ(w) = f(x) + g(y)`
    pub fn theta(&self, w: &PrimalDualPoint) -> f64 {
        self.f.value(&w.x) + self.g.value(&w.y)
    }

    /// `F(w) = (−Aᵀp, −Bᵀp, Ax + By − b)`
    pub fn operator(&self, w: &PrimalDualPoint) -> PrimalDualPoint {
        PrimalDualPoint {
            x: vecops::scale(-1.0, &self.a.adjoint(&w.p)),
            y: vecops::scale(-1.0, &self.b_op.adjoint(&w.p)),
            p: self.residual(&w.x, &w.y),
        }
    }
}

/// `ℒ(x, y, p) = f(x) + g(y) − ⟨p, Ax + By − b⟩`
pub fn lagrangian(prob: &SeparableProblem, x: &[f64], y: &[f64], p: &[f64]) -> f64 {
    prob.f.value(x) + prob.g.value(y) - vecops::dot(p, &prob.residual(x, y))
}

/// `ℒ̄ = ℒ + (β/2)‖Ax + By − b‖²`
pub fn aug_lagrangian(prob: &SeparableProblem, x: &[f64], y: &[f64], p: &[f64], beta: f64) -> f64 {
    let r = prob.residual(x, y);
    prob.f.value(x) + prob.g.value(y) - vecops::dot(p, &r) + 0.5 * beta * vecops::norm_sq(&r)
}

/// Mixed-VI view of a separable problem: `Ω = 𝒳 × 𝒴 × ℝᵐ`, `θ = f + g`, skew-affine `F`, `H = 0`.
///
/// The resolvent is available when both `f` and `g` expose quadratic-plus-box parts.
#[derive(Debug)]
pub struct SplittingVi {
    prob: SeparableProblem,
    affine: Option<AffineVi>,
}

pub fn to_mixed_vi(prob: &SeparableProblem) -> Result<SplittingVi> {
    let affine = match (prob.f.quadratic_parts(), prob.g.quadratic_parts()) {
        (Some(fq), Some(gq)) => {
            let (n1, n2, m) = (prob.n1(), prob.n2(), prob.m());
            let n = n1 + n2 + m;
            let a = prob.a.to_dense();
            let bm = prob.b_op.to_dense();
            let mut q = DenseMatrix::zeros(n, n);
            let mut skew = DenseMatrix::zeros(n, n);
            for i in 0..n1 {
                for j in 0..n1 {
                    q[(i, j)] = fq.q[(i, j)];
                }
            }
            for i in 0..n2 {
                for j in 0..n2 {
                    q[(n1 + i, n1 + j)] = gq.q[(i, j)];
                }
            }
            for r in 0..m {
                for j in 0..n1 {
                    skew[(n1 + n2 + r, j)] = a[(r, j)];
                    skew[(j, n1 + n2 + r)] = -a[(r, j)];
                }
                for j in 0..n2 {
                    skew[(n1 + n2 + r, n1 + j)] = bm[(r, j)];
                    skew[(n1 + j, n1 + n2 + r)] = -bm[(r, j)];
                }
            }
            let c = [fq.c.as_slice(), &gq.c, &vec![0.0; m]].concat();
            let r = [vec![0.0; n1 + n2], vecops::scale(-1.0, &prob.b)].concat();
            let lo = [fq.lo.as_slice(), &gq.lo, &vec![f64::NEG_INFINITY; m]].concat();
            let hi = [fq.hi.as_slice(), &gq.hi, &vec![f64::INFINITY; m]].concat();
            Some(AffineVi::new(q, c, skew, r, lo, hi)?)
        }
        _ => None,
    };
    Ok(SplittingVi {
        prob: prob.clone(),
        affine,
    })
}

impl SplittingVi {
    pub fn problem(&self) -> &SeparableProblem {
        &self.prob
    }

    fn split(&self, w: &[f64]) -> PrimalDualPoint {
        PrimalDualPoint::from_slice(w, self.prob.n1(), self.prob.n2()).expect("dimension mismatch")
    }
}

impl MixedViProblem for SplittingVi {
    fn dim(&self) -> usize {
        self.prob.dim()
    }

    fn theta(&self, w: &[f64]) -> f64 {
        self.prob.theta(&self.split(w))
    }

    fn operator(&self, w: &[f64]) -> Vec<f64> {
        self.prob.operator(&self.split(w)).to_vec()
    }

    fn resolvent(&self, z: &[f64], lambda: f64, g: &dyn WeightOperator) -> Result<Vec<f64>> {
        match &self.affine {
            Some(a) => a.resolvent(z, lambda, g),
            None => Err(Error::Unsupported(
                "resolvent needs quadratic f and g; use the splitting steps instead".into(),
            )),
        }
    }

    fn contains(&self, w: &[f64]) -> bool {
        if w.len() != self.dim() {
            return false;
        }
        let pt = self.split(w);
        let px = self.prob.f.project(&pt.x);
        let py = self.prob.g.project(&pt.y);
        vecops::max_abs_diff(&px, &pt.x) <= OMEGA_TOL
            && vecops::max_abs_diff(&py, &pt.y) <= OMEGA_TOL
    }

    fn project(&self, w: &[f64]) -> Vec<f64> {
        let pt = self.split(w);
        PrimalDualPoint {
            x: self.prob.f.project(&pt.x),
            y: self.prob.g.project(&pt.y),
            p: pt.p,
        }
        .to_vec()
    }
}
