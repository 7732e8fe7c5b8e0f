//! Proximal maps used by the linearized ADMM subproblems.
//!
//! A proximal oracle evaluates `argmin_w φ(w) + ‖w − z‖²/(2κ)`. Set constraints
//! are folded into `φ` as indicators, so `value` returns `+∞` outside the set.

use crate::error::{Error, Result};
use crate::numkit::svd::svd_with_basis;
use crate::numkit::{solve, DenseMatrix};

/// Componentwise `sign(v)·max(|v| − κ, 0)`. Ties `|v| = κ` map to zero.
pub fn soft_threshold(v: &[f64], kappa: f64) -> Vec<f64> {
    v.iter().map(|&x| shrink(x, kappa)).collect()
}

#[inline]
pub fn shrink(x: f64, kappa: f64) -> f64 {
    if x > kappa {
        x - kappa
    } else if x < -kappa {
        x + kappa
    } else {
        0.0
    }
}

pub fn soft_threshold_matrix(m: &DenseMatrix, kappa: f64) -> DenseMatrix {
    let mut out = m.clone();
    out.as_mut_slice()
        .iter_mut()
        .for_each(|x| *x = shrink(*x, kappa));
    out
}

/// Singular value thresholding, the proximal map of `κ‖·‖_*`.
pub fn svt(m: &DenseMatrix, kappa: f64) -> Result<DenseMatrix> {
    Ok(SvtWorkspace::default().apply(m, kappa)?.matrix)
}

#[derive(Debug, Clone)]
pub struct SvtOutput {
    pub matrix: DenseMatrix,
    /// thresholded singular values (nonincreasing); their sum is the nuclear norm of `matrix`
    pub singular_values: Vec<f64>,
    pub rank: usize,
}

impl SvtOutput {
    pub fn nuclear_norm(&self) -> f64 {
        self.singular_values.iter().sum()
    }
}

/// Singular value thresholding that remembers the last right singular basis.
///
/// Iterative solvers call svt on a slowly changing sequence of matrices; the
/// stored basis seeds the next decomposition. Results do not depend on the seed
/// beyond round-off.
#[derive(Debug, Clone, Default)]
pub struct SvtWorkspace {
    basis: Option<DenseMatrix>,
    warm_start: bool,
}

impl SvtWorkspace {
    pub fn warm() -> Self {
        Self {
            basis: None,
            warm_start: true,
        }
    }

    pub fn apply(&mut self, m: &DenseMatrix, kappa: f64) -> Result<SvtOutput> {
        if !(kappa > 0.0) {
            return Err(Error::invalid(format!(
                "svt threshold must be positive, got {kappa}"
            )));
        }
        let basis = if self.warm_start {
            self.basis.as_ref()
        } else {
            None
        };
        let d = svd_with_basis(m, basis)?;
        let shrunk: Vec<f64> = d.s.iter().map(|&s| (s - kappa).max(0.0)).collect();
        let rank = shrunk.iter().take_while(|&&s| s > 0.0).count();
        let mut out = DenseMatrix::zeros(m.rows(), m.cols());
        for (k, &sk) in shrunk.iter().enumerate().take(rank) {
            let (uk, vk) = (d.u.col(k), d.v.col(k));
            for (i, &ui) in uk.iter().enumerate() {
                let coef = sk * ui;
                if coef != 0.0 {
                    let row = &mut out.as_mut_slice()[i * m.cols()..(i + 1) * m.cols()];
                    crate::numkit::vecops::axpy(coef, &vk, row);
                }
            }
        }
        if self.warm_start {
            self.basis = Some(d.v);
        }
        Ok(SvtOutput {
            matrix: out,
            singular_values: shrunk,
            rank,
        })
    }
}

/// Componentwise clamp onto `[lo, hi]`.
pub fn project_box(v: &[f64], lo: &[f64], hi: &[f64]) -> Result<Vec<f64>> {
    if lo.len() != v.len() || hi.len() != v.len() {
        return Err(Error::shape(v.len(), format!("{}/{}", lo.len(), hi.len())));
    }
    if lo.iter().zip(hi).any(|(l, h)| !(l <= h)) {
        return Err(Error::invalid("box has lo > hi"));
    }
    Ok(v.iter()
        .zip(lo.iter().zip(hi))
        .map(|(&x, (&l, &h))| x.clamp(l, h))
        .collect())
}

/// Quadratic data `½wᵀQw + cᵀw` restricted to a box, as exposed by oracles that have it.
#[derive(Debug, Clone)]
pub struct QuadraticParts {
    pub q: DenseMatrix,
    pub c: Vec<f64>,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

/// A convex function with a computable proximal map.
pub trait ProxOracle: Send + Sync {
    fn dim(&self) -> usize;

    /// `argmin_w φ(w) + ‖w − z‖²/(2κ)`
    fn prox(&self, z: &[f64], kappa: f64) -> Vec<f64>;

    /// `φ(w)`, `+∞` outside the domain.
    fn value(&self, w: &[f64]) -> f64;

    /// Euclidean projection onto the domain (identity for full-domain functions).
    fn project(&self, w: &[f64]) -> Vec<f64> {
        w.to_vec()
    }

    /// Quadratic-plus-box description, when the function is of that form.
    fn quadratic_parts(&self) -> Option<QuadraticParts> {
        None
    }
}

impl std::fmt::Debug for dyn ProxOracle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "ProxOracle(dim = {})", self.dim())
    }
}

/// `φ ≡ 0`
#[derive(Debug, Clone)]
pub struct Zero {
    pub dim: usize,
}

impl ProxOracle for Zero {
    fn dim(&self) -> usize {
        self.dim
    }

    fn prox(&self, z: &[f64], _kappa: f64) -> Vec<f64> {
        z.to_vec()
    }

    fn value(&self, _w: &[f64]) -> f64 {
        0.0
    }

    fn quadratic_parts(&self) -> Option<QuadraticParts> {
        Some(QuadraticParts {
            q: DenseMatrix::zeros(self.dim, self.dim),
            c: vec![0.0; self.dim],
            lo: vec![f64::NEG_INFINITY; self.dim],
            hi: vec![f64::INFINITY; self.dim],
        })
    }
}

/// `φ(w) = weight·‖w‖₁`
#[derive(Debug, Clone)]
pub struct L1Norm {
    pub dim: usize,
    pub weight: f64,
}

impl ProxOracle for L1Norm {
    fn dim(&self) -> usize {
        self.dim
    }

    fn prox(&self, z: &[f64], kappa: f64) -> Vec<f64> {
        soft_threshold(z, kappa * self.weight)
    }

    fn value(&self, w: &[f64]) -> f64 {
        self.weight * crate::numkit::vecops::sum_abs(w)
    }
}

/// `φ(w) = ½ Σ dᵢwᵢ² + cᵀw` on the box `[lo, hi]` (bounds may be infinite).
#[derive(Debug, Clone)]
pub struct DiagQuadraticBox {
    pub diag: Vec<f64>,
    pub c: Vec<f64>,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl DiagQuadraticBox {
    pub fn new(diag: Vec<f64>, c: Vec<f64>, lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        let n = diag.len();
        if c.len() != n || lo.len() != n || hi.len() != n {
            return Err(Error::invalid("DiagQuadraticBox: inconsistent lengths"));
        }
        if diag.iter().any(|d| !(*d >= 0.0)) {
            return Err(Error::invalid(
                "DiagQuadraticBox: diagonal must be nonnegative",
            ));
        }
        if lo.iter().zip(&hi).any(|(l, h)| !(l <= h)) {
            return Err(Error::invalid("DiagQuadraticBox: lo > hi"));
        }
        Ok(Self { diag, c, lo, hi })
    }

    pub fn unconstrained(diag: Vec<f64>, c: Vec<f64>) -> Result<Self> {
        let n = diag.len();
        Self::new(diag, c, vec![f64::NEG_INFINITY; n], vec![f64::INFINITY; n])
    }
}

impl ProxOracle for DiagQuadraticBox {
    fn dim(&self) -> usize {
        self.diag.len()
    }

    fn prox(&self, z: &[f64], kappa: f64) -> Vec<f64> {
        // separable: minimizer of ½dw² + cw + (w − z)²/(2κ) is (z − κc)/(1 + κd), then clamp
        z.iter()
            .enumerate()
            .map(|(i, &zi)| {
                ((zi - kappa * self.c[i]) / (1.0 + kappa * self.diag[i]))
                    .clamp(self.lo[i], self.hi[i])
            })
            .collect()
    }

    fn value(&self, w: &[f64]) -> f64 {
        let mut v = 0.0;
        for (i, &wi) in w.iter().enumerate() {
            if wi < self.lo[i] || wi > self.hi[i] {
                return f64::INFINITY;
            }
            v += 0.5 * self.diag[i] * wi * wi + self.c[i] * wi;
        }
        v
    }

    fn project(&self, w: &[f64]) -> Vec<f64> {
        w.iter()
            .enumerate()
            .map(|(i, &wi)| wi.clamp(self.lo[i], self.hi[i]))
            .collect()
    }

    fn quadratic_parts(&self) -> Option<QuadraticParts> {
        Some(QuadraticParts {
            q: DenseMatrix::from_diag(&self.diag),
            c: self.c.clone(),
            lo: self.lo.clone(),
            hi: self.hi.clone(),
        })
    }
}

/// `φ(w) = ½wᵀQw + cᵀw + constant` with dense symmetric PSD `Q`, no constraints.
#[derive(Debug, Clone)]
pub struct Quadratic {
    pub q: DenseMatrix,
    pub c: Vec<f64>,
    pub constant: f64,
}

impl Quadratic {
    pub fn new(q: DenseMatrix, c: Vec<f64>, constant: f64) -> Result<Self> {
        if q.rows() != q.cols() || c.len() != q.rows() {
            return Err(Error::invalid("Quadratic: Q must be square and match c"));
        }
        if q.max_abs_diff(&q.transpose()) > 1e-12 * q.frobenius_norm().max(1.0) {
            return Err(Error::invalid("Quadratic: Q must be symmetric"));
        }
        Ok(Self { q, c, constant })
    }

    /// `½‖w − center‖²`
    pub fn squared_distance(center: &[f64]) -> Self {
        let n = center.len();
        Self {
            q: DenseMatrix::identity(n),
            c: center.iter().map(|v| -v).collect(),
            constant: 0.5 * crate::numkit::vecops::norm_sq(center),
        }
    }
}

impl ProxOracle for Quadratic {
    fn dim(&self) -> usize {
        self.c.len()
    }

    fn prox(&self, z: &[f64], kappa: f64) -> Vec<f64> {
        // (I + κQ) w = z − κc
        let n = self.dim();
        let mut m = self.q.scale(kappa);
        for i in 0..n {
            m[(i, i)] += 1.0;
        }
        let rhs: Vec<f64> = z
            .iter()
            .zip(&self.c)
            .map(|(zi, ci)| zi - kappa * ci)
            .collect();
        solve(&m, &rhs).expect("I + κQ is positive definite for PSD Q")
    }

    fn value(&self, w: &[f64]) -> f64 {
        let qw = self.q.matvec(w).expect("dimension checked by caller");
        0.5 * crate::numkit::vecops::dot(w, &qw)
            + crate::numkit::vecops::dot(&self.c, w)
            + self.constant
    }

    fn quadratic_parts(&self) -> Option<QuadraticParts> {
        let n = self.dim();
        Some(QuadraticParts {
            q: self.q.clone(),
            c: self.c.clone(),
            lo: vec![f64::NEG_INFINITY; n],
            hi: vec![f64::INFINITY; n],
        })
    }
}

/// Indicator of the box `[lo, hi]`.
#[derive(Debug, Clone)]
pub struct BoxIndicator {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl ProxOracle for BoxIndicator {
    fn dim(&self) -> usize {
        self.lo.len()
    }

    fn prox(&self, z: &[f64], _kappa: f64) -> Vec<f64> {
        self.project(z)
    }

    fn value(&self, w: &[f64]) -> f64 {
        let inside = w
            .iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(x, (l, h))| x >= l && x <= h);
        if inside {
            0.0
        } else {
            f64::INFINITY
        }
    }

    fn project(&self, w: &[f64]) -> Vec<f64> {
        project_box(w, &self.lo, &self.hi).expect("box validated at construction")
    }

    fn quadratic_parts(&self) -> Option<QuadraticParts> {
        let n = self.dim();
        Some(QuadraticParts {
            q: DenseMatrix::zeros(n, n),
            c: vec![0.0; n],
            lo: self.lo.clone(),
            hi: self.hi.clone(),
        })
    }
}
