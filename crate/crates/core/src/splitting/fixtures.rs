//! Random equality-constrained QPs with a direct KKT solution, for testing the splitting methods.

use std::sync::Arc;

use crate::error::Result;
use crate::numkit::{solve, DenseMatrix, SeededRng};
use crate::prox::Quadratic;
use crate::splitting::{LadmmParams, PrimalDualPoint, SeparableProblem};

/// `min ½xᵀPx + cᵀx + ½yᵀRy + dᵀy  s.t.  Ax + By = b` with `P, R ≻ 0`.
#[derive(Debug, Clone)]
pub struct QpFixture {
    pub problem: SeparableProblem,
    pub p: DenseMatrix,
    pub c: Vec<f64>,
    pub r: DenseMatrix,
    pub d: Vec<f64>,
    pub a: DenseMatrix,
    pub bm: DenseMatrix,
    pub b: Vec<f64>,
    /// Unique KKT point `(x*, y*, p*)`.
    pub kkt: PrimalDualPoint,
}

fn random_spd(rng: &mut SeededRng, n: usize, shift: f64) -> DenseMatrix {
    let g = rng.normal_matrix(n, n);
    let mut s = g.t_matmul(&g).expect("square").scale(1.0 / n as f64);
    for i in 0..n {
        s[(i, i)] += shift;
    }
    s
}

impl QpFixture {
    pub fn random(n1: usize, n2: usize, m: usize, rng: &mut SeededRng) -> Result<Self> {
        let p = random_spd(rng, n1, 0.1);
        let r = random_spd(rng, n2, 0.1);
        let scale = 1.0 / (m as f64).sqrt();
        let a = rng.normal_matrix(m, n1).scale(scale);
        let bm = rng.normal_matrix(m, n2).scale(scale);
        let b = rng.normal_vec(m);
        let c = rng.normal_vec(n1);
        let d = rng.normal_vec(n2);
        Self::from_parts(p, c, r, d, a, bm, b)
    }

    pub fn from_parts(
        p: DenseMatrix,
        c: Vec<f64>,
        r: DenseMatrix,
        d: Vec<f64>,
        a: DenseMatrix,
        bm: DenseMatrix,
        b: Vec<f64>,
    ) -> Result<Self> {
        let f = Arc::new(Quadratic::new(p.clone(), c.clone(), 0.0)?);
        let g = Arc::new(Quadratic::new(r.clone(), d.clone(), 0.0)?);
        let problem =
            SeparableProblem::new(Arc::new(a.clone()), Arc::new(bm.clone()), b.clone(), f, g)?;
        let kkt = kkt_solve(&p, &c, &r, &d, &a, &bm, &b)?;
        Ok(Self {
            problem,
            p,
            c,
            r,
            d,
            a,
            bm,
            b,
            kkt,
        })
    }

    /// `β = 1`, `τ = 0.99/ρ(AᵀA)`, `η = 0.99/ρ(BᵀB)`, `α ≡ alpha`.
    pub fn params(&self, alpha: f64) -> Result<LadmmParams> {
        LadmmParams::inertial(
            1.0,
            0.99 / self.problem.rho_ata,
            0.99 / self.problem.rho_btb,
            alpha,
        )
    }
}

/// Solves
/// ```text
/// [ P  0  −Aᵀ ] [x]   [−c]
/// [ 0  R  −Bᵀ ] [y] = [−d]
/// [ A  B   0  ] [p]   [ b]
/// ```
pub fn kkt_solve(
    p: &DenseMatrix,
    c: &[f64],
    r: &DenseMatrix,
    d: &[f64],
    a: &DenseMatrix,
    bm: &DenseMatrix,
    b: &[f64],
) -> Result<PrimalDualPoint> {
    let (n1, n2, m) = (c.len(), d.len(), b.len());
    let n = n1 + n2 + m;
    let mut k = DenseMatrix::zeros(n, n);
    for i in 0..n1 {
        for j in 0..n1 {
            k[(i, j)] = p[(i, j)];
        }
    }
    for i in 0..n2 {
        for j in 0..n2 {
            k[(n1 + i, n1 + j)] = r[(i, j)];
        }
    }
    for row in 0..m {
        for j in 0..n1 {
            k[(n1 + n2 + row, j)] = a[(row, j)];
            k[(j, n1 + n2 + row)] = -a[(row, j)];
        }
        for j in 0..n2 {
            k[(n1 + n2 + row, n1 + j)] = bm[(row, j)];
            k[(n1 + j, n1 + n2 + row)] = -bm[(row, j)];
        }
    }
    let rhs: Vec<f64> = c
        .iter()
        .chain(d)
        .map(|v| -v)
        .chain(b.iter().copied())
        .collect();
    let w = solve(&k, &rhs)?;
    PrimalDualPoint::from_slice(&w, n1, n2)
}
