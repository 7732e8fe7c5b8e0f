use crate::error::{Error, Result};
use crate::numkit::{solve, sym_eigen, vecops, DenseMatrix};
use crate::prox::shrink;
use crate::vi_core::{DenseWeight, MixedViProblem, ScaledIdentity, WeightOperator, OMEGA_TOL};

const PDAS_MAX_ITER: usize = 200;
const PROJECTION_MAX_ITER: usize = 200_000;

/// Solves the box-constrained affine VI: find `w ∈ [lo, hi]` with
/// `⟨v − w, Kw + d⟩ ≥ 0` for all `v` in the box.
///
/// `K` must have a positive definite symmetric part. Unbounded boxes reduce to `Kw = −d`.
/// Otherwise a primal-dual active set iteration is used, falling back to projected
/// fixed-point steps if the active sets cycle.
pub fn solve_box_affine_vi(k: &DenseMatrix, d: &[f64], lo: &[f64], hi: &[f64]) -> Result<Vec<f64>> {
    let n = d.len();
    if k.shape() != (n, n) || lo.len() != n || hi.len() != n {
        return Err(Error::shape(
            format!("{n}x{n} system"),
            format!("{:?}", k.shape()),
        ));
    }
    if lo.iter().zip(hi).any(|(l, h)| !(l <= h)) {
        return Err(Error::invalid("box has lo > hi"));
    }
    let neg_d: Vec<f64> = d.iter().map(|v| -v).collect();
    if lo.iter().chain(hi).all(|b| b.is_infinite()) {
        return solve(k, &neg_d);
    }
    let start: Vec<f64> = (0..n).map(|i| 0.0_f64.clamp(lo[i], hi[i])).collect();
    if let Some(w) = pdas(k, d, lo, hi, start)? {
        return Ok(w);
    }
    log::debug!("active-set iteration cycled; restarting from projected iterate");
    let w = projected_iteration(k, d, lo, hi)?;
    Ok(pdas(k, d, lo, hi, w.clone())?.unwrap_or(w))
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Bound {
    Free,
    Lo,
    Hi,
}

fn pdas(
    k: &DenseMatrix,
    d: &[f64],
    lo: &[f64],
    hi: &[f64],
    mut w: Vec<f64>,
) -> Result<Option<Vec<f64>>> {
    let n = d.len();
    let c = 1.0
        / k.as_slice()
            .iter()
            .fold(0.0_f64, |a, v| a.max(v.abs()))
            .max(f64::MIN_POSITIVE);
    let mut state = vec![Bound::Free; n];
    let mut first = true;
    for _ in 0..PDAS_MAX_ITER {
        let mu = vecops::add(&k.matvec(&w)?, d);
        let next: Vec<Bound> = (0..n)
            .map(|i| {
                let t = w[i] - c * mu[i];
                if t < lo[i] {
                    Bound::Lo
                } else if t > hi[i] {
                    Bound::Hi
                } else {
                    Bound::Free
                }
            })
            .collect();
        if !first && next == state {
            let ok = (0..n).all(|i| {
                let scale = 1e-9 * (1.0 + mu[i].abs());
                match state[i] {
                    Bound::Free => w[i] >= lo[i] - OMEGA_TOL && w[i] <= hi[i] + OMEGA_TOL,
                    Bound::Lo => mu[i] >= -scale,
                    Bound::Hi => mu[i] <= scale,
                }
            });
            return Ok(ok.then(|| (0..n).map(|i| w[i].clamp(lo[i], hi[i])).collect()));
        }
        first = false;
        state = next;

        let free: Vec<usize> = (0..n).filter(|&i| state[i] == Bound::Free).collect();
        for i in 0..n {
            match state[i] {
                Bound::Lo => w[i] = lo[i],
                Bound::Hi => w[i] = hi[i],
                Bound::Free => w[i] = 0.0,
            }
        }
        if !free.is_empty() {
            let kw = k.matvec(&w)?;
            let mut kff = DenseMatrix::zeros(free.len(), free.len());
            let mut rhs = Vec::with_capacity(free.len());
            for (a, &i) in free.iter().enumerate() {
                for (b, &j) in free.iter().enumerate() {
                    kff[(a, b)] = k[(i, j)];
                }
                rhs.push(-d[i] - kw[i]);
            }
            let wf = solve(&kff, &rhs)?;
            for (a, &i) in free.iter().enumerate() {
                w[i] = wf[a];
            }
        }
    }
    Ok(None)
}

fn projected_iteration(k: &DenseMatrix, d: &[f64], lo: &[f64], hi: &[f64]) -> Result<Vec<f64>> {
    let mut sym = k + &k.transpose();
    sym.scale_mut(0.5);
    let mu = sym_eigen(&sym)?.0[0];
    if !(mu > 0.0) {
        return Err(Error::Resolvent(
            "affine VI operator is not strongly monotone".into(),
        ));
    }
    let ktk = k.t_matmul(k)?;
    let l2 = sym_eigen(&ktk)?.0.last().copied().unwrap_or(0.0);
    let gamma = mu / l2;
    let n = d.len();
    let mut w: Vec<f64> = (0..n).map(|i| 0.0_f64.clamp(lo[i], hi[i])).collect();
    for _ in 0..PROJECTION_MAX_ITER {
        let g = vecops::add(&k.matvec(&w)?, d);
        let next: Vec<f64> = (0..n)
            .map(|i| (w[i] - gamma * g[i]).clamp(lo[i], hi[i]))
            .collect();
        let change = vecops::dist(&next, &w);
        w = next;
        if change <= 1e-15 * (1.0 + vecops::norm(&w)) {
            return Ok(w);
        }
    }
    Err(Error::Resolvent(
        "projected iteration did not converge".into(),
    ))
}

/// `θ(w) = ½wᵀQw + cᵀw`, `F(w) = Mw + r`, `Ω = [lo, hi]` (bounds may be infinite).
///
/// `H` is the symmetric part of `M`.
#[derive(Debug, Clone)]
pub struct AffineVi {
    q: DenseMatrix,
    c: Vec<f64>,
    m: DenseMatrix,
    r: Vec<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    h: DenseWeight,
}

impl AffineVi {
    pub fn new(
        q: DenseMatrix,
        c: Vec<f64>,
        m: DenseMatrix,
        r: Vec<f64>,
        lo: Vec<f64>,
        hi: Vec<f64>,
    ) -> Result<Self> {
        let n = c.len();
        if q.shape() != (n, n)
            || m.shape() != (n, n)
            || r.len() != n
            || lo.len() != n
            || hi.len() != n
        {
            return Err(Error::invalid("AffineVi: inconsistent dimensions"));
        }
        if lo.iter().zip(&hi).any(|(l, h)| !(l <= h)) {
            return Err(Error::invalid("AffineVi: lo > hi"));
        }
        let qw = DenseWeight::new(q.clone())?;
        let h = DenseWeight::symmetric_part(&m)?;
        let tol = 1e-12;
        if qw.min_eigenvalue()? < -tol * q.frobenius_norm().max(1.0) {
            return Err(Error::invalid("AffineVi: Q must be positive semidefinite"));
        }
        if h.min_eigenvalue()? < -tol * m.frobenius_norm().max(1.0) {
            return Err(Error::invalid("AffineVi: M must be monotone"));
        }
        Ok(Self {
            q,
            c,
            m,
            r,
            lo,
            hi,
            h,
        })
    }

    pub fn unconstrained(q: DenseMatrix, c: Vec<f64>, m: DenseMatrix, r: Vec<f64>) -> Result<Self> {
        let n = c.len();
        Self::new(
            q,
            c,
            m,
            r,
            vec![f64::NEG_INFINITY; n],
            vec![f64::INFINITY; n],
        )
    }

    pub fn bounds(&self) -> (&[f64], &[f64]) {
        (&self.lo, &self.hi)
    }

    /// Direct solution of the VI (requires `Q + M` to have a positive definite symmetric part).
    pub fn solve_direct(&self) -> Result<Vec<f64>> {
        let k = &self.q + &self.m;
        let d = vecops::add(&self.c, &self.r);
        solve_box_affine_vi(&k, &d, &self.lo, &self.hi)
    }
}

impl MixedViProblem for AffineVi {
    fn dim(&self) -> usize {
        self.c.len()
    }

    fn theta(&self, w: &[f64]) -> f64 {
        let qw = self.q.matvec(w).expect("dimension mismatch");
        0.5 * vecops::dot(w, &qw) + vecops::dot(&self.c, w)
    }

    fn operator(&self, w: &[f64]) -> Vec<f64> {
        vecops::add(&self.m.matvec(w).expect("dimension mismatch"), &self.r)
    }

    fn resolvent(&self, z: &[f64], lambda: f64, g: &dyn WeightOperator) -> Result<Vec<f64>> {
        // Qw + c + Mw + r + G(w − z)/λ ⟂ box
        let gm = g.materialize();
        let mut k = &self.q + &self.m;
        k.axpy_mut(1.0 / lambda, &gm);
        let gz = g.apply(z);
        let d: Vec<f64> = (0..self.dim())
            .map(|i| self.c[i] + self.r[i] - gz[i] / lambda)
            .collect();
        solve_box_affine_vi(&k, &d, &self.lo, &self.hi)
    }

    fn contains(&self, w: &[f64]) -> bool {
        w.len() == self.dim()
            && w.iter()
                .zip(self.lo.iter().zip(&self.hi))
                .all(|(x, (l, h))| *x >= l - OMEGA_TOL && *x <= h + OMEGA_TOL)
    }

    fn project(&self, w: &[f64]) -> Vec<f64> {
        w.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .map(|(x, (l, h))| x.clamp(*l, *h))
            .collect()
    }

    fn h_weight(&self) -> Option<&dyn WeightOperator> {
        Some(&self.h)
    }
}

/// `θ(w) = κ‖w‖₁`, `F(w) = μ(w − a)`, `Ω = ℝⁿ`; solution `soft(a, κ/μ)`.
#[derive(Debug, Clone)]
pub struct L1RegularizedVi {
    kappa: f64,
    mu: f64,
    a: Vec<f64>,
    h: ScaledIdentity,
}

impl L1RegularizedVi {
    pub fn new(kappa: f64, mu: f64, a: Vec<f64>) -> Result<Self> {
        if !(kappa >= 0.0) || !(mu >= 0.0) {
            return Err(Error::invalid(
                "L1RegularizedVi: κ and μ must be nonnegative",
            ));
        }
        let h = ScaledIdentity {
            dim: a.len(),
            scale: mu,
        };
        Ok(Self { kappa, mu, a, h })
    }

    pub fn solution(&self) -> Option<Vec<f64>> {
        (self.mu > 0.0).then(|| {
            self.a
                .iter()
                .map(|&x| shrink(x, self.kappa / self.mu))
                .collect()
        })
    }
}

impl MixedViProblem for L1RegularizedVi {
    fn dim(&self) -> usize {
        self.a.len()
    }

    fn theta(&self, w: &[f64]) -> f64 {
        self.kappa * vecops::sum_abs(w)
    }

    fn operator(&self, w: &[f64]) -> Vec<f64> {
        w.iter()
            .zip(&self.a)
            .map(|(x, a)| self.mu * (x - a))
            .collect()
    }

    fn resolvent(&self, z: &[f64], lambda: f64, g: &dyn WeightOperator) -> Result<Vec<f64>> {
        let s = g
            .scalar_identity()
            .ok_or_else(|| Error::Unsupported("L1RegularizedVi resolvent needs G = s·I".into()))?;
        let denom = self.mu + s / lambda;
        if !(denom > 0.0) {
            return Err(Error::Resolvent("μ + s/λ must be positive".into()));
        }
        Ok(z.iter()
            .zip(&self.a)
            .map(|(zi, ai)| shrink((self.mu * ai + s / lambda * zi) / denom, self.kappa / denom))
            .collect())
    }

    fn contains(&self, w: &[f64]) -> bool {
        w.len() == self.dim()
    }

    fn project(&self, w: &[f64]) -> Vec<f64> {
        w.to_vec()
    }

    fn h_weight(&self) -> Option<&dyn WeightOperator> {
        Some(&self.h)
    }
}
