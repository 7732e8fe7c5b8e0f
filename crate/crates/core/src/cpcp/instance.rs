use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkit::{
    measure::candidate_indices, vecops, DenseMatrix, MeasurementOp, SeededRng, TransformKind,
};

/// Sizes and seed of a synthetic instance. Everything else is derived from these.
///
/// `q` is the number of real measurements. For `Fft2` each sampled frequency contributes its
/// real and imaginary part, so `q` must be even and `q/2` conjugate pairs are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CpcpSpec {
    pub m: usize,
    pub n: usize,
    pub r: usize,
    pub nnz: usize,
    pub kind: TransformKind,
    pub q: usize,
    pub seed: u64,
}

impl CpcpSpec {
    /// `(m + n − r)·r + nnz`
    pub fn dof(&self) -> usize {
        (self.m + self.n - self.r) * self.r + self.nnz
    }

    pub fn q_over_dof(&self) -> f64 {
        self.q as f64 / self.dof() as f64
    }

    /// `1/√m`
    pub fn lambda(&self) -> f64 {
        1.0 / (self.m as f64).sqrt()
    }

    /// Spec with `nnz` and `q` given as fractions of `mn`, rounded down.
    pub fn from_ratios(
        m: usize,
        n: usize,
        r: usize,
        nnz_ratio: f64,
        q_ratio: f64,
        kind: TransformKind,
        seed: u64,
    ) -> Result<Self> {
        for (name, v) in [("nnz ratio", nnz_ratio), ("q ratio", q_ratio)] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(Error::invalid(format!(
                    "{name} must lie in (0, 1], got {v}"
                )));
            }
        }
        let mn = (m * n) as f64;
        let mut q = (q_ratio * mn).floor() as usize;
        if kind.is_complex() {
            q -= q % 2;
        }
        Ok(Self {
            m,
            n,
            r,
            nnz: (nnz_ratio * mn).floor() as usize,
            kind,
            q,
            seed,
        })
    }

    fn validate(&self) -> Result<()> {
        let (m, n) = (self.m, self.n);
        if m == 0 || n == 0 {
            return Err(Error::invalid("empty image"));
        }
        if self.r == 0 || self.r > m.min(n) {
            return Err(Error::invalid(format!(
                "rank {} outside 1..={}",
                self.r,
                m.min(n)
            )));
        }
        if self.nnz > m * n {
            return Err(Error::invalid(format!(
                "nnz {} exceeds mn = {}",
                self.nnz,
                m * n
            )));
        }
        if self.kind.is_complex() && !self.q.is_multiple_of(2) {
            return Err(Error::invalid(
                "fft2 measurements come in (Re, Im) pairs; q must be even",
            ));
        }
        let max_q = match self.kind {
            TransformKind::Fft2 => 2 * candidate_indices(self.kind, m, n).len(),
            _ => m * n,
        };
        if self.q == 0 || self.q > max_q {
            return Err(Error::invalid(format!(
                "q = {} outside 1..={max_q}",
                self.q
            )));
        }
        Ok(())
    }

    fn coefficient_count(&self) -> usize {
        if self.kind.is_complex() {
            self.q / 2
        } else {
            self.q
        }
    }
}

/// What is written to disk: the spec plus the sampled coefficient indices, for cross-checking.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceRecord {
    pub spec: CpcpSpec,
    pub indices: Vec<usize>,
}

/// `min ‖L‖_* + λ‖S‖₁  s.t.  𝒜(L + S) = b` with known ground truth `(L₀, S₀)`.
#[derive(Debug, Clone)]
pub struct CpcpInstance {
    pub spec: CpcpSpec,
    pub l0: DenseMatrix,
    pub s0: DenseMatrix,
    pub meas: MeasurementOp,
    pub b: Vec<f64>,
    /// `1/√m`
    pub lambda: f64,
}

/// `L₀ = N₁N₂` with standard normal factors; `S₀` has `nnz` entries uniform in `[−10, 10]` on a
/// uniformly drawn support; `b = 𝒜(L₀ + S₀)`.
pub fn generate_instance(spec: CpcpSpec) -> Result<CpcpInstance> {
    spec.validate()?;
    let CpcpSpec {
        m, n, r, nnz, kind, ..
    } = spec;
    let root = SeededRng::new(spec.seed);

    let mut rng = root.split("low-rank");
    let n1 = rng.normal_matrix(m, r);
    let n2 = rng.normal_matrix(r, n);
    let l0 = n1.matmul(&n2)?;

    let mut rng = root.split("sparse");
    let mut s0 = DenseMatrix::zeros(m, n);
    let support = rng.sample_indices(m * n, nnz)?;
    let values = rng.uniform_vec(-10.0, 10.0, nnz)?;
    for (&idx, &v) in support.iter().zip(&values) {
        // a draw of exactly 0.0 would silently shrink the support
        s0.as_mut_slice()[idx] = if v == 0.0 { 10.0 } else { v };
    }

    let mut rng = root.split("measurement");
    let meas = MeasurementOp::random(kind, m, n, spec.coefficient_count(), &mut rng)?;
    let b = meas.apply(&(&l0 + &s0))?;
    Ok(CpcpInstance {
        spec,
        l0,
        s0,
        meas,
        b,
        lambda: spec.lambda(),
    })
}

impl CpcpInstance {
    pub fn dof(&self) -> usize {
        self.spec.dof()
    }

    pub fn q(&self) -> usize {
        self.b.len()
    }

    pub fn q_over_dof(&self) -> f64 {
        self.spec.q_over_dof()
    }

    /// `0.1·q/‖b‖₁`
    pub fn default_beta(&self) -> f64 {
        0.1 * self.q() as f64 / vecops::sum_abs(&self.b)
    }

    pub fn record(&self) -> InstanceRecord {
        InstanceRecord {
            spec: self.spec,
            indices: self.meas.indices().to_vec(),
        }
    }

    /// Regenerates from the record's seed and checks that the same coefficients are sampled.
    pub fn from_record(rec: &InstanceRecord) -> Result<Self> {
        let inst = generate_instance(rec.spec)?;
        if inst.meas.indices() != rec.indices.as_slice() {
            return Err(Error::invalid(
                "stored indices differ from those regenerated from the seed",
            ));
        }
        Ok(inst)
    }
}
