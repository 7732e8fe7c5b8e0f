//! Seeded, platform-independent randomness.
//!
//! All draws come from ChaCha8 (`rand_chacha`). Named sub-streams are derived by
//! hashing a label (64-bit FNV-1a) into the ChaCha stream id, so two streams with
//! the same seed but different labels never overlap. Normal deviates use the
//! ziggurat sampler of `rand_distr::StandardNormal`; uniform deviates use
//! `rand`'s `Uniform` over `[lo, hi)`.

use rand::distr::{Distribution, Uniform};
use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::numkit::matrix::DenseMatrix;

/// Identifier written into run records so results can be traced back to a generator.
pub const ALGORITHM_ID: &str = "chacha8/rand_chacha-0.9;normal=ziggurat";

#[derive(Debug, Clone)]
pub struct SeededRng {
    seed: u64,
    stream: u64,
    inner: ChaCha8Rng,
}

fn fnv1a(label: &str) -> u64 {
    label.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        Self::with_stream(seed, 0)
    }

    fn with_stream(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        Self {
            seed,
            stream,
            inner,
        }
    }

    /// Independent stream for `label`, derived from the seed (not from the current state).
    pub fn split(&self, label: &str) -> Self {
        Self::with_stream(self.seed, self.stream ^ fnv1a(label))
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.inner)
    }

    pub fn normal_matrix(&mut self, rows: usize, cols: usize) -> DenseMatrix {
        let data = (0..rows * cols).map(|_| self.normal()).collect();
        DenseMatrix::from_vec(rows, cols, data).expect("normal draws are finite")
    }

    pub fn normal_vec(&mut self, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.normal()).collect()
    }

    pub fn uniform_vec(&mut self, lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::invalid(format!(
                "uniform range [{lo}, {hi}) is empty"
            )));
        }
        let dist = Uniform::new(lo, hi).map_err(|e| Error::invalid(e.to_string()))?;
        Ok((0..n).map(|_| dist.sample(&mut self.inner)).collect())
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> Result<f64> {
        Ok(self.uniform_vec(lo, hi, 1)?[0])
    }

    /// `k` distinct indices from `0..n`, uniformly without replacement, returned sorted.
    pub fn sample_indices(&mut self, n: usize, k: usize) -> Result<Vec<usize>> {
        if k > n {
            return Err(Error::invalid(format!(
                "cannot draw {k} distinct indices from {n}"
            )));
        }
        let mut idx = index::sample(&mut self.inner, n, k).into_vec();
        idx.sort_unstable();
        Ok(idx)
    }

    /// Random matrix with orthonormal columns (`rows >= cols`), via QR-free Gram-Schmidt on normals.
    pub fn orthogonal_matrix(&mut self, n: usize) -> DenseMatrix {
        let g = self.normal_matrix(n, n);
        let mut cols: Vec<Vec<f64>> = Vec::with_capacity(n);
        for j in 0..n {
            let mut c = g.col(j);
            for _ in 0..2 {
                for q in &cols {
                    let d = crate::numkit::vecops::dot(q, &c);
                    crate::numkit::vecops::axpy(-d, q, &mut c);
                }
            }
            let nrm = crate::numkit::vecops::norm(&c);
            cols.push(crate::numkit::vecops::scale(1.0 / nrm, &c));
        }
        let cm: Vec<f64> = cols.concat();
        DenseMatrix::from_col_major(n, n, &cm)
    }
}
