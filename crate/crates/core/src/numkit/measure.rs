//! Partial orthonormal measurement operators `𝒜 = P_Ω ∘ T`.
//!
//! `apply` transforms the image and keeps the selected coefficients; `adjoint`
//! zero-fills a measurement vector and inverts the transform. Because `T` is
//! orthonormal and the selection is a coordinate restriction, `𝒜𝒜* = I`.
//!
//! For `Fft2` the image is real but the coefficients are complex. Selected
//! frequencies are drawn from one representative of every conjugate pair
//! `{k, -k}` (self-conjugate frequencies are excluded), and each coefficient is
//! stored as `sqrt(2)·(Re, Im)`: the measurement vector has length `2q`, real
//! parts first. With that scaling `𝒜𝒜* = I` still holds in the real inner product.

use rustfft::num_complex::Complex64;
use std::f64::consts::SQRT_2;

use crate::error::{Error, Result};
use crate::numkit::matrix::DenseMatrix;
use crate::numkit::rng::SeededRng;
use crate::numkit::transform::{Transform2d, TransformKind};

#[derive(Debug, Clone)]
pub struct MeasurementOp {
    transform: Transform2d,
    indices: Vec<usize>,
}

/// Coefficient indices that may be sampled for `kind` at this image size.
pub fn candidate_indices(kind: TransformKind, rows: usize, cols: usize) -> Vec<usize> {
    match kind {
        TransformKind::Fft2 => (0..rows * cols)
            .filter(|&idx| {
                let (i, j) = (idx / cols, idx % cols);
                let partner = ((rows - i) % rows) * cols + (cols - j) % cols;
                idx < partner
            })
            .collect(),
        _ => (0..rows * cols).collect(),
    }
}

impl MeasurementOp {
    /// Draws `q` distinct coefficient indices uniformly without replacement.
    pub fn random(
        kind: TransformKind,
        rows: usize,
        cols: usize,
        q: usize,
        rng: &mut SeededRng,
    ) -> Result<Self> {
        let transform = Transform2d::new(kind, rows, cols)?;
        let candidates = candidate_indices(kind, rows, cols);
        if q == 0 || q > candidates.len() {
            return Err(Error::invalid(format!(
                "q = {q} outside 1..={} for {kind} at {rows}x{cols}",
                candidates.len()
            )));
        }
        let picks = rng.sample_indices(candidates.len(), q)?;
        let indices = picks.into_iter().map(|i| candidates[i]).collect();
        Ok(Self { transform, indices })
    }

    /// Rebuilds an operator from a stored index set, validating it.
    pub fn from_indices(
        kind: TransformKind,
        rows: usize,
        cols: usize,
        indices: Vec<usize>,
    ) -> Result<Self> {
        let transform = Transform2d::new(kind, rows, cols)?;
        if indices.is_empty() {
            return Err(Error::invalid("empty index set"));
        }
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("indices must be sorted and distinct"));
        }
        let allowed = candidate_indices(kind, rows, cols);
        if indices.iter().any(|i| allowed.binary_search(i).is_err()) {
            return Err(Error::invalid("index out of range for transform"));
        }
        Ok(Self { transform, indices })
    }

    pub fn kind(&self) -> TransformKind {
        self.transform.kind()
    }

    pub fn image_shape(&self) -> (usize, usize) {
        self.transform.shape()
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    /// Number of selected coefficients.
    pub fn q(&self) -> usize {
        self.indices.len()
    }

    /// Real dimension of the measurement space (`q`, or `2q` for complex coefficients).
    pub fn measurement_len(&self) -> usize {
        if self.kind().is_complex() {
            2 * self.q()
        } else {
            self.q()
        }
    }

    pub fn apply(&self, x: &DenseMatrix) -> Result<Vec<f64>> {
        if self.kind().is_complex() {
            let c = self.transform.complex_forward(x)?;
            let q = self.q();
            let mut out = vec![0.0; 2 * q];
            for (k, &idx) in self.indices.iter().enumerate() {
                out[k] = SQRT_2 * c[idx].re;
                out[q + k] = SQRT_2 * c[idx].im;
            }
            Ok(out)
        } else {
            let c = self.transform.real(x, false)?;
            let data = c.as_slice();
            Ok(self.indices.iter().map(|&i| data[i]).collect())
        }
    }

    pub fn adjoint(&self, b: &[f64]) -> Result<DenseMatrix> {
        if b.len() != self.measurement_len() {
            return Err(Error::shape(self.measurement_len(), b.len()));
        }
        let (rows, cols) = self.image_shape();
        if self.kind().is_complex() {
            let q = self.q();
            let mut z = vec![Complex64::new(0.0, 0.0); rows * cols];
            for (k, &idx) in self.indices.iter().enumerate() {
                z[idx] = Complex64::new(b[k], b[q + k]);
            }
            let img = self.transform.complex_inverse(z)?;
            DenseMatrix::from_vec(rows, cols, img.iter().map(|v| SQRT_2 * v.re).collect())
        } else {
            let mut filled = vec![0.0; rows * cols];
            for (&idx, &v) in self.indices.iter().zip(b) {
                filled[idx] = v;
            }
            let coeffs = DenseMatrix::from_vec(rows, cols, filled)?;
            self.transform.real(&coeffs, true)
        }
    }
}
