//! Orthonormal 2-D transforms used as measurement dictionaries.
//!
//! * `Dct2`: orthonormal DCT-II along every row, then along every column.
//! * `Wht`: the image is vectorized row-major to length `rows * cols` (a power of two)
//!   and the fast Walsh-Hadamard transform in natural (Hadamard) order is applied,
//!   scaled by `1/sqrt(len)`.
//! * `Fft2`: unitary 2-D DFT with complex output.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rustdct::{DctPlanner, TransformType2And3};
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkit::matrix::DenseMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TransformKind {
    Dct2,
    Wht,
    Fft2,
}

impl TransformKind {
    pub fn is_complex(self) -> bool {
        matches!(self, TransformKind::Fft2)
    }

    pub fn name(self) -> &'static str {
        match self {
            TransformKind::Dct2 => "dct2",
            TransformKind::Wht => "wht",
            TransformKind::Fft2 => "fft2",
        }
    }
}

impl fmt::Display for TransformKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TransformKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dct2" | "dct" => Ok(TransformKind::Dct2),
            "wht" => Ok(TransformKind::Wht),
            "fft2" | "fft" => Ok(TransformKind::Fft2),
            other => Err(Error::invalid(format!("unknown transform kind {other:?}"))),
        }
    }
}

/// In-place orthonormal fast Walsh-Hadamard transform. Self-inverse.
pub fn fwht(buf: &mut [f64]) -> Result<()> {
    let n = buf.len();
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(n));
    }
    let mut h = 1;
    while h < n {
        for block in buf.chunks_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = x + y;
                *b = x - y;
            }
        }
        h *= 2;
    }
    let s = 1.0 / (n as f64).sqrt();
    buf.iter_mut().for_each(|v| *v *= s);
    Ok(())
}

/// Planned transform for a fixed image size.
#[derive(Clone)]
pub struct Transform2d {
    kind: TransformKind,
    rows: usize,
    cols: usize,
    plan: Plan,
}

#[derive(Clone)]
enum Plan {
    Dct {
        row: Arc<dyn TransformType2And3<f64>>,
        col: Arc<dyn TransformType2And3<f64>>,
    },
    Wht,
    Fft {
        row_fwd: Arc<dyn Fft<f64>>,
        row_inv: Arc<dyn Fft<f64>>,
        col_fwd: Arc<dyn Fft<f64>>,
        col_inv: Arc<dyn Fft<f64>>,
    },
}

impl fmt::Debug for Transform2d {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Transform2d")
            .field("kind", &self.kind)
            .field("rows", &self.rows)
            .field("cols", &self.cols)
            .finish()
    }
}

impl Transform2d {
    pub fn new(kind: TransformKind, rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::invalid("transform of an empty image"));
        }
        let plan = match kind {
            TransformKind::Dct2 => {
                let mut planner = DctPlanner::new();
                Plan::Dct {
                    row: planner.plan_dct2(cols),
                    col: planner.plan_dct2(rows),
                }
            }
            TransformKind::Wht => {
                let len = rows * cols;
                if !len.is_power_of_two() {
                    return Err(Error::NotPowerOfTwo(len));
                }
                Plan::Wht
            }
            TransformKind::Fft2 => {
                let mut planner = FftPlanner::new();
                Plan::Fft {
                    row_fwd: planner.plan_fft_forward(cols),
                    row_inv: planner.plan_fft_inverse(cols),
                    col_fwd: planner.plan_fft_forward(rows),
                    col_inv: planner.plan_fft_inverse(rows),
                }
            }
        };
        Ok(Self {
            kind,
            rows,
            cols,
            plan,
        })
    }

    pub fn kind(&self) -> TransformKind {
        self.kind
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    fn check(&self, m: &DenseMatrix) -> Result<()> {
        if m.shape() != (self.rows, self.cols) {
            return Err(Error::shape(
                format!("{}x{}", self.rows, self.cols),
                format!("{}x{}", m.rows(), m.cols()),
            ));
        }
        Ok(())
    }

    /// Real transforms (`Dct2`, `Wht`). Returns the coefficient image.
    pub fn real(&self, image: &DenseMatrix, inverse: bool) -> Result<DenseMatrix> {
        self.check(image)?;
        let mut data = image.as_slice().to_vec();
        match &self.plan {
            Plan::Dct { row, col } => {
                dct_rows(row.as_ref(), &mut data, self.cols, inverse);
                let mut t = transpose(&data, self.rows, self.cols);
                dct_rows(col.as_ref(), &mut t, self.rows, inverse);
                data = transpose(&t, self.cols, self.rows);
            }
            Plan::Wht => fwht(&mut data)?,
            Plan::Fft { .. } => {
                return Err(Error::Unsupported(
                    "fft2 has complex coefficients; use Transform2d::complex_forward".into(),
                ))
            }
        }
        DenseMatrix::from_vec(self.rows, self.cols, data)
    }

    /// Unitary 2-D DFT of a real image, row-major complex coefficients.
    pub fn complex_forward(&self, image: &DenseMatrix) -> Result<Vec<Complex64>> {
        self.check(image)?;
        let Plan::Fft {
            row_fwd, col_fwd, ..
        } = &self.plan
        else {
            return Err(Error::Unsupported(format!(
                "{} is a real transform",
                self.kind
            )));
        };
        let mut buf: Vec<Complex64> = image
            .as_slice()
            .iter()
            .map(|&v| Complex64::new(v, 0.0))
            .collect();
        self.fft2(&mut buf, row_fwd.as_ref(), col_fwd.as_ref());
        Ok(buf)
    }

    /// Inverse unitary 2-D DFT, returning the full complex image.
    pub fn complex_inverse(&self, mut coeffs: Vec<Complex64>) -> Result<Vec<Complex64>> {
        let Plan::Fft {
            row_inv, col_inv, ..
        } = &self.plan
        else {
            return Err(Error::Unsupported(format!(
                "{} is a real transform",
                self.kind
            )));
        };
        if coeffs.len() != self.rows * self.cols {
            return Err(Error::shape(self.rows * self.cols, coeffs.len()));
        }
        self.fft2(&mut coeffs, row_inv.as_ref(), col_inv.as_ref());
        Ok(coeffs)
    }

    fn fft2(&self, buf: &mut [Complex64], row: &dyn Fft<f64>, col: &dyn Fft<f64>) {
        row.process(buf);
        let mut t = transpose(buf, self.rows, self.cols);
        col.process(&mut t);
        let back = transpose(&t, self.cols, self.rows);
        let s = 1.0 / ((self.rows * self.cols) as f64).sqrt();
        buf.iter_mut().zip(back).for_each(|(d, v)| *d = v * s);
    }
}

/// Orthonormal DCT-II (or its inverse, DCT-III) on each contiguous row of length `len`.
fn dct_rows(plan: &dyn TransformType2And3<f64>, data: &mut [f64], len: usize, inverse: bool) {
    let mut scratch = vec![0.0; plan.get_scratch_len()];
    let s0 = (1.0 / len as f64).sqrt();
    let sk = (2.0 / len as f64).sqrt();
    for row in data.chunks_mut(len) {
        if inverse {
            // x_n = c_0 s0 + sum_k c_k sk cos(...); rustdct's DCT-III computes in_0/2 + sum_k in_k cos(...)
            row[0] *= 2.0 * s0;
            row[1..].iter_mut().for_each(|v| *v *= sk);
            plan.process_dct3_with_scratch(row, &mut scratch);
        } else {
            plan.process_dct2_with_scratch(row, &mut scratch);
            row[0] *= s0;
            row[1..].iter_mut().for_each(|v| *v *= sk);
        }
    }
}

fn transpose<T: Copy + Default>(data: &[T], rows: usize, cols: usize) -> Vec<T> {
    let mut out = vec![T::default(); data.len()];
    const B: usize = 32;
    for ib in (0..rows).step_by(B) {
        for jb in (0..cols).step_by(B) {
            for i in ib..(ib + B).min(rows) {
                for j in jb..(jb + B).min(cols) {
                    out[j * rows + i] = data[i * cols + j];
                }
            }
        }
    }
    out
}

/// Applies an orthonormal transform to an image. `Fft2` is complex-valued and handled by
/// [`Transform2d::complex_forward`]; requesting it here is an error.
pub fn orthonormal_transform(
    kind: TransformKind,
    image: &DenseMatrix,
    inverse: bool,
) -> Result<DenseMatrix> {
    Transform2d::new(kind, image.rows(), image.cols())?.real(image, inverse)
}
