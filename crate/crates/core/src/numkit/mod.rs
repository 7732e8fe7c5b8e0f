//! Dense linear algebra, SVD, seeded randomness and partial orthonormal measurement operators.

pub mod linalg;
pub mod matrix;
pub mod measure;
pub mod rng;
pub mod svd;
pub mod transform;
pub mod vecops;

pub use linalg::{power_iteration, solve, sym_eigen};
pub use matrix::DenseMatrix;
pub use measure::MeasurementOp;
pub use rng::SeededRng;
pub use svd::{svd, svd_with_basis, Svd};
pub use transform::{fwht, orthonormal_transform, Transform2d, TransformKind};

use crate::error::Result;

/// Standard-normal matrix; deterministic for a given stream.
pub fn rng_normal(rng: &mut SeededRng, rows: usize, cols: usize) -> DenseMatrix {
    rng.normal_matrix(rows, cols)
}

/// `n` uniform draws from `[lo, hi)`.
pub fn rng_uniform(rng: &mut SeededRng, lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    rng.uniform_vec(lo, hi, n)
}

/// Random partial measurement operator with `q` sampled coefficients.
pub fn make_measurement_op(
    kind: TransformKind,
    image_rows: usize,
    image_cols: usize,
    q: usize,
    rng: &mut SeededRng,
) -> Result<MeasurementOp> {
    MeasurementOp::random(kind, image_rows, image_cols, q, rng)
}
