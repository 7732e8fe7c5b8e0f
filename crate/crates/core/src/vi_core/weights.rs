use crate::error::{Error, Result};
use crate::numkit::{sym_eigen, DenseMatrix};
use crate::vi_core::WeightOperator;

/// Explicit symmetric weighting matrix.
#[derive(Debug, Clone)]
pub struct DenseWeight {
    m: DenseMatrix,
}

impl DenseWeight {
    pub fn new(m: DenseMatrix) -> Result<Self> {
        if m.rows() != m.cols() {
            return Err(Error::invalid("weight matrix must be square"));
        }
        if m.max_abs_diff(&m.transpose()) > 1e-12 * m.frobenius_norm().max(1.0) {
            return Err(Error::invalid("weight matrix must be symmetric"));
        }
        Ok(Self { m })
    }

    /// Symmetric part `(M + Mᵀ)/2` of any square matrix.
    pub fn symmetric_part(m: &DenseMatrix) -> Result<Self> {
        let mut s = m + &m.transpose();
        s.scale_mut(0.5);
        Self::new(s)
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.m
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(sym_eigen(&self.m)?.0.first().copied().unwrap_or(0.0))
    }
}

impl WeightOperator for DenseWeight {
    fn dim(&self) -> usize {
        self.m.rows()
    }

    fn apply(&self, v: &[f64]) -> Vec<f64> {
        self.m.matvec(v).expect("weight dimension mismatch")
    }

    fn materialize(&self) -> DenseMatrix {
        self.m.clone()
    }
}

/// `G = s·I`
#[derive(Debug, Clone, Copy)]
pub struct ScaledIdentity {
    pub dim: usize,
    pub scale: f64,
}

impl ScaledIdentity {
    pub fn identity(dim: usize) -> Self {
        Self { dim, scale: 1.0 }
    }
}

impl WeightOperator for ScaledIdentity {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, v: &[f64]) -> Vec<f64> {
        v.iter().map(|x| self.scale * x).collect()
    }

    fn quad(&self, v: &[f64]) -> f64 {
        self.scale * crate::numkit::vecops::norm_sq(v)
    }

    fn declared_psd(&self) -> bool {
        self.scale >= 0.0
    }

    fn scalar_identity(&self) -> Option<f64> {
        Some(self.scale)
    }
}
