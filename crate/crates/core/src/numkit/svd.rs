//! One-sided (Hestenes) Jacobi singular value decomposition.
//!
//! The columns of a working copy of `M` are orthogonalized by plane rotations
//! that are accumulated into `V`. On convergence the column norms are the
//! singular values and the normalized columns form `U`.

use crate::error::{Error, Result};
use crate::numkit::matrix::DenseMatrix;
use crate::numkit::vecops;

pub const MAX_SWEEPS: usize = 60;

/// Thin SVD `M = U · diag(s) · Vᵀ` with `k = min(rows, cols)` singular triplets.
#[derive(Debug, Clone)]
pub struct Svd {
    /// rows × k, orthonormal columns
    pub u: DenseMatrix,
    /// nonincreasing, nonnegative
    pub s: Vec<f64>,
    /// cols × k, orthonormal columns
    pub v: DenseMatrix,
    pub sweeps: usize,
}

impl Svd {
    pub fn reconstruct(&self) -> DenseMatrix {
        self.u
            .scale_cols(&self.s)
            .matmul(&self.v.transpose())
            .expect("svd factors are conformant")
    }
}

pub fn svd(m: &DenseMatrix) -> Result<Svd> {
    svd_with_basis(m, None)
}

/// SVD with an optional orthogonal starting guess for the right singular basis.
///
/// When `m` is close to a matrix whose right singular vectors are the columns of
/// `basis`, the rotations start from `m · basis` and converge in a few sweeps.
/// The guess is ignored unless it is `cols × cols` and `rows >= cols`.
pub fn svd_with_basis(m: &DenseMatrix, basis: Option<&DenseMatrix>) -> Result<Svd> {
    if !m.is_finite() {
        return Err(Error::NonFinite("svd input"));
    }
    if m.rows() < m.cols() {
        let t = svd_tall(&m.transpose(), None)?;
        return Ok(Svd {
            u: t.v,
            s: t.s,
            v: t.u,
            sweeps: t.sweeps,
        });
    }
    let basis = basis.filter(|b| b.rows() == m.cols() && b.cols() == m.cols());
    if basis.is_none() && m.cols() >= QR_PRECONDITION_MIN {
        return svd_qr_preconditioned(m);
    }
    svd_tall(m, basis)
}

/// Below this many columns the plain rotation sweep is already fast.
const QR_PRECONDITION_MIN: usize = 32;

/// Jacobi on `Rᵀ` where `M P = Q R` is a column-pivoted Householder QR.
///
/// The rows of `R` are graded by the pivoting, which makes the one-sided sweeps
/// on `Rᵀ` converge in markedly fewer sweeps than on `M` itself.
/// With `Rᵀ = X Σ Yᵀ` we get `M = (Q Y) Σ (P X)ᵀ`.
fn svd_qr_preconditioned(m: &DenseMatrix) -> Result<Svd> {
    let (rows, cols) = m.shape();
    let qr = PivotedQr::new(m);
    let mut rt = DenseMatrix::zeros(cols, cols);
    for i in 0..cols {
        for j in i..cols {
            rt[(j, i)] = qr.r(i, j);
        }
    }
    let inner = svd_tall(&rt, None)?;

    // U = Q [Y; 0]
    let mut u_cm = vec![0.0; rows * cols];
    let y_cm = inner.v.to_col_major();
    for j in 0..cols {
        u_cm[j * rows..j * rows + cols].copy_from_slice(&y_cm[j * cols..(j + 1) * cols]);
    }
    for col in u_cm.chunks_mut(rows) {
        qr.apply_q(col);
    }
    let mut v = DenseMatrix::zeros(cols, cols);
    for (i, &pi) in qr.perm.iter().enumerate() {
        for j in 0..cols {
            v[(pi, j)] = inner.u[(i, j)];
        }
    }
    Ok(Svd {
        u: DenseMatrix::from_col_major(rows, cols, &u_cm),
        s: inner.s,
        v,
        sweeps: inner.sweeps,
    })
}

/// Householder QR with column pivoting, column-major.
struct PivotedQr {
    rows: usize,
    /// strictly-upper part holds R; on and below the diagonal sit the reflector vectors
    a: Vec<f64>,
    r_diag: Vec<f64>,
    betas: Vec<f64>,
    /// `perm[k]` is the original index of the k-th pivoted column
    perm: Vec<usize>,
}

impl PivotedQr {
    fn new(m: &DenseMatrix) -> Self {
        let (rows, cols) = m.shape();
        let mut a = m.to_col_major();
        let mut perm: Vec<usize> = (0..cols).collect();
        let mut betas = vec![0.0; cols];
        let mut r_diag = vec![0.0; cols];
        for k in 0..cols.min(rows) {
            let piv = (k..cols)
                .map(|j| (j, vecops::norm_sq(&a[j * rows + k..(j + 1) * rows])))
                .max_by(|x, y| x.1.total_cmp(&y.1))
                .map_or(k, |(j, _)| j);
            if piv != k {
                for i in 0..rows {
                    a.swap(k * rows + i, piv * rows + i);
                }
                perm.swap(k, piv);
            }
            let (head, tail) = a.split_at_mut((k + 1) * rows);
            let x = &mut head[k * rows + k..];
            let alpha = vecops::norm(x);
            if alpha == 0.0 {
                continue;
            }
            let r_kk = if x[0] > 0.0 { -alpha } else { alpha };
            x[0] -= r_kk;
            let beta = 2.0 / vecops::norm_sq(x);
            betas[k] = beta;
            r_diag[k] = r_kk;
            for col in tail.chunks_mut(rows) {
                let seg = &mut col[k..];
                let d = beta * vecops::dot(x, seg);
                vecops::axpy(-d, x, seg);
            }
        }
        Self {
            rows,
            a,
            r_diag,
            betas,
            perm,
        }
    }

    /// Entry `(i, j)` of R for `i <= j`.
    fn r(&self, i: usize, j: usize) -> f64 {
        if i == j {
            self.r_diag[i]
        } else {
            self.a[j * self.rows + i]
        }
    }

    /// `y <- Q y` with `Q = H_0 H_1 ... H_{k-1}`.
    fn apply_q(&self, y: &mut [f64]) {
        let rows = self.rows;
        for k in (0..self.betas.len()).rev() {
            let beta = self.betas[k];
            if beta == 0.0 {
                continue;
            }
            let v = &self.a[k * rows + k..(k + 1) * rows];
            let seg = &mut y[k..];
            let d = beta * vecops::dot(v, seg);
            vecops::axpy(-d, v, seg);
        }
    }
}

fn svd_tall(m: &DenseMatrix, basis: Option<&DenseMatrix>) -> Result<Svd> {
    let (rows, cols) = m.shape();
    debug_assert!(rows >= cols);
    if cols == 0 {
        return Ok(Svd {
            u: DenseMatrix::zeros(rows, 0),
            s: Vec::new(),
            v: DenseMatrix::zeros(0, 0),
            sweeps: 0,
        });
    }

    let (mut w, mut v) = match basis {
        Some(b) => (m.matmul(b)?.to_col_major(), b.to_col_major()),
        None => (m.to_col_major(), DenseMatrix::identity(cols).to_col_major()),
    };
    let fro = m.frobenius_norm();
    let tol = f64::EPSILON * (rows as f64).sqrt();

    let mut sweeps = 0;
    let mut converged = false;
    let mut off_mass = 0.0;
    while sweeps < MAX_SWEEPS {
        sweeps += 1;
        // refreshed every sweep; rotations update them in closed form in between
        let mut norms: Vec<f64> = w.chunks(rows).map(vecops::norm_sq).collect();
        let mut rotated = false;
        off_mass = 0.0;
        for p in 0..cols - 1 {
            for q in p + 1..cols {
                let (head, tail) = w.split_at_mut(q * rows);
                let wp = &mut head[p * rows..(p + 1) * rows];
                let wq = &mut tail[..rows];
                let g = vecops::dot(wp, wq);
                let (a, b) = (norms[p], norms[q]);
                if g == 0.0 || g.abs() <= tol * (a * b).sqrt() {
                    continue;
                }
                off_mass += g * g;
                rotated = true;

                let zeta = (b - a) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(wp, wq, c, s);
                norms[p] = a - t * g;
                norms[q] = b + t * g;

                let (vh, vt) = v.split_at_mut(q * cols);
                rotate(&mut vh[p * cols..(p + 1) * cols], &mut vt[..cols], c, s);
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::SvdNoConvergence {
            sweeps,
            frobenius: fro,
            off_diagonal: off_mass.sqrt(),
        });
    }

    let sigma: Vec<f64> = w.chunks(rows).map(vecops::norm).collect();
    let mut order: Vec<usize> = (0..cols).collect();
    order.sort_by(|&i, &j| sigma[j].total_cmp(&sigma[i]));

    let s_max = sigma[order[0]];
    let rank_tol = s_max * (rows as f64) * f64::EPSILON;
    let mut u_cols: Vec<Vec<f64>> = Vec::with_capacity(cols);
    let mut missing = Vec::new();
    for (slot, &j) in order.iter().enumerate() {
        let col = &w[j * rows..(j + 1) * rows];
        if sigma[j] > rank_tol && sigma[j] > 0.0 {
            u_cols.push(vecops::scale(1.0 / sigma[j], col));
        } else {
            u_cols.push(Vec::new());
            missing.push(slot);
        }
    }
    complete_orthonormal(&mut u_cols, &missing, rows);

    let mut u_cm = Vec::with_capacity(rows * cols);
    u_cols.iter().for_each(|c| u_cm.extend_from_slice(c));
    let mut v_cm = Vec::with_capacity(cols * cols);
    for &j in &order {
        v_cm.extend_from_slice(&v[j * cols..(j + 1) * cols]);
    }

    Ok(Svd {
        u: DenseMatrix::from_col_major(rows, cols, &u_cm),
        s: order.iter().map(|&j| sigma[j]).collect(),
        v: DenseMatrix::from_col_major(cols, cols, &v_cm),
        sweeps,
    })
}

#[inline]
fn rotate(x: &mut [f64], y: &mut [f64], c: f64, s: f64) {
    for (xi, yi) in x.iter_mut().zip(y.iter_mut()) {
        let (a, b) = (*xi, *yi);
        *xi = c * a - s * b;
        *yi = s * a + c * b;
    }
}

/// Fills the empty slots listed in `missing` with unit vectors orthogonal to every other column.
///
/// Each slot takes the canonical vector with the largest component outside the current span;
/// that component has squared norm at least `(len − filled)/len`, so the completion never stalls.
fn complete_orthonormal(cols: &mut [Vec<f64>], missing: &[usize], len: usize) {
    if missing.is_empty() {
        return;
    }
    // outside[i] = ‖P⊥eᵢ‖² = 1 − Σ_c cᵢ²
    let mut outside = vec![1.0; len];
    for c in cols.iter().filter(|c| !c.is_empty()) {
        outside.iter_mut().zip(c).for_each(|(o, ci)| *o -= ci * ci);
    }
    for &slot in missing {
        let best = (0..len)
            .max_by(|&i, &j| outside[i].total_cmp(&outside[j]))
            .expect("len > 0");
        let mut e = vec![0.0; len];
        e[best] = 1.0;
        // two passes of Gram-Schmidt
        for _ in 0..2 {
            for c in cols.iter().filter(|c| !c.is_empty()) {
                let d = vecops::dot(c, &e);
                vecops::axpy(-d, c, &mut e);
            }
        }
        let nrm = vecops::norm(&e);
        assert!(nrm > 0.0, "cannot complete orthonormal basis");
        let col = vecops::scale(1.0 / nrm, &e);
        outside
            .iter_mut()
            .zip(&col)
            .for_each(|(o, ci)| *o -= ci * ci);
        cols[slot] = col;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::rng::SeededRng;

    fn orthonormality_error(q: &DenseMatrix) -> f64 {
        let qtq = q.t_matmul(q).unwrap();
        qtq.max_abs_diff(&DenseMatrix::identity(q.cols()))
    }

    #[test]
    fn diagonal_matrix_is_its_own_decomposition() {
        let m = DenseMatrix::from_diag(&[3.0, 1.0]);
        let d = svd(&m).unwrap();
        assert_eq!(d.s, vec![3.0, 1.0]);
        assert_eq!(d.u, DenseMatrix::identity(2));
        assert_eq!(d.v, DenseMatrix::identity(2));
    }

    #[test]
    fn zero_matrix_has_zero_spectrum_and_orthonormal_factors() {
        let d = svd(&DenseMatrix::zeros(4, 3)).unwrap();
        assert_eq!(d.s, vec![0.0, 0.0, 0.0]);
        assert!(orthonormality_error(&d.u) < 1e-14);
        assert!(orthonormality_error(&d.v) < 1e-14);
    }

    #[test]
    fn random_tall_and_wide_matrices_reconstruct() {
        let mut rng = SeededRng::new(11);
        for (r, c) in [(8, 5), (5, 8), (1, 4), (6, 6)] {
            let m = rng.normal_matrix(r, c);
            let d = svd(&m).unwrap();
            let resid = (&d.reconstruct() - &m).frobenius_norm();
            assert!(
                resid <= 1e-10 * m.frobenius_norm().max(1.0),
                "{r}x{c}: {resid}"
            );
            assert!(orthonormality_error(&d.u) < 1e-10);
            assert!(orthonormality_error(&d.v) < 1e-10);
            assert!(d.s.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn rank_deficient_matrix_gets_completed_left_basis() {
        let mut rng = SeededRng::new(3);
        let a = rng.normal_matrix(7, 2);
        let b = rng.normal_matrix(2, 5);
        let m = a.matmul(&b).unwrap();
        let d = svd(&m).unwrap();
        assert!(d.s[2] < 1e-12 * d.s[0]);
        assert!(orthonormality_error(&d.u) < 1e-10);
        assert!((&d.reconstruct() - &m).frobenius_norm() < 1e-10 * m.frobenius_norm());
    }

    #[test]
    fn low_rank_square_matrices_complete_both_bases() {
        let mut rng = SeededRng::new(4);
        for n in [64, 128] {
            let m = rng
                .normal_matrix(n, 5)
                .matmul(&rng.normal_matrix(5, n))
                .unwrap();
            for d in [
                svd(&m).unwrap(),
                svd_with_basis(&m, Some(&DenseMatrix::identity(n))).unwrap(),
            ] {
                assert!(d.s[5] < 1e-10 * d.s[0]);
                assert!(orthonormality_error(&d.u) < 1e-10);
                assert!(orthonormality_error(&d.v) < 1e-10);
                assert!((&d.reconstruct() - &m).frobenius_norm() < 1e-10 * m.frobenius_norm());
            }
        }
        let z = svd(&DenseMatrix::zeros(40, 40)).unwrap();
        assert!(orthonormality_error(&z.u) < 1e-12);
    }

    #[test]
    fn warm_start_gives_same_spectrum() {
        let mut rng = SeededRng::new(5);
        let m = rng.normal_matrix(12, 9);
        let cold = svd(&m).unwrap();
        let mut perturbed = m.clone();
        perturbed[(0, 0)] += 1e-3;
        let warm = svd_with_basis(&perturbed, Some(&cold.v)).unwrap();
        let reference = svd(&perturbed).unwrap();
        for (a, b) in warm.s.iter().zip(&reference.s) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(
            (&warm.reconstruct() - &perturbed).frobenius_norm()
                < 1e-10 * perturbed.frobenius_norm()
        );
        assert!(warm.sweeps <= reference.sweeps);
    }

    #[test]
    fn preconditioned_path_matches_plain_sweeps() {
        let mut rng = SeededRng::new(21);
        for (r, c) in [(40, 40), (50, 36), (36, 50)] {
            let m = rng.normal_matrix(r, c);
            let d = svd(&m).unwrap();
            let plain = svd_tall(&if r >= c { m.clone() } else { m.transpose() }, None).unwrap();
            for (a, b) in d.s.iter().zip(&plain.s) {
                assert!((a - b).abs() < 1e-12 * d.s[0]);
            }
            assert!((&d.reconstruct() - &m).frobenius_norm() <= 1e-10 * m.frobenius_norm());
            assert!(orthonormality_error(&d.u) < 1e-10);
            assert!(orthonormality_error(&d.v) < 1e-10);
        }
        let low = rng
            .normal_matrix(40, 3)
            .matmul(&rng.normal_matrix(3, 40))
            .unwrap();
        let d = svd(&low).unwrap();
        assert!(d.s[3] < 1e-12 * d.s[0]);
        assert!(orthonormality_error(&d.u) < 1e-10);
        assert!((&d.reconstruct() - &low).frobenius_norm() <= 1e-10 * low.frobenius_norm());
    }

    #[test]
    fn non_finite_input_is_rejected() {
        let mut m = DenseMatrix::zeros(2, 2);
        m[(0, 1)] = f64::INFINITY;
        assert!(matches!(svd(&m), Err(Error::NonFinite(_))));
    }
}
