use crate::error::{Error, Result};
use crate::numkit::matrix::DenseMatrix;
use crate::numkit::rng::SeededRng;
use crate::numkit::vecops;

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
pub fn solve(a: &DenseMatrix, b: &[f64]) -> Result<Vec<f64>> {
    let n = a.rows();
    if a.cols() != n {
        return Err(Error::shape("square matrix", format!("{}x{}", n, a.cols())));
    }
    if b.len() != n {
        return Err(Error::shape(n, b.len()));
    }
    let mut lu = a.as_slice().to_vec();
    let mut x = b.to_vec();
    let scale = a.as_slice().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for k in 0..n {
        let (piv, pmax) = (k..n)
            .map(|i| (i, lu[i * n + k].abs()))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        if pmax <= scale * f64::EPSILON * n as f64 || pmax == 0.0 {
            return Err(Error::Singular);
        }
        if piv != k {
            for j in 0..n {
                lu.swap(k * n + j, piv * n + j);
            }
            x.swap(k, piv);
        }
        let d = lu[k * n + k];
        for i in k + 1..n {
            let f = lu[i * n + k] / d;
            if f != 0.0 {
                for j in k..n {
                    lu[i * n + j] -= f * lu[k * n + j];
                }
                x[i] -= f * x[k];
            }
        }
    }
    for k in (0..n).rev() {
        let s: f64 = (k + 1..n).map(|j| lu[k * n + j] * x[j]).sum();
        x[k] = (x[k] - s) / lu[k * n + k];
    }
    Ok(x)
}

/// Eigenvalues (ascending) and eigenvectors (columns) of a symmetric matrix by cyclic Jacobi.
pub fn sym_eigen(a: &DenseMatrix) -> Result<(Vec<f64>, DenseMatrix)> {
    let n = a.rows();
    if a.cols() != n {
        return Err(Error::shape("square matrix", format!("{}x{}", n, a.cols())));
    }
    let mut m = a.clone();
    let mut v = DenseMatrix::identity(n);
    let fro = a.frobenius_norm();
    let mut converged = n <= 1;
    for _ in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[(i, j)] * m[(i, j)])
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * fro || off == 0.0 {
            converged = true;
            break;
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = m[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m[(k, p)], m[(k, q)]);
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (m[(p, k)], m[(q, k)]);
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    if !converged {
        return Err(Error::EigenNoConvergence(100));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].total_cmp(&m[(j, j)]));
    let vals = order.iter().map(|&i| m[(i, i)]).collect();
    let mut vecs = DenseMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        for k in 0..n {
            vecs[(k, dst)] = v[(k, src)];
        }
    }
    Ok((vals, vecs))
}

/// Largest eigenvalue of a symmetric PSD operator `x ↦ op(x)` on `R^n` by power iteration.
pub fn power_iteration(
    n: usize,
    op: impl Fn(&[f64]) -> Vec<f64>,
    iters: usize,
    rng: &mut SeededRng,
) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let mut x = rng.normal_vec(n);
    let nrm = vecops::norm(&x);
    x.iter_mut().for_each(|v| *v /= nrm);
    let mut lambda = 0.0;
    for _ in 0..iters {
        let y = op(&x);
        lambda = vecops::dot(&x, &y);
        let ny = vecops::norm(&y);
        if ny == 0.0 {
            return 0.0;
        }
        x = vecops::scale(1.0 / ny, &y);
    }
    lambda
}
