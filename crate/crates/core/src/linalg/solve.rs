use super::{dot, DenseMatrix};
use crate::{Error, Result};

const PIVOT_TOL: f64 = f64::EPSILON;
const RANK_TOL: f64 = 1e-14;

/// Solves `A X = B` for symmetric positive definite `A` by Cholesky
/// elimination. A pivot at or below `ε · max diag(A)` is reported as
/// singular.
pub fn cholesky_solve(a: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix> {
    let n = a.rows();
    if !a.is_square() {
        return Err(Error::dim(
            "cholesky solve",
            "a square matrix",
            format!("{}x{}", a.rows(), a.cols()),
        ));
    }
    if b.rows() != n {
        return Err(Error::dim("cholesky right-hand side", n, b.rows()));
    }
    let scale = a.diag().into_iter().fold(0.0, f64::max);
    let tol = PIVOT_TOL * scale;

    // Lower factor, row-major.
    let mut l = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let s = a[(i, j)] - dot(&l.row(i)[..j], &l.row(j)[..j]);
            if i == j {
                if !(s > tol) {
                    return Err(Error::Singular(format!(
                        "pivot {s:e} at row {i} is below {tol:e}; the system is numerically singular"
                    )));
                }
                l[(i, i)] = s.sqrt();
            } else {
                l[(i, j)] = s / l[(j, j)];
            }
        }
    }

    let c = b.cols();
    let mut x = b.clone();
    for i in 0..n {
        for k in 0..i {
            let lik = l[(i, k)];
            if lik == 0.0 {
                continue;
            }
            for j in 0..c {
                let v = x[(k, j)];
                x[(i, j)] -= lik * v;
            }
        }
        let d = l[(i, i)];
        x.row_mut(i).iter_mut().for_each(|v| *v /= d);
    }
    for i in (0..n).rev() {
        for k in (i + 1)..n {
            let lki = l[(k, i)];
            if lki == 0.0 {
                continue;
            }
            for j in 0..c {
                let v = x[(k, j)];
                x[(i, j)] -= lki * v;
            }
        }
        let d = l[(i, i)];
        x.row_mut(i).iter_mut().for_each(|v| *v /= d);
    }
    Ok(x)
}

/// Regularized least-squares output weights computed from scratch:
///
/// * `L <= N`: `W = (HᵀH + λI)⁻¹ Hᵀ T`
/// * `L >  N`: `W = Hᵀ (HHᵀ + λI)⁻¹ T` (minimum-norm form)
///
/// where `H` is `N × L`. No factorization is reused between calls.
pub fn ridge_solve_direct(h: &DenseMatrix, t: &DenseMatrix, lambda: f64) -> Result<DenseMatrix> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::Validation(format!(
            "regularization parameter must be finite and >= 0, got {lambda}"
        )));
    }
    if h.rows() != t.rows() {
        return Err(Error::dim("ridge targets", h.rows(), t.rows()));
    }
    let (n, l) = h.shape();
    if l <= n {
        let a = h.gram_cols().shifted(lambda);
        let rhs = h.t_matmul(t)?;
        cholesky_solve(&a, &rhs)
    } else {
        let a = h.gram_rows().shifted(lambda);
        let z = cholesky_solve(&a, t)?;
        h.t_matmul(&z)
    }
}

/// Least-squares solution of a tall system `A x ≈ b` (`rows >= cols`) by
/// Householder QR. Rank-deficient columns get a zero coefficient.
pub fn least_squares(a: &DenseMatrix, b: &[f64]) -> Result<Vec<f64>> {
    let (m, n) = a.shape();
    if b.len() != m {
        return Err(Error::dim("least-squares right-hand side", m, b.len()));
    }
    if m < n {
        return Err(Error::Validation(format!(
            "least squares needs at least as many rows as columns ({m} < {n})"
        )));
    }
    let mut r = a.clone();
    let mut rhs = b.to_vec();
    let scale = a.max_abs();
    for k in 0..n {
        let norm = (k..m).map(|i| r[(i, k)] * r[(i, k)]).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let alpha = if r[(k, k)] >= 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = (k..m).map(|i| r[(i, k)]).collect();
        v[0] -= alpha;
        let vv: f64 = v.iter().map(|x| x * x).sum();
        if vv == 0.0 {
            continue;
        }
        for j in k..n {
            let d: f64 = (k..m).zip(&v).map(|(i, vi)| vi * r[(i, j)]).sum();
            let s = 2.0 * d / vv;
            for (i, vi) in (k..m).zip(&v) {
                r[(i, j)] -= s * vi;
            }
        }
        let d: f64 = (k..m).zip(&v).map(|(i, vi)| vi * rhs[i]).sum();
        let s = 2.0 * d / vv;
        for (i, vi) in (k..m).zip(&v) {
            rhs[i] -= s * vi;
        }
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let d = r[(k, k)];
        if d.abs() <= RANK_TOL * scale.max(f64::MIN_POSITIVE) {
            continue;
        }
        let s: f64 = ((k + 1)..n).map(|j| r[(k, j)] * x[j]).sum();
        x[k] = (rhs[k] - s) / d;
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_design() {
        let h = DenseMatrix::identity(2);
        let t = DenseMatrix::column(&[1.0, 2.0]).unwrap();
        assert_eq!(ridge_solve_direct(&h, &t, 0.0).unwrap().data(), &[1.0, 2.0]);
        let w = ridge_solve_direct(&h, &t, 1.0).unwrap();
        assert!((w[(0, 0)] - 0.5).abs() < 1e-15 && (w[(1, 0)] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn singular_without_regularization() {
        let h = DenseMatrix::from_rows(&[vec![1.0, 1.0], vec![2.0, 2.0], vec![3.0, 3.0]]).unwrap();
        let t = DenseMatrix::column(&[1.0, 2.0, 3.0]).unwrap();
        assert!(matches!(ridge_solve_direct(&h, &t, 0.0), Err(Error::Singular(_))));
        assert!(ridge_solve_direct(&h, &t, 1e-3).is_ok());
    }

    #[test]
    fn wide_design_uses_min_norm_form() {
        // One sample, two hidden units: W = hᵀ (h hᵀ + λ)⁻¹ t
        let h = DenseMatrix::from_rows(&[vec![1.0, 2.0]]).unwrap();
        let t = DenseMatrix::column(&[5.0]).unwrap();
        let w = ridge_solve_direct(&h, &t, 0.0).unwrap();
        assert_eq!(w.shape(), (2, 1));
        assert!((w[(0, 0)] - 1.0).abs() < 1e-14);
        assert!((w[(1, 0)] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn least_squares_line_fit() {
        let a = DenseMatrix::from_rows(&[vec![1.0, 0.0], vec![1.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let x = least_squares(&a, &[1.0, 3.0, 5.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-13 && (x[1] - 2.0).abs() < 1e-13);
    }
}
