use std::cell::Cell;

use super::{dot, DenseMatrix, Tridiagonal};
use crate::{Error, Result};

thread_local! {
    static CALLS: Cell<usize> = const { Cell::new(0) };
}

/// Number of Hessenberg decompositions performed on the current thread.
///
/// Used to check that the regularized trainer factors the Gram matrix once per
/// training call, however many lambda candidates it evaluates.
pub fn hessenberg_call_count() -> usize {
    CALLS.with(Cell::get)
}

/// `A = Q U Qᵀ` with `Q` orthogonal and `U` upper Hessenberg.
#[derive(Clone, Debug)]
pub struct HessenbergFactors {
    pub q: DenseMatrix,
    pub u: DenseMatrix,
}

impl HessenbergFactors {
    /// Band of `U`; exact when the decomposed matrix was symmetric.
    pub fn tridiagonal(&self) -> Tridiagonal {
        Tridiagonal::from_band(&self.u)
    }

    /// `Q U Qᵀ`.
    pub fn reconstruct(&self) -> DenseMatrix {
        self.q
            .matmul(&self.u)
            .and_then(|qu| qu.matmul_t(&self.q))
            .expect("factors are square and conformant")
    }
}

/// Reduces a square matrix to upper Hessenberg form with `n - 2` Householder
/// similarity transformations.
///
/// Entries of `U` below the first subdiagonal are exact zeros. A symmetric
/// input yields a symmetric tridiagonal `U` up to rounding.
pub fn hessenberg_decompose(a: &DenseMatrix) -> Result<HessenbergFactors> {
    if !a.is_square() {
        return Err(Error::dim(
            "hessenberg decomposition",
            "a square matrix",
            format!("{}x{}", a.rows(), a.cols()),
        ));
    }
    if !a.is_finite() {
        return Err(Error::Validation("hessenberg input has non-finite entries".into()));
    }
    CALLS.with(|c| c.set(c.get() + 1));

    let n = a.rows();
    let mut u = a.clone();
    let mut q = DenseMatrix::identity(n);
    let mut v = vec![0.0; n];
    let mut w = vec![0.0; n];

    for k in 0..n.saturating_sub(2) {
        let len = n - k - 1;
        let v = &mut v[..len];
        for (i, vi) in v.iter_mut().enumerate() {
            *vi = u[(k + 1 + i, k)];
        }
        let alpha = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if alpha == 0.0 {
            continue;
        }
        let sign = if v[0] >= 0.0 { 1.0 } else { -1.0 };
        v[0] += sign * alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        let beta = 2.0 / vnorm2;

        // Left: rows k+1.. of U, columns k+1.. (column k is set explicitly).
        let w = &mut w[..n];
        w.iter_mut().for_each(|x| *x = 0.0);
        for (i, &vi) in v.iter().enumerate() {
            let row = u.row(k + 1 + i);
            for j in (k + 1)..n {
                w[j] += vi * row[j];
            }
        }
        for (i, &vi) in v.iter().enumerate() {
            let s = beta * vi;
            let row = u.row_mut(k + 1 + i);
            for j in (k + 1)..n {
                row[j] -= s * w[j];
            }
        }
        u[(k + 1, k)] = -sign * alpha;
        for i in (k + 2)..n {
            u[(i, k)] = 0.0;
        }

        // Right: all rows of U, and Q accumulates the same reflector.
        for m in [&mut u, &mut q] {
            for r in 0..n {
                let row = m.row_mut(r);
                let tail = &mut row[k + 1..];
                let d = dot(tail, v);
                if d == 0.0 {
                    continue;
                }
                let s = beta * d;
                for (x, &vi) in tail.iter_mut().zip(v.iter()) {
                    *x -= s * vi;
                }
            }
        }
    }
    Ok(HessenbergFactors { q, u })
}

/// Solves `(S + λI) X = b` where `f` decomposes the symmetric matrix `S`:
/// `X = Q · (U + λI)⁻¹ · Qᵀ b`, the tridiagonal system handled by Thomas.
pub fn shifted_hess_solve(f: &HessenbergFactors, lambda: f64, b: &DenseMatrix) -> Result<DenseMatrix> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::Validation(format!(
            "regularization parameter must be finite and >= 0, got {lambda}"
        )));
    }
    if b.rows() != f.q.rows() {
        return Err(Error::dim("shifted solve right-hand side", f.q.rows(), b.rows()));
    }
    let qtb = f.q.t_matmul(b)?;
    let z = f.tridiagonal().solve_shifted(lambda, &qtb)?;
    f.q.matmul(&z)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(a: &DenseMatrix, b: &DenseMatrix, tol: f64) {
        let diff = a.sub(b).unwrap().frobenius_norm();
        assert!(diff <= tol, "difference {diff:e} > {tol:e}\n{a:?}\n{b:?}");
    }

    #[test]
    fn two_by_two_is_untouched() {
        let a = DenseMatrix::from_rows(&[vec![4.0, 1.0], vec![1.0, 3.0]]).unwrap();
        let f = hessenberg_decompose(&a).unwrap();
        assert_eq!(f.q, DenseMatrix::identity(2));
        assert_eq!(f.u, a);
    }

    #[test]
    fn identity_is_invariant() {
        let f = hessenberg_decompose(&DenseMatrix::identity(3)).unwrap();
        assert_close(&f.u, &DenseMatrix::identity(3), 1e-15);
        assert_close(&f.q.t_matmul(&f.q).unwrap(), &DenseMatrix::identity(3), 1e-15);
    }

    #[test]
    fn symmetric_three_by_three() {
        let a = DenseMatrix::from_rows(&[
            vec![4.0, 1.0, 2.0],
            vec![1.0, 3.0, 0.0],
            vec![2.0, 0.0, 1.0],
        ])
        .unwrap();
        let f = hessenberg_decompose(&a).unwrap();
        assert_close(&f.reconstruct(), &a, 1e-10 * a.frobenius_norm());
        assert_eq!(f.u[(2, 0)], 0.0);
        assert!(f.u[(0, 2)].abs() <= 1e-10 * f.u.frobenius_norm());
        assert!((f.u[(1, 0)] - f.u[(0, 1)]).abs() < 1e-12);
        // First reflector maps (1, 2) to ∓√5.
        assert!((f.u[(1, 0)].abs() - 5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn general_matrix_reconstructs() {
        let a = DenseMatrix::from_fn(6, 6, |i, j| ((i * 7 + j * 3) % 5) as f64 - 1.5 + (i as f64) * 0.1);
        let f = hessenberg_decompose(&a).unwrap();
        assert_close(&f.reconstruct(), &a, 1e-12 * a.frobenius_norm());
        for i in 0..6 {
            for j in 0..6 {
                if i > j + 1 {
                    assert_eq!(f.u[(i, j)], 0.0);
                }
            }
        }
    }

    #[test]
    fn rejects_non_square() {
        let a = DenseMatrix::zeros(2, 3);
        assert!(matches!(hessenberg_decompose(&a), Err(Error::Dimension { .. })));
    }

    #[test]
    fn counter_increments_per_call() {
        let before = hessenberg_call_count();
        hessenberg_decompose(&DenseMatrix::identity(4)).unwrap();
        hessenberg_decompose(&DenseMatrix::identity(4)).unwrap();
        assert_eq!(hessenberg_call_count() - before, 2);
    }

    #[test]
    fn shifted_solve_examples() {
        let f = hessenberg_decompose(&DenseMatrix::identity(2)).unwrap();
        let b = DenseMatrix::column(&[2.0, 4.0]).unwrap();
        let x = shifted_hess_solve(&f, 1.0, &b).unwrap();
        assert_close(&x, &DenseMatrix::column(&[1.0, 2.0]).unwrap(), 1e-15);

        let s = DenseMatrix::diagonal(&[2.0, 2.0]);
        let f = hessenberg_decompose(&s).unwrap();
        let b = DenseMatrix::column(&[2.0, 2.0]).unwrap();
        let x = shifted_hess_solve(&f, 0.0, &b).unwrap();
        assert_close(&x, &DenseMatrix::column(&[1.0, 1.0]).unwrap(), 1e-15);
    }

    #[test]
    fn shifted_solve_singular_at_zero_shift() {
        let s = DenseMatrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        let f = hessenberg_decompose(&s).unwrap();
        let b = DenseMatrix::column(&[1.0, 0.0]).unwrap();
        assert!(matches!(shifted_hess_solve(&f, 0.0, &b), Err(Error::Singular(_))));
        assert!(shifted_hess_solve(&f, -1.0, &b).is_err());
    }
}
