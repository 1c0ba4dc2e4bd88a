use super::DenseMatrix;
use crate::{Error, Result};

pub const MAX_SWEEPS: usize = 100;
const OFF_TOL: f64 = 1e-12;

/// Eigenpairs of a symmetric positive semidefinite matrix: `S = V diag(λ) Vᵀ`
/// with eigenvalues sorted in descending order and clamped at zero.
#[derive(Clone, Debug)]
pub struct EigenFactors {
    pub vectors: DenseMatrix,
    pub values: Vec<f64>,
}

impl EigenFactors {
    pub fn reconstruct(&self) -> DenseMatrix {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for i in 0..n {
            for (v, &l) in scaled.row_mut(i).iter_mut().zip(&self.values) {
                *v *= l;
            }
        }
        scaled.matmul_t(&self.vectors).expect("square factors")
    }
}

/// Cyclic Jacobi eigendecomposition of a symmetric Gram matrix.
///
/// The input is symmetrized first. Sweeps continue until every off-diagonal
/// entry is at rounding level relative to its two diagonal entries. After
/// `MAX_SWEEPS` sweeps the result is still accepted if every off-diagonal
/// magnitude is below `1e-12 · ‖S‖_F`; otherwise it is a convergence error.
pub fn gram_eigendecompose(s: &DenseMatrix) -> Result<EigenFactors> {
    if !s.is_square() {
        return Err(Error::dim(
            "eigendecomposition",
            "a square matrix",
            format!("{}x{}", s.rows(), s.cols()),
        ));
    }
    if !s.is_finite() {
        return Err(Error::Validation("eigendecomposition input has non-finite entries".into()));
    }
    let n = s.rows();
    let mut a = s.symmetrized();
    let mut v = DenseMatrix::identity(n);
    let norm = a.frobenius_norm();
    let floor = f64::EPSILON * f64::EPSILON * norm;
    // An entry is negligible once it is at rounding level relative to its two
    // diagonal entries; small eigenvalues then keep their relative accuracy.
    let negligible = |a: &DenseMatrix, p: usize, q: usize| {
        let apq = a[(p, q)].abs();
        apq <= floor || apq <= f64::EPSILON * (a[(p, p)] * a[(q, q)]).abs().sqrt()
    };

    let mut sweeps = 0;
    loop {
        let mut converged = true;
        'scan: for p in 0..n {
            for q in (p + 1)..n {
                if !negligible(&a, p, q) {
                    converged = false;
                    break 'scan;
                }
            }
        }
        if converged {
            break;
        }
        if sweeps == MAX_SWEEPS {
            let mut off = 0.0f64;
            for p in 0..n {
                for q in (p + 1)..n {
                    off = off.max(a[(p, q)].abs());
                }
            }
            if off < OFF_TOL * norm {
                break;
            }
            return Err(Error::Convergence {
                sweeps,
                off_diagonal: off,
            });
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                if !negligible(&a, p, q) {
                    rotate(&mut a, &mut v, p, q);
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let raw = a.diag();
    order.sort_by(|&i, &j| raw[j].total_cmp(&raw[i]));
    let values = order.iter().map(|&i| raw[i].max(0.0)).collect();
    let vectors = DenseMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok(EigenFactors { vectors, values })
}

/// Applies the rotation that zeroes `a[p][q]`.
fn rotate(a: &mut DenseMatrix, v: &mut DenseMatrix, p: usize, q: usize) {
    let n = a.rows();
    let apq = a[(p, q)];
    let app = a[(p, p)];
    let aqq = a[(q, q)];
    let theta = (aqq - app) / (2.0 * apq);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    for k in 0..n {
        if k == p || k == q {
            continue;
        }
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        let new_kp = c * akp - s * akq;
        let new_kq = s * akp + c * akq;
        a[(k, p)] = new_kp;
        a[(p, k)] = new_kp;
        a[(k, q)] = new_kq;
        a[(q, k)] = new_kq;
    }
    a[(p, p)] = app - t * apq;
    a[(q, q)] = aqq + t * apq;
    a[(p, q)] = 0.0;
    a[(q, p)] = 0.0;

    for k in 0..n {
        let row = v.row_mut(k);
        let vkp = row[p];
        let vkq = row[q];
        row[p] = c * vkp - s * vkq;
        row[q] = s * vkp + c * vkq;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_input() {
        let e = gram_eigendecompose(&DenseMatrix::diagonal(&[1.0, 3.0])).unwrap();
        assert_eq!(e.values, vec![3.0, 1.0]);
        assert_eq!(e.vectors.data(), &[0.0, 1.0, 1.0, 0.0]);
    }

    #[test]
    fn two_by_two_hand_computed() {
        // det([[2-x,1],[1,2-x]]) = (x-3)(x-1)
        let s = DenseMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let e = gram_eigendecompose(&s).unwrap();
        assert!((e.values[0] - 3.0).abs() < 1e-14);
        assert!((e.values[1] - 1.0).abs() < 1e-14);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let v0 = e.vectors.col_to_vec(0);
        let v1 = e.vectors.col_to_vec(1);
        let sign0 = v0[0].signum();
        let sign1 = v1[0].signum();
        assert!((v0[0] * sign0 - r).abs() < 1e-14 && (v0[1] * sign0 - r).abs() < 1e-14);
        assert!((v1[0] * sign1 - r).abs() < 1e-14 && (v1[1] * sign1 + r).abs() < 1e-14);
    }

    #[test]
    fn negative_rounding_is_clamped() {
        let s = DenseMatrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        let e = gram_eigendecompose(&s).unwrap();
        assert!((e.values[0] - 2.0).abs() < 1e-14);
        assert!(e.values[1] >= 0.0 && e.values[1] < 1e-14);
    }

    #[test]
    fn rejects_non_square() {
        assert!(gram_eigendecompose(&DenseMatrix::zeros(2, 3)).is_err());
    }
}
