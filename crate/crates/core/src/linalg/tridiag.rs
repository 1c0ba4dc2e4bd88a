use super::DenseMatrix;
use crate::{Error, Result};

/// Relative pivot threshold for the Thomas sweep: one unit roundoff.
const PIVOT_TOL: f64 = f64::EPSILON;

/// Band storage of a tridiagonal matrix: `sub[i] = T[i+1][i]`,
/// `sup[i] = T[i][i+1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Tridiagonal {
    pub sub: Vec<f64>,
    pub diag: Vec<f64>,
    pub sup: Vec<f64>,
}

impl Tridiagonal {
    /// Extracts the band of a (Hessenberg) matrix. Entries above the first
    /// superdiagonal are ignored; for a decomposed symmetric matrix they are
    /// rounding noise.
    pub fn from_band(u: &DenseMatrix) -> Self {
        let n = u.rows();
        Self {
            sub: (0..n.saturating_sub(1)).map(|i| u[(i + 1, i)]).collect(),
            diag: u.diag(),
            sup: (0..n.saturating_sub(1)).map(|i| u[(i, i + 1)]).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    fn band_max(&self, shift: f64) -> f64 {
        let d = self.diag.iter().map(|v| (v + shift).abs());
        let off = self.sub.iter().chain(&self.sup).map(|v| v.abs());
        d.chain(off).fold(0.0, f64::max)
    }

    /// Solves `(T + shift·I) X = rhs` for every column of `rhs` with the
    /// Thomas algorithm. Reports singularity when a pivot falls below
    /// `ε · max|band|`.
    pub fn solve_shifted(&self, shift: f64, rhs: &DenseMatrix) -> Result<DenseMatrix> {
        let n = self.len();
        if rhs.rows() != n {
            return Err(Error::dim("tridiagonal solve right-hand side", n, rhs.rows()));
        }
        if n == 0 {
            return Ok(rhs.clone());
        }
        let tol = PIVOT_TOL * self.band_max(shift);
        let c = rhs.cols();
        let mut x = rhs.clone();
        // c' coefficients of the forward sweep.
        let mut cp = vec![0.0; n];
        let mut pivot = self.diag[0] + shift;
        for i in 0..n {
            if i > 0 {
                pivot = self.diag[i] + shift - self.sub[i - 1] * cp[i - 1];
            }
            if !(pivot.abs() > tol) {
                return Err(Error::Singular(format!(
                    "shifted tridiagonal pivot {pivot:e} at row {i} is below {tol:e}; \
                     use a larger regularization parameter"
                )));
            }
            if i + 1 < n {
                cp[i] = self.sup[i] / pivot;
            }
            let inv = 1.0 / pivot;
            let (done, rest) = x.data_mut().split_at_mut(i * c);
            let row = &mut rest[..c];
            if i > 0 {
                let l = self.sub[i - 1];
                for (v, &prev) in row.iter_mut().zip(&done[(i - 1) * c..]) {
                    *v = (*v - l * prev) * inv;
                }
            } else {
                row.iter_mut().for_each(|v| *v *= inv);
            }
        }
        for i in (0..n - 1).rev() {
            let (head, tail) = x.data_mut().split_at_mut((i + 1) * c);
            let f = cp[i];
            for (v, &next) in head[i * c..].iter_mut().zip(&tail[..c]) {
                *v -= f * next;
            }
        }
        Ok(x)
    }

    /// `T · X`.
    pub fn mul(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        let n = self.len();
        if x.rows() != n {
            return Err(Error::dim("tridiagonal product", n, x.rows()));
        }
        Ok(DenseMatrix::from_fn(n, x.cols(), |i, j| {
            let mut v = self.diag[i] * x[(i, j)];
            if i > 0 {
                v += self.sub[i - 1] * x[(i - 1, j)];
            }
            if i + 1 < n {
                v += self.sup[i] * x[(i + 1, j)];
            }
            v
        }))
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let n = self.len();
        let mut m = DenseMatrix::diagonal(&self.diag);
        for i in 0..n.saturating_sub(1) {
            m[(i + 1, i)] = self.sub[i];
            m[(i, i + 1)] = self.sup[i];
        }
        m
    }
}
