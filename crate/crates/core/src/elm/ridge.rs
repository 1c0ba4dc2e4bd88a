//! Ridge solutions and leave-one-out statistics from one factorization of the
//! hidden-layer Gram matrix, reused across regularization parameters.
//!
//! With `H` of shape `N × m` the Gram matrix is taken on the smaller side:
//!
//! * feature side, `HᵀH = Q C Qᵀ` (`m × m`, used when `m <= N`):
//!   `W = Q (C + λI)⁻¹ Qᵀ Hᵀ T` and `HAT = G (C + λI)⁻¹ Gᵀ` with `G = HQ`.
//! * sample side, `HHᵀ = Q C Qᵀ` (`N × N`):
//!   `W = Hᵀ Q (C + λI)⁻¹ Qᵀ T` and
//!   `HAT = Q C (C + λI)⁻¹ Qᵀ = I - λ Q (C + λI)⁻¹ Qᵀ`.
//!
//! `C` is tridiagonal for the Hessenberg path and diagonal for the
//! eigendecomposition path. Per lambda, every product is `O(N·m)` on the
//! feature side and `O(N²)` on the sample side.

use serde::{Deserialize, Serialize};

use crate::linalg::{gram_eigendecompose, hessenberg_decompose, DenseMatrix, Tridiagonal};
use crate::par::map_ordered;
use crate::{Error, Result};

/// Leverage at or above `1 - LEVERAGE_TOL` makes the LOO residual undefined.
pub const LEVERAGE_TOL: f64 = 1e-10;
const PIVOT_TOL: f64 = f64::EPSILON;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GramSide {
    /// `HᵀH`, hidden × hidden.
    Feature,
    /// `HHᵀ`, samples × samples.
    Sample,
}

impl GramSide {
    /// The smaller Gram matrix: feature side when `hidden <= samples`.
    pub fn auto(samples: usize, hidden: usize) -> Self {
        if hidden <= samples {
            GramSide::Feature
        } else {
            GramSide::Sample
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RidgePath {
    /// Jacobi eigendecomposition of the Gram matrix (the SVD route: the
    /// eigenvalues of `HᵀH` are the squared singular values of `H`).
    GramEigen,
    /// Householder Hessenberg decomposition of the Gram matrix.
    Hessenberg,
}

#[derive(Clone, Debug)]
enum Core {
    Diagonal(Vec<f64>),
    Tridiagonal(Tridiagonal),
}

impl Core {
    fn solve_shifted(&self, lambda: f64, rhs: &DenseMatrix) -> Result<DenseMatrix> {
        match self {
            Core::Tridiagonal(t) => t.solve_shifted(lambda, rhs),
            Core::Diagonal(d) => {
                let tol = PIVOT_TOL * d.iter().map(|v| (v + lambda).abs()).fold(0.0, f64::max);
                let mut out = rhs.clone();
                for (i, &di) in d.iter().enumerate() {
                    let p = di + lambda;
                    if !(p.abs() > tol) {
                        return Err(Error::Singular(format!(
                            "shifted eigenvalue {p:e} at index {i} is below {tol:e}; \
                             use a larger regularization parameter"
                        )));
                    }
                    out.row_mut(i).iter_mut().for_each(|v| *v /= p);
                }
                Ok(out)
            }
        }
    }
}

/// Ridge fit at one lambda together with its leverages.
#[derive(Clone, Debug)]
pub struct RidgeFit {
    pub lambda: f64,
    /// Output weights, `m × C`.
    pub weights: DenseMatrix,
    /// `t' - t`, `N × C`.
    pub residuals: DenseMatrix,
    /// Diagonal of the HAT matrix.
    pub hat_diagonal: Vec<f64>,
    /// `1 - HAT_jj`, computed without cancellation on the sample side.
    pub one_minus_hat: Vec<f64>,
}

impl RidgeFit {
    /// Mean squared PRESS residual: `(1/(N·C)) Σ_j ‖t'_j - t_j‖² / (1 - HAT_jj)²`.
    /// For a single output this is the scalar leave-one-out MSE.
    pub fn press(&self) -> Result<f64> {
        let (n, c) = self.residuals.shape();
        let mut sum = 0.0;
        for j in 0..n {
            let s = self.one_minus_hat[j];
            if s <= LEVERAGE_TOL {
                return Err(Error::DegenerateLeverage {
                    index: j,
                    leverage: self.hat_diagonal[j],
                });
            }
            let r2: f64 = self.residuals.row(j).iter().map(|v| v * v).sum();
            sum += r2 / (s * s);
        }
        Ok(sum / (n * c) as f64)
    }
}

/// Factorization of the hidden-layer Gram matrix, reusable for any lambda.
#[derive(Clone, Debug)]
pub struct RidgeFactors {
    side: GramSide,
    path: RidgePath,
    basis: DenseMatrix,
    core: Core,
    /// `H · basis` on the feature side.
    projected: Option<DenseMatrix>,
    /// Transpose of `projected` (feature side) or of `basis` (sample side).
    leverage_rhs: DenseMatrix,
    h: DenseMatrix,
}

impl RidgeFactors {
    pub fn new(h: &DenseMatrix, path: RidgePath, side: GramSide) -> Result<Self> {
        if h.rows() == 0 || h.cols() == 0 {
            return Err(Error::Validation("hidden-layer matrix is empty".into()));
        }
        let gram = match side {
            GramSide::Feature => h.gram_cols(),
            GramSide::Sample => h.gram_rows(),
        };
        let (basis, core) = match path {
            RidgePath::Hessenberg => {
                let f = hessenberg_decompose(&gram)?;
                let band = f.tridiagonal();
                (f.q, Core::Tridiagonal(band))
            }
            RidgePath::GramEigen => {
                let e = gram_eigendecompose(&gram)?;
                (e.vectors, Core::Diagonal(e.values))
            }
        };
        let projected = match side {
            GramSide::Feature => Some(h.matmul(&basis)?),
            GramSide::Sample => None,
        };
        let leverage_rhs = projected.as_ref().unwrap_or(&basis).transpose();
        Ok(Self {
            side,
            path,
            basis,
            core,
            projected,
            leverage_rhs,
            h: h.clone(),
        })
    }

    /// Chooses the smaller Gram side.
    pub fn auto(h: &DenseMatrix, path: RidgePath) -> Result<Self> {
        Self::new(h, path, GramSide::auto(h.rows(), h.cols()))
    }

    pub fn side(&self) -> GramSide {
        self.side
    }

    pub fn path(&self) -> RidgePath {
        self.path
    }

    pub fn samples(&self) -> usize {
        self.h.rows()
    }

    fn check(&self, t: &DenseMatrix, lambda: f64) -> Result<()> {
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(Error::Validation(format!(
                "regularization parameter must be finite and >= 0, got {lambda}"
            )));
        }
        if t.rows() != self.h.rows() {
            return Err(Error::dim("ridge targets", self.h.rows(), t.rows()));
        }
        Ok(())
    }

    /// `Aᵀ t` with `A = H·Q` on the feature side and `A = Q` on the sample
    /// side. Independent of lambda.
    fn project(&self, t: &DenseMatrix) -> Result<DenseMatrix> {
        self.leverage_rhs.matmul(t)
    }

    /// Output weights at `lambda`.
    pub fn weights(&self, t: &DenseMatrix, lambda: f64) -> Result<DenseMatrix> {
        self.check(t, lambda)?;
        let z = self.core.solve_shifted(lambda, &self.project(t)?)?;
        match self.side {
            GramSide::Feature => self.basis.matmul(&z),
            GramSide::Sample => self.h.t_matmul(&self.basis.matmul(&z)?),
        }
    }

    /// Weights, residuals and leverages at `lambda`.
    pub fn fit(&self, t: &DenseMatrix, lambda: f64) -> Result<RidgeFit> {
        self.check(t, lambda)?;
        let (z, fit) = self.loo_parts(t, &self.project(t)?, lambda)?;
        let weights = match self.side {
            GramSide::Feature => self.basis.matmul(&z)?,
            GramSide::Sample => self.h.t_matmul(&self.basis.matmul(&z)?)?,
        };
        Ok(RidgeFit { weights, ..fit })
    }

    /// Everything but the weights, plus the solved core system `z`.
    fn loo_parts(&self, t: &DenseMatrix, projected_t: &DenseMatrix, lambda: f64) -> Result<(DenseMatrix, RidgeFit)> {
        let z = self.core.solve_shifted(lambda, projected_t)?;
        let q = self.quadratic_diagonal(lambda)?;
        let (residuals, hat_diagonal, one_minus_hat) = match self.side {
            GramSide::Feature => {
                let g = self.projected.as_ref().expect("feature side keeps H·Q");
                let one_minus = q.iter().map(|h| 1.0 - h).collect();
                (g.matmul(&z)?.sub(t)?, q, one_minus)
            }
            GramSide::Sample => {
                // t' - t = -λ Q (C + λI)⁻¹ Qᵀ t
                let residuals = self.basis.matmul(&z)?.scale(-lambda);
                let one_minus: Vec<f64> = q.iter().map(|s| lambda * s).collect();
                let hat = one_minus.iter().map(|s| 1.0 - s).collect();
                (residuals, hat, one_minus)
            }
        };
        let fit = RidgeFit {
            lambda,
            weights: DenseMatrix::zeros(0, 0),
            residuals,
            hat_diagonal,
            one_minus_hat,
        };
        Ok((z, fit))
    }

    /// `diag(A (C + λI)⁻¹ Aᵀ)` with `A = H·Q` on the feature side and `A = Q`
    /// on the sample side.
    fn quadratic_diagonal(&self, lambda: f64) -> Result<Vec<f64>> {
        let at = &self.leverage_rhs;
        let y = self.core.solve_shifted(lambda, at)?;
        let mut out = vec![0.0; at.cols()];
        for k in 0..at.rows() {
            for ((o, &a), &b) in out.iter_mut().zip(at.row(k)).zip(y.row(k)) {
                *o += a * b;
            }
        }
        Ok(out)
    }

    pub fn press(&self, t: &DenseMatrix, lambda: f64) -> Result<f64> {
        self.check(t, lambda)?;
        self.loo_parts(t, &self.project(t)?, lambda)?.1.press()
    }

    /// PRESS at every lambda, in order. The targets are projected once.
    pub fn press_sweep(&self, t: &DenseMatrix, lambdas: &[f64]) -> Result<Vec<Result<f64>>> {
        self.check(t, 0.0)?;
        let projected_t = self.project(t)?;
        Ok(map_ordered(lambdas, |_, &l| {
            self.check(t, l)?;
            self.loo_parts(t, &projected_t, l)?.1.press()
        }))
    }
}

/// Closed-form leave-one-out MSE of the ridge fit of `t` on `h` at `lambda`.
pub fn press_mse(h: &DenseMatrix, t: &DenseMatrix, lambda: f64, path: RidgePath) -> Result<f64> {
    RidgeFactors::auto(h, path)?.press(t, lambda)
}
