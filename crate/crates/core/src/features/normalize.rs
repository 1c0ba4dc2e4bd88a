use serde::{Deserialize, Serialize};

use crate::linalg::DenseMatrix;
use crate::{Error, Result};

/// Per-feature linear map onto [-1, 1] fitted on training rows:
/// `x' = 2 (x - min) / (max - min) - 1`. Constant features map to 0 and
/// unseen values are not clipped.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Normalizer {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

/// Column-wise min and max over the training rows.
pub fn fit_normalizer(train: &DenseMatrix) -> Result<Normalizer> {
    if train.rows() == 0 {
        return Err(Error::Validation("cannot fit a normalizer on zero rows".into()));
    }
    let mut min = train.row(0).to_vec();
    let mut max = min.clone();
    for i in 1..train.rows() {
        for (j, &v) in train.row(i).iter().enumerate() {
            min[j] = min[j].min(v);
            max[j] = max[j].max(v);
        }
    }
    Ok(Normalizer { min, max })
}

impl Normalizer {
    pub fn dim(&self) -> usize {
        self.min.len()
    }

    pub fn apply(&self, features: &[f64]) -> Result<Vec<f64>> {
        if features.len() != self.dim() {
            return Err(Error::dim("normalizer input", self.dim(), features.len()));
        }
        Ok(features
            .iter()
            .zip(self.min.iter().zip(&self.max))
            .map(|(&x, (&lo, &hi))| {
                if hi > lo {
                    2.0 * ((x - lo) / (hi - lo)) - 1.0
                } else {
                    0.0
                }
            })
            .collect())
    }

    pub fn apply_rows(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        if x.cols() != self.dim() {
            return Err(Error::dim("normalizer input", self.dim(), x.cols()));
        }
        let mut data = Vec::with_capacity(x.rows() * x.cols());
        for i in 0..x.rows() {
            data.extend(self.apply(x.row(i))?);
        }
        DenseMatrix::new(x.rows(), x.cols(), data)
    }
}
