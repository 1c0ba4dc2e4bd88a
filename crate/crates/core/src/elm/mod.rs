//! Single-hidden-layer extreme learning machines.
//!
//! Input weights and biases are drawn once from a seeded generator and frozen;
//! only the output weights are solved. Four variants differ in how that solve
//! is done and whether the ridge parameter is selected by leave-one-out error:
//!
//! | variant     | solve                              | lambda                      |
//! |-------------|------------------------------------|-----------------------------|
//! | `elm`       | direct normal equations            | fixed stabilizer (reported 0) |
//! | `r-elm`     | PRESS from the Gram eigenbasis     | argmin over candidates      |
//! | `hesselm`   | Hessenberg factors of the Gram     | fixed stabilizer (reported 0) |
//! | `r-hesselm` | Hessenberg factors, reused per λ   | argmin over candidates      |

mod persist;
mod ridge;
mod train;

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::features::FeatureExtractor;
use crate::linalg::DenseMatrix;
use crate::{Error, Result};

pub use persist::{load_model, save_model, MODEL_FORMAT_VERSION};
pub(crate) use persist::{peek_version, toml_error};
pub use ridge::{press_mse, GramSide, RidgeFactors, RidgeFit, RidgePath, LEVERAGE_TOL};
pub use train::{default_lambda_grid, lambda_grid, train, train_with_classes, TrainConfig, TrainOutcome, LAMBDA_FLOOR};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    #[serde(rename = "elm")]
    Elm,
    #[serde(rename = "r-elm")]
    RElm,
    #[serde(rename = "hesselm")]
    HessElm,
    #[serde(rename = "r-hesselm")]
    RHessElm,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::Elm, Variant::RElm, Variant::HessElm, Variant::RHessElm];

    /// Whether lambda is chosen by PRESS over a candidate grid.
    pub fn is_regularized(self) -> bool {
        matches!(self, Variant::RElm | Variant::RHessElm)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Elm => "elm",
            Variant::RElm => "r-elm",
            Variant::HessElm => "hesselm",
            Variant::RHessElm => "r-hesselm",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.to_ascii_lowercase();
        Variant::ALL
            .into_iter()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| Error::Validation(format!("unknown model variant {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    #[default]
    Sigmoid,
    Tanh,
}

impl Activation {
    pub fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Sigmoid => 1.0 / (1.0 + (-z).exp()),
            Activation::Tanh => z.tanh(),
        }
    }
}

impl FromStr for Activation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sigmoid" => Ok(Activation::Sigmoid),
            "tanh" => Ok(Activation::Tanh),
            other => Err(Error::Validation(format!("unknown activation {other:?}"))),
        }
    }
}

/// Random hidden layer: `V` is `n_features × m`, drawn row by row, then `b`,
/// all i.i.d. uniform on [-1, 1].
pub fn init_hidden(n_features: usize, m: usize, seed: u64) -> Result<(DenseMatrix, Vec<f64>)> {
    if m < 1 {
        return Err(Error::Validation("hidden layer needs at least one neuron".into()));
    }
    if n_features < 1 {
        return Err(Error::Validation("hidden layer needs at least one input feature".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v = DenseMatrix::from_fn(n_features, m, |_, _| rng.random_range(-1.0..=1.0));
    let b = (0..m).map(|_| rng.random_range(-1.0..=1.0)).collect();
    Ok((v, b))
}

/// `H = φ(X V + 1 bᵀ)`.
pub fn hidden_output(x: &DenseMatrix, v: &DenseMatrix, b: &[f64], activation: Activation) -> Result<DenseMatrix> {
    if x.cols() != v.rows() {
        return Err(Error::dim("hidden layer input features", v.rows(), x.cols()));
    }
    if b.len() != v.cols() {
        return Err(Error::dim("hidden layer biases", v.cols(), b.len()));
    }
    let mut h = x.matmul(v)?;
    for i in 0..h.rows() {
        for (z, bk) in h.row_mut(i).iter_mut().zip(b) {
            *z = activation.apply(*z + bk);
        }
    }
    Ok(h)
}

/// ±1 one-hot targets in the column order of `classes`.
pub fn encode_targets<S: AsRef<str>>(labels: &[S], classes: &[String]) -> Result<DenseMatrix> {
    let c = classes.len();
    let mut t = DenseMatrix::from_fn(labels.len(), c, |_, _| -1.0);
    for (i, label) in labels.iter().enumerate() {
        let label = label.as_ref();
        let k = classes
            .iter()
            .position(|cl| cl == label)
            .ok_or_else(|| Error::Validation(format!("label {label:?} is not one of the classes {classes:?}")))?;
        t[(i, k)] = 1.0;
    }
    Ok(t)
}

/// Sorted distinct labels.
pub fn class_labels<S: AsRef<str>>(labels: &[S]) -> Vec<String> {
    let mut classes: Vec<String> = labels.iter().map(|l| l.as_ref().to_string()).collect();
    classes.sort();
    classes.dedup();
    classes
}

/// Index of the largest score; ties go to the lower index.
pub fn argmax(scores: &[f64]) -> usize {
    let mut best = 0;
    for (k, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = k;
        }
    }
    best
}

/// PRESS for each evaluated lambda and the selected minimum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PressSweepResult {
    /// `(lambda, press)` in candidate order, excluded lambdas omitted.
    pub candidates: Vec<(f64, f64)>,
    /// Lambdas whose PRESS was undefined or whose solve failed.
    pub excluded: Vec<f64>,
    pub best_lambda: f64,
    pub best_press: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ElmModel {
    pub variant: Variant,
    pub activation: Activation,
    /// Reported lambda; 0 for the unregularized variants.
    pub lambda: f64,
    pub class_labels: Vec<String>,
    pub seed: u64,
    /// `n_features × m`.
    pub input_weights: DenseMatrix,
    pub biases: Vec<f64>,
    /// `m × C`.
    pub output_weights: DenseMatrix,
    /// Feature extraction fitted alongside the model, when trained from segments.
    pub extractor: Option<FeatureExtractor>,
}

impl ElmModel {
    pub fn feature_count(&self) -> usize {
        self.input_weights.rows()
    }

    pub fn hidden(&self) -> usize {
        self.input_weights.cols()
    }

    pub fn class_count(&self) -> usize {
        self.class_labels.len()
    }

    /// Raw output scores, `N × C`.
    pub fn scores(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        if x.cols() != self.feature_count() {
            return Err(Error::dim("model input features", self.feature_count(), x.cols()));
        }
        hidden_output(x, &self.input_weights, &self.biases, self.activation)?.matmul(&self.output_weights)
    }

    /// Class index per row.
    pub fn predict_indices(&self, x: &DenseMatrix) -> Result<Vec<usize>> {
        let s = self.scores(x)?;
        Ok((0..s.rows()).map(|i| argmax(s.row(i))).collect())
    }

    /// Class labels per row, with the raw scores.
    pub fn predict(&self, x: &DenseMatrix) -> Result<(Vec<String>, DenseMatrix)> {
        let s = self.scores(x)?;
        let labels = (0..s.rows())
            .map(|i| self.class_labels[argmax(s.row(i))].clone())
            .collect();
        Ok((labels, s))
    }

    pub(crate) fn validate(&self) -> Result<()> {
        let m = self.hidden();
        if m < 1 {
            return Err(Error::Validation("model has no hidden neurons".into()));
        }
        if self.class_labels.len() < 2 {
            return Err(Error::Validation(format!(
                "model needs at least 2 classes, has {}",
                self.class_labels.len()
            )));
        }
        if self.biases.len() != m {
            return Err(Error::dim("model biases", m, self.biases.len()));
        }
        if self.output_weights.shape() != (m, self.class_count()) {
            return Err(Error::dim(
                "model output weights",
                format!("{m}x{}", self.class_count()),
                format!("{}x{}", self.output_weights.rows(), self.output_weights.cols()),
            ));
        }
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return Err(Error::Validation(format!("model lambda {} is not a finite nonnegative value", self.lambda)));
        }
        if let Some(ex) = &self.extractor {
            ex.validate()?;
            if ex.feature_count() != self.feature_count() {
                return Err(Error::dim("model extractor features", self.feature_count(), ex.feature_count()));
            }
        }
        Ok(())
    }
}
