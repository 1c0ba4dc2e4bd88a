use serde::{Deserialize, Serialize};

use super::{
    class_labels, encode_targets, hidden_output, init_hidden, Activation, ElmModel, PressSweepResult, RidgeFactors,
    RidgePath, Variant,
};
use crate::linalg::{ridge_solve_direct, DenseMatrix};
use crate::{Error, Result};

/// Stabilizer used by the unregularized variants. Reported as lambda 0.
pub const LAMBDA_FLOOR: f64 = 1e-12;

/// `e^k` for each integer `k` in `lo..=hi`.
pub fn lambda_grid(lo_exp: i32, hi_exp: i32) -> Vec<f64> {
    (lo_exp..=hi_exp).map(|k| (k as f64).exp()).collect()
}

/// `e^-20, e^-19, ..., e^-1`.
pub fn default_lambda_grid() -> Vec<f64> {
    lambda_grid(-20, -1)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub variant: Variant,
    pub hidden: usize,
    pub activation: Activation,
    /// Candidates for the regularized variants; ignored by the others.
    pub lambdas: Vec<f64>,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            variant: Variant::RHessElm,
            hidden: 50,
            activation: Activation::Sigmoid,
            lambdas: default_lambda_grid(),
            seed: 7,
        }
    }
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub model: ElmModel,
    /// Present for the regularized variants.
    pub sweep: Option<PressSweepResult>,
}

/// Trains on `x` (one row per sample) with classes taken from the sorted
/// distinct labels.
pub fn train<S: AsRef<str>>(x: &DenseMatrix, labels: &[S], config: &TrainConfig) -> Result<TrainOutcome> {
    train_with_classes(x, labels, &class_labels(labels), config)
}

/// Trains with an explicit class order, so that folds missing a class still
/// produce models with the full output layout.
pub fn train_with_classes<S: AsRef<str>>(
    x: &DenseMatrix,
    labels: &[S],
    classes: &[String],
    config: &TrainConfig,
) -> Result<TrainOutcome> {
    let n = x.rows();
    if labels.len() != n {
        return Err(Error::dim("training labels", n, labels.len()));
    }
    if n < 2 {
        return Err(Error::Validation(format!("training needs at least 2 samples, got {n}")));
    }
    if classes.len() < 2 || class_labels(labels).len() < 2 {
        return Err(Error::Validation("training needs at least 2 classes".into()));
    }
    if config.hidden >= n {
        log::warn!(
            "{} hidden neurons for {n} training samples; using the minimum-norm solution",
            config.hidden
        );
    }
    let (v, b) = init_hidden(x.cols(), config.hidden, config.seed)?;
    let h = hidden_output(x, &v, &b, config.activation)?;
    let t = encode_targets(labels, classes)?;

    let (weights, lambda, sweep) = match config.variant {
        Variant::Elm => (ridge_solve_direct(&h, &t, LAMBDA_FLOOR)?, 0.0, None),
        Variant::HessElm => {
            let f = RidgeFactors::auto(&h, RidgePath::Hessenberg)?;
            (f.weights(&t, LAMBDA_FLOOR)?, 0.0, None)
        }
        Variant::RElm => {
            let f = RidgeFactors::auto(&h, RidgePath::GramEigen)?;
            let sweep = select_lambda(&f, &t, &config.lambdas)?;
            (ridge_solve_direct(&h, &t, sweep.best_lambda)?, sweep.best_lambda, Some(sweep))
        }
        Variant::RHessElm => {
            let f = RidgeFactors::auto(&h, RidgePath::Hessenberg)?;
            let sweep = select_lambda(&f, &t, &config.lambdas)?;
            (f.weights(&t, sweep.best_lambda)?, sweep.best_lambda, Some(sweep))
        }
    };

    let model = ElmModel {
        variant: config.variant,
        activation: config.activation,
        lambda,
        class_labels: classes.to_vec(),
        seed: config.seed,
        input_weights: v,
        biases: b,
        output_weights: weights,
        extractor: None,
    };
    Ok(TrainOutcome { model, sweep })
}

/// PRESS at every candidate from one set of factors; ties go to the larger lambda.
fn select_lambda(f: &RidgeFactors, t: &DenseMatrix, lambdas: &[f64]) -> Result<PressSweepResult> {
    if lambdas.is_empty() {
        return Err(Error::Validation("the lambda candidate set is empty".into()));
    }
    if let Some(bad) = lambdas.iter().find(|l| !(**l >= 0.0) || !l.is_finite()) {
        return Err(Error::Validation(format!("lambda candidate {bad} is not finite and >= 0")));
    }
    let results = f.press_sweep(t, lambdas)?;
    let mut candidates = Vec::with_capacity(lambdas.len());
    let mut excluded = Vec::new();
    for (&l, r) in lambdas.iter().zip(results) {
        match r {
            Ok(p) => candidates.push((l, p)),
            Err(e) => {
                log::warn!("excluding lambda {l:e}: {e}");
                excluded.push(l);
            }
        }
    }
    let mut best: Option<(f64, f64)> = None;
    for &(l, p) in &candidates {
        best = match best {
            Some((bl, bp)) if p > bp || (p == bp && l <= bl) => Some((bl, bp)),
            _ => Some((l, p)),
        };
    }
    let (best_lambda, best_press) = best.ok_or_else(|| {
        Error::Training(format!(
            "every lambda candidate was excluded ({} of {}); PRESS is undefined for all of them",
            excluded.len(),
            lambdas.len()
        ))
    })?;
    Ok(PressSweepResult {
        candidates,
        excluded,
        best_lambda,
        best_press,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn clusters() -> (DenseMatrix, Vec<&'static str>) {
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for i in 0..20 {
            let d = 0.05 * (i as f64 / 20.0 - 0.5);
            rows.push(vec![-1.0 + d, 0.5 - d]);
            labels.push("a");
            rows.push(vec![1.0 - d, -0.5 + d]);
            labels.push("b");
        }
        (DenseMatrix::from_rows(&rows).unwrap(), labels)
    }

    #[test]
    fn separable_clusters_every_variant() {
        let (x, labels) = clusters();
        for variant in Variant::ALL {
            let cfg = TrainConfig {
                variant,
                hidden: 20,
                lambdas: lambda_grid(-8, -1),
                ..TrainConfig::default()
            };
            let out = train(&x, &labels, &cfg).unwrap();
            let (pred, _) = out.model.predict(&x).unwrap();
            assert_eq!(pred, labels, "{variant}");
            assert_eq!(out.sweep.is_some(), variant.is_regularized());
            if !variant.is_regularized() {
                assert_eq!(out.model.lambda, 0.0);
            }
        }
    }

    #[test]
    fn grid_is_ordered_exponents() {
        let g = default_lambda_grid();
        assert_eq!(g.len(), 20);
        assert_eq!(g[0], (-20f64).exp());
        assert_eq!(g[19], (-1f64).exp());
    }

    #[test]
    fn rejects_bad_inputs() {
        let (x, labels) = clusters();
        let one_class = vec!["a"; labels.len()];
        assert!(train(&x, &one_class, &TrainConfig::default()).is_err());
        let cfg = TrainConfig { lambdas: vec![], ..TrainConfig::default() };
        assert!(train(&x, &labels, &cfg).is_err());
        let cfg = TrainConfig { hidden: 0, ..TrainConfig::default() };
        assert!(train(&x, &labels, &cfg).is_err());
    }

    #[test]
    fn ties_prefer_larger_lambda() {
        // With H = 0 every candidate has the same PRESS.
        let h = DenseMatrix::from_fn(6, 2, |i, j| if i == j { 1e-300 } else { 0.0 });
        let t = DenseMatrix::column(&[1.0, -1.0, 1.0, -1.0, 1.0, -1.0]).unwrap();
        let f = RidgeFactors::auto(&h, RidgePath::GramEigen).unwrap();
        let s = select_lambda(&f, &t, &[0.5, 2.0, 1.0]).unwrap();
        assert_eq!(s.best_lambda, 2.0);
    }
}
