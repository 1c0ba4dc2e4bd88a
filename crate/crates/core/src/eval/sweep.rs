use serde::{Deserialize, Serialize};

use super::cv::{confusion, make_folds, pick, PreparedFold, SegmentDataset, Source};
use super::EvalConfig;
use crate::elm::{class_labels, train_with_classes, TrainConfig, Variant};
use crate::features::PartitionSpec;
use crate::par::map_ordered;
use crate::{Error, Result};

/// One lambda of a sweep, averaged over the folds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub lambda_exponent: i32,
    pub lambda: f64,
    /// Mean over folds of the training-fold PRESS.
    pub mean_press: f64,
    /// Mean over folds of the test accuracy.
    pub mean_accuracy: f64,
    pub fold_press: Vec<f64>,
    pub fold_accuracy: Vec<f64>,
}

/// Cross-validates once per `λ = e^k`, forcing that lambda instead of
/// selecting it. Features are fitted once per fold and shared by every
/// lambda. Unregularized variants are swept as their regularized
/// counterparts. Rows are ordered by exponent.
pub fn lambda_sweep(
    data: &SegmentDataset,
    partition: &PartitionSpec,
    config: &TrainConfig,
    eval: &EvalConfig,
    exponents: &[i32],
) -> Result<Vec<SweepRow>> {
    if exponents.is_empty() {
        return Err(Error::Validation("the lambda sweep grid is empty".into()));
    }
    let mut exponents = exponents.to_vec();
    exponents.sort_unstable();
    exponents.dedup();

    let variant = match config.variant {
        Variant::Elm | Variant::RElm => Variant::RElm,
        Variant::HessElm | Variant::RHessElm => Variant::RHessElm,
    };
    let classes = class_labels(&data.labels);
    let folds = make_folds(&data.labels, &data.groups, eval)?;
    let source = Source::Segments { data, partition };
    let prepared: Vec<PreparedFold> = map_ordered(&folds, |_, f| source.prepare(f))
        .into_iter()
        .collect::<Result<_>>()?;

    let jobs: Vec<(usize, usize)> = (0..exponents.len())
        .flat_map(|e| (0..folds.len()).map(move |f| (e, f)))
        .collect();
    let results = map_ordered(&jobs, |_, &(e, f)| -> Result<(f64, f64)> {
        let cfg = TrainConfig {
            variant,
            lambdas: vec![(exponents[e] as f64).exp()],
            ..config.clone()
        };
        let fold = &folds[f];
        let p = &prepared[f];
        let out = train_with_classes(&p.train_x, &pick(&data.labels, &fold.train), &classes, &cfg)?;
        let press = out.sweep.as_ref().expect("regularized variant").best_press;
        let cm = confusion(&out.model, &p.test_x, &pick(&data.labels, &fold.test), &classes)?;
        Ok((press, cm.correct() as f64 / cm.total() as f64))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let k = folds.len();
    Ok(exponents
        .iter()
        .enumerate()
        .map(|(e, &exp)| {
            let chunk = &results[e * k..(e + 1) * k];
            let fold_press: Vec<f64> = chunk.iter().map(|r| r.0).collect();
            let fold_accuracy: Vec<f64> = chunk.iter().map(|r| r.1).collect();
            SweepRow {
                lambda_exponent: exp,
                lambda: (exp as f64).exp(),
                mean_press: fold_press.iter().sum::<f64>() / k as f64,
                mean_accuracy: fold_accuracy.iter().sum::<f64>() / k as f64,
                fold_press,
                fold_accuracy,
            }
        })
        .collect())
}
