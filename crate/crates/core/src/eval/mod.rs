//! Cross-validation, confusion-matrix metrics and lambda sweeps.

mod cv;
mod folds;
mod report;
mod sweep;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use cv::{
    cross_validate, cross_validate_features, fit_fold, CvReport, EvalConfig, FoldReport, Grouping, SegmentDataset,
};
pub use folds::{grouped_kfold, stratified_kfold, Fold};
pub use report::{fold_report_csv, summary_toml, sweep_chart, sweep_csv};
pub use sweep::{lambda_sweep, SweepRow};

/// Counts with rows indexed by the true class and columns by the prediction.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub classes: Vec<String>,
    pub counts: Vec<Vec<u64>>,
}

/// One-vs-rest tallies for a positive class.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BinaryCounts {
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
    pub tn: u64,
}

/// `None` marks a ratio whose denominator is zero.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub precision: Option<f64>,
    pub sensitivity: Option<f64>,
    pub accuracy: f64,
}

impl ConfusionMatrix {
    pub fn new(classes: &[String]) -> Self {
        let c = classes.len();
        Self {
            classes: classes.to_vec(),
            counts: vec![vec![0; c]; c],
        }
    }

    pub fn from_counts(classes: &[String], counts: Vec<Vec<u64>>) -> Result<Self> {
        let c = classes.len();
        if counts.len() != c || counts.iter().any(|r| r.len() != c) {
            return Err(Error::dim("confusion matrix", format!("{c}x{c}"), "a ragged or mis-sized table"));
        }
        Ok(Self {
            classes: classes.to_vec(),
            counts,
        })
    }

    pub fn record(&mut self, truth: usize, predicted: usize) {
        self.counts[truth][predicted] += 1;
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn correct(&self) -> u64 {
        (0..self.classes.len()).map(|i| self.counts[i][i]).sum()
    }

    /// Elementwise sum; class lists must agree.
    pub fn merge(&mut self, other: &ConfusionMatrix) -> Result<()> {
        if other.classes != self.classes {
            return Err(Error::Validation(format!(
                "cannot merge confusion matrices over {:?} and {:?}",
                self.classes, other.classes
            )));
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
        Ok(())
    }

    pub fn class_index(&self, label: &str) -> Result<usize> {
        self.classes
            .iter()
            .position(|c| c == label)
            .ok_or_else(|| Error::Validation(format!("class {label:?} is not one of {:?}", self.classes)))
    }

    pub fn binary(&self, positive: usize) -> BinaryCounts {
        let c = self.classes.len();
        let tp = self.counts[positive][positive];
        let fp = (0..c).filter(|&i| i != positive).map(|i| self.counts[i][positive]).sum();
        let fn_ = (0..c).filter(|&j| j != positive).map(|j| self.counts[positive][j]).sum();
        let tn = self.total() - tp - fp - fn_;
        BinaryCounts { tp, fp, fn_, tn }
    }
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

/// Precision and sensitivity for `positive`, and overall accuracy.
pub fn metrics(cm: &ConfusionMatrix, positive: &str) -> Result<Metrics> {
    let total = cm.total();
    if total == 0 {
        return Err(Error::Validation("metrics of an empty confusion matrix".into()));
    }
    let b = cm.binary(cm.class_index(positive)?);
    Ok(Metrics {
        precision: ratio(b.tp, b.tp + b.fp),
        sensitivity: ratio(b.tp, b.tp + b.fn_),
        accuracy: cm.correct() as f64 / total as f64,
    })
}
