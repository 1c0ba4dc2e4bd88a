use serde::{Deserialize, Serialize};

use super::folds::{grouped_kfold, stratified_kfold, Fold};
use super::{metrics, ConfusionMatrix, Metrics};
use crate::elm::{class_labels, train_with_classes, PressSweepResult, TrainConfig, TrainOutcome};
use crate::features::{fit_normalizer, sodp, FeatureExtractor, PartitionSpec, SodpPointSet};
use crate::linalg::DenseMatrix;
use crate::par::map_ordered;
use crate::signal::Segment;
use crate::{Error, Result};

/// How samples are assigned to folds.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Grouping {
    /// Every segment is an independent sample.
    #[default]
    Segment,
    /// All segments of one recording share a fold. Segment-level splits let
    /// neighbouring segments of a recording sit on both sides and can inflate
    /// accuracy.
    Record,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub k: usize,
    pub seed: u64,
    pub positive_class: String,
    pub grouping: Grouping,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            k: 5,
            seed: 7,
            positive_class: "CHF".into(),
            grouping: Grouping::Segment,
        }
    }
}

/// Difference plots of labelled segments.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SegmentDataset {
    pub points: Vec<SodpPointSet>,
    pub labels: Vec<String>,
    /// Recording each segment came from.
    pub groups: Vec<String>,
}

impl SegmentDataset {
    pub fn from_segments(segments: &[Segment]) -> Result<Self> {
        let mut data = SegmentDataset::default();
        for s in segments {
            data.points.push(sodp(&s.samples)?);
            data.labels.push(s.label.clone());
            data.groups.push(s.source_id.clone());
        }
        Ok(data)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn select(&self, idx: &[usize]) -> Vec<&SodpPointSet> {
        idx.iter().map(|&i| &self.points[i]).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FoldReport {
    pub fold: usize,
    /// Lambda of the fold's model (0 for the unregularized variants).
    pub lambda: f64,
    /// Training-fold PRESS at that lambda, when the variant computes it.
    pub press: Option<f64>,
    pub train_size: usize,
    pub test_size: usize,
    pub confusion: ConfusionMatrix,
    pub sweep: Option<PressSweepResult>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CvReport {
    pub classes: Vec<String>,
    pub positive_class: String,
    pub folds: Vec<FoldReport>,
    /// Sum of the per-fold matrices.
    pub aggregate: ConfusionMatrix,
    pub metrics: Metrics,
}

/// Where fold features come from.
pub(crate) enum Source<'a> {
    /// Bound, normalizer and model are all fitted per fold.
    Segments {
        data: &'a SegmentDataset,
        partition: &'a PartitionSpec,
    },
    /// Precomputed features; only the normalizer is fitted per fold.
    Matrix { x: &'a DenseMatrix },
}

pub(crate) struct PreparedFold {
    pub extractor: Option<FeatureExtractor>,
    pub train_x: DenseMatrix,
    pub test_x: DenseMatrix,
}

impl Source<'_> {
    pub(crate) fn prepare(&self, fold: &Fold) -> Result<PreparedFold> {
        match self {
            Source::Segments { data, partition } => {
                let (extractor, raw) = FeatureExtractor::fit(partition, &data.select(&fold.train))?;
                let train_x = extractor.normalizer.apply_rows(&raw)?;
                let test_x = extractor.transform_all(&data.select(&fold.test))?;
                Ok(PreparedFold {
                    extractor: Some(extractor),
                    train_x,
                    test_x,
                })
            }
            Source::Matrix { x } => {
                let raw = x.select_rows(&fold.train);
                let norm = fit_normalizer(&raw)?;
                Ok(PreparedFold {
                    extractor: None,
                    train_x: norm.apply_rows(&raw)?,
                    test_x: norm.apply_rows(&x.select_rows(&fold.test))?,
                })
            }
        }
    }
}

pub(crate) fn make_folds(labels: &[String], groups: &[String], eval: &EvalConfig) -> Result<Vec<Fold>> {
    match eval.grouping {
        Grouping::Segment => stratified_kfold(labels, eval.k, eval.seed),
        Grouping::Record => grouped_kfold(labels, groups, eval.k, eval.seed),
    }
}

pub(crate) fn pick<'a>(labels: &'a [String], idx: &[usize]) -> Vec<&'a str> {
    idx.iter().map(|&i| labels[i].as_str()).collect()
}

pub(crate) fn confusion(
    model: &crate::elm::ElmModel,
    test_x: &DenseMatrix,
    truth: &[&str],
    classes: &[String],
) -> Result<ConfusionMatrix> {
    let mut cm = ConfusionMatrix::new(classes);
    for (t, p) in truth.iter().zip(model.predict_indices(test_x)?) {
        cm.record(cm.class_index(t)?, p);
    }
    Ok(cm)
}

/// Fits extractor and model on `train` only. The returned model carries the
/// fitted extractor.
pub fn fit_fold(
    data: &SegmentDataset,
    train: &[usize],
    partition: &PartitionSpec,
    config: &TrainConfig,
) -> Result<TrainOutcome> {
    let fold = Fold {
        train: train.to_vec(),
        test: Vec::new(),
    };
    let prepared = Source::Segments { data, partition }.prepare(&fold)?;
    let classes = class_labels(&data.labels);
    let mut out = train_with_classes(&prepared.train_x, &pick(&data.labels, train), &classes, config)?;
    out.model.extractor = prepared.extractor;
    Ok(out)
}

fn run(
    source: Source<'_>,
    labels: &[String],
    groups: &[String],
    config: &TrainConfig,
    eval: &EvalConfig,
) -> Result<CvReport> {
    if labels.is_empty() {
        return Err(Error::Validation("cross-validation on an empty dataset".into()));
    }
    let classes = class_labels(labels);
    if !classes.contains(&eval.positive_class) {
        return Err(Error::Validation(format!(
            "positive class {:?} is not one of {classes:?}",
            eval.positive_class
        )));
    }
    let folds = make_folds(labels, groups, eval)?;
    let reports = map_ordered(&folds, |i, fold| -> Result<FoldReport> {
        let prepared = source.prepare(fold)?;
        let out = train_with_classes(&prepared.train_x, &pick(labels, &fold.train), &classes, config)?;
        let confusion = confusion(&out.model, &prepared.test_x, &pick(labels, &fold.test), &classes)?;
        Ok(FoldReport {
            fold: i,
            lambda: out.model.lambda,
            press: out.sweep.as_ref().map(|s| s.best_press),
            train_size: fold.train.len(),
            test_size: fold.test.len(),
            confusion,
            sweep: out.sweep,
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let mut aggregate = ConfusionMatrix::new(&classes);
    for r in &reports {
        aggregate.merge(&r.confusion)?;
    }
    let metrics = metrics(&aggregate, &eval.positive_class)?;
    Ok(CvReport {
        classes,
        positive_class: eval.positive_class.clone(),
        folds: reports,
        aggregate,
        metrics,
    })
}

/// k-fold cross-validation on segments with per-fold bound, normalizer and
/// model. Aggregate metrics come from the summed confusion matrix.
pub fn cross_validate(
    data: &SegmentDataset,
    partition: &PartitionSpec,
    config: &TrainConfig,
    eval: &EvalConfig,
) -> Result<CvReport> {
    run(Source::Segments { data, partition }, &data.labels, &data.groups, config, eval)
}

/// Cross-validation on a precomputed feature matrix. `groups` is only read
/// for record-level grouping; pass the labels' length worth of ids or an
/// empty slice for segment-level splits.
pub fn cross_validate_features(
    x: &DenseMatrix,
    labels: &[String],
    groups: &[String],
    config: &TrainConfig,
    eval: &EvalConfig,
) -> Result<CvReport> {
    if x.rows() != labels.len() {
        return Err(Error::dim("feature rows vs labels", labels.len(), x.rows()));
    }
    run(Source::Matrix { x }, labels, groups, config, eval)
}
