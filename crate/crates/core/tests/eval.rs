mod common;

use std::collections::BTreeSet;

use common::*;
use hesselm::elm::{TrainConfig, Variant};
use hesselm::eval::{
    cross_validate, cross_validate_features, fit_fold, lambda_sweep, stratified_kfold, EvalConfig, Grouping,
    SegmentDataset,
};
use hesselm::features::{Aggregation, PartitionKind, PartitionSpec, SodpPointSet};
use hesselm::DenseMatrix;
use rand::seq::SliceRandom;

fn iem() -> PartitionSpec {
    PartitionSpec::with_default_regions(PartitionKind::Inclined, Aggregation::Probability)
}

fn small_model() -> TrainConfig {
    TrainConfig { hidden: 20, ..TrainConfig::default() }
}

#[test]
fn fitted_state_ignores_test_rows() {
    let data = synthetic_dataset(2, 10, 3);
    let folds = stratified_kfold(&data.labels, 5, 7).unwrap();
    for fold in &folds {
        let before = fit_fold(&data, &fold.train, &iem(), &small_model()).unwrap();
        let mut tampered: SegmentDataset = data.clone();
        for &i in &fold.test {
            tampered.points[i] = SodpPointSet { points: vec![(1e6, -1e6); 3] };
            tampered.labels[i] = if tampered.labels[i] == "CHF" { "NORMAL" } else { "CHF" }.to_string();
        }
        let after = fit_fold(&tampered, &fold.train, &iem(), &small_model()).unwrap();
        assert_eq!(before.model, after.model);
        assert_eq!(before.sweep, after.sweep);
        assert!(before.model.extractor.is_some());
    }
}

#[test]
fn folds_partition_and_aggregate_is_micro_average() {
    let data = synthetic_dataset(2, 11, 4);
    for grouping in [Grouping::Segment, Grouping::Record] {
        let eval = EvalConfig { k: 4, grouping, ..EvalConfig::default() };
        let report = cross_validate(&data, &iem(), &small_model(), &eval).unwrap();
        let sizes: usize = report.folds.iter().map(|f| f.test_size).sum();
        assert_eq!(sizes, data.len());
        assert!(report.folds.iter().all(|f| f.train_size + f.test_size == data.len()));
        let correct: u64 = report.folds.iter().map(|f| f.confusion.correct()).sum();
        let total: u64 = report.folds.iter().map(|f| f.confusion.total()).sum();
        assert_eq!(report.aggregate.total(), total);
        assert_eq!(report.aggregate.correct(), correct);
        assert_eq!(report.metrics.accuracy, correct as f64 / total as f64);
        for i in 0..2 {
            for j in 0..2 {
                let s: u64 = report.folds.iter().map(|f| f.confusion.counts[i][j]).sum();
                assert_eq!(report.aggregate.counts[i][j], s);
            }
        }
        let again = cross_validate(&data, &iem(), &small_model(), &eval).unwrap();
        assert_eq!(again, report);
    }
}

#[test]
fn record_grouping_keeps_recordings_together() {
    let data = synthetic_dataset(3, 4, 5);
    let folds = hesselm::eval::grouped_kfold(&data.labels, &data.groups, 3, 7).unwrap();
    let mut seen = BTreeSet::new();
    for f in &folds {
        let groups: BTreeSet<&str> = f.test.iter().map(|&i| data.groups[i].as_str()).collect();
        for g in &groups {
            assert!(seen.insert(g.to_string()), "{g} appears in two test folds");
        }
        for &i in &f.train {
            assert!(!groups.contains(data.groups[i].as_str()));
        }
    }
    assert_eq!(seen.len(), 6);
}

#[test]
fn shuffled_labels_give_chance_accuracy() {
    for seed in 0..20u64 {
        let mut r = rng(seed);
        let x = uniform(&mut r, 200, 5);
        let mut labels: Vec<String> = (0..200).map(|i| if i < 100 { "CHF" } else { "NORMAL" }.to_string()).collect();
        labels.shuffle(&mut r);
        let eval = EvalConfig { seed, ..EvalConfig::default() };
        let report = cross_validate_features(&x, &labels, &[], &small_model(), &eval).unwrap();
        let acc = report.metrics.accuracy;
        assert!((0.35..=0.65).contains(&acc), "seed {seed}: accuracy {acc}");
    }
}

#[test]
fn informative_feature_is_learned_perfectly() {
    let labels: Vec<String> = (0..40).map(|i| if i % 3 == 0 { "CHF" } else { "NORMAL" }.to_string()).collect();
    let x = DenseMatrix::from_fn(40, 2, |i, j| if j == 0 { if i % 3 == 0 { 1.0 } else { -1.0 } } else { 0.0 });
    for variant in Variant::ALL {
        let cfg = TrainConfig { variant, hidden: 10, ..TrainConfig::default() };
        let r = cross_validate_features(&x, &labels, &[], &cfg, &EvalConfig::default()).unwrap();
        assert_eq!(r.metrics.accuracy, 1.0, "{variant}");
        assert_eq!(r.metrics.precision, Some(1.0));
        assert_eq!(r.metrics.sensitivity, Some(1.0));
    }
}

#[test]
fn sweep_minimum_matches_internal_selection_per_fold() {
    let data = synthetic_dataset(2, 12, 6);
    let eval = EvalConfig::default();
    let exps: Vec<i32> = (-20..=-1).collect();
    let report = cross_validate(&data, &iem(), &small_model(), &eval).unwrap();
    let rows = lambda_sweep(&data, &iem(), &small_model(), &eval, &exps).unwrap();
    assert_eq!(rows.len(), 20);
    assert!(rows.windows(2).all(|w| w[0].lambda_exponent < w[1].lambda_exponent));
    for (f, fold) in report.folds.iter().enumerate() {
        // Ties go to the larger lambda, so scan from the top of the grid.
        let best = rows
            .iter()
            .rev()
            .min_by(|a, b| a.fold_press[f].total_cmp(&b.fold_press[f]))
            .unwrap();
        assert_eq!(best.lambda, fold.lambda, "fold {f}");
        assert_eq!(Some(best.fold_press[f]), fold.press);
        let sweep = fold.sweep.as_ref().unwrap();
        for row in &rows {
            let (_, p) = sweep.candidates.iter().find(|c| c.0 == row.lambda).unwrap();
            assert_eq!(*p, row.fold_press[f]);
        }
    }
}

#[test]
fn single_lambda_sweep_matches_forced_cross_validation() {
    let data = synthetic_dataset(2, 8, 8);
    let eval = EvalConfig::default();
    let rows = lambda_sweep(&data, &iem(), &small_model(), &eval, &[-5]).unwrap();
    assert_eq!(rows.len(), 1);
    let forced = TrainConfig { lambdas: vec![(-5.0f64).exp()], ..small_model() };
    let report = cross_validate(&data, &iem(), &forced, &eval).unwrap();
    let acc: Vec<f64> = report
        .folds
        .iter()
        .map(|f| f.confusion.correct() as f64 / f.confusion.total() as f64)
        .collect();
    let press: Vec<f64> = report.folds.iter().map(|f| f.press.unwrap()).collect();
    assert_eq!(rows[0].fold_accuracy, acc);
    assert_eq!(rows[0].fold_press, press);
    assert_eq!(rows[0].mean_press, press.iter().sum::<f64>() / press.len() as f64);
}

#[test]
fn heavy_regularization_is_chance_level_on_noise() {
    let data = noise_dataset(100, 250, 9);
    let eval = EvalConfig::default();
    // e^28 ≈ 1.4e12
    let rows = lambda_sweep(&data, &iem(), &small_model(), &eval, &[28]).unwrap();
    let acc = rows[0].mean_accuracy;
    assert!((0.35..=0.65).contains(&acc), "accuracy {acc}");
    assert!((rows[0].mean_press - 1.0).abs() < 1e-6, "press {}", rows[0].mean_press);
}

#[test]
fn press_column_is_finite_and_positive_on_noise() {
    let data = noise_dataset(60, 250, 10);
    let exps: Vec<i32> = (-20..=-1).collect();
    let rows = lambda_sweep(&data, &iem(), &small_model(), &EvalConfig::default(), &exps).unwrap();
    assert_eq!(rows.len(), 20);
    for r in &rows {
        assert!(r.mean_press.is_finite() && r.mean_press > 0.0, "{r:?}");
        assert!(r.fold_press.iter().all(|p| p.is_finite() && *p > 0.0));
    }
}
