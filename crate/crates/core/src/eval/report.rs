use serde::Serialize;

use super::{CvReport, SweepRow};
use crate::{Error, Result};

const UNDEFINED: &str = "NA";

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| UNDEFINED.to_string(), |x| x.to_string())
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w
        .into_inner()
        .map_err(|e| Error::Validation(format!("writing csv: {e}")))?;
    String::from_utf8(bytes).map_err(|e| Error::Validation(format!("writing csv: {e}")))
}

fn csv_err(e: csv::Error) -> Error {
    Error::Validation(format!("writing csv: {e}"))
}

/// One row per fold plus an `all` row for the summed matrix. Counts are
/// one-vs-rest for the positive class; undefined ratios are written as `NA`.
pub fn fold_report_csv(report: &CvReport) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["fold", "lambda", "press", "tp", "fp", "fn", "tn", "precision", "sensitivity", "accuracy"])
        .map_err(csv_err)?;
    let pos = report.aggregate.class_index(&report.positive_class)?;
    let mut rows: Vec<(String, String, String, &super::ConfusionMatrix)> = report
        .folds
        .iter()
        .map(|f| (f.fold.to_string(), f.lambda.to_string(), opt(f.press), &f.confusion))
        .collect();
    rows.push(("all".into(), String::new(), String::new(), &report.aggregate));
    for (fold, lambda, press, cm) in rows {
        let b = cm.binary(pos);
        let m = super::metrics(cm, &report.positive_class).ok();
        w.write_record([
            fold,
            lambda,
            press,
            b.tp.to_string(),
            b.fp.to_string(),
            b.fn_.to_string(),
            b.tn.to_string(),
            opt(m.and_then(|m| m.precision)),
            opt(m.and_then(|m| m.sensitivity)),
            opt(m.map(|m| m.accuracy)),
        ])
        .map_err(csv_err)?;
    }
    finish(w)
}

#[derive(Serialize)]
struct Summary<'a> {
    folds: usize,
    positive_class: &'a str,
    classes: &'a [String],
    samples: u64,
    correct: u64,
    accuracy: f64,
    precision: Option<f64>,
    sensitivity: Option<f64>,
    fold_lambdas: Vec<f64>,
    confusion: &'a [Vec<u64>],
}

/// Aggregate metrics as TOML. Undefined ratios are omitted.
pub fn summary_toml(report: &CvReport) -> Result<String> {
    let s = Summary {
        folds: report.folds.len(),
        positive_class: &report.positive_class,
        classes: &report.classes,
        samples: report.aggregate.total(),
        correct: report.aggregate.correct(),
        accuracy: report.metrics.accuracy,
        precision: report.metrics.precision,
        sensitivity: report.metrics.sensitivity,
        fold_lambdas: report.folds.iter().map(|f| f.lambda).collect(),
        confusion: &report.aggregate.counts,
    };
    toml::to_string(&s).map_err(|e| Error::Validation(format!("serializing summary: {e}")))
}

pub fn sweep_csv(rows: &[SweepRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["lambda_exponent", "lambda", "mean_press", "mean_accuracy"])
        .map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.lambda_exponent.to_string(),
            r.lambda.to_string(),
            r.mean_press.to_string(),
            r.mean_accuracy.to_string(),
        ])
        .map_err(csv_err)?;
    }
    finish(w)
}

fn bar(v: f64, lo: f64, hi: f64, width: usize) -> String {
    let frac = if hi > lo { (v - lo) / (hi - lo) } else { 1.0 };
    let n = (frac * width as f64).round() as usize;
    format!("{}{}", "#".repeat(n), ".".repeat(width - n))
}

/// Plain-text chart of accuracy and PRESS against the lambda exponent, each
/// bar scaled between the column's minimum and maximum.
pub fn sweep_chart(rows: &[SweepRow]) -> String {
    const W: usize = 30;
    let range = |f: fn(&SweepRow) -> f64| {
        rows.iter()
            .map(f)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
    };
    let (alo, ahi) = range(|r| r.mean_accuracy);
    let (plo, phi) = range(|r| r.mean_press);
    let mut out = format!("{:>6}  {:<8} {:<W$}  {:<10} {:<W$}\n", "lambda", "accuracy", "", "press", "");
    for r in rows {
        out.push_str(&format!(
            "{:>6}  {:<8.4} {}  {:<10.4e} {}\n",
            format!("e^{}", r.lambda_exponent),
            r.mean_accuracy,
            bar(r.mean_accuracy, alo, ahi, W),
            r.mean_press,
            bar(r.mean_press, plo, phi, W),
        ));
    }
    out
}
