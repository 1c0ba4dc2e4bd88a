//! File-based stages behind the command-line tool.
//!
//! Layout of the output directory:
//!
//! ```text
//! effective_config.toml   configuration actually used by the last command
//! synth/                  generated recordings and manifest.csv
//! preprocessed/           one filtered recording per manifest row
//! segments.csv            segment,source_id,label,start_index,length,path
//! features.csv            f1..fn,label (bound and normalizer fitted on all rows)
//! extractor.toml          fitted partition and normalizer for features.csv
//! model.toml              model trained on every segment
//! report.csv, summary.toml cross-validated (or held-out) metrics
//! sweep.csv, sweep_chart.txt lambda sweep
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::PipelineConfig;
use crate::elm::{load_model, save_model, TrainOutcome};
use crate::eval::{
    cross_validate, fit_fold, fold_report_csv, lambda_sweep, metrics, summary_toml, sweep_chart, sweep_csv,
    ConfusionMatrix, CvReport, FoldReport, SegmentDataset, SweepRow,
};
use crate::features::{FeatureExtractor, SodpPointSet};
use crate::linalg::DenseMatrix;
use crate::par::map_ordered;
use crate::signal::{csv_error, load_signal, notch_filter, read_manifest, remove_baseline, segment, write_samples, Segment};
use crate::{Error, Result};

const SEGMENTS_CSV: &str = "segments.csv";
const PREPROCESSED_DIR: &str = "preprocessed";

fn out_dir(cfg: &PipelineConfig) -> Result<&Path> {
    let dir = cfg.data.output_dir.as_path();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    Ok(dir)
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Records the configuration in effect in the output directory.
pub fn write_effective_config(cfg: &PipelineConfig) -> Result<PathBuf> {
    let path = out_dir(cfg)?.join("effective_config.toml");
    write(&path, &cfg.to_toml()?)?;
    Ok(path)
}

/// The configured manifest, or the synthetic one in the output directory.
pub fn manifest_path(cfg: &PipelineConfig) -> PathBuf {
    cfg.data
        .manifest
        .clone()
        .unwrap_or_else(|| cfg.data.output_dir.join("synth").join("manifest.csv"))
}

/// Writes the synthetic dataset and returns its manifest path.
pub fn run_synth(cfg: &PipelineConfig) -> Result<PathBuf> {
    write_effective_config(cfg)?;
    crate::synth::write_dataset(&cfg.synth, cfg.data.output_dir.join("synth"))
}

#[derive(Serialize, Deserialize)]
struct SegmentRow {
    segment: usize,
    source_id: String,
    label: String,
    start_index: usize,
    length: usize,
    path: String,
}

/// Filters every manifest record, writes the filtered recordings and the
/// segment manifest, and returns the segments.
pub fn run_preprocess(cfg: &PipelineConfig) -> Result<Vec<Segment>> {
    write_effective_config(cfg)?;
    preprocess(cfg)
}

fn preprocess(cfg: &PipelineConfig) -> Result<Vec<Segment>> {
    let manifest = manifest_path(cfg);
    if !manifest.exists() {
        return Err(Error::Validation(format!(
            "dataset manifest {} not found; run `synth` or set data.manifest",
            manifest.display()
        )));
    }
    let entries = read_manifest(&manifest)?;
    if entries.is_empty() {
        return Err(Error::Validation(format!("no records in manifest {}", manifest.display())));
    }
    let missing: Vec<String> = entries
        .iter()
        .filter(|e| !e.path.is_file())
        .map(|e| e.path.display().to_string())
        .collect();
    if !missing.is_empty() {
        return Err(Error::Validation(format!("missing signal files: {}", missing.join(", "))));
    }
    let p = &cfg.preprocess;
    let records = map_ordered(&entries, |_, e| {
        let rec = load_signal(&e.path, e.sampling_rate_hz, &e.label)?;
        notch_filter(&remove_baseline(&rec, p.w1_ms, p.w2_ms)?, p.f0_hz, p.q)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let mut seen = BTreeSet::new();
    for r in &records {
        if !seen.insert(r.source_id.as_str()) {
            return Err(Error::Validation(format!(
                "two manifest records share the file stem {:?}",
                r.source_id
            )));
        }
    }

    let out = out_dir(cfg)?;
    let dir = out.join(PREPROCESSED_DIR);
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let seg_path = out.join(SEGMENTS_CSV);
    let mut w = csv::Writer::from_path(&seg_path).map_err(|e| csv_error(&seg_path, e))?;
    let mut segments = Vec::new();
    for rec in &records {
        let rel = format!("{PREPROCESSED_DIR}/{}.txt", rec.source_id);
        write_samples(out.join(&rel), &rec.samples)?;
        for s in segment(rec, p.segment_seconds)? {
            w.serialize(SegmentRow {
                segment: segments.len(),
                source_id: s.source_id.clone(),
                label: s.label.clone(),
                start_index: s.start_index,
                length: s.samples.len(),
                path: rel.clone(),
            })
            .map_err(|e| csv_error(&seg_path, e))?;
            segments.push(s);
        }
    }
    w.flush().map_err(|e| Error::io(&seg_path, e))?;
    if segments.is_empty() {
        return Err(Error::Validation("preprocessing produced no segments".into()));
    }
    log::info!("{} records, {} segments", records.len(), segments.len());
    Ok(segments)
}

/// Reads the segments written by the preprocessing stage.
pub fn load_segments(cfg: &PipelineConfig) -> Result<Vec<Segment>> {
    let out = cfg.data.output_dir.as_path();
    let seg_path = out.join(SEGMENTS_CSV);
    if !seg_path.exists() {
        return Err(Error::Validation(format!(
            "segment manifest {} not found; run `preprocess` first",
            seg_path.display()
        )));
    }
    let mut reader = csv::Reader::from_path(&seg_path).map_err(|e| csv_error(&seg_path, e))?;
    let mut cache: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    let mut segments = Vec::new();
    for row in reader.deserialize::<SegmentRow>() {
        let row = row.map_err(|e| csv_error(&seg_path, e))?;
        if !cache.contains_key(&row.path) {
            let rec = load_signal(out.join(&row.path), 1.0, &row.label)?;
            cache.insert(row.path.clone(), rec.samples);
        }
        let samples = &cache[&row.path];
        let end = row.start_index + row.length;
        if end > samples.len() {
            return Err(Error::Validation(format!(
                "segment {} ends at sample {end} but {} has {} samples",
                row.segment,
                row.path,
                samples.len()
            )));
        }
        segments.push(Segment {
            samples: samples[row.start_index..end].to_vec(),
            label: row.label,
            source_id: row.source_id,
            start_index: row.start_index,
        });
    }
    if segments.is_empty() {
        return Err(Error::Validation(format!("{} lists no segments", seg_path.display())));
    }
    Ok(segments)
}

fn dataset(segments: &[Segment]) -> Result<SegmentDataset> {
    SegmentDataset::from_segments(segments)
}

/// Fits the extractor on every segment and writes `features.csv` and
/// `extractor.toml`.
pub fn run_features(cfg: &PipelineConfig) -> Result<(FeatureExtractor, DenseMatrix)> {
    write_effective_config(cfg)?;
    features(cfg, &dataset(&load_segments(cfg)?)?)
}

fn features(cfg: &PipelineConfig, data: &SegmentDataset) -> Result<(FeatureExtractor, DenseMatrix)> {
    log::warn!(
        "features.csv uses a bound and normalizer fitted on all segments; \
         use `evaluate` for cross-validated estimates"
    );
    let sets: Vec<&SodpPointSet> = data.points.iter().collect();
    let (extractor, raw) = FeatureExtractor::fit(&cfg.features.partition()?, &sets)?;
    let x = extractor.normalizer.apply_rows(&raw)?;
    let out = out_dir(cfg)?;
    let path = out.join("features.csv");
    let mut w = csv::Writer::from_path(&path).map_err(|e| csv_error(&path, e))?;
    let mut header: Vec<String> = (1..=x.cols()).map(|j| format!("f{j}")).collect();
    header.push("label".into());
    w.write_record(&header).map_err(|e| csv_error(&path, e))?;
    for (i, label) in data.labels.iter().enumerate() {
        let mut row: Vec<String> = x.row(i).iter().map(|v| v.to_string()).collect();
        row.push(label.clone());
        w.write_record(&row).map_err(|e| csv_error(&path, e))?;
    }
    w.flush().map_err(|e| Error::io(&path, e))?;
    extractor.save(out.join("extractor.toml"))?;
    Ok((extractor, x))
}

/// Reads a feature CSV: numeric columns followed by a `label` column.
pub fn read_feature_csv(path: impl AsRef<Path>) -> Result<(DenseMatrix, Vec<String>)> {
    let path = path.as_ref();
    let mut reader = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let header = reader.headers().map_err(|e| csv_error(path, e))?.clone();
    if header.iter().last() != Some("label") {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            message: "the last column must be `label`".into(),
        });
    }
    let cols = header.len() - 1;
    let mut data = Vec::new();
    let mut labels = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let line = i + 2;
        if rec.len() != cols + 1 {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line,
                message: format!("expected {} fields, found {}", cols + 1, rec.len()),
            });
        }
        for field in rec.iter().take(cols) {
            data.push(field.trim().parse::<f64>().map_err(|e| Error::Parse {
                path: path.to_path_buf(),
                line,
                message: format!("{field:?}: {e}"),
            })?);
        }
        labels.push(rec[cols].to_string());
    }
    Ok((DenseMatrix::new(labels.len(), cols, data)?, labels))
}

/// Trains on every segment and writes `model.toml`.
pub fn run_train(cfg: &PipelineConfig) -> Result<TrainOutcome> {
    write_effective_config(cfg)?;
    train(cfg, &dataset(&load_segments(cfg)?)?)
}

fn train(cfg: &PipelineConfig, data: &SegmentDataset) -> Result<TrainOutcome> {
    let all: Vec<usize> = (0..data.len()).collect();
    let out = fit_fold(data, &all, &cfg.features.partition()?, &cfg.model.train_config())?;
    save_model(&out.model, out_dir(cfg)?.join("model.toml"))?;
    Ok(out)
}

fn write_report(cfg: &PipelineConfig, report: &CvReport) -> Result<()> {
    let out = out_dir(cfg)?;
    write(&out.join("report.csv"), &fold_report_csv(report)?)?;
    write(&out.join("summary.toml"), &summary_toml(report)?)
}

/// Cross-validates with per-fold feature fitting, or, when `eval.model` is
/// set, scores that model on a feature CSV. Writes `report.csv` and
/// `summary.toml`.
pub fn run_evaluate(cfg: &PipelineConfig) -> Result<CvReport> {
    write_effective_config(cfg)?;
    if let Some(model_path) = &cfg.eval.model {
        let features = cfg
            .eval
            .features
            .clone()
            .unwrap_or_else(|| cfg.data.output_dir.join("features.csv"));
        let report = evaluate_model(model_path, &features, &cfg.eval.positive_class)?;
        write_report(cfg, &report)?;
        return Ok(report);
    }
    evaluate(cfg, &dataset(&load_segments(cfg)?)?)
}

fn evaluate(cfg: &PipelineConfig, data: &SegmentDataset) -> Result<CvReport> {
    let report = cross_validate(
        data,
        &cfg.features.partition()?,
        &cfg.model.train_config(),
        &cfg.eval.eval_config(),
    )?;
    write_report(cfg, &report)?;
    Ok(report)
}

/// Scores a saved model on already extracted features.
pub fn evaluate_model(model_path: &Path, features: &Path, positive: &str) -> Result<CvReport> {
    let model = load_model(model_path)?;
    let (x, labels) = read_feature_csv(features)?;
    if x.cols() != model.feature_count() {
        return Err(Error::dim(
            "model features vs feature file columns",
            format!("{} ({})", model.feature_count(), model_path.display()),
            format!("{} ({})", x.cols(), features.display()),
        ));
    }
    let classes = model.class_labels.clone();
    let mut cm = ConfusionMatrix::new(&classes);
    for (label, p) in labels.iter().zip(model.predict_indices(&x)?) {
        cm.record(cm.class_index(label)?, p);
    }
    let metrics = metrics(&cm, positive)?;
    Ok(CvReport {
        classes,
        positive_class: positive.to_string(),
        folds: vec![FoldReport {
            fold: 0,
            lambda: model.lambda,
            press: None,
            train_size: 0,
            test_size: labels.len(),
            confusion: cm.clone(),
            sweep: None,
        }],
        aggregate: cm,
        metrics,
    })
}

/// Cross-validates at each forced lambda of the configured grid and writes
/// `sweep.csv` and `sweep_chart.txt`.
pub fn run_sweep(cfg: &PipelineConfig) -> Result<Vec<SweepRow>> {
    write_effective_config(cfg)?;
    sweep(cfg, &dataset(&load_segments(cfg)?)?)
}

fn sweep(cfg: &PipelineConfig, data: &SegmentDataset) -> Result<Vec<SweepRow>> {
    let rows = lambda_sweep(
        data,
        &cfg.features.partition()?,
        &cfg.model.train_config(),
        &cfg.eval.eval_config(),
        &cfg.model.exponents(),
    )?;
    let out = out_dir(cfg)?;
    write(&out.join("sweep.csv"), &sweep_csv(&rows)?)?;
    write(&out.join("sweep_chart.txt"), &sweep_chart(&rows))?;
    Ok(rows)
}

pub struct PipelineOutcome {
    pub report: CvReport,
    pub sweep: Vec<SweepRow>,
    pub model: TrainOutcome,
}

/// Synthesizes data when no manifest is configured, then preprocesses,
/// extracts features, cross-validates, sweeps lambda and trains the final
/// model.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<PipelineOutcome> {
    write_effective_config(cfg)?;
    if cfg.data.manifest.is_none() {
        crate::synth::write_dataset(&cfg.synth, cfg.data.output_dir.join("synth"))?;
    }
    let data = dataset(&preprocess(cfg)?)?;
    features(cfg, &data)?;
    let report = evaluate(cfg, &data)?;
    let sweep = sweep(cfg, &data)?;
    let model = train(cfg, &data)?;
    Ok(PipelineOutcome { report, sweep, model })
}
