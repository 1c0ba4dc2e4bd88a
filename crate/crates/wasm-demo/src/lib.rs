//! Browser bindings for three steps of the pipeline: cleaning a synthetic
//! recording, building its difference plot and region features, and the
//! PRESS curve of a regularized Hessenberg ELM over the lambda grid.
//!
//! The plain functions are usable from Rust; the `#[wasm_bindgen]` wrappers
//! convert errors into JS exceptions.

use hesselm::config::PreprocessConfig;
use hesselm::elm::{train, TrainConfig, Variant};
use hesselm::features::{fit_bound, sodp, Aggregation, FeatureExtractor, PartitionKind, PartitionSpec};
use hesselm::signal::{notch_filter, remove_baseline, segment, SignalRecord};
use hesselm::synth::{self, SynthConfig};
use wasm_bindgen::prelude::*;

pub const DEMO_RATE_HZ: f64 = 250.0;

/// A raw synthetic recording and the same samples after baseline removal and
/// the notch filter.
#[wasm_bindgen]
pub struct Cleaned {
    raw: Vec<f64>,
    clean: Vec<f64>,
}

#[wasm_bindgen]
impl Cleaned {
    #[wasm_bindgen(getter)]
    pub fn raw(&self) -> Vec<f64> {
        self.raw.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn clean(&self) -> Vec<f64> {
        self.clean.clone()
    }
}

pub fn clean_recording(label: &str, seconds: f64, seed: u64) -> hesselm::Result<Cleaned> {
    let n = (seconds * DEMO_RATE_HZ).round() as usize;
    let raw = synth::synth_record(label, n, DEMO_RATE_HZ, 60.0, seed)?;
    let p = PreprocessConfig::default();
    let rec = SignalRecord::new(raw.clone(), DEMO_RATE_HZ, label, "demo")?;
    let clean = notch_filter(&remove_baseline(&rec, p.w1_ms, p.w2_ms)?, p.f0_hz, p.q)?.samples;
    Ok(Cleaned { raw, clean })
}

/// Difference-plot points (interleaved `a, b`), the fitted bound and the
/// region features of one segment.
#[wasm_bindgen]
pub struct Plot {
    points: Vec<f64>,
    regions: Vec<u32>,
    features: Vec<f64>,
    bound: f64,
}

#[wasm_bindgen]
impl Plot {
    #[wasm_bindgen(getter)]
    pub fn points(&self) -> Vec<f64> {
        self.points.clone()
    }

    /// Region index of each point.
    #[wasm_bindgen(getter)]
    pub fn regions(&self) -> Vec<u32> {
        self.regions.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn features(&self) -> Vec<f64> {
        self.features.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn bound(&self) -> f64 {
        self.bound
    }
}

/// The bound is fitted on `samples` alone, as if it were the whole training set.
pub fn difference_plot(samples: &[f64], kind: &str, region_count: usize, aggregation: &str) -> hesselm::Result<Plot> {
    let kind: PartitionKind = kind.parse()?;
    let points = sodp(samples)?;
    let bound = fit_bound([&points], kind)?;
    let spec = PartitionSpec::new(kind, region_count, aggregation.parse::<Aggregation>()?)?.with_bound(bound)?;
    let regions = points
        .points
        .iter()
        .map(|&p| spec.region_of(p).map(|r| r as u32))
        .collect::<hesselm::Result<Vec<_>>>()?;
    Ok(Plot {
        features: spec.extract(&points)?,
        points: points.points.iter().flat_map(|&(a, b)| [a, b]).collect(),
        regions,
        bound,
    })
}

/// PRESS at each candidate lambda; excluded candidates are left out.
#[wasm_bindgen]
pub struct PressCurve {
    lambdas: Vec<f64>,
    press: Vec<f64>,
    best_lambda: f64,
    samples: usize,
}

#[wasm_bindgen]
impl PressCurve {
    #[wasm_bindgen(getter)]
    pub fn lambdas(&self) -> Vec<f64> {
        self.lambdas.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn press(&self) -> Vec<f64> {
        self.press.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn best_lambda(&self) -> f64 {
        self.best_lambda
    }

    #[wasm_bindgen(getter)]
    pub fn samples(&self) -> usize {
        self.samples
    }
}

/// Trains an r-hesselm on a small synthetic dataset (two recordings per
/// class, `segments_per_record` ten-second segments each).
pub fn press_curve(kind: &str, hidden: usize, segments_per_record: usize, seed: u64) -> hesselm::Result<PressCurve> {
    let cfg = SynthConfig {
        records_per_class: 2,
        segments_per_record,
        seed,
        ..SynthConfig::default()
    };
    let p = PreprocessConfig::default();
    let mut sets = Vec::new();
    let mut labels = Vec::new();
    for rec in synth::generate(&cfg)? {
        let clean = notch_filter(&remove_baseline(&rec, p.w1_ms, p.w2_ms)?, p.f0_hz, p.q)?;
        for s in segment(&clean, p.segment_seconds)? {
            sets.push(sodp(&s.samples)?);
            labels.push(s.label);
        }
    }
    let refs: Vec<_> = sets.iter().collect();
    let spec = PartitionSpec::with_default_regions(kind.parse()?, Aggregation::Probability);
    let (extractor, _) = FeatureExtractor::fit(&spec, &refs)?;
    let x = extractor.transform_all(&refs)?;
    let config = TrainConfig {
        variant: Variant::RHessElm,
        hidden,
        seed,
        ..TrainConfig::default()
    };
    let outcome = train(&x, &labels, &config)?;
    let sweep = outcome.sweep.expect("regularized variants report a sweep");
    Ok(PressCurve {
        lambdas: sweep.candidates.iter().map(|c| c.0).collect(),
        press: sweep.candidates.iter().map(|c| c.1).collect(),
        best_lambda: sweep.best_lambda,
        samples: labels.len(),
    })
}

fn js(e: hesselm::Error) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen(js_name = cleanRecording)]
pub fn clean_recording_js(label: &str, seconds: f64, seed: u32) -> Result<Cleaned, JsError> {
    clean_recording(label, seconds, seed.into()).map_err(js)
}

#[wasm_bindgen(js_name = differencePlot)]
pub fn difference_plot_js(samples: &[f64], kind: &str, region_count: usize, aggregation: &str) -> Result<Plot, JsError> {
    difference_plot(samples, kind, region_count, aggregation).map_err(js)
}

#[wasm_bindgen(js_name = pressCurve)]
pub fn press_curve_js(kind: &str, hidden: usize, segments_per_record: usize, seed: u32) -> Result<PressCurve, JsError> {
    press_curve(kind, hidden, segments_per_record, seed.into()).map_err(js)
}
