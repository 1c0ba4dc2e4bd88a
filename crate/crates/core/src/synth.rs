//! Synthetic two-class ECG-like recordings.
//!
//! Beats are sums of Gaussian waves (P, Q, R, S, T). `NORMAL` recordings have
//! tall, narrow R waves and a regular rhythm with slow respiratory modulation.
//! `CHF` recordings have lower, wider QRS complexes, an irregular rhythm and
//! occasional wide ectopic beats. Every recording also carries white noise,
//! baseline wander and power-line interference, so the preprocessing stage
//! has something to remove.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::signal::SignalRecord;
use crate::{Error, Result};

pub const CLASS_CHF: &str = "CHF";
pub const CLASS_NORMAL: &str = "NORMAL";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub records_per_class: usize,
    pub segments_per_record: usize,
    pub segment_seconds: f64,
    pub sampling_rate_hz: f64,
    pub line_hz: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            records_per_class: 4,
            segments_per_record: 50,
            segment_seconds: 10.0,
            sampling_rate_hz: 250.0,
            line_hz: 60.0,
            seed: 7,
        }
    }
}

impl SynthConfig {
    fn validate(&self) -> Result<()> {
        if self.records_per_class == 0 || self.segments_per_record == 0 {
            return Err(Error::Validation("synthetic dataset needs at least one record and segment".into()));
        }
        if !(self.sampling_rate_hz > 0.0) || !(self.segment_seconds > 0.0) {
            return Err(Error::Validation("sampling rate and segment length must be positive".into()));
        }
        if !(self.line_hz > 0.0 && self.line_hz < self.sampling_rate_hz / 2.0) {
            return Err(Error::Validation(format!(
                "line frequency {} Hz must lie below Nyquist ({} Hz)",
                self.line_hz,
                self.sampling_rate_hz / 2.0
            )));
        }
        Ok(())
    }

    pub fn samples_per_record(&self) -> usize {
        (self.segments_per_record as f64 * self.segment_seconds * self.sampling_rate_hz).round() as usize
    }
}

/// One Gaussian wave: amplitude, offset from the R peak (s), width (s).
#[derive(Clone, Copy)]
struct Wave(f64, f64, f64);

struct Profile {
    heart_rate: f64,
    r_amp: f64,
    qrs_width: f64,
    t_amp: f64,
    st_shift: f64,
    rr_jitter: f64,
    resp_depth: f64,
    ectopic_rate: f64,
}

fn profile(label: &str, rng: &mut ChaCha8Rng) -> Profile {
    if label == CLASS_NORMAL {
        Profile {
            heart_rate: rng.random_range(58.0..80.0),
            r_amp: rng.random_range(1.0..1.3),
            qrs_width: rng.random_range(0.008..0.011),
            t_amp: rng.random_range(0.25..0.35),
            st_shift: 0.0,
            rr_jitter: 0.015,
            resp_depth: 0.05,
            ectopic_rate: 0.0,
        }
    } else {
        Profile {
            heart_rate: rng.random_range(70.0..95.0),
            r_amp: rng.random_range(0.8..1.1),
            qrs_width: rng.random_range(0.018..0.026),
            t_amp: rng.random_range(-0.15..-0.05),
            st_shift: rng.random_range(-0.08..-0.04),
            rr_jitter: 0.10,
            resp_depth: 0.01,
            ectopic_rate: 0.06,
        }
    }
}

fn add_wave(x: &mut [f64], fs: f64, center: f64, Wave(amp, offset, width): Wave) {
    let t0 = center + offset;
    let reach = 4.0 * width;
    let lo = (((t0 - reach) * fs).floor().max(0.0)) as usize;
    let hi = (((t0 + reach) * fs).ceil().max(0.0) as usize).min(x.len());
    for (i, v) in x.iter_mut().enumerate().take(hi).skip(lo) {
        let d = (i as f64 / fs - t0) / width;
        *v += amp * (-0.5 * d * d).exp();
    }
}

/// Generates one recording of `n` samples.
pub fn synth_record(label: &str, n: usize, fs: f64, line_hz: f64, seed: u64) -> Result<Vec<f64>> {
    if label != CLASS_CHF && label != CLASS_NORMAL {
        return Err(Error::Validation(format!("synthetic class must be {CLASS_CHF} or {CLASS_NORMAL}, got {label:?}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = profile(label, &mut rng);
    let unit = Normal::new(0.0, 1.0).expect("unit normal");
    let duration = n as f64 / fs;
    let rr_mean = 60.0 / p.heart_rate;
    let resp_hz = rng.random_range(0.2..0.33);
    let mut x = vec![0.0; n];

    let mut t = rng.random_range(0.2..0.2 + rr_mean);
    while t < duration + 0.5 {
        let jitter = |rng: &mut ChaCha8Rng| 1.0 + 0.05 * unit.sample(rng);
        let ectopic = p.ectopic_rate > 0.0 && rng.random_bool(p.ectopic_rate);
        if ectopic {
            let w = p.qrs_width * 2.5;
            add_wave(&mut x, fs, t, Wave(-0.9 * jitter(&mut rng), 0.0, w));
            add_wave(&mut x, fs, t, Wave(0.35 * jitter(&mut rng), 0.06, w));
            add_wave(&mut x, fs, t, Wave(-0.3, 0.3, 0.07));
        } else {
            let a = p.r_amp * jitter(&mut rng);
            add_wave(&mut x, fs, t, Wave(0.15 * jitter(&mut rng), -0.2, 0.025));
            add_wave(&mut x, fs, t, Wave(-0.12 * a, -0.03, 0.01));
            add_wave(&mut x, fs, t, Wave(a, 0.0, p.qrs_width));
            add_wave(&mut x, fs, t, Wave(-0.2 * a, 0.035, 0.012));
            add_wave(&mut x, fs, t, Wave(p.st_shift, 0.13, 0.04));
            add_wave(&mut x, fs, t, Wave(p.t_amp * jitter(&mut rng), 0.26, 0.06));
        }
        let resp = 1.0 + p.resp_depth * (2.0 * PI * resp_hz * t).sin();
        let mut rr = rr_mean * resp * (1.0 + p.rr_jitter * unit.sample(&mut rng));
        if ectopic {
            rr *= 1.6;
        } else if p.ectopic_rate > 0.0 && rng.random_bool(p.ectopic_rate) {
            rr *= 0.65;
        }
        t += rr.clamp(0.4 * rr_mean, 2.0 * rr_mean);
    }

    // Electrode gain and a slow postural drift of the amplitude.
    let gain = rng.random_range(0.5..2.0);
    let drift_period = rng.random_range(30.0..90.0);
    let drift_phase = rng.random_range(0.0..2.0 * PI);
    for (i, v) in x.iter_mut().enumerate() {
        let t = i as f64 / fs;
        *v *= gain * (0.7 * (2.0 * PI * t / drift_period + drift_phase).sin()).exp();
    }
    let noise = rng.random_range(0.003..0.008);
    let wander_amp = rng.random_range(0.15..0.4);
    let wander_hz = rng.random_range(0.15..0.35);
    let wander_phase = rng.random_range(0.0..2.0 * PI);
    let line_amp = rng.random_range(0.03..0.08);
    let line_phase = rng.random_range(0.0..2.0 * PI);
    for (i, v) in x.iter_mut().enumerate() {
        let t = i as f64 / fs;
        *v += noise * unit.sample(&mut rng)
            + wander_amp * (2.0 * PI * wander_hz * t + wander_phase).sin()
            + line_amp * (2.0 * PI * line_hz * t + line_phase).sin();
        // Six decimals, as a text export would carry.
        *v = (*v * 1e6).round() / 1e6;
    }
    Ok(x)
}

/// All recordings of the dataset, `CHF` first, in a deterministic order.
pub fn generate(config: &SynthConfig) -> Result<Vec<SignalRecord>> {
    config.validate()?;
    let mut seeds = ChaCha8Rng::seed_from_u64(config.seed);
    let n = config.samples_per_record();
    let mut records = Vec::new();
    for label in [CLASS_CHF, CLASS_NORMAL] {
        for r in 0..config.records_per_class {
            let samples = synth_record(label, n, config.sampling_rate_hz, config.line_hz, seeds.random())?;
            records.push(SignalRecord::new(
                samples,
                config.sampling_rate_hz,
                label,
                &format!("{}_{:02}", label.to_ascii_lowercase(), r),
            )?);
        }
    }
    Ok(records)
}

/// Writes one text file per recording plus `manifest.csv` into `dir`.
/// Returns the manifest path.
pub fn write_dataset(config: &SynthConfig, dir: impl AsRef<Path>) -> Result<PathBuf> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let records = generate(config)?;
    let manifest = dir.join("manifest.csv");
    let mut w = csv::Writer::from_path(&manifest).map_err(|e| crate::signal::csv_error(&manifest, e))?;
    w.write_record(["path", "label", "sampling_rate_hz"])
        .map_err(|e| crate::signal::csv_error(&manifest, e))?;
    for rec in &records {
        let name = format!("{}.txt", rec.source_id);
        crate::signal::write_samples(dir.join(&name), &rec.samples)?;
        w.write_record([name, rec.label.clone(), rec.sampling_rate_hz.to_string()])
            .map_err(|e| crate::signal::csv_error(&manifest, e))?;
    }
    w.flush().map_err(|e| Error::io(&manifest, e))?;
    Ok(manifest)
}
