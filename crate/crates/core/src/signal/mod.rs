//! Waveform ingestion and preprocessing: baseline-wander removal with a
//! cascade of two median filters, power-line suppression with a zero-phase
//! notch, and fixed-length segmentation.

mod median;
mod notch;

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use median::median_filter;
pub use notch::Biquad;

/// Uniformly sampled single-lead waveform.
#[derive(Clone, Debug, PartialEq)]
pub struct SignalRecord {
    pub samples: Vec<f64>,
    pub sampling_rate_hz: f64,
    pub label: String,
    pub source_id: String,
}

impl SignalRecord {
    pub fn new(
        samples: Vec<f64>,
        sampling_rate_hz: f64,
        label: impl Into<String>,
        source_id: impl Into<String>,
    ) -> Result<Self> {
        if !(sampling_rate_hz > 0.0) || !sampling_rate_hz.is_finite() {
            return Err(Error::Validation(format!(
                "sampling rate must be positive, got {sampling_rate_hz}"
            )));
        }
        if samples.is_empty() {
            return Err(Error::Validation("signal has no samples".into()));
        }
        if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::Validation(format!("sample {i} is not finite")));
        }
        Ok(Self {
            samples,
            sampling_rate_hz,
            label: label.into(),
            source_id: source_id.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    fn with_samples(&self, samples: Vec<f64>) -> Self {
        Self {
            samples,
            sampling_rate_hz: self.sampling_rate_hz,
            label: self.label.clone(),
            source_id: self.source_id.clone(),
        }
    }
}

/// Fixed-length window cut from a record.
#[derive(Clone, Debug, PartialEq)]
pub struct Segment {
    pub samples: Vec<f64>,
    pub label: String,
    pub source_id: String,
    pub start_index: usize,
}

/// Reads one sample per line. A single non-numeric first line is treated as a
/// header; blank lines are skipped. The source id is the file stem.
pub fn load_signal(path: impl AsRef<Path>, sampling_rate_hz: f64, label: &str) -> Result<SignalRecord> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let samples = parse_samples(&text, path)?;
    if samples.is_empty() {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: 0,
            message: "file contains no samples".into(),
        });
    }
    let source_id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    SignalRecord::new(samples, sampling_rate_hz, label, source_id)
}

fn parse_samples(text: &str, path: &Path) -> Result<Vec<f64>> {
    let mut samples = Vec::new();
    let mut first_content = true;
    for (lineno, line) in text.lines().enumerate() {
        // Single-column CSV exports sometimes carry a trailing comma.
        let field = line.trim().trim_end_matches(',').trim();
        if field.is_empty() {
            continue;
        }
        match field.parse::<f64>() {
            Ok(v) if v.is_finite() => samples.push(v),
            Ok(_) => {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line: lineno + 1,
                    message: format!("non-finite sample {field:?}"),
                })
            }
            Err(_) if first_content => {}
            Err(_) => {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line: lineno + 1,
                    message: format!("not a number: {field:?}"),
                })
            }
        }
        first_content = false;
    }
    Ok(samples)
}

/// Writes one sample per line using the shortest exact decimal form.
pub fn write_samples(path: impl AsRef<Path>, samples: &[f64]) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::with_capacity(samples.len() * 20);
    for v in samples {
        out.push_str(&format!("{v}\n"));
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Converts a window length in milliseconds to an odd sample count.
pub fn window_samples(ms: f64, rate_hz: f64) -> usize {
    let w = (ms * rate_hz / 1000.0).round().max(1.0) as usize;
    if w % 2 == 0 {
        w + 1
    } else {
        w
    }
}

/// Subtracts the baseline estimated by two cascaded median filters
/// (`short_ms` then `long_ms`).
pub fn remove_baseline(s: &SignalRecord, short_ms: f64, long_ms: f64) -> Result<SignalRecord> {
    if !(short_ms > 0.0 && long_ms > 0.0) {
        return Err(Error::Validation(format!(
            "median windows must be positive, got {short_ms} ms and {long_ms} ms"
        )));
    }
    if !(short_ms < long_ms) {
        return Err(Error::Validation(format!(
            "first median window ({short_ms} ms) must be shorter than the second ({long_ms} ms)"
        )));
    }
    let w1 = window_samples(short_ms, s.sampling_rate_hz);
    let w2 = window_samples(long_ms, s.sampling_rate_hz);
    if w2 > s.len() {
        return Err(Error::Validation(format!(
            "median window of {w2} samples is longer than the {}-sample signal {}",
            s.len(),
            s.source_id
        )));
    }
    let baseline = median_filter(&median_filter(&s.samples, w1), w2);
    let out = s.samples.iter().zip(&baseline).map(|(x, b)| x - b).collect();
    Ok(s.with_samples(out))
}

/// Zero-phase biquad notch at `f0_hz` with quality factor `q`.
pub fn notch_filter(s: &SignalRecord, f0_hz: f64, q: f64) -> Result<SignalRecord> {
    let nyquist = s.sampling_rate_hz / 2.0;
    if !(f0_hz > 0.0 && f0_hz < nyquist) {
        return Err(Error::Validation(format!(
            "notch frequency {f0_hz} Hz must lie in (0, {nyquist}) Hz"
        )));
    }
    if !(q > 0.0) || !q.is_finite() {
        return Err(Error::Validation(format!("notch quality factor must be positive, got {q}")));
    }
    let filter = Biquad::notch(f0_hz, q, s.sampling_rate_hz);
    Ok(s.with_samples(filter.filtfilt(&s.samples)))
}

/// Segment length in samples for a given duration.
pub fn segment_len(segment_seconds: f64, rate_hz: f64) -> usize {
    (segment_seconds * rate_hz).round().max(0.0) as usize
}

/// Cuts consecutive non-overlapping windows; a trailing partial window is
/// dropped.
pub fn segment(s: &SignalRecord, segment_seconds: f64) -> Result<Vec<Segment>> {
    let len = segment_len(segment_seconds, s.sampling_rate_hz);
    if len < 3 {
        return Err(Error::Validation(format!(
            "segments of {segment_seconds} s at {} Hz hold {len} samples; at least 3 are needed",
            s.sampling_rate_hz
        )));
    }
    let segments: Vec<Segment> = s
        .samples
        .chunks_exact(len)
        .enumerate()
        .map(|(i, chunk)| Segment {
            samples: chunk.to_vec(),
            label: s.label.clone(),
            source_id: s.source_id.clone(),
            start_index: i * len,
        })
        .collect();
    if segments.is_empty() {
        log::warn!(
            "record {} has {} samples, shorter than one {len}-sample segment; no segments produced",
            s.source_id,
            s.len()
        );
    }
    Ok(segments)
}

/// One row of a dataset manifest (`path,label,sampling_rate_hz`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub path: PathBuf,
    pub label: String,
    pub sampling_rate_hz: f64,
}

/// Reads a dataset manifest. Relative signal paths are resolved against the
/// manifest's directory.
pub fn read_manifest(path: impl AsRef<Path>) -> Result<Vec<ManifestEntry>> {
    let path = path.as_ref();
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let mut entries = Vec::new();
    for row in reader.deserialize::<ManifestEntry>() {
        let mut entry = row.map_err(|e| csv_error(path, e))?;
        if entry.path.is_relative() {
            entry.path = base.join(&entry.path);
        }
        entries.push(entry);
    }
    Ok(entries)
}

pub(crate) fn csv_error(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        kind => Error::Parse {
            path: path.to_path_buf(),
            line,
            message: format!("{kind:?}"),
        },
    }
}
