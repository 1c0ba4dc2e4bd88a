//! Second-order difference plots (SODP) and region-occupancy features.
//!
//! A segment `x` is mapped to points `(a, b) = (x[i+1] - x[i], x[i+2] - x[i+1])`.
//! The plane is then partitioned four ways and the occupancy of each region
//! becomes a feature:
//!
//! | kind     | regions                                                     |
//! |----------|-------------------------------------------------------------|
//! | circled  | `K` concentric annuli of equal width out to the bound       |
//! | squared  | `K` nested square bands (Chebyshev distance)                |
//! | inclined | one central disc of radius `bound/K` plus `K-1` angular sectors |
//! | grid     | `g × g` uniform cells over `[-bound, bound]²`               |
//!
//! Points outside the bound are clamped into the outermost region so that
//! every point is counted exactly once.

mod extractor;
mod normalize;

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use extractor::{raw_features, FeatureExtractor, EXTRACTOR_FORMAT_VERSION};
pub use normalize::{fit_normalizer, Normalizer};

/// Consecutive-difference pairs of one segment.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SodpPointSet {
    pub points: Vec<(f64, f64)>,
}

impl SodpPointSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Builds the second-order difference plot of a segment.
pub fn sodp(x: &[f64]) -> Result<SodpPointSet> {
    if x.len() < 3 {
        return Err(Error::Validation(format!(
            "a difference plot needs at least 3 samples, got {}",
            x.len()
        )));
    }
    let points = x
        .windows(3)
        .map(|w| (w[1] - w[0], w[2] - w[1]))
        .collect();
    Ok(SodpPointSet { points })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PartitionKind {
    Circled,
    Squared,
    Inclined,
    Grid,
}

impl PartitionKind {
    pub const ALL: [PartitionKind; 4] = [
        PartitionKind::Circled,
        PartitionKind::Squared,
        PartitionKind::Inclined,
        PartitionKind::Grid,
    ];

    /// Region count used when none is configured: 15 annuli, 15 square bands,
    /// 17 inclined regions (16 sectors + disc), an 8 × 8 grid.
    pub fn default_region_count(self) -> usize {
        match self {
            PartitionKind::Circled | PartitionKind::Squared => 15,
            PartitionKind::Inclined => 17,
            PartitionKind::Grid => 8,
        }
    }

    /// Per-point extent used to fit the bound.
    pub fn extent(self, (a, b): (f64, f64)) -> f64 {
        match self {
            PartitionKind::Circled | PartitionKind::Inclined => a.hypot(b),
            PartitionKind::Squared | PartitionKind::Grid => a.abs().max(b.abs()),
        }
    }

    pub fn short_name(self) -> &'static str {
        match self {
            PartitionKind::Circled => "CEM",
            PartitionKind::Squared => "SEM",
            PartitionKind::Inclined => "IEM",
            PartitionKind::Grid => "GEM",
        }
    }
}

impl fmt::Display for PartitionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PartitionKind::Circled => "circled",
            PartitionKind::Squared => "squared",
            PartitionKind::Inclined => "inclined",
            PartitionKind::Grid => "grid",
        })
    }
}

impl FromStr for PartitionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "circled" | "cem" => Ok(PartitionKind::Circled),
            "squared" | "sem" => Ok(PartitionKind::Squared),
            "inclined" | "iem" => Ok(PartitionKind::Inclined),
            "grid" | "gem" => Ok(PartitionKind::Grid),
            other => Err(Error::Validation(format!("unknown partition kind {other:?}"))),
        }
    }
}

/// How region tallies become feature values.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Aggregation {
    Count,
    #[default]
    Probability,
    /// `-p ln p` per region, with `0 ln 0 = 0`.
    Shannon,
}

impl FromStr for Aggregation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "count" => Ok(Aggregation::Count),
            "probability" => Ok(Aggregation::Probability),
            "shannon" => Ok(Aggregation::Shannon),
            other => Err(Error::Validation(format!("unknown aggregation mode {other:?}"))),
        }
    }
}

/// Partition geometry. `bound` is `None` until fitted on training data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionSpec {
    pub kind: PartitionKind,
    /// Regions for circled/squared/inclined; cells per axis for grid.
    pub region_count: usize,
    pub aggregation: Aggregation,
    pub bound: Option<f64>,
}

impl PartitionSpec {
    pub fn new(kind: PartitionKind, region_count: usize, aggregation: Aggregation) -> Result<Self> {
        if region_count < 2 {
            return Err(Error::Validation(format!(
                "{kind} partition needs at least 2 regions, got {region_count}"
            )));
        }
        Ok(Self {
            kind,
            region_count,
            aggregation,
            bound: None,
        })
    }

    pub fn with_default_regions(kind: PartitionKind, aggregation: Aggregation) -> Self {
        Self::new(kind, kind.default_region_count(), aggregation).expect("defaults are valid")
    }

    pub fn with_bound(mut self, bound: f64) -> Result<Self> {
        if !(bound > 0.0) || !bound.is_finite() {
            return Err(Error::Validation(format!("partition bound must be positive, got {bound}")));
        }
        self.bound = Some(bound);
        Ok(self)
    }

    pub fn feature_count(&self) -> usize {
        match self.kind {
            PartitionKind::Grid => self.region_count * self.region_count,
            _ => self.region_count,
        }
    }

    fn fitted_bound(&self) -> Result<f64> {
        self.bound
            .ok_or_else(|| Error::Validation(format!("{} partition bound has not been fitted", self.kind)))
    }

    /// Index of the region that owns `point`.
    pub fn region_of(&self, point: (f64, f64)) -> Result<usize> {
        Ok(region_index(self.kind, self.region_count, self.fitted_bound()?, point))
    }

    /// Tallies each region, then aggregates.
    pub fn extract(&self, points: &SodpPointSet) -> Result<Vec<f64>> {
        let bound = self.fitted_bound()?;
        let mut tally = vec![0usize; self.feature_count()];
        for &p in &points.points {
            tally[region_index(self.kind, self.region_count, bound, p)] += 1;
        }
        if points.is_empty() {
            log::warn!("empty difference plot; returning all-zero {} features", self.kind);
            return Ok(vec![0.0; tally.len()]);
        }
        let total = points.len() as f64;
        Ok(tally
            .into_iter()
            .map(|c| match self.aggregation {
                Aggregation::Count => c as f64,
                Aggregation::Probability => c as f64 / total,
                Aggregation::Shannon => {
                    let p = c as f64 / total;
                    if p > 0.0 {
                        -p * p.ln()
                    } else {
                        0.0
                    }
                }
            })
            .collect())
    }
}

/// Shell index in `0..k` for a distance measure: `ceil(d·k/bound) - 1`,
/// with the origin in the first shell and overflow in the last.
fn shell(d: f64, k: usize, bound: f64) -> usize {
    let idx = (d * k as f64 / bound).ceil();
    (idx.max(1.0).min(k as f64) as usize) - 1
}

fn region_index(kind: PartitionKind, k: usize, bound: f64, (a, b): (f64, f64)) -> usize {
    match kind {
        PartitionKind::Circled => shell(a.hypot(b), k, bound),
        PartitionKind::Squared => shell(a.abs().max(b.abs()), k, bound),
        PartitionKind::Inclined => {
            if a.hypot(b) <= bound / k as f64 {
                0
            } else {
                1 + sector(a, b, k - 1)
            }
        }
        PartitionKind::Grid => {
            let edge = |c: usize| -bound + 2.0 * bound * c as f64 / k as f64;
            let cell = |v: f64| {
                let c = ((v + bound) / (2.0 * bound) * k as f64).floor();
                let mut c = c.max(0.0).min((k - 1) as f64) as usize;
                if c > 0 && v < edge(c) {
                    c -= 1;
                } else if c + 1 < k && v >= edge(c + 1) {
                    c += 1;
                }
                c
            };
            cell(b) * k + cell(a)
        }
    }
}

/// Sector in `0..sectors`, sector 0 starting at angle -π. Angles live in
/// (-π, π]; sectors are half-open `[lo, hi)` except the last, closed at π.
fn sector(a: f64, b: f64, sectors: usize) -> usize {
    let mut theta = b.atan2(a);
    if theta <= -PI {
        theta = PI;
    }
    let width = 2.0 * PI / sectors as f64;
    let edge = |s: usize| -PI + s as f64 * width;
    let mut s = (((theta + PI) / width).floor().max(0.0) as usize).min(sectors - 1);
    // The division can round across an edge; settle against the edges themselves.
    if s > 0 && theta < edge(s) {
        s -= 1;
    } else if s + 1 < sectors && theta >= edge(s + 1) {
        s += 1;
    }
    s
}

/// Nearest-rank 99th percentile of the per-point extents over all training
/// points. Falls back to the largest extent when the percentile is zero.
pub fn fit_bound<'a>(
    training: impl IntoIterator<Item = &'a SodpPointSet>,
    kind: PartitionKind,
) -> Result<f64> {
    let mut extents: Vec<f64> = training
        .into_iter()
        .flat_map(|s| s.points.iter().map(move |&p| kind.extent(p)))
        .collect();
    if extents.is_empty() {
        return Err(Error::Validation("cannot fit a partition bound without training points".into()));
    }
    extents.sort_by(f64::total_cmp);
    let n = extents.len();
    let rank = ((0.99 * n as f64).ceil() as usize).clamp(1, n);
    let p99 = extents[rank - 1];
    let max = extents[n - 1];
    if p99 > 0.0 {
        Ok(p99)
    } else if max > 0.0 {
        Ok(max)
    } else {
        Err(Error::Validation(
            "degenerate training data: every difference-plot point is at the origin".into(),
        ))
    }
}
