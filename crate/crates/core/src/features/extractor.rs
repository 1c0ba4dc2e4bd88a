use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{fit_bound, fit_normalizer, Normalizer, PartitionSpec, SodpPointSet};
use crate::linalg::DenseMatrix;
use crate::{Error, Result};

pub const EXTRACTOR_FORMAT_VERSION: u32 = 1;

/// Fitted partition geometry plus the normalizer learned on the same
/// training rows. Persisted with every model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureExtractor {
    pub partition: PartitionSpec,
    pub normalizer: Normalizer,
}

#[derive(Serialize, Deserialize)]
struct ExtractorDocument {
    format_version: u32,
    extractor: FeatureExtractor,
}

impl FeatureExtractor {
    /// Fits the bound and then the normalizer on `training` only. Returns the
    /// extractor and the raw (unnormalized) training features.
    pub fn fit(spec: &PartitionSpec, training: &[&SodpPointSet]) -> Result<(Self, DenseMatrix)> {
        let bound = fit_bound(training.iter().copied(), spec.kind)?;
        let partition = spec.clone().with_bound(bound)?;
        let raw = raw_features(&partition, training)?;
        let normalizer = fit_normalizer(&raw)?;
        Ok((Self { partition, normalizer }, raw))
    }

    pub fn feature_count(&self) -> usize {
        self.partition.feature_count()
    }

    pub fn raw(&self, points: &SodpPointSet) -> Result<Vec<f64>> {
        self.partition.extract(points)
    }

    pub fn transform(&self, points: &SodpPointSet) -> Result<Vec<f64>> {
        self.normalizer.apply(&self.raw(points)?)
    }

    pub fn transform_all(&self, sets: &[&SodpPointSet]) -> Result<DenseMatrix> {
        let raw = raw_features(&self.partition, sets)?;
        self.normalizer.apply_rows(&raw)
    }

    pub fn to_toml(&self) -> Result<String> {
        let doc = ExtractorDocument {
            format_version: EXTRACTOR_FORMAT_VERSION,
            extractor: self.clone(),
        };
        toml::to_string(&doc).map_err(|e| Error::Validation(format!("serializing extractor: {e}")))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_toml()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let version = crate::elm::peek_version(&text, path)?;
        if version > EXTRACTOR_FORMAT_VERSION {
            return Err(Error::Version {
                path: path.to_path_buf(),
                found: version,
                supported: EXTRACTOR_FORMAT_VERSION,
            });
        }
        let doc: ExtractorDocument = toml::from_str(&text).map_err(|e| crate::elm::toml_error(path, &text, e))?;
        doc.extractor.validate()?;
        Ok(doc.extractor)
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if self.partition.bound.is_none() {
            return Err(Error::Validation("extractor partition has no fitted bound".into()));
        }
        if self.normalizer.min.len() != self.feature_count() || self.normalizer.max.len() != self.feature_count() {
            return Err(Error::dim(
                "extractor normalizer",
                self.feature_count(),
                self.normalizer.min.len(),
            ));
        }
        Ok(())
    }
}

/// Unnormalized features, one row per point set.
pub fn raw_features(spec: &PartitionSpec, sets: &[&SodpPointSet]) -> Result<DenseMatrix> {
    let cols = spec.feature_count();
    let mut data = Vec::with_capacity(sets.len() * cols);
    for s in sets {
        data.extend(spec.extract(s)?);
    }
    DenseMatrix::new(sets.len(), cols, data)
}
