//! Pipeline configuration: one TOML document with a section per stage.
//! Every key has a default and can be overridden as `--section.key value`.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::elm::{lambda_grid, Activation, TrainConfig, Variant};
use crate::eval::{EvalConfig, Grouping};
use crate::features::{Aggregation, PartitionKind, PartitionSpec};
use crate::synth::SynthConfig;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataConfig {
    /// Dataset manifest (`path,label,sampling_rate_hz`). When unset the
    /// pipeline generates the synthetic dataset.
    pub manifest: Option<PathBuf>,
    pub output_dir: PathBuf,
}

impl Default for DataConfig {
    fn default() -> Self {
        Self {
            manifest: None,
            output_dir: PathBuf::from("out"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PreprocessConfig {
    pub w1_ms: f64,
    pub w2_ms: f64,
    pub f0_hz: f64,
    pub q: f64,
    pub segment_seconds: f64,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        Self {
            w1_ms: 200.0,
            w2_ms: 600.0,
            f0_hz: 60.0,
            q: 30.0,
            segment_seconds: 10.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeatureConfig {
    pub kind: PartitionKind,
    /// Defaults per kind: 15 circled, 15 squared, 17 inclined, 8 (per axis) grid.
    pub region_count: Option<usize>,
    pub aggregation: Aggregation,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self {
            kind: PartitionKind::Inclined,
            region_count: None,
            aggregation: Aggregation::Probability,
        }
    }
}

impl FeatureConfig {
    pub fn partition(&self) -> Result<PartitionSpec> {
        let k = self.region_count.unwrap_or_else(|| self.kind.default_region_count());
        PartitionSpec::new(self.kind, k, self.aggregation)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub variant: Variant,
    pub hidden: usize,
    pub activation: Activation,
    /// Candidate grid `e^k` for `k` in `lambda_min_exp..=lambda_max_exp`.
    pub lambda_min_exp: i32,
    pub lambda_max_exp: i32,
    /// Fixed lambda; replaces the grid for the regularized variants.
    pub lambda: Option<f64>,
    pub seed: u64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            variant: Variant::RHessElm,
            hidden: 50,
            activation: Activation::Sigmoid,
            lambda_min_exp: -20,
            lambda_max_exp: -1,
            lambda: None,
            seed: 7,
        }
    }
}

impl ModelConfig {
    pub fn exponents(&self) -> Vec<i32> {
        (self.lambda_min_exp..=self.lambda_max_exp).collect()
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            variant: self.variant,
            hidden: self.hidden,
            activation: self.activation,
            lambdas: match self.lambda {
                Some(l) => vec![l],
                None => lambda_grid(self.lambda_min_exp, self.lambda_max_exp),
            },
            seed: self.seed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalSection {
    pub k: usize,
    pub seed: u64,
    pub positive_class: String,
    pub grouping: Grouping,
    /// Evaluate this saved model on the feature CSV instead of cross-validating.
    pub model: Option<PathBuf>,
    /// Feature CSV for model evaluation; defaults to `<output_dir>/features.csv`.
    pub features: Option<PathBuf>,
}

impl Default for EvalSection {
    fn default() -> Self {
        let e = EvalConfig::default();
        Self {
            k: e.k,
            seed: e.seed,
            positive_class: e.positive_class,
            grouping: e.grouping,
            model: None,
            features: None,
        }
    }
}

impl EvalSection {
    pub fn eval_config(&self) -> EvalConfig {
        EvalConfig {
            k: self.k,
            seed: self.seed,
            positive_class: self.positive_class.clone(),
            grouping: self.grouping,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub data: DataConfig,
    pub preprocess: PreprocessConfig,
    pub features: FeatureConfig,
    pub model: ModelConfig,
    pub eval: EvalSection,
    pub synth: SynthConfig,
}

impl PipelineConfig {
    /// Parses a document and applies `(section.key, value)` overrides. Values
    /// are read as TOML literals, falling back to plain strings.
    pub fn from_toml(text: &str, overrides: &[(String, String)], origin: &Path) -> Result<Self> {
        let mut table: toml::Table = toml::from_str(text).map_err(|e| crate::elm::toml_error(origin, text, e))?;
        for (key, value) in overrides {
            apply_override(&mut table, key, value)?;
        }
        let cfg: PipelineConfig = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| Error::Validation(format!("configuration: {}", e.message())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads `path` (or starts from the defaults when `None`) and applies overrides.
    pub fn load(path: Option<&Path>, overrides: &[(String, String)]) -> Result<Self> {
        match path {
            Some(p) => {
                let text = fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
                Self::from_toml(&text, overrides, p)
            }
            None => Self::from_toml("", overrides, Path::new("<defaults>")),
        }
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Validation(format!("serializing configuration: {e}")))
    }

    pub fn validate(&self) -> Result<()> {
        let p = &self.preprocess;
        if !(p.w1_ms > 0.0 && p.w1_ms < p.w2_ms) {
            return Err(Error::Validation(format!(
                "preprocess windows must satisfy 0 < w1_ms < w2_ms, got {} and {}",
                p.w1_ms, p.w2_ms
            )));
        }
        if !(p.f0_hz > 0.0) || !(p.q > 0.0) {
            return Err(Error::Validation("preprocess.f0_hz and preprocess.q must be positive".into()));
        }
        if !(p.segment_seconds > 0.0) {
            return Err(Error::Validation("preprocess.segment_seconds must be positive".into()));
        }
        self.features.partition()?;
        let m = &self.model;
        if m.hidden < 1 {
            return Err(Error::Validation("model.hidden must be at least 1".into()));
        }
        if m.lambda_min_exp > m.lambda_max_exp {
            return Err(Error::Validation(format!(
                "model.lambda_min_exp ({}) exceeds model.lambda_max_exp ({})",
                m.lambda_min_exp, m.lambda_max_exp
            )));
        }
        if let Some(l) = m.lambda {
            if !(l >= 0.0) || !l.is_finite() {
                return Err(Error::Validation(format!("model.lambda must be finite and >= 0, got {l}")));
            }
        }
        if self.eval.k < 2 {
            return Err(Error::Validation(format!("eval.k must be at least 2, got {}", self.eval.k)));
        }
        Ok(())
    }
}

fn apply_override(table: &mut toml::Table, key: &str, raw: &str) -> Result<()> {
    let parts: Vec<&str> = key.split('.').collect();
    if parts.len() != 2 || parts.iter().any(|p| p.is_empty()) {
        return Err(Error::Validation(format!(
            "override {key:?} must be written as section.key"
        )));
    }
    let value = toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    let section = table
        .entry(parts[0])
        .or_insert_with(|| toml::Value::Table(toml::Table::new()));
    match section {
        toml::Value::Table(t) => {
            t.insert(parts[1].to_string(), value);
            Ok(())
        }
        _ => Err(Error::Validation(format!("{} is not a configuration section", parts[0]))),
    }
}
