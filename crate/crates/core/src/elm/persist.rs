use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::ElmModel;
use crate::{Error, Result};

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct ModelDocument {
    format_version: u32,
    model: ElmModel,
}

/// Writes the model as TOML. Floats use the shortest decimal form that reads
/// back to the same bits.
pub fn save_model(model: &ElmModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, model_to_toml(model)?).map_err(|e| Error::io(path, e))
}

pub(crate) fn model_to_toml(model: &ElmModel) -> Result<String> {
    let doc = ModelDocument {
        format_version: MODEL_FORMAT_VERSION,
        model: model.clone(),
    };
    toml::to_string(&doc).map_err(|e| Error::Validation(format!("serializing model: {e}")))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<ElmModel> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let version = peek_version(&text, path)?;
    if version > MODEL_FORMAT_VERSION {
        return Err(Error::Version {
            path: path.to_path_buf(),
            found: version,
            supported: MODEL_FORMAT_VERSION,
        });
    }
    let doc: ModelDocument = toml::from_str(&text).map_err(|e| toml_error(path, &text, e))?;
    doc.model.validate()?;
    Ok(doc.model)
}

/// Reads `format_version` before the full document is decoded.
pub(crate) fn peek_version(text: &str, path: &Path) -> Result<u32> {
    let table: toml::Table = toml::from_str(text).map_err(|e| toml_error(path, text, e))?;
    let v = table.get("format_version").ok_or_else(|| Error::Parse {
        path: path.to_path_buf(),
        line: 0,
        message: "missing format_version".into(),
    })?;
    v.as_integer()
        .and_then(|i| u32::try_from(i).ok())
        .ok_or_else(|| Error::Parse {
            path: path.to_path_buf(),
            line: 0,
            message: format!("format_version must be a nonnegative integer, found {v}"),
        })
}

pub(crate) fn toml_error(path: &Path, text: &str, e: toml::de::Error) -> Error {
    let line = e
        .span()
        .map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1)
        .unwrap_or(0);
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: e.message().to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elm::{train, TrainConfig};
    use crate::linalg::DenseMatrix;

    fn model() -> ElmModel {
        let x = DenseMatrix::from_fn(12, 3, |i, j| ((i * 7 + j * 3) % 5) as f64 / 3.0 - 0.6);
        let labels: Vec<&str> = (0..12).map(|i| if i % 2 == 0 { "CHF" } else { "NORMAL" }).collect();
        let cfg = TrainConfig { hidden: 5, ..TrainConfig::default() };
        train(&x, &labels, &cfg).unwrap().model
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let m = model();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("model.toml");
        save_model(&m, &p).unwrap();
        let back = load_model(&p).unwrap();
        assert_eq!(back, m);
        for (a, b) in back.output_weights.data().iter().zip(m.output_weights.data()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        save_model(&back, dir.path().join("again.toml")).unwrap();
        assert_eq!(
            fs::read(&p).unwrap(),
            fs::read(dir.path().join("again.toml")).unwrap()
        );
    }

    #[test]
    fn truncated_and_future_files() {
        let dir = tempfile::tempdir().unwrap();
        let text = model_to_toml(&model()).unwrap();

        let p = dir.path().join("cut.toml");
        fs::write(&p, &text[..text.len() * 2 / 3]).unwrap();
        assert!(matches!(load_model(&p), Err(Error::Parse { .. })));

        let p = dir.path().join("future.toml");
        fs::write(&p, text.replacen("format_version = 1", "format_version = 2", 1)).unwrap();
        assert!(matches!(load_model(&p), Err(Error::Version { found: 2, .. })));

        let p = dir.path().join("empty.toml");
        fs::write(&p, "").unwrap();
        assert!(matches!(load_model(&p), Err(Error::Parse { .. })));
    }
}
