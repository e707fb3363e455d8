use std::fs;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{CnnConfig, CnnModel, DenseHead, FilterBank};
use crate::corpus::EmbeddingTable;
use crate::{Error, Result};

pub const MODEL_FORMAT: &str = "cnnexplain-model";
pub const MODEL_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct EmbeddingRef {
    dimension: usize,
    vocabulary: usize,
    fingerprint: String,
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format: String,
    version: u32,
    config: CnnConfig,
    embedding: EmbeddingRef,
    filters: FilterBank,
    head: DenseHead,
}

/// Writes config and all trainable weights as JSON. The frozen embedding is
/// referenced by fingerprint rather than copied.
pub fn save_model(model: &CnnModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = ModelFile {
        format: MODEL_FORMAT.into(),
        version: MODEL_VERSION,
        config: model.config(),
        embedding: EmbeddingRef {
            dimension: model.embedding.dimension(),
            vocabulary: model.embedding.len(),
            fingerprint: model.embedding.fingerprint(),
        },
        filters: model.filters.clone(),
        head: model.head.clone(),
    };
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, serde_json::to_vec(&file)?).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: impl AsRef<Path>, embedding: Arc<EmbeddingTable>) -> Result<CnnModel> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let file: ModelFile = serde_json::from_slice(&bytes)
        .map_err(|e| Error::ModelFile(format!("{}: {e}", path.display())))?;
    if file.format != MODEL_FORMAT {
        return Err(Error::ModelFile(format!("unexpected format tag {:?}", file.format)));
    }
    if file.version != MODEL_VERSION {
        return Err(Error::ModelFile(format!(
            "model file version {} is not supported (expected {MODEL_VERSION})",
            file.version
        )));
    }
    if file.embedding.dimension != embedding.dimension()
        || file.embedding.fingerprint != embedding.fingerprint()
    {
        return Err(Error::ModelFile("model was trained against different embeddings".into()));
    }
    let model = CnnModel {
        embedding,
        filters: file.filters,
        head: file.head,
        classes: file.config.classes.clone(),
    };
    model.validate().map_err(|e| Error::ModelFile(e.to_string()))?;
    if model.config() != file.config {
        return Err(Error::ModelFile("stored config disagrees with weights".into()));
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::tokenize;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn setup() -> (Arc<EmbeddingTable>, CnnModel) {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut t = EmbeddingTable::new(200);
        for w in "the cat sat on a mat and then it ran off far away".split(' ') {
            let v: Vec<f64> = (0..200).map(|_| rng.random_range(-1.0..1.0)).collect();
            t.insert(w, &v).unwrap();
        }
        let t = Arc::new(t);
        let mut m = CnnModel::new(t.clone(), &CnnConfig::standard(&["a", "b", "c"]), &mut rng);
        for f in &mut m.filters.filters {
            f.bias = rng.random_range(-0.1..0.1);
        }
        (t, m)
    }

    #[test]
    fn round_trip_is_bit_identical() {
        let (t, m) = setup();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        save_model(&m, &path).unwrap();
        let back = load_model(&path, t).unwrap();
        let probes = [
            "the cat sat", "on a mat", "and then it ran off", "far away", "the", "", "cat cat cat cat",
            "mat on the cat", "it sat far away and then ran", "unknown words only here",
        ];
        for p in probes {
            let s = tokenize(p);
            assert_eq!(m.forward(&s), back.forward(&s));
        }
        let raw: serde_json::Value = serde_json::from_slice(&fs::read(&path).unwrap()).unwrap();
        assert_eq!(raw["config"]["filter_sizes"], serde_json::json!([2, 3, 4]));
        assert_eq!(raw["config"]["filters_per_size"], 50);
        assert_eq!(raw["config"]["hidden"], serde_json::json!([150]));
        assert_eq!(raw["version"], MODEL_VERSION);
    }

    #[test]
    fn corrupted_or_mismatched_files_fail() {
        let (t, m) = setup();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        save_model(&m, &path).unwrap();
        let bytes = fs::read(&path).unwrap();
        fs::write(&path, &bytes[..bytes.len() / 2]).unwrap();
        assert!(matches!(load_model(&path, t.clone()), Err(Error::ModelFile(_))));

        let mut v: serde_json::Value = serde_json::from_slice(&bytes).unwrap();
        v["version"] = serde_json::json!(99);
        fs::write(&path, serde_json::to_vec(&v).unwrap()).unwrap();
        let err = load_model(&path, t.clone()).unwrap_err().to_string();
        assert!(err.contains("version 99"), "{err}");

        fs::write(&path, &bytes).unwrap();
        let other = Arc::new(EmbeddingTable::new(200));
        assert!(load_model(&path, other).is_err());
    }
}
