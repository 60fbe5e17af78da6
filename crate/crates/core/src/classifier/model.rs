use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{logits_into, ClassifierError};
use crate::features::{FeatureMatrix, LabelVector};

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainingMeta {
    pub seed: u64,
    pub epochs_run: usize,
    pub final_loss: f64,
    pub learning_rate: f64,
    pub l2_lambda: f64,
}

/// Trained softmax-regression weights.
///
/// Serialized as `{classes, schema_digest, weights, bias, training_meta}` with
/// `weights` flattened row-major (one row of M entries per class).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModelFile")]
pub struct ClassifierModel {
    pub classes: Vec<String>,
    pub schema_digest: String,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
    pub training_meta: TrainingMeta,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    classes: Vec<String>,
    schema_digest: String,
    weights: Vec<f64>,
    bias: Vec<f64>,
    training_meta: TrainingMeta,
}

impl TryFrom<ModelFile> for ClassifierModel {
    type Error = ClassifierError;
    fn try_from(f: ModelFile) -> Result<Self, Self::Error> {
        ClassifierModel::new(f.classes, f.schema_digest, f.weights, f.bias, f.training_meta)
    }
}

impl ClassifierModel {
    pub fn new(
        classes: Vec<String>,
        schema_digest: String,
        weights: Vec<f64>,
        bias: Vec<f64>,
        training_meta: TrainingMeta,
    ) -> Result<Self, ClassifierError> {
        let c = classes.len();
        if c < 2 {
            return Err(ClassifierError::InvalidModel(format!("need at least 2 classes, got {c}")));
        }
        let mut sorted = classes.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != c {
            return Err(ClassifierError::InvalidModel("duplicate class names".into()));
        }
        if bias.len() != c || !weights.len().is_multiple_of(c) {
            return Err(ClassifierError::InvalidModel(format!(
                "{} weights and {} biases do not fit {c} classes",
                weights.len(),
                bias.len()
            )));
        }
        if weights.iter().chain(&bias).any(|v| !v.is_finite()) {
            return Err(ClassifierError::InvalidModel("non-finite parameter".into()));
        }
        Ok(Self {
            classes,
            schema_digest,
            weights,
            bias,
            training_meta,
        })
    }

    pub fn n_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn n_features(&self) -> usize {
        self.weights.len() / self.classes.len()
    }

    pub fn class_index(&self, label: &str) -> Option<usize> {
        self.classes.iter().position(|c| c == label)
    }

    pub fn check_schema(&self, x: &FeatureMatrix) -> Result<(), ClassifierError> {
        if x.schema_digest != self.schema_digest {
            return Err(ClassifierError::SchemaMismatch(format!(
                "matrix schema {} but model trained on {}",
                x.schema_digest, self.schema_digest
            )));
        }
        if x.n_cols() != self.n_features() {
            return Err(ClassifierError::SchemaMismatch(format!(
                "matrix has {} columns, model expects {}",
                x.n_cols(),
                self.n_features()
            )));
        }
        Ok(())
    }

    pub(crate) fn label_indices(&self, x: &FeatureMatrix, y: &LabelVector) -> Result<Vec<usize>, ClassifierError> {
        if x.n_rows() != y.len() {
            return Err(ClassifierError::LengthMismatch {
                rows: x.n_rows(),
                labels: y.len(),
            });
        }
        y.labels
            .iter()
            .map(|l| self.class_index(l).ok_or_else(|| ClassifierError::UnknownClass(l.clone())))
            .collect()
    }

    pub fn logits(&self, row: &[f64]) -> Vec<f64> {
        let mut z = vec![0.0; self.n_classes()];
        logits_into(&self.weights, &self.bias, self.n_features(), row, &mut z);
        z
    }

    pub fn predict_index(&self, row: &[f64]) -> usize {
        let z = self.logits(row);
        let mut best = 0;
        for (k, v) in z.iter().enumerate().skip(1) {
            if *v > z[best] {
                best = k;
            }
        }
        best
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), ClassifierError> {
        let path = path.as_ref();
        let tmp = path.with_extension("tmp");
        std::fs::write(&tmp, self.to_json())?;
        std::fs::rename(tmp, path)?;
        Ok(())
    }

    /// Loads a model file, checking its schema digest when one is expected.
    pub fn load(path: impl AsRef<Path>, expected_digest: Option<&str>) -> Result<Self, ClassifierError> {
        let raw = std::fs::read_to_string(path)?;
        let model: ClassifierModel =
            serde_json::from_str(&raw).map_err(|e| ClassifierError::InvalidModel(e.to_string()))?;
        if let Some(d) = expected_digest {
            if d != model.schema_digest {
                return Err(ClassifierError::SchemaMismatch(format!(
                    "model file digest {} does not match schema {d}",
                    model.schema_digest
                )));
            }
        }
        Ok(model)
    }
}
