use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{predict, ClassifierError, ClassifierModel};
use crate::features::{FeatureMatrix, LabelVector};

/// Accuracy, per-class precision/recall and the confusion matrix
/// (`confusion[true][predicted]`, indexed by `classes`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub classes: Vec<String>,
    pub accuracy: f64,
    pub per_class_precision: BTreeMap<String, f64>,
    pub per_class_recall: BTreeMap<String, f64>,
    /// Classes never predicted; their precision is reported as 0.
    pub undefined_precision: Vec<String>,
    /// Classes absent from the truth; their recall is reported as 0.
    pub undefined_recall: Vec<String>,
    pub confusion: Vec<Vec<u64>>,
    pub n: usize,
}

impl EvalReport {
    pub fn from_labels(classes: &[String], truth: &LabelVector, predicted: &LabelVector) -> Result<Self, ClassifierError> {
        if truth.len() != predicted.len() {
            return Err(ClassifierError::LengthMismatch {
                rows: predicted.len(),
                labels: truth.len(),
            });
        }
        let idx = |l: &String| {
            classes
                .iter()
                .position(|c| c == l)
                .ok_or_else(|| ClassifierError::UnknownClass(l.clone()))
        };
        let c = classes.len();
        let mut confusion = vec![vec![0u64; c]; c];
        for (t, p) in truth.labels.iter().zip(&predicted.labels) {
            confusion[idx(t)?][idx(p)?] += 1;
        }
        let n = truth.len();
        let correct: u64 = (0..c).map(|k| confusion[k][k]).sum();
        let mut report = EvalReport {
            classes: classes.to_vec(),
            accuracy: if n == 0 { 0.0 } else { correct as f64 / n as f64 },
            per_class_precision: BTreeMap::new(),
            per_class_recall: BTreeMap::new(),
            undefined_precision: Vec::new(),
            undefined_recall: Vec::new(),
            confusion,
            n,
        };
        for (k, name) in classes.iter().enumerate() {
            let tp = report.confusion[k][k] as f64;
            let predicted_k: u64 = (0..c).map(|r| report.confusion[r][k]).sum();
            let actual_k: u64 = report.confusion[k].iter().sum();
            let precision = if predicted_k == 0 {
                report.undefined_precision.push(name.clone());
                0.0
            } else {
                tp / predicted_k as f64
            };
            let recall = if actual_k == 0 {
                report.undefined_recall.push(name.clone());
                0.0
            } else {
                tp / actual_k as f64
            };
            report.per_class_precision.insert(name.clone(), precision);
            report.per_class_recall.insert(name.clone(), recall);
        }
        Ok(report)
    }
}

pub fn evaluate(model: &ClassifierModel, x: &FeatureMatrix, y_true: &LabelVector) -> Result<EvalReport, ClassifierError> {
    if x.n_rows() != y_true.len() {
        return Err(ClassifierError::LengthMismatch {
            rows: x.n_rows(),
            labels: y_true.len(),
        });
    }
    let predicted = predict(model, x)?;
    EvalReport::from_labels(&model.classes, y_true, &predicted)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lv(ls: &[&str]) -> LabelVector {
        ls.iter().map(|s| s.to_string()).collect()
    }

    fn classes(cs: &[&str]) -> Vec<String> {
        cs.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn perfect_predictions() {
        let y = lv(&["a", "b", "b", "c"]);
        let r = EvalReport::from_labels(&classes(&["a", "b", "c"]), &y, &y).unwrap();
        assert_eq!(r.accuracy, 1.0);
        assert_eq!(r.confusion, vec![vec![1, 0, 0], vec![0, 2, 0], vec![0, 0, 1]]);
    }

    #[test]
    fn all_one_class() {
        let r = EvalReport::from_labels(&classes(&["A", "B"]), &lv(&["A", "A", "B", "B"]), &lv(&["A", "A", "A", "A"])).unwrap();
        assert_eq!(r.accuracy, 0.5);
        assert_eq!(r.per_class_recall["B"], 0.0);
        assert_eq!(r.per_class_precision["B"], 0.0);
        assert_eq!(r.undefined_precision, ["B"]);
        assert_eq!(r.per_class_precision["A"], 0.5);
    }

    #[test]
    fn hand_computed_three_class() {
        // confusion (rows truth, cols predicted):
        //      a  b  c
        //  a [ 3, 1, 0 ]
        //  b [ 1, 2, 1 ]
        //  c [ 0, 2, 2 ]
        let mut truth = Vec::new();
        let mut pred = Vec::new();
        let cells = [("a", "a", 3), ("a", "b", 1), ("b", "a", 1), ("b", "b", 2), ("b", "c", 1), ("c", "b", 2), ("c", "c", 2)];
        for (t, p, k) in cells {
            for _ in 0..k {
                truth.push(t);
                pred.push(p);
            }
        }
        let r = EvalReport::from_labels(&classes(&["a", "b", "c"]), &lv(&truth), &lv(&pred)).unwrap();
        assert_eq!(r.n, 12);
        assert_eq!(r.confusion.iter().flatten().sum::<u64>(), 12);
        assert!((r.accuracy - 7.0 / 12.0).abs() < 1e-15);
        assert!((r.per_class_precision["a"] - 3.0 / 4.0).abs() < 1e-15);
        assert!((r.per_class_precision["b"] - 2.0 / 5.0).abs() < 1e-15);
        assert!((r.per_class_precision["c"] - 2.0 / 3.0).abs() < 1e-15);
        assert!((r.per_class_recall["a"] - 3.0 / 4.0).abs() < 1e-15);
        assert!((r.per_class_recall["b"] - 2.0 / 4.0).abs() < 1e-15);
        assert!((r.per_class_recall["c"] - 2.0 / 4.0).abs() < 1e-15);
        assert!(r.undefined_precision.is_empty());
    }
}
