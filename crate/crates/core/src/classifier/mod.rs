//! Multinomial logistic regression trained by full-batch gradient descent.
//!
//! The objective is mean cross-entropy plus `(l2_lambda / 2) * ||W||^2`
//! (bias unregularized). Weights start at zero, so training is a pure
//! function of its inputs.

mod eval;
mod model;

use thiserror::Error;

pub use eval::{evaluate, EvalReport};
pub use model::{ClassifierModel, TrainingMeta};

use crate::features::{FeatureMatrix, LabelVector};

#[derive(Debug, Error)]
pub enum ClassifierError {
    #[error("non-finite input to softmax")]
    NonFiniteInput,
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error("length mismatch: {rows} rows but {labels} labels")]
    LengthMismatch { rows: usize, labels: usize },
    #[error("labels contain a single class; need at least two")]
    DegenerateLabels,
    #[error("loss became non-finite at epoch {epoch} (learning rate {learning_rate})")]
    NonFiniteLoss { epoch: usize, learning_rate: f64 },
    #[error("label `{0}` is not one of the model classes")]
    UnknownClass(String),
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("invalid hyperparameters: {0}")]
    InvalidHyperparameters(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct Hyperparameters {
    pub learning_rate: f64,
    pub epochs: usize,
    pub l2_lambda: f64,
    /// Recorded in the model; zero initialization and full-batch steps do not consume it.
    pub seed: u64,
    pub tolerance: f64,
}

impl Default for Hyperparameters {
    fn default() -> Self {
        Self {
            learning_rate: 0.5,
            epochs: 500,
            l2_lambda: 1e-4,
            seed: 0,
            tolerance: 1e-9,
        }
    }
}

/// Numerically stable softmax (the maximum logit is subtracted first).
pub fn softmax(logits: &[f64]) -> Result<Vec<f64>, ClassifierError> {
    if logits.iter().any(|v| !v.is_finite()) {
        return Err(ClassifierError::NonFiniteInput);
    }
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|v| (v - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    Ok(exps.into_iter().map(|e| e / sum).collect())
}

/// Loss value with its exact gradient.
#[derive(Debug, Clone, PartialEq)]
pub struct LossGradient {
    pub loss: f64,
    /// C×M row-major.
    pub grad_weights: Vec<f64>,
    pub grad_bias: Vec<f64>,
}

pub fn loss_and_gradient(
    model: &ClassifierModel,
    x: &FeatureMatrix,
    y: &LabelVector,
) -> Result<LossGradient, ClassifierError> {
    model.check_schema(x)?;
    let targets = model.label_indices(x, y)?;
    let rows: Vec<&[f64]> = (0..x.n_rows()).map(|i| x.row(i)).collect();
    Ok(objective(
        &model.weights,
        &model.bias,
        model.n_features(),
        &rows,
        &targets,
        model.training_meta.l2_lambda,
    ))
}

pub(crate) fn logits_into(weights: &[f64], bias: &[f64], m: usize, row: &[f64], out: &mut [f64]) {
    for (c, z) in out.iter_mut().enumerate() {
        let w = &weights[c * m..(c + 1) * m];
        *z = bias[c] + w.iter().zip(row).map(|(a, b)| a * b).sum::<f64>();
    }
}

/// Mean cross-entropy + L2 penalty and its gradient, for index-encoded targets.
pub(crate) fn objective(
    weights: &[f64],
    bias: &[f64],
    m: usize,
    rows: &[&[f64]],
    targets: &[usize],
    l2_lambda: f64,
) -> LossGradient {
    let c = bias.len();
    let n = rows.len().max(1) as f64;
    let mut grad_weights = vec![0.0; c * m];
    let mut grad_bias = vec![0.0; c];
    let mut ce = 0.0;
    let mut z = vec![0.0; c];
    for (row, &t) in rows.iter().zip(targets) {
        logits_into(weights, bias, m, row, &mut z);
        let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let sum_exp: f64 = z.iter().map(|v| (v - max).exp()).sum();
        let log_sum_exp = max + sum_exp.ln();
        ce += log_sum_exp - z[t];
        for k in 0..c {
            let p = (z[k] - log_sum_exp).exp();
            let delta = p - if k == t { 1.0 } else { 0.0 };
            grad_bias[k] += delta;
            for (g, xv) in grad_weights[k * m..(k + 1) * m].iter_mut().zip(row.iter()) {
                *g += delta * xv;
            }
        }
    }
    let sq_norm: f64 = weights.iter().map(|w| w * w).sum();
    for (g, w) in grad_weights.iter_mut().zip(weights) {
        *g = *g / n + l2_lambda * w;
    }
    grad_bias.iter_mut().for_each(|g| *g /= n);
    LossGradient {
        loss: ce / n + 0.5 * l2_lambda * sq_norm,
        grad_weights,
        grad_bias,
    }
}

/// Training output: the model plus the loss recorded before every step.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: ClassifierModel,
    pub loss_history: Vec<f64>,
}

/// Something that fits a classifier to a labeled matrix.
pub trait Trainer {
    fn fit(&self, x: &FeatureMatrix, y: &LabelVector) -> Result<TrainOutcome, ClassifierError>;
}

/// The softmax-regression trainer.
#[derive(Debug, Clone, Copy, Default)]
pub struct SoftmaxRegression {
    pub hyper: Hyperparameters,
}

impl Trainer for SoftmaxRegression {
    fn fit(&self, x: &FeatureMatrix, y: &LabelVector) -> Result<TrainOutcome, ClassifierError> {
        train_with_history(x, y, &self.hyper)
    }
}

pub fn train(x: &FeatureMatrix, y: &LabelVector, hyper: &Hyperparameters) -> Result<ClassifierModel, ClassifierError> {
    train_with_history(x, y, hyper).map(|o| o.model)
}

/// Full-batch gradient descent from zero weights.
///
/// Stops after `epochs` steps or once an epoch improves the loss by less
/// than `tolerance`. Classes are the distinct labels in sorted order and rows
/// are visited in a canonical order, so permuting the training rows yields a
/// bit-identical model.
pub fn train_with_history(
    x: &FeatureMatrix,
    y: &LabelVector,
    hyper: &Hyperparameters,
) -> Result<TrainOutcome, ClassifierError> {
    if !(hyper.learning_rate.is_finite() && hyper.learning_rate > 0.0) {
        return Err(ClassifierError::InvalidHyperparameters("learning_rate must be positive".into()));
    }
    if !(hyper.l2_lambda.is_finite() && hyper.l2_lambda >= 0.0) {
        return Err(ClassifierError::InvalidHyperparameters("l2_lambda must be non-negative".into()));
    }
    if x.n_rows() != y.len() {
        return Err(ClassifierError::LengthMismatch {
            rows: x.n_rows(),
            labels: y.len(),
        });
    }
    let mut classes: Vec<String> = y.labels.clone();
    classes.sort();
    classes.dedup();
    if classes.len() < 2 {
        return Err(ClassifierError::DegenerateLabels);
    }
    let m = x.n_cols();
    let c = classes.len();
    let targets: Vec<usize> = y
        .labels
        .iter()
        .map(|l| classes.binary_search(l).expect("label drawn from classes"))
        .collect();

    let mut order: Vec<usize> = (0..x.n_rows()).collect();
    order.sort_by(|&a, &b| {
        targets[a].cmp(&targets[b]).then_with(|| {
            let ra = x.row(a).iter().map(|v| v.to_bits());
            let rb = x.row(b).iter().map(|v| v.to_bits());
            ra.cmp(rb)
        })
    });
    let rows: Vec<&[f64]> = order.iter().map(|&i| x.row(i)).collect();
    let ordered_targets: Vec<usize> = order.iter().map(|&i| targets[i]).collect();

    let mut weights = vec![0.0; c * m];
    let mut bias = vec![0.0; c];
    let mut history: Vec<f64> = Vec::new();
    let mut steps = 0;
    loop {
        let lg = objective(&weights, &bias, m, &rows, &ordered_targets, hyper.l2_lambda);
        if !lg.loss.is_finite() || lg.grad_weights.iter().chain(&lg.grad_bias).any(|g| !g.is_finite()) {
            return Err(ClassifierError::NonFiniteLoss {
                epoch: steps,
                learning_rate: hyper.learning_rate,
            });
        }
        let converged = history.last().is_some_and(|prev| prev - lg.loss < hyper.tolerance);
        history.push(lg.loss);
        if converged || steps >= hyper.epochs {
            break;
        }
        for (w, g) in weights.iter_mut().zip(&lg.grad_weights) {
            *w -= hyper.learning_rate * g;
        }
        for (b, g) in bias.iter_mut().zip(&lg.grad_bias) {
            *b -= hyper.learning_rate * g;
        }
        steps += 1;
    }

    let model = ClassifierModel::new(
        classes,
        x.schema_digest.clone(),
        weights,
        bias,
        TrainingMeta {
            seed: hyper.seed,
            epochs_run: steps,
            final_loss: *history.last().expect("at least one evaluation"),
            learning_rate: hyper.learning_rate,
            l2_lambda: hyper.l2_lambda,
        },
    )?;
    Ok(TrainOutcome {
        model,
        loss_history: history,
    })
}

/// `Y_pred`: per-row argmax of `W x + b`; ties go to the lowest class index.
pub fn predict(model: &ClassifierModel, x: &FeatureMatrix) -> Result<LabelVector, ClassifierError> {
    model.check_schema(x)?;
    Ok((0..x.n_rows())
        .map(|i| model.classes[model.predict_index(x.row(i))].clone())
        .collect())
}
