mod common;

use newsdesk_core::classifier::{
    evaluate, loss_and_gradient, predict, train, train_with_history, ClassifierError, ClassifierModel, Hyperparameters,
    TrainingMeta,
};
use newsdesk_core::features::{FeatureMatrix, FeatureMode, LabelVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn matrix(rows: &[Vec<f64>]) -> FeatureMatrix {
    let m = rows.first().map_or(0, Vec::len);
    FeatureMatrix::new(
        (0..rows.len()).map(|i| format!("r{i}")).collect(),
        (0..m).map(|j| format!("f{j}")).collect(),
        FeatureMode::TopicRelevance,
        "test-schema".into(),
        rows.iter().flatten().copied().collect(),
    )
    .unwrap()
}

fn labels(ls: &[&str]) -> LabelVector {
    LabelVector::new(ls.iter().map(|s| s.to_string()).collect())
}

fn model(classes: usize, m: usize, weights: Vec<f64>, bias: Vec<f64>, l2: f64) -> ClassifierModel {
    ClassifierModel::new(
        (0..classes).map(|k| format!("c{k}")).collect(),
        "test-schema".into(),
        weights,
        bias,
        TrainingMeta {
            l2_lambda: l2,
            ..TrainingMeta::default()
        },
    )
    .inspect(|mdl| assert_eq!(mdl.n_features(), m))
    .unwrap()
}

#[test]
fn gradient_matches_finite_differences_on_3x4() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (n, m, c) = (3, 4, 3);
    let x: Vec<Vec<f64>> = (0..n).map(|_| (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
    let y = [0usize, 2, 1];
    let w: Vec<Vec<f64>> = (0..c).map(|_| (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
    let b: Vec<f64> = (0..c).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mdl = model(c, m, w.iter().flatten().copied().collect(), b.clone(), 0.1);
    let yl = LabelVector::new(y.iter().map(|k| format!("c{k}")).collect());
    let lg = loss_and_gradient(&mdl, &matrix(&x), &yl).unwrap();
    assert!((lg.loss - common::reference_loss(&w, &b, &x, &y, 0.1)).abs() < 1e-12);
    let (gw, gb) = common::numeric_gradient(&w, &b, &x, &y, 0.1, 1e-5);
    assert!(common::max_relative_error(&lg.grad_weights, &gw) < 1e-5);
    assert!(common::max_relative_error(&lg.grad_bias, &gb) < 1e-5);
}

#[test]
fn uniform_model_loss_is_ln4() {
    let x = matrix(&[vec![0.3, 0.1], vec![0.9, 0.5]]);
    let mdl = model(4, 2, vec![0.0; 8], vec![0.0; 4], 0.0);
    let lg = loss_and_gradient(&mdl, &x, &labels(&["c0", "c3"])).unwrap();
    assert!((lg.loss - 4f64.ln()).abs() < 1e-12);
    assert!(matches!(
        loss_and_gradient(&mdl, &x, &labels(&["c0"])),
        Err(ClassifierError::LengthMismatch { rows: 2, labels: 1 })
    ));
}

#[test]
fn separable_toy_and_determinism() {
    let rows: Vec<Vec<f64>> = (0..20).map(|i| if i % 2 == 0 { vec![1.0, 0.0] } else { vec![0.0, 1.0] }).collect();
    let y = LabelVector::new((0..20).map(|i| if i % 2 == 0 { "A" } else { "B" }.to_string()).collect());
    let x = matrix(&rows);
    let hyper = Hyperparameters::default();
    let a = train(&x, &y, &hyper).unwrap();
    let b = train(&x, &y, &hyper).unwrap();
    assert_eq!(a.to_json(), b.to_json());
    assert_eq!(predict(&a, &x).unwrap(), y);
    assert!(a.training_meta.epochs_run <= 500);
}

#[test]
fn one_class_is_degenerate() {
    let x = matrix(&[vec![1.0], vec![0.5]]);
    assert!(matches!(train(&x, &labels(&["A", "A"]), &Hyperparameters::default()), Err(ClassifierError::DegenerateLabels)));
}

#[test]
fn divergence_is_reported_not_clipped() {
    let x = matrix(&[vec![1e200, 0.0], vec![0.0, 1e200]]);
    let hyper = Hyperparameters {
        learning_rate: 1e10,
        ..Hyperparameters::default()
    };
    assert!(matches!(train(&x, &labels(&["A", "B"]), &hyper), Err(ClassifierError::NonFiniteLoss { .. })));
}

#[test]
fn fixture_matrix_training_loss_non_increasing_and_nearest_centroid_easy() {
    let (dir, mut desk) = common::fixture_desk();
    desk.run_pipeline(Default::default()).unwrap();
    let truth = common::fixture_labels(dir.path());
    let arts: Vec<_> = desk.store.articles().cloned().collect();
    let x = desk.feature_matrix(None).unwrap();
    let y: LabelVector = arts.iter().map(|a| truth[&a.url].clone()).collect();
    let outcome = train_with_history(&x, &y, &Hyperparameters::default()).unwrap();
    for w in outcome.loss_history.windows(2) {
        assert!(w[1] <= w[0] + 1e-12, "{} -> {}", w[0], w[1]);
    }
    // the corpus is easy: leave-one-out nearest centroid gets everything right
    let rows: Vec<(Vec<f64>, String)> = (0..x.n_rows()).map(|i| (x.row(i).to_vec(), y.labels[i].clone())).collect();
    for i in 0..rows.len() {
        let mut train_rows = rows.clone();
        let held = train_rows.remove(i);
        assert_eq!(common::nearest_centroid(&train_rows, &[held.0])[0], held.1);
    }
}

#[test]
fn evaluate_examples() {
    let x = matrix(&[vec![1.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0], vec![0.0, 1.0]]);
    // every row predicts class A
    let always_a = ClassifierModel::new(
        vec!["A".into(), "B".into()],
        "test-schema".into(),
        vec![0.0; 4],
        vec![1.0, 0.0],
        TrainingMeta::default(),
    )
    .unwrap();
    let r = evaluate(&always_a, &x, &labels(&["A", "A", "B", "B"])).unwrap();
    assert_eq!(r.accuracy, 0.5);
    assert_eq!(r.per_class_recall["B"], 0.0);
    assert_eq!(r.confusion.iter().flatten().sum::<u64>() as usize, r.n);
    let r = evaluate(&always_a, &x, &labels(&["A", "A", "A", "A"])).unwrap();
    assert_eq!(r.accuracy, 1.0);
}

fn problem() -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<String>)> {
    (2usize..6, 1usize..5).prop_flat_map(|(n, m)| {
        (
            prop::collection::vec(prop::collection::vec(0.0f64..1.0, m), n + 2),
            prop::collection::vec(prop::sample::select(vec!["a", "b", "c"]), n + 2),
        )
            .prop_map(|(x, y)| (x, y.into_iter().map(str::to_owned).collect()))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn permuting_rows_gives_identical_model((rows, ys) in problem(), seed in any::<u64>()) {
        let mut distinct = ys.clone();
        distinct.sort();
        distinct.dedup();
        prop_assume!(distinct.len() >= 2);
        let hyper = Hyperparameters { epochs: 60, ..Hyperparameters::default() };
        let a = train(&matrix(&rows), &LabelVector::new(ys.clone()), &hyper).unwrap();
        let mut idx: Vec<usize> = (0..rows.len()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rand::seq::SliceRandom::shuffle(idx.as_mut_slice(), &mut rng);
        let prow: Vec<Vec<f64>> = idx.iter().map(|&i| rows[i].clone()).collect();
        let py: Vec<String> = idx.iter().map(|&i| ys[i].clone()).collect();
        let b = train(&matrix(&prow), &LabelVector::new(py), &hyper).unwrap();
        prop_assert_eq!(a.to_json(), b.to_json());
    }

    #[test]
    fn save_load_predict_is_bit_identical((rows, ys) in problem()) {
        let mut distinct = ys.clone();
        distinct.sort();
        distinct.dedup();
        prop_assume!(distinct.len() >= 2);
        let x = matrix(&rows);
        let hyper = Hyperparameters { epochs: 40, ..Hyperparameters::default() };
        let mdl = train(&x, &LabelVector::new(ys), &hyper).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        mdl.save(&path).unwrap();
        let loaded = ClassifierModel::load(&path, Some("test-schema")).unwrap();
        prop_assert_eq!(&loaded, &mdl);
        let before = predict(&mdl, &x).unwrap();
        prop_assert_eq!(predict(&loaded, &x).unwrap(), before.clone());
        for i in 0..x.n_rows() {
            prop_assert_eq!(loaded.logits(x.row(i)), mdl.logits(x.row(i)));
        }
        // predictions always come from the class set
        prop_assert!(before.labels.iter().all(|l| mdl.classes.contains(l)));
        // doubling weights and bias leaves argmax unchanged
        let doubled = ClassifierModel::new(
            mdl.classes.clone(),
            mdl.schema_digest.clone(),
            mdl.weights.iter().map(|w| 2.0 * w).collect(),
            mdl.bias.iter().map(|b| 2.0 * b).collect(),
            mdl.training_meta,
        ).unwrap();
        prop_assert_eq!(predict(&doubled, &x).unwrap(), before);
    }
}
