mod common;

use newsdesk_core::features::{
    build_vocabulary, featurize_tfidf, featurize_topics, idf, FeatureError, FeatureSchema, LexiconTerm, TopicLexicon,
};
use newsdesk_core::text::tokenize;
use proptest::prelude::*;

fn docs(texts: &[&str]) -> Vec<(String, String)> {
    texts.iter().enumerate().map(|(i, t)| (format!("d{i}"), t.to_string())).collect()
}

fn housing() -> Vec<TopicLexicon> {
    let lex = |topic: &str, words: &[&str]| TopicLexicon {
        topic: topic.into(),
        terms: words.iter().map(|w| LexiconTerm { token: w.to_string(), weight: 1.0 }).collect(),
    };
    vec![lex("housing", &["rent", "tenants"]), lex("healthcare", &["clinic"])]
}

#[test]
fn tokenize_examples() {
    assert_eq!(tokenize("Housing costs rise, in Queens."), ["housing", "costs", "rise", "in", "queens"]);
    assert!(tokenize("").is_empty());
    assert_eq!(tokenize("আবাসন খরচ ২৫%"), ["আবাসন", "খরচ", "২৫"]);
}

#[test]
fn vocabulary_examples() {
    let corpus = docs(&["a b", "b c"]);
    let v = build_vocabulary(&corpus, 1, 100).unwrap();
    assert_eq!(v.terms, ["a", "b", "c"]);
    assert_eq!(v.document_frequency, [1, 2, 1]);
    assert_eq!(build_vocabulary(&corpus, 2, 100).unwrap().terms, ["b"]);
    assert_eq!(build_vocabulary(&corpus, 1, 1).unwrap().terms, ["b"]);
    let empty: Vec<(String, String)> = Vec::new();
    assert!(matches!(build_vocabulary(&empty, 1, 10), Err(FeatureError::EmptyCorpus)));
}

#[test]
fn idf_examples() {
    assert_eq!(idf(1, 1), 1.0);
    assert!((idf(2, 1) - 1.405_465_1).abs() < 1e-7);
    let corpus = docs(&["rent", "rent rent clinic"]);
    let v = build_vocabulary(&corpus, 1, 10).unwrap();
    let x = featurize_tfidf(&docs(&["rent"]), &v).unwrap();
    let nonzero: Vec<f64> = x.row(0).iter().copied().filter(|v| *v != 0.0).collect();
    assert_eq!(nonzero, [1.0]);
}

#[test]
fn topic_examples() {
    let x = featurize_topics(&docs(&["the rent for tenants went up this year in queens"]), &housing()).unwrap();
    assert_eq!(x.row(0), [0.2, 0.0]);
    let x = featurize_topics(&docs(&["nothing here matches"]), &housing()).unwrap();
    assert_eq!(x.row(0), [0.0, 0.0]);
    let x = featurize_topics(&docs(&["Clinic"]), &housing()).unwrap();
    assert_eq!(x.row(0), [0.0, 1.0]);
    assert!(matches!(featurize_topics(&docs(&["x"]), &[]), Err(FeatureError::EmptyLexicons)));
}

#[test]
fn schema_featurizes_like_training() {
    let corpus = docs(&["rent clinic", "tenants"]);
    let schema = FeatureSchema::TopicRelevance { lexicons: housing() };
    let x = schema.featurize(&corpus).unwrap();
    assert_eq!(x.schema_digest, schema.digest());
    assert_eq!(x.columns, ["housing", "healthcare"]);
    let json = serde_json::to_string(&schema).unwrap();
    let back: FeatureSchema = serde_json::from_str(&json).unwrap();
    assert_eq!(back.digest(), schema.digest());
}

fn small_corpus() -> impl Strategy<Value = Vec<String>> {
    let word = prop::sample::select(vec!["rent", "jobs", "visa", "clinic", "vote", "city", "union", "lease", "nurse", "ballot"]);
    prop::collection::vec(prop::collection::vec(word, 0..12).prop_map(|w| w.join(" ")), 1..=5)
}

proptest! {
    #[test]
    fn tfidf_matches_reference(texts in small_corpus()) {
        let corpus: Vec<(String, String)> = texts.iter().enumerate().map(|(i, t)| (format!("d{i}"), t.clone())).collect();
        let (ref_terms, ref_rows) = common::tfidf_reference(&texts);
        prop_assume!(!ref_terms.is_empty());
        let v = build_vocabulary(&corpus, 1, 1000).unwrap();
        prop_assert_eq!(&v.terms, &ref_terms);
        let x = featurize_tfidf(&corpus, &v).unwrap();
        for (i, row) in ref_rows.iter().enumerate() {
            for (j, want) in row.iter().enumerate() {
                prop_assert!((x.get(i, j) - want).abs() <= 1e-9, "({i},{j}) {} vs {want}", x.get(i, j));
            }
        }
    }

    #[test]
    fn matrix_invariants(texts in small_corpus()) {
        let corpus: Vec<(String, String)> = texts.iter().enumerate().map(|(i, t)| (format!("d{i}"), t.clone())).collect();
        prop_assume!(texts.iter().any(|t| !t.is_empty()));
        let v = build_vocabulary(&corpus, 1, 1000).unwrap();
        for df in &v.document_frequency {
            prop_assert!(*df >= 1 && (*df as usize) <= v.corpus_size);
        }
        let x = featurize_tfidf(&corpus, &v).unwrap();
        let again = featurize_tfidf(&corpus, &v).unwrap();
        prop_assert_eq!(&x, &again);
        for (i, (id, _)) in corpus.iter().enumerate() {
            prop_assert_eq!(x.row_of(id).unwrap(), x.row(i));
            let norm: f64 = x.row(i).iter().map(|v| v * v).sum::<f64>().sqrt();
            prop_assert!(x.row(i).iter().all(|v| *v >= 0.0));
            prop_assert!(norm == 0.0 || (norm - 1.0).abs() <= 1e-9);
        }
        let t = featurize_topics(&corpus, &housing()).unwrap();
        prop_assert_eq!(t.n_cols(), 2);
        prop_assert!(t.values().iter().all(|v| (0.0..=1.0).contains(v)));
    }
}
