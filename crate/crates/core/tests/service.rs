mod common;

use std::collections::BTreeSet;
use std::path::Path;

use chrono::{TimeZone, Utc};
use newsdesk_core::ingest::{dedup_key, Article};
use newsdesk_core::service::{fixtures, ArticleFilter, ArticleStore, Config, Desk, LabelSource, RunOptions, ServiceError};
use newsdesk_core::translator::JobStatus;
use proptest::prelude::*;

const FULL: RunOptions = RunOptions {
    train: true,
    classify: true,
};

fn reopen(dir: &Path) -> Desk {
    Desk::open(Config::load(dir.join("config.json")).unwrap()).unwrap()
}

#[test]
fn disabled_registry_has_no_eligible_sources() {
    let (dir, mut desk) = common::fixture_desk();
    for s in desk.registry.sources().to_vec() {
        desk.registry.get_mut(&s.id).unwrap().enabled = false;
    }
    let err = desk.run_pipeline(FULL).unwrap_err();
    assert!(matches!(err, ServiceError::NoEligibleSources));
    assert_eq!(err.http_status(), 422);
    assert!(ArticleStore::open(dir.path().join("store")).unwrap().is_empty());
}

#[test]
fn classify_without_model_is_refused() {
    let (_dir, mut desk) = common::fixture_desk();
    let err = desk
        .run_pipeline(RunOptions {
            train: false,
            classify: true,
        })
        .unwrap_err();
    assert_eq!(err.code(), "NoModel");
    assert!(desk.store.is_empty());
}

#[test]
fn end_to_end_then_rerun_dedups() {
    let (dir, mut desk) = common::fixture_desk();
    let run = desk.run_pipeline(FULL).unwrap();
    assert_eq!(run.articles_ingested, 60);
    assert_eq!(run.classified, 60);
    assert_eq!(run.sources_polled, 6);
    assert_eq!(run.sources_denied, [("syndicate-wire".to_string(), "no_republish_permission".to_string())]);
    assert!(desk.store.articles().all(|a| a.source_id != "syndicate-wire"));

    let truth = common::fixture_labels(dir.path());
    let housing = desk
        .store
        .query(&ArticleFilter {
            class_label: Some("housing".into()),
            ..ArticleFilter::page(1000, 0)
        })
        .unwrap();
    let got: BTreeSet<&str> = housing.items.iter().map(|a| a.url.as_str()).collect();
    let want: BTreeSet<&str> = truth.iter().filter(|(_, c)| *c == "housing").map(|(u, _)| u.as_str()).collect();
    assert_eq!(got, want);

    let again = desk.run_pipeline(FULL).unwrap();
    assert_eq!((again.articles_ingested, again.articles_deduped, again.classified), (0, 60, 0));
    assert_eq!(reopen(dir.path()).store.len(), 60);
    assert_eq!(desk.store.runs().len(), 2);
    assert_eq!(desk.store.latest_run().unwrap().run_id, again.run_id);
}

#[test]
fn paging_returns_newest_first() {
    let (_dir, mut desk) = common::fixture_desk();
    desk.run_pipeline(RunOptions::default()).unwrap();
    let mut all: Vec<&Article> = desk.store.articles().collect();
    all.sort_by(|a, b| b.fetched_at.cmp(&a.fetched_at).then_with(|| a.id.cmp(&b.id)));
    let page = desk.store.query(&ArticleFilter::page(10, 0)).unwrap();
    assert_eq!(page.total, 60);
    let ids: Vec<&str> = page.items.iter().map(|a| a.id.as_str()).collect();
    let want: Vec<&str> = all[..10].iter().map(|a| a.id.as_str()).collect();
    assert_eq!(ids, want);

    let empty = desk
        .store
        .query(&ArticleFilter {
            text_query: Some("zeppelin".into()),
            ..ArticleFilter::page(10, 0)
        })
        .unwrap();
    assert_eq!((empty.items.len(), empty.total), (0, 0));
    let past_end = desk.store.query(&ArticleFilter::page(10, 100)).unwrap();
    assert_eq!((past_end.items.len(), past_end.total), (0, 60));
    for bad in [ArticleFilter::page(0, 0), ArticleFilter::page(1001, 0)] {
        assert_eq!(desk.store.query(&bad).unwrap_err().code(), "MalformedFilter");
    }
}

#[test]
fn translation_jobs() {
    let (dir, mut desk) = common::fixture_desk();
    desk.run_pipeline(RunOptions::default()).unwrap();
    let id = desk.store.articles().next().unwrap().id.clone();
    let first = desk.translate_article(&id, None).unwrap();
    assert_eq!(first.status, JobStatus::Done);
    assert_eq!(first.chunks[0], desk.store.get(&id).unwrap().title);
    let qa = first.qa.as_ref().unwrap();
    assert!(qa.script_ok && qa.numerals_preserved);
    let second = desk.translate_article(&id, None).unwrap();
    assert_ne!(first.id, second.id);
    assert_eq!(reopen(dir.path()).store.jobs_for(&id).count(), 2);

    let err = desk.translate_article("0000000000000000", None).unwrap_err();
    assert_eq!((err.code(), err.http_status()), ("UnknownArticle", 404));
    let err = desk.translate_article(&id, Some("nope")).unwrap_err();
    assert_eq!((err.code(), err.http_status()), ("UnknownBackend", 404));
}

#[test]
fn empty_glossary_translation_fails_script_check() {
    let (dir, mut desk) = common::fixture_desk();
    desk.run_pipeline(RunOptions::default()).unwrap();
    std::fs::write(dir.path().join("glossary.json"), "{}").unwrap();
    let mut desk = reopen(dir.path());
    let id = desk.store.articles().next().unwrap().id.clone();
    let job = desk.translate_article(&id, None).unwrap();
    assert_eq!(job.status, JobStatus::Done);
    assert!(job.output_text.unwrap().contains('⟨'));
    let qa = job.qa.unwrap();
    assert!(!qa.script_ok && !qa.passed);
}

#[test]
fn operator_training_errors() {
    let (_dir, mut desk) = common::fixture_desk();
    desk.run_pipeline(RunOptions::default()).unwrap();
    let err = desk.train_from_store(LabelSource::Operator, None).unwrap_err();
    assert_eq!((err.code(), err.http_status()), ("InsufficientLabels", 422));

    let ids: Vec<String> = desk.store.articles().take(3).map(|a| a.id.clone()).collect();
    for id in &ids {
        desk.annotate(id, "housing").unwrap();
    }
    let err = desk.train_from_store(LabelSource::Operator, None).unwrap_err();
    assert_eq!((err.code(), err.http_status()), ("DegenerateLabels", 422));
    assert_eq!(desk.annotate(&ids[0], "sports").unwrap_err().code(), "UnknownClass");
    assert_eq!(desk.annotate("ffff", "housing").unwrap_err().code(), "UnknownArticle");
}

#[test]
fn operator_label_beats_prediction() {
    let (_dir, mut desk) = common::fixture_desk();
    desk.run_pipeline(FULL).unwrap();
    let a = desk.store.articles().find(|a| a.class_label.as_deref() != Some("other")).unwrap().clone();
    desk.annotate(&a.id, "other").unwrap();
    assert_eq!(desk.store.get(&a.id).unwrap().class_label.as_deref(), Some("other"));
    assert_ne!(desk.store.predicted_label(&a.id), Some("other"));
}

#[test]
fn retraining_is_bit_identical() {
    let (dir, mut desk) = common::fixture_desk();
    desk.run_pipeline(RunOptions::default()).unwrap();
    let model_path = dir.path().join("store/models/model.json");
    let r1 = desk.train_from_store(LabelSource::Fixture, None).unwrap();
    let first = std::fs::read(&model_path).unwrap();
    let r2 = desk.train_from_store(LabelSource::Fixture, None).unwrap();
    assert_eq!(first, std::fs::read(&model_path).unwrap());
    assert_eq!(r1, r2);
    assert_eq!((r1.n_train, r1.n_holdout), (48, 12));
    assert!(r1.holdout.unwrap().accuracy >= 0.9);
}

#[test]
fn shipped_fixtures_match_seed_42() {
    let dir = tempfile::tempdir().unwrap();
    let summary = fixtures::generate(42, dir.path()).unwrap();
    let shipped = common::shipped_fixtures();
    for rel in &summary.files {
        let fresh = std::fs::read(dir.path().join(rel)).unwrap();
        let committed = std::fs::read(shipped.join(rel)).unwrap_or_else(|e| panic!("{}: {e}", rel));
        assert!(fresh == committed, "{} differs from a seed-42 regeneration", rel);
    }
}

// --- store properties ---

const SOURCES: [&str; 3] = ["alpha", "beta", "gamma"];
const CLASSES: [&str; 3] = ["housing", "education", "other"];
const WORDS: [&str; 6] = ["rent", "school", "budget", "council", "transit", "bridge"];

#[derive(Debug, Clone)]
struct Spec {
    source: usize,
    words: Vec<usize>,
    minute: i64,
    label: Option<usize>,
    score: u8,
}

fn spec() -> impl Strategy<Value = Spec> {
    (0..3usize, prop::collection::vec(0..6usize, 1..6), 0..5i64, prop::option::of(0..3usize), 0..=10u8)
        .prop_map(|(source, words, minute, label, score)| Spec {
            source,
            words,
            minute,
            label,
            score,
        })
}

fn build(i: usize, s: &Spec) -> Article {
    let body = format!("{} n{i}", s.words.iter().map(|w| WORDS[*w]).collect::<Vec<_>>().join(" "));
    let hash = dedup_key(&body);
    Article {
        id: format!("{hash:016x}"),
        source_id: SOURCES[s.source].into(),
        url: format!("https://e.org/{i}"),
        title: format!("Item {i}"),
        body,
        language: "en".into(),
        published_at: None,
        fetched_at: Utc.timestamp_opt(1_700_000_000 + s.minute * 60, 0).unwrap(),
        dedup_hash: hash,
        class_label: None,
        topic_scores: [("housing".to_string(), s.score as f64 / 10.0)].into_iter().collect(),
    }
}

fn populate(dir: &Path, specs: &[Spec]) -> ArticleStore {
    let mut store = ArticleStore::open(dir).unwrap();
    let articles: Vec<Article> = specs.iter().enumerate().map(|(i, s)| build(i, s)).collect();
    store.insert_articles(articles.clone()).unwrap();
    let labels = articles
        .iter()
        .zip(specs)
        .filter_map(|(a, s)| {
            s.label.map(|l| newsdesk_core::service::LabelRecord {
                article_id: a.id.clone(),
                class_label: CLASSES[l].into(),
                origin: if l == 2 {
                    newsdesk_core::service::LabelOrigin::Operator
                } else {
                    newsdesk_core::service::LabelOrigin::Predicted
                },
                at: Utc::now(),
            })
        })
        .collect();
    store.add_labels(labels).unwrap();
    store
}

fn filter() -> impl Strategy<Value = ArticleFilter> {
    (
        prop::option::of(0..4usize),
        prop::option::of(0..4usize),
        prop::option::of(0..=10u8),
        prop::option::of(0..7usize),
        1..30usize,
        0..30usize,
    )
        .prop_map(|(class, source, score, word, limit, offset)| ArticleFilter {
            class_label: class.map(|c| CLASSES.get(c).copied().unwrap_or("politics").to_string()),
            source_id: source.map(|s| SOURCES.get(s).copied().unwrap_or("delta").to_string()),
            topic_min_score: score.map(|s| ("housing".to_string(), s as f64 / 10.0)),
            text_query: word.map(|w| WORDS.get(w).copied().unwrap_or("zeppelin").to_string()),
            limit,
            offset,
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn indexed_query_equals_scan_and_survives_reload(
        specs in prop::collection::vec(spec(), 0..40),
        filters in prop::collection::vec(filter(), 1..8),
    ) {
        let dir = tempfile::tempdir().unwrap();
        let store = populate(dir.path(), &specs);
        let reloaded = ArticleStore::open(dir.path()).unwrap();
        for f in &filters {
            let indexed = store.query(f).unwrap();
            prop_assert_eq!(&indexed, &store.query_scan(f).unwrap());
            prop_assert_eq!(&indexed, &reloaded.query(f).unwrap());
            prop_assert!(indexed.items.len() <= f.limit);
        }
    }

    #[test]
    fn torn_tail_recovers_to_a_prefix(
        specs in prop::collection::vec(spec(), 1..20),
        cut in 0.0f64..1.0,
    ) {
        let dir = tempfile::tempdir().unwrap();
        let store = populate(dir.path(), &specs);
        let all: Vec<Article> = store.articles().cloned().collect();
        drop(store);
        let path = dir.path().join("articles.jsonl");
        let raw = std::fs::read(&path).unwrap();
        let keep = (raw.len() as f64 * cut) as usize;
        std::fs::write(&path, &raw[..keep]).unwrap();
        let complete_lines = raw[..keep].iter().filter(|b| **b == b'\n').count();

        let mut store = ArticleStore::open(dir.path()).unwrap();
        prop_assert_eq!(store.len(), complete_lines);
        // the surviving articles are exactly the first complete records
        let written: Vec<Article> = raw.split(|b| *b == b'\n').filter(|l| !l.is_empty())
            .map(|l| serde_json::from_slice(l).unwrap()).collect();
        for a in &written[..complete_lines] {
            prop_assert!(store.get(&a.id).is_some());
        }
        // a writer repairs the tail, so everything can be re-added cleanly
        let stripped: Vec<Article> = all.into_iter().map(|mut a| { a.class_label = None; a }).collect();
        let (inserted, dupes) = store.insert_articles(stripped).unwrap();
        prop_assert_eq!(inserted.len() + complete_lines, specs.len());
        prop_assert_eq!(dupes, complete_lines);
        let again = ArticleStore::open(dir.path()).unwrap();
        prop_assert_eq!(again.len(), specs.len());
    }
}
