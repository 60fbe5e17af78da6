//! Ingest → featurize → classify, plus on-demand training and translation.

use std::collections::BTreeMap;
use std::path::PathBuf;

use chrono::{DateTime, Utc};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Desk, LabelOrigin, LabelRecord, ServiceError};
use crate::classifier::{evaluate, predict, ClassifierModel, EvalReport, SoftmaxRegression, Trainer};
use crate::features::{build_vocabulary, featurize_topics, FeatureMatrix, FeatureMode, FeatureSchema, LabelVector};
use crate::ingest::{extract_text, fetch_feed, Article, ArticleStub, Fetcher, IngestError, Source};
use crate::translator::{chunk_text, translate_chunks, Chunk, JobStatus, TranslationJob};

/// One failure recorded during a run; the run itself carries on.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunError {
    pub stage: String,
    pub subject: String,
    pub reason: String,
}

/// Bookkeeping for one ingest/classify pass.
///
/// `articles_ingested = articles_fetched − articles_deduped −
/// articles_gate_denied − extraction_failures`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineRun {
    pub run_id: String,
    pub started_at: DateTime<Utc>,
    pub finished_at: DateTime<Utc>,
    pub sources_polled: usize,
    /// Sources skipped by the gate, with the reason code.
    pub sources_denied: Vec<(String, String)>,
    pub articles_fetched: usize,
    pub articles_ingested: usize,
    pub articles_deduped: usize,
    pub articles_gate_denied: usize,
    pub extraction_failures: usize,
    pub classified: usize,
    pub errors: Vec<RunError>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RunOptions {
    /// Train on fixture labels after ingesting, before classifying.
    pub train: bool,
    /// Assign predicted labels to unlabeled articles.
    pub classify: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelSource {
    /// The labels file named by `fixture_labels_path` (article URL → class).
    Fixture,
    /// Annotations recorded through the API or CLI.
    Operator,
}

impl std::str::FromStr for LabelSource {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "fixture" => Ok(LabelSource::Fixture),
            "operator" => Ok(LabelSource::Operator),
            other => Err(format!("unknown label source `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub model: ClassifierModel,
    pub n_train: usize,
    pub n_holdout: usize,
    /// Evaluation on the held-out split, when there is one.
    pub holdout: Option<EvalReport>,
}

struct SourceHarvest {
    fetched: usize,
    articles: Vec<Article>,
    extraction_failures: usize,
    errors: Vec<RunError>,
}

fn harvest(source: &Source, fetcher: &Fetcher) -> SourceHarvest {
    let mut out = SourceHarvest {
        fetched: 0,
        articles: Vec::new(),
        extraction_failures: 0,
        errors: Vec::new(),
    };
    let feed = match fetch_feed(source, fetcher) {
        Ok(feed) => feed,
        Err(e) => {
            tracing::warn!(source = %source.id, error = %e, "feed skipped");
            out.errors.push(RunError {
                stage: "fetch".into(),
                subject: source.id.clone(),
                reason: format!("{}: {e}", e.code()),
            });
            return out;
        }
    };
    for issue in feed.issues {
        out.errors.push(RunError {
            stage: "fetch".into(),
            subject: source.id.clone(),
            reason: format!("MalformedFeed at byte {}: {}", issue.offset, issue.reason),
        });
    }
    out.fetched = feed.stubs.len();
    for stub in feed.stubs {
        match extract_stub(&stub, fetcher) {
            Ok(extracted) => out
                .articles
                .push(Article::from_extracted(&stub, extracted, &source.language, Utc::now())),
            Err(e) => {
                out.extraction_failures += 1;
                out.errors.push(RunError {
                    stage: "extract".into(),
                    subject: stub.url.clone(),
                    reason: format!("{}: {e}", e.code()),
                });
            }
        }
    }
    out
}

/// Extracts from the feed's inline content, fetching the article page when the feed carries none.
fn extract_stub(stub: &ArticleStub, fetcher: &Fetcher) -> Result<crate::ingest::Extracted, IngestError> {
    if !stub.raw_payload.iter().all(u8::is_ascii_whitespace) {
        return extract_text(&stub.raw_payload, &stub.content_type);
    }
    let doc = fetcher.fetch(&stub.url).map_err(|reason| IngestError::UnreachableSource {
        source_id: stub.source_id.clone(),
        reason,
    })?;
    extract_text(&doc.bytes, &doc.content_type)
}

fn new_run_id(at: DateTime<Utc>) -> String {
    use rand::Rng;
    format!("run-{}-{:08x}", at.format("%Y%m%dT%H%M%SZ"), rand::thread_rng().gen::<u32>())
}

impl Desk {
    fn model_path(&self) -> PathBuf {
        self.config.models_dir().join("model.json")
    }

    fn schema_path(&self) -> PathBuf {
        self.config.models_dir().join("schema.json")
    }

    pub fn has_model(&self) -> bool {
        self.model_path().exists() && self.schema_path().exists()
    }

    /// The persisted model and the schema it was trained against.
    pub fn load_model(&self) -> Result<(ClassifierModel, FeatureSchema), ServiceError> {
        if !self.has_model() {
            return Err(ServiceError::NoModel);
        }
        let raw = std::fs::read_to_string(self.schema_path())?;
        let schema: FeatureSchema =
            serde_json::from_str(&raw).map_err(|e| ServiceError::Store(format!("schema.json: {e}")))?;
        let model = ClassifierModel::load(self.model_path(), Some(&schema.digest()))?;
        Ok((model, schema))
    }

    /// Runs the ingest stage for every source, then optionally trains and classifies.
    pub fn run_pipeline(&mut self, opts: RunOptions) -> Result<PipelineRun, ServiceError> {
        let started_at = Utc::now();
        if self.registry.eligible().next().is_none() {
            return Err(ServiceError::NoEligibleSources);
        }
        if opts.classify && !opts.train && !self.has_model() {
            return Err(ServiceError::NoModel);
        }
        self.store.refresh()?;

        let mut run = PipelineRun {
            run_id: new_run_id(started_at),
            started_at,
            finished_at: started_at,
            sources_polled: 0,
            sources_denied: Vec::new(),
            articles_fetched: 0,
            articles_ingested: 0,
            articles_deduped: 0,
            articles_gate_denied: 0,
            extraction_failures: 0,
            classified: 0,
            errors: Vec::new(),
        };
        let mut allowed = Vec::new();
        for s in self.registry.sources() {
            match s.gate() {
                crate::ingest::GateDecision::Allow => allowed.push(s.clone()),
                crate::ingest::GateDecision::Deny(reason) => {
                    run.sources_denied.push((s.id.clone(), reason.as_str().to_owned()))
                }
            }
        }
        run.sources_polled = allowed.len();

        let fetcher = Fetcher::new(self.config.fixture_root());
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.config.fetch_parallelism)
            .build()
            .map_err(|e| ServiceError::Config(e.to_string()))?;
        let harvests: Vec<SourceHarvest> = pool.install(|| allowed.par_iter().map(|s| harvest(s, &fetcher)).collect());

        let mut candidates = Vec::new();
        for h in harvests {
            run.articles_fetched += h.fetched;
            run.extraction_failures += h.extraction_failures;
            run.errors.extend(h.errors);
            candidates.extend(h.articles);
        }
        // Re-check the gate right before storage so a source can never leak downstream.
        let before = candidates.len();
        candidates.retain(|a| self.registry.gatekeep(&a.source_id).is_ok_and(|d| d.is_allow()));
        run.articles_gate_denied = before - candidates.len();

        if !candidates.is_empty() {
            let scores = featurize_topics(&candidates, &self.lexicons)?;
            for (i, a) in candidates.iter_mut().enumerate() {
                a.topic_scores = scores
                    .columns
                    .iter()
                    .cloned()
                    .zip(scores.row(i).iter().copied())
                    .collect();
            }
        }
        let (inserted, deduped) = self.store.insert_articles(candidates)?;
        run.articles_ingested = inserted.len();
        run.articles_deduped = deduped;

        if opts.train {
            self.train_from_store(LabelSource::Fixture, None)?;
        }
        if opts.classify {
            run.classified = self.classify_unlabeled()?;
        }
        run.finished_at = Utc::now();
        self.store.add_run(run.clone())?;
        tracing::info!(
            run = %run.run_id,
            ingested = run.articles_ingested,
            deduped = run.articles_deduped,
            classified = run.classified,
            "pipeline run finished"
        );
        Ok(run)
    }

    fn fixture_labels(&self) -> Result<BTreeMap<String, String>, ServiceError> {
        let path = self
            .config
            .fixture_labels_path
            .as_ref()
            .ok_or_else(|| ServiceError::InsufficientLabels("config has no fixture_labels_path".into()))?;
        let raw = std::fs::read_to_string(path)?;
        serde_json::from_str(&raw).map_err(|e| ServiceError::Config(format!("{}: {e}", path.display())))
    }

    /// Labeled articles (sorted by id) for the given label source.
    pub fn labeled_articles(&self, source: LabelSource) -> Result<Vec<(Article, String)>, ServiceError> {
        let mut out = Vec::new();
        match source {
            LabelSource::Fixture => {
                let by_url = self.fixture_labels()?;
                for a in self.store.articles() {
                    if let Some(label) = by_url.get(&a.url) {
                        out.push((a.clone(), label.clone()));
                    }
                }
            }
            LabelSource::Operator => {
                for a in self.store.articles() {
                    if let Some(label) = self.store.operator_labels().get(&a.id) {
                        out.push((a.clone(), label.clone()));
                    }
                }
            }
        }
        for (_, label) in &out {
            if !self.config.classes.contains(label) {
                return Err(ServiceError::UnknownClass(label.clone()));
            }
        }
        Ok(out)
    }

    /// Builds X and Y from labeled articles, trains, evaluates on the held-out
    /// split and persists `models/model.json` and `models/schema.json`.
    ///
    /// Every `holdout_every`-th article of each class (by id) is held out.
    pub fn train_from_store(
        &mut self,
        label_source: LabelSource,
        mode: Option<FeatureMode>,
    ) -> Result<TrainReport, ServiceError> {
        self.store.refresh()?;
        let labeled = self.labeled_articles(label_source)?;
        if labeled.is_empty() {
            return Err(ServiceError::InsufficientLabels(format!(
                "{} labels match no stored article",
                match label_source {
                    LabelSource::Fixture => "fixture",
                    LabelSource::Operator => "operator",
                }
            )));
        }
        let (train, holdout) = holdout_split(&labeled, self.config.holdout_every);
        let train_docs: Vec<&Article> = train.iter().map(|(a, _)| *a).collect();
        let schema = match mode.unwrap_or(self.config.feature_mode) {
            FeatureMode::TopicRelevance => FeatureSchema::TopicRelevance {
                lexicons: self.lexicons.clone(),
            },
            FeatureMode::Tfidf => FeatureSchema::Tfidf {
                vocabulary: build_vocabulary(&train_docs, self.config.vocab_min_df, self.config.vocab_max_terms)?,
            },
        };
        let x = schema.featurize(&train_docs)?;
        let y: LabelVector = train.iter().map(|(_, l)| l.to_string()).collect();
        let outcome = SoftmaxRegression {
            hyper: self.config.classifier_hyper,
        }
        .fit(&x, &y)?;
        let model = outcome.model;

        let holdout_report = if holdout.is_empty() {
            None
        } else {
            let docs: Vec<&Article> = holdout.iter().map(|(a, _)| *a).collect();
            let xh = schema.featurize(&docs)?;
            let yh: LabelVector = holdout.iter().map(|(_, l)| l.to_string()).collect();
            Some(evaluate(&model, &xh, &yh)?)
        };

        std::fs::create_dir_all(self.config.models_dir())?;
        let schema_json = serde_json::to_string_pretty(&schema).expect("schema serializes");
        let tmp = self.schema_path().with_extension("tmp");
        std::fs::write(&tmp, schema_json)?;
        std::fs::rename(&tmp, self.schema_path())?;
        model.save(self.model_path())?;
        if let Some(report) = &holdout_report {
            std::fs::write(
                self.config.models_dir().join("eval.json"),
                serde_json::to_string_pretty(report).expect("report serializes"),
            )?;
        }
        Ok(TrainReport {
            model,
            n_train: train.len(),
            n_holdout: holdout.len(),
            holdout: holdout_report,
        })
    }

    /// X over every stored article (rows sorted by id). TF-IDF fits its vocabulary on the whole store.
    pub fn feature_matrix(&mut self, mode: Option<FeatureMode>) -> Result<FeatureMatrix, ServiceError> {
        self.store.refresh()?;
        let docs: Vec<&Article> = self.store.articles().collect();
        let schema = match mode.unwrap_or(self.config.feature_mode) {
            FeatureMode::TopicRelevance => FeatureSchema::TopicRelevance {
                lexicons: self.lexicons.clone(),
            },
            FeatureMode::Tfidf => FeatureSchema::Tfidf {
                vocabulary: build_vocabulary(&docs, self.config.vocab_min_df, self.config.vocab_max_terms)?,
            },
        };
        Ok(schema.featurize(&docs)?)
    }

    /// Predicts a label for every stored article that has none. Returns how many were labeled.
    pub fn classify_unlabeled(&mut self) -> Result<usize, ServiceError> {
        self.store.refresh()?;
        let (model, schema) = self.load_model()?;
        let pending: Vec<Article> = self.store.articles().filter(|a| a.class_label.is_none()).cloned().collect();
        if pending.is_empty() {
            return Ok(0);
        }
        let x = schema.featurize(&pending)?;
        let y_pred = predict(&model, &x)?;
        let now = Utc::now();
        let records: Vec<LabelRecord> = pending
            .iter()
            .zip(y_pred.labels)
            .map(|(a, label)| LabelRecord {
                article_id: a.id.clone(),
                class_label: label,
                origin: LabelOrigin::Predicted,
                at: now,
            })
            .collect();
        let n = records.len();
        self.store.add_labels(records)?;
        Ok(n)
    }

    /// Records an operator annotation.
    pub fn annotate(&mut self, article_id: &str, class_label: &str) -> Result<LabelRecord, ServiceError> {
        if !self.config.classes.iter().any(|c| c == class_label) {
            return Err(ServiceError::UnknownClass(class_label.to_owned()));
        }
        self.store.refresh()?;
        if self.store.get(article_id).is_none() {
            return Err(ServiceError::UnknownArticle(article_id.to_owned()));
        }
        let record = LabelRecord {
            article_id: article_id.to_owned(),
            class_label: class_label.to_owned(),
            origin: LabelOrigin::Operator,
            at: Utc::now(),
        };
        self.store.add_labels(vec![record.clone()])?;
        Ok(record)
    }

    /// Translates one article (title as its own first chunk, then the body)
    /// and persists the job, whether it finished or failed.
    pub fn translate_article(&mut self, article_id: &str, backend_id: Option<&str>) -> Result<TranslationJob, ServiceError> {
        self.store.refresh()?;
        let article = self
            .store
            .get(article_id)
            .cloned()
            .ok_or_else(|| ServiceError::UnknownArticle(article_id.to_owned()))?;
        let backend_id = match backend_id {
            Some(id) => id.to_owned(),
            None => self
                .backends
                .default_id()
                .ok_or_else(|| ServiceError::Config("no translation backend configured".into()))?
                .to_owned(),
        };
        let (spec, backend) = self.backends.get(&backend_id)?;
        let title = article.title.trim();
        let mut chunks = Vec::new();
        let source_text = if title.is_empty() {
            article.body.clone()
        } else {
            chunks.push(Chunk {
                text: title.to_owned(),
                oversized: title.chars().count() > spec.max_chunk_chars,
            });
            format!("{title}\n{}", article.body)
        };
        chunks.extend(chunk_text(&article.body, spec.max_chunk_chars));
        let job = translate_chunks(Some(&article.id), &source_text, chunks, backend.as_ref())?;
        self.store.put_job(job.clone())?;
        if job.status == JobStatus::Failed {
            tracing::warn!(job = %job.id, article = %article.id, "translation failed");
        }
        Ok(job)
    }
}

/// An article paired with its class label.
pub type Labeled<'a> = (&'a Article, &'a str);

/// Stratified split: within each class (articles sorted by id), every
/// `every`-th article goes to the held-out set. `every = 0` holds nothing out.
pub fn holdout_split(labeled: &[(Article, String)], every: usize) -> (Vec<Labeled<'_>>, Vec<Labeled<'_>>) {
    let mut by_class: BTreeMap<&str, Vec<&Article>> = BTreeMap::new();
    for (a, l) in labeled {
        by_class.entry(l.as_str()).or_default().push(a);
    }
    let mut train = Vec::new();
    let mut holdout = Vec::new();
    for (label, mut arts) in by_class {
        arts.sort_by(|a, b| a.id.cmp(&b.id));
        for (k, a) in arts.into_iter().enumerate() {
            if every > 0 && k % every == every - 1 {
                holdout.push((a, label));
            } else {
                train.push((a, label));
            }
        }
    }
    train.sort_by(|a, b| a.0.id.cmp(&b.0.id));
    holdout.sort_by(|a, b| a.0.id.cmp(&b.0.id));
    (train, holdout)
}
