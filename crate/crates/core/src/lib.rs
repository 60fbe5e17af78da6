//! News-desk pipeline for ethnic media: gatekept feed ingestion, article-topic
//! feature matrices, softmax-regression classification and English to Bangla
//! translation with automatic quality checks.
//!
//! The stages are wired together by [`service`], which also owns the
//! append-only article store and the JSON HTTP API.

pub mod classifier;
pub mod features;
pub mod ingest;
pub mod service;
pub mod text;
pub mod translator;

pub use classifier::{ClassifierModel, EvalReport, Hyperparameters};
pub use features::{FeatureMatrix, FeatureMode, FeatureSchema, LabelVector, TopicLexicon, Vocabulary};
pub use ingest::{Article, ArticleStub, GateDecision, Source, SourceRegistry};
pub use service::{ArticleStore, Config, PipelineRun};
pub use translator::{QaReport, TranslationBackendSpec, TranslationJob};
