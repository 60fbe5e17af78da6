//! Persistence, pipeline orchestration and the HTTP API.

mod api;
mod config;
pub mod fixtures;
mod pipeline;
mod store;

use std::path::PathBuf;

use thiserror::Error;

use crate::classifier::ClassifierError;
use crate::features::{load_lexicons, FeatureError, TopicLexicon};
use crate::ingest::{IngestError, SourceRegistry};
use crate::translator::{BackendRegistry, Glossary, TranslateError};

pub use api::{filter_from_params, router, serve, AppState, ErrorBody, DEFAULT_PAGE};
pub use axum::Router;
pub use config::Config;
pub use pipeline::{holdout_split, LabelSource, Labeled, PipelineRun, RunError, RunOptions, TrainReport};
pub use store::{ArticleFilter, ArticleStore, LabelOrigin, LabelRecord, Page, MAX_PAGE};

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("unknown article `{0}`")]
    UnknownArticle(String),
    #[error("unknown translation job `{0}`")]
    UnknownJob(String),
    #[error("no pipeline run recorded yet")]
    NoRuns,
    #[error("no enabled source with republish permission")]
    NoEligibleSources,
    #[error("no trained model; run `train` first or pass --train")]
    NoModel,
    #[error("malformed filter: {0}")]
    MalformedFilter(String),
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("no labeled articles to train on ({0})")]
    InsufficientLabels(String),
    #[error("label `{0}` is not in the configured class set")]
    UnknownClass(String),
    #[error("translation job {job_id} failed: {code}: {message}")]
    JobFailed {
        job_id: String,
        code: String,
        message: String,
    },
    #[error("configuration error: {0}")]
    Config(String),
    #[error("store error: {0}")]
    Store(String),
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Classifier(#[from] ClassifierError),
    #[error(transparent)]
    Translate(#[from] TranslateError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl ServiceError {
    /// Machine-readable error code, as returned in API error bodies.
    pub fn code(&self) -> &str {
        match self {
            ServiceError::UnknownArticle(_) => "UnknownArticle",
            ServiceError::UnknownJob(_) => "UnknownJob",
            ServiceError::NoRuns => "NoRuns",
            ServiceError::NoEligibleSources => "NoEligibleSources",
            ServiceError::NoModel => "NoModel",
            ServiceError::MalformedFilter(_) => "MalformedFilter",
            ServiceError::InvalidRequest(_) => "InvalidRequest",
            ServiceError::InsufficientLabels(_) => "InsufficientLabels",
            ServiceError::UnknownClass(_) => "UnknownClass",
            ServiceError::JobFailed { code, .. } => code,
            ServiceError::Config(_) => "InvalidConfig",
            ServiceError::Store(_) => "StoreError",
            ServiceError::Ingest(e) => e.code(),
            ServiceError::Feature(e) => match e {
                FeatureError::EmptyCorpus => "EmptyCorpus",
                FeatureError::EmptyLexicons => "EmptyLexicons",
                FeatureError::SchemaMismatch(_) => "SchemaMismatch",
                FeatureError::InvalidLexicon(_) => "InvalidLexicon",
                FeatureError::InvalidParameter(_) => "InvalidParameter",
                FeatureError::Io(_) | FeatureError::Csv(_) => "Io",
            },
            ServiceError::Classifier(e) => match e {
                ClassifierError::NonFiniteInput => "NonFiniteInput",
                ClassifierError::SchemaMismatch(_) => "SchemaMismatch",
                ClassifierError::LengthMismatch { .. } => "LengthMismatch",
                ClassifierError::DegenerateLabels => "DegenerateLabels",
                ClassifierError::NonFiniteLoss { .. } => "NonFiniteLoss",
                ClassifierError::UnknownClass(_) => "UnknownClass",
                ClassifierError::InvalidModel(_) => "InvalidModel",
                ClassifierError::InvalidHyperparameters(_) => "InvalidHyperparameters",
                ClassifierError::Io(_) => "Io",
            },
            ServiceError::Translate(e) => e.code(),
            ServiceError::Io(_) => "Io",
        }
    }

    /// HTTP status for this error.
    pub fn http_status(&self) -> u16 {
        match self.code() {
            "UnknownArticle" | "UnknownJob" | "UnknownSource" | "UnknownBackend" | "NoRuns" => 404,
            "MalformedFilter" | "InvalidRequest" | "EmptyInput" => 400,
            "DuplicateSource" => 409,
            "UnknownClass" | "InvalidSource" | "InsufficientLabels" | "DegenerateLabels" | "NoModel"
            | "NoEligibleSources" => 422,
            "BackendRefusal" | "EmptyOutput" => 502,
            "BackendUnavailable" => 503,
            _ => 500,
        }
    }
}

/// Everything a desk needs at run time: configuration, registry, lexicons,
/// translation backends and the open store.
#[derive(Debug)]
pub struct Desk {
    pub config: Config,
    pub registry: SourceRegistry,
    pub lexicons: Vec<TopicLexicon>,
    pub backends: BackendRegistry,
    pub store: ArticleStore,
}

impl Desk {
    pub fn open(config: Config) -> Result<Self, ServiceError> {
        config.validate()?;
        let registry = SourceRegistry::load(&config.sources_path)?;
        let lexicons = load_lexicons(&config.lexicons_path)?;
        let glossary = Glossary::load(&config.glossary_path)?;
        let backends = BackendRegistry::from_specs(&config.backends, &glossary)?;
        let store = ArticleStore::open(&config.store_dir)?;
        Ok(Self {
            config,
            registry,
            lexicons,
            backends,
            store,
        })
    }

    pub fn open_path(config_path: impl Into<PathBuf>) -> Result<Self, ServiceError> {
        Self::open(Config::load(config_path.into())?)
    }

    /// Persists the in-memory registry back to its file.
    pub fn save_registry(&self) -> Result<(), ServiceError> {
        self.registry.save(&self.config.sources_path)?;
        Ok(())
    }
}
