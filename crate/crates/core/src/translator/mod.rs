//! English → Bangla translation through a pluggable backend, with chunking
//! for long articles and an automatic QA battery on the output.

mod chunk;
mod mock;
mod qa;
mod remote;

use std::collections::BTreeMap;
use std::sync::Arc;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use chunk::{chunk_text, sentence_spans, Chunk, MIN_CHUNK_CHARS};
pub use mock::{mock_translate, Glossary, GlossaryBackend};
pub use qa::{qa_check, QaReport, LENGTH_RATIO_BOUNDS};
pub use remote::{HttpReply, RemoteBackend, ReqwestTransport, Transport, API_KEY_ENV};

#[derive(Debug, Error)]
pub enum TranslateError {
    #[error("nothing to translate")]
    EmptyInput,
    #[error("backend unavailable after {attempts} attempts: {reason}")]
    BackendUnavailable { attempts: usize, reason: String },
    #[error("backend refused the request (HTTP {status})")]
    BackendRefusal { status: u16, body: String },
    #[error("unknown backend `{0}`")]
    UnknownBackend(String),
    #[error("invalid backend configuration: {0}")]
    InvalidBackend(String),
}

impl TranslateError {
    pub fn code(&self) -> &'static str {
        match self {
            TranslateError::EmptyInput => "EmptyInput",
            TranslateError::BackendUnavailable { .. } => "BackendUnavailable",
            TranslateError::BackendRefusal { .. } => "BackendRefusal",
            TranslateError::UnknownBackend(_) => "UnknownBackend",
            TranslateError::InvalidBackend(_) => "InvalidBackend",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendKind {
    RemoteLlm,
    MockGlossary,
}

/// Operator configuration for one translation backend.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranslationBackendSpec {
    pub id: String,
    pub kind: BackendKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub endpoint: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model_name: Option<String>,
    pub prompt_template: String,
    pub max_chunk_chars: usize,
    pub timeout_ms: u64,
    pub max_retries: u32,
    /// Dotted path to the translated text in the response JSON; defaults to `text`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub response_path: Option<String>,
}

impl TranslationBackendSpec {
    pub fn mock(id: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            kind: BackendKind::MockGlossary,
            endpoint: None,
            model_name: None,
            prompt_template: "{text}".into(),
            max_chunk_chars: 1200,
            timeout_ms: 1000,
            max_retries: 0,
            response_path: None,
        }
    }

    pub fn validate(&self) -> Result<(), TranslateError> {
        let placeholders = self.prompt_template.matches("{text}").count();
        if placeholders != 1 {
            return Err(TranslateError::InvalidBackend(format!(
                "{}: prompt_template must contain exactly one {{text}}, found {placeholders}",
                self.id
            )));
        }
        if self.max_chunk_chars < MIN_CHUNK_CHARS {
            return Err(TranslateError::InvalidBackend(format!(
                "{}: max_chunk_chars {} is below {MIN_CHUNK_CHARS}",
                self.id, self.max_chunk_chars
            )));
        }
        if let Some(endpoint) = &self.endpoint {
            url::Url::parse(endpoint)
                .map_err(|e| TranslateError::InvalidBackend(format!("{}: endpoint: {e}", self.id)))?;
        }
        Ok(())
    }

    pub fn render_prompt(&self, text: &str) -> String {
        self.prompt_template.replacen("{text}", text, 1)
    }
}

/// The translation function T: one chunk of English in, Bangla out.
pub trait TranslationBackend: Send + Sync {
    fn id(&self) -> &str;
    fn translate_chunk(&self, chunk: &str) -> Result<String, TranslateError>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JobStatus {
    Pending,
    Done,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JobError {
    pub code: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranslationJob {
    pub id: String,
    pub article_id: Option<String>,
    pub source_text: String,
    pub chunks: Vec<String>,
    /// Indices into `chunks` of sentences longer than the chunk limit.
    #[serde(default)]
    pub oversized_chunks: Vec<usize>,
    pub backend_id: String,
    pub status: JobStatus,
    pub output_text: Option<String>,
    pub qa: Option<QaReport>,
    #[serde(default)]
    pub error: Option<JobError>,
    pub created_at: DateTime<Utc>,
    pub finished_at: Option<DateTime<Utc>>,
}

/// Chunks `text` with the backend's limit and translates it.
pub fn translate(
    article_id: Option<&str>,
    text: &str,
    backend: &dyn TranslationBackend,
    max_chunk_chars: usize,
) -> Result<TranslationJob, TranslateError> {
    let chunks = chunk_text(text, max_chunk_chars);
    translate_chunks(article_id, text, chunks, backend)
}

/// Sends pre-built chunks through `backend` in order and joins the results with `\n`.
///
/// Backend failures do not return `Err`: they yield a job with status
/// `failed` and the error recorded, so the attempt can be persisted. A
/// finished job always carries a QA report, passing or not.
pub fn translate_chunks(
    article_id: Option<&str>,
    source_text: &str,
    chunks: Vec<Chunk>,
    backend: &dyn TranslationBackend,
) -> Result<TranslationJob, TranslateError> {
    if chunks.is_empty() || source_text.trim().is_empty() {
        return Err(TranslateError::EmptyInput);
    }
    let created_at = Utc::now();
    let mut job = TranslationJob {
        id: new_job_id(),
        article_id: article_id.map(str::to_owned),
        source_text: source_text.to_owned(),
        oversized_chunks: chunks
            .iter()
            .enumerate()
            .filter(|(_, c)| c.oversized)
            .map(|(i, _)| i)
            .collect(),
        chunks: chunks.into_iter().map(|c| c.text).collect(),
        backend_id: backend.id().to_owned(),
        status: JobStatus::Pending,
        output_text: None,
        qa: None,
        error: None,
        created_at,
        finished_at: None,
    };
    let mut translated = Vec::with_capacity(job.chunks.len());
    for chunk in &job.chunks {
        match backend.translate_chunk(chunk) {
            Ok(out) => translated.push(out),
            Err(e) => {
                tracing::warn!(backend = backend.id(), error = %e, "translation job failed");
                job.status = JobStatus::Failed;
                job.error = Some(JobError {
                    code: e.code().to_owned(),
                    message: e.to_string(),
                });
                job.finished_at = Some(Utc::now());
                return Ok(job);
            }
        }
    }
    let output = translated.join("\n");
    job.qa = Some(qa_check(source_text, &output));
    if output.trim().is_empty() {
        job.status = JobStatus::Failed;
        job.error = Some(JobError {
            code: "EmptyOutput".into(),
            message: "backend returned no text".into(),
        });
    } else {
        job.status = JobStatus::Done;
        job.output_text = Some(output);
    }
    job.finished_at = Some(Utc::now());
    Ok(job)
}

fn new_job_id() -> String {
    use rand::Rng;
    format!("job-{:016x}", rand::thread_rng().gen::<u64>())
}

/// Registered backends keyed by id. Specs are immutable after registration.
#[derive(Clone, Default)]
pub struct BackendRegistry {
    backends: BTreeMap<String, (TranslationBackendSpec, Arc<dyn TranslationBackend>)>,
    first: Option<String>,
}

impl std::fmt::Debug for BackendRegistry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_list().entries(self.backends.keys()).finish()
    }
}

impl BackendRegistry {
    /// Builds mock backends over `glossary` and remote ones reading the API key from the environment.
    pub fn from_specs(specs: &[TranslationBackendSpec], glossary: &Glossary) -> Result<Self, TranslateError> {
        let mut reg = Self::default();
        for spec in specs {
            spec.validate()?;
            let backend: Arc<dyn TranslationBackend> = match spec.kind {
                BackendKind::MockGlossary => Arc::new(GlossaryBackend::new(spec.id.clone(), glossary.clone())),
                BackendKind::RemoteLlm => Arc::new(RemoteBackend::from_env(spec.clone())?),
            };
            reg.register(spec.clone(), backend)?;
        }
        Ok(reg)
    }

    pub fn register(&mut self, spec: TranslationBackendSpec, backend: Arc<dyn TranslationBackend>) -> Result<(), TranslateError> {
        spec.validate()?;
        if self.backends.contains_key(&spec.id) {
            return Err(TranslateError::InvalidBackend(format!("duplicate backend id `{}`", spec.id)));
        }
        self.first.get_or_insert_with(|| spec.id.clone());
        self.backends.insert(spec.id.clone(), (spec, backend));
        Ok(())
    }

    pub fn get(&self, id: &str) -> Result<(TranslationBackendSpec, Arc<dyn TranslationBackend>), TranslateError> {
        self.backends
            .get(id)
            .map(|(s, b)| (s.clone(), Arc::clone(b)))
            .ok_or_else(|| TranslateError::UnknownBackend(id.to_owned()))
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.backends.keys().map(String::as_str)
    }

    /// The first backend registered.
    pub fn default_id(&self) -> Option<&str> {
        self.first.as_deref()
    }
}
