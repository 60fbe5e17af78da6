//! Source registry, republish-permission gate, feed parsing, text extraction
//! and content fingerprinting.

mod dedup;
mod extract;
mod feed;
mod fetch;

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;
use url::Url;

pub use dedup::dedup_key;
pub use extract::{extract_text, Extracted};
pub use feed::{fetch_feed, parse_feed, FeedIssue, ParsedFeed};
pub use fetch::{FetchedDocument, Fetcher};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("unknown source `{0}`")]
    UnknownSource(String),
    #[error("source `{source_id}` unreachable: {reason}")]
    UnreachableSource { source_id: String, reason: String },
    #[error("malformed feed for `{source_id}` at byte {offset}: {reason}")]
    MalformedFeed {
        source_id: String,
        offset: usize,
        reason: String,
    },
    #[error("payload could not be decoded: {0}")]
    UndecodablePayload(String),
    #[error("no text left after extraction")]
    EmptyAfterExtraction,
    #[error("invalid source registry: {0}")]
    InvalidRegistry(String),
    #[error("duplicate source id `{0}`")]
    DuplicateSource(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl IngestError {
    pub fn code(&self) -> &'static str {
        match self {
            IngestError::UnknownSource(_) => "UnknownSource",
            IngestError::UnreachableSource { .. } => "UnreachableSource",
            IngestError::MalformedFeed { .. } => "MalformedFeed",
            IngestError::UndecodablePayload(_) => "UndecodablePayload",
            IngestError::EmptyAfterExtraction => "EmptyAfterExtraction",
            IngestError::InvalidRegistry(_) => "InvalidSource",
            IngestError::DuplicateSource(_) => "DuplicateSource",
            IngestError::Io(_) => "Io",
        }
    }
}

/// A news provider the desk may poll.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Source {
    pub id: String,
    pub name: String,
    pub feed_url: String,
    pub homepage_url: String,
    pub language: String,
    pub republish_permitted: bool,
    pub license_note: String,
    pub enabled: bool,
}

impl Source {
    pub fn validate(&self) -> Result<(), IngestError> {
        if self.id.trim().is_empty() {
            return Err(IngestError::InvalidRegistry("empty source id".into()));
        }
        for (field, value) in [("feed_url", &self.feed_url), ("homepage_url", &self.homepage_url)] {
            Url::parse(value).map_err(|e| {
                IngestError::InvalidRegistry(format!("{}: {field} `{value}` is not an absolute URL ({e})", self.id))
            })?;
        }
        Ok(())
    }

    pub fn gate(&self) -> GateDecision {
        if !self.enabled {
            GateDecision::Deny(DenyReason::Disabled)
        } else if !self.republish_permitted {
            GateDecision::Deny(DenyReason::NoRepublishPermission)
        } else {
            GateDecision::Allow
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DenyReason {
    Disabled,
    NoRepublishPermission,
}

impl DenyReason {
    pub fn as_str(self) -> &'static str {
        match self {
            DenyReason::Disabled => "disabled",
            DenyReason::NoRepublishPermission => "no_republish_permission",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "decision", content = "reason", rename_all = "snake_case")]
pub enum GateDecision {
    Allow,
    Deny(DenyReason),
}

impl GateDecision {
    pub fn is_allow(self) -> bool {
        matches!(self, GateDecision::Allow)
    }
}

/// The operator-maintained list of sources, stored as a JSON array.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SourceRegistry {
    sources: Vec<Source>,
}

impl SourceRegistry {
    pub fn new(sources: Vec<Source>) -> Result<Self, IngestError> {
        let mut seen = HashSet::new();
        for s in &sources {
            s.validate()?;
            if !seen.insert(s.id.as_str()) {
                return Err(IngestError::DuplicateSource(s.id.clone()));
            }
        }
        Ok(Self { sources })
    }

    /// Loads a registry file. Unknown fields are rejected.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, IngestError> {
        let raw = fs::read_to_string(path.as_ref())?;
        let sources: Vec<Source> =
            serde_json::from_str(&raw).map_err(|e| IngestError::InvalidRegistry(e.to_string()))?;
        Self::new(sources)
    }

    /// Writes the registry through a temp file and rename.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), IngestError> {
        let path = path.as_ref();
        let tmp = path.with_extension("json.tmp");
        let body = serde_json::to_vec_pretty(&self.sources).expect("sources serialize");
        fs::write(&tmp, body)?;
        fs::rename(&tmp, path)?;
        Ok(())
    }

    pub fn sources(&self) -> &[Source] {
        &self.sources
    }

    /// The registry size (number of distinct providers).
    pub fn len(&self) -> usize {
        self.sources.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sources.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&Source> {
        self.sources.iter().find(|s| s.id == id)
    }

    pub fn get_mut(&mut self, id: &str) -> Option<&mut Source> {
        self.sources.iter_mut().find(|s| s.id == id)
    }

    pub fn add(&mut self, source: Source) -> Result<(), IngestError> {
        source.validate()?;
        if self.get(&source.id).is_some() {
            return Err(IngestError::DuplicateSource(source.id));
        }
        self.sources.push(source);
        Ok(())
    }

    /// allow iff the source is enabled and permits republication.
    pub fn gatekeep(&self, source_id: &str) -> Result<GateDecision, IngestError> {
        self.get(source_id)
            .map(Source::gate)
            .ok_or_else(|| IngestError::UnknownSource(source_id.to_owned()))
    }

    pub fn eligible(&self) -> impl Iterator<Item = &Source> {
        self.sources.iter().filter(|s| s.gate().is_allow())
    }
}

/// A feed entry before extraction.
#[derive(Debug, Clone, PartialEq)]
pub struct ArticleStub {
    pub source_id: String,
    pub url: String,
    pub title: String,
    pub published_at: Option<DateTime<Utc>>,
    pub raw_payload: Vec<u8>,
    pub content_type: String,
}

/// One ingested news item: a row of the feature matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Article {
    pub id: String,
    pub source_id: String,
    pub url: String,
    pub title: String,
    pub body: String,
    pub language: String,
    pub published_at: Option<DateTime<Utc>>,
    pub fetched_at: DateTime<Utc>,
    pub dedup_hash: u64,
    #[serde(default)]
    pub class_label: Option<String>,
    /// Topic relevance scores computed at ingest time, keyed by topic name.
    #[serde(default)]
    pub topic_scores: std::collections::BTreeMap<String, f64>,
}

impl Article {
    /// Builds an article from an extracted stub; the id is derived from the body fingerprint.
    pub fn from_extracted(
        stub: &ArticleStub,
        extracted: Extracted,
        language: &str,
        fetched_at: DateTime<Utc>,
    ) -> Self {
        let dedup_hash = dedup_key(&extracted.body);
        let title = if stub.title.trim().is_empty() {
            extracted.title
        } else {
            stub.title.trim().to_owned()
        };
        Self {
            id: format!("{dedup_hash:016x}"),
            source_id: stub.source_id.clone(),
            url: stub.url.clone(),
            title,
            body: extracted.body,
            language: language.to_owned(),
            published_at: stub.published_at,
            fetched_at,
            dedup_hash,
            class_label: None,
            topic_scores: Default::default(),
        }
    }
}
