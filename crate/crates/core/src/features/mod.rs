//! Article-topic feature matrices.
//!
//! Two column schemas are supported: weighted topic-lexicon relevance (one
//! column per editorial topic) and smoothed TF-IDF over a fitted vocabulary.

mod lexicon;
mod matrix;
mod tfidf;
mod topics;

use std::borrow::Cow;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use lexicon::{default_lexicons, load_lexicons, LexiconTerm, TopicLexicon, DEFAULT_TOPICS};
pub use matrix::{FeatureMatrix, LabelVector};
pub use tfidf::{build_vocabulary, featurize_tfidf, idf, Vocabulary};
pub use topics::featurize_topics;

use crate::ingest::{dedup_key, Article};

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("no topic lexicons supplied")]
    EmptyLexicons,
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error("invalid lexicon: {0}")]
    InvalidLexicon(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum FeatureMode {
    #[default]
    TopicRelevance,
    Tfidf,
}

impl std::str::FromStr for FeatureMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "topic_relevance" => Ok(FeatureMode::TopicRelevance),
            "tfidf" => Ok(FeatureMode::Tfidf),
            other => Err(format!("unknown feature mode `{other}`")),
        }
    }
}

/// Everything needed to featurize unseen articles the same way as at training time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum FeatureSchema {
    TopicRelevance { lexicons: Vec<TopicLexicon> },
    Tfidf { vocabulary: Vocabulary },
}

impl FeatureSchema {
    pub fn mode(&self) -> FeatureMode {
        match self {
            FeatureSchema::TopicRelevance { .. } => FeatureMode::TopicRelevance,
            FeatureSchema::Tfidf { .. } => FeatureMode::Tfidf,
        }
    }

    pub fn columns(&self) -> Vec<String> {
        match self {
            FeatureSchema::TopicRelevance { lexicons } => lexicons.iter().map(|l| l.topic.clone()).collect(),
            FeatureSchema::Tfidf { vocabulary } => vocabulary.terms.clone(),
        }
    }

    /// Fingerprint of the column schema, hex encoded.
    pub fn digest(&self) -> String {
        let mut canon = String::new();
        match self {
            FeatureSchema::TopicRelevance { lexicons } => {
                canon.push_str("topic_relevance");
                for lex in lexicons {
                    canon.push_str(&format!("\n{}", lex.topic));
                    for t in &lex.terms {
                        canon.push_str(&format!(" {}={:?}", t.token, t.weight));
                    }
                }
            }
            FeatureSchema::Tfidf { vocabulary } => {
                canon.push_str(&format!("tfidf n={}", vocabulary.corpus_size));
                for (t, df) in vocabulary.terms.iter().zip(&vocabulary.document_frequency) {
                    canon.push_str(&format!("\n{t} {df}"));
                }
            }
        }
        format!("{:016x}", dedup_key(&canon))
    }

    pub fn featurize<D: Document>(&self, corpus: &[D]) -> Result<FeatureMatrix, FeatureError> {
        match self {
            FeatureSchema::TopicRelevance { lexicons } => featurize_topics(corpus, lexicons),
            FeatureSchema::Tfidf { vocabulary } => featurize_tfidf(corpus, vocabulary),
        }
    }
}

/// Anything with an id and text that can become a matrix row.
pub trait Document {
    fn doc_id(&self) -> &str;
    fn doc_text(&self) -> Cow<'_, str>;
}

impl Document for Article {
    fn doc_id(&self) -> &str {
        &self.id
    }
    fn doc_text(&self) -> Cow<'_, str> {
        Cow::Owned(format!("{}\n{}", self.title, self.body))
    }
}

impl Document for (&str, &str) {
    fn doc_id(&self) -> &str {
        self.0
    }
    fn doc_text(&self) -> Cow<'_, str> {
        Cow::Borrowed(self.1)
    }
}

impl Document for (String, String) {
    fn doc_id(&self) -> &str {
        &self.0
    }
    fn doc_text(&self) -> Cow<'_, str> {
        Cow::Borrowed(&self.1)
    }
}

impl<D: Document> Document for &D {
    fn doc_id(&self) -> &str {
        (*self).doc_id()
    }
    fn doc_text(&self) -> Cow<'_, str> {
        (*self).doc_text()
    }
}
