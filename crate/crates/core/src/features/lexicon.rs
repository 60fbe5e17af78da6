use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::FeatureError;
use crate::text::normalize;

/// The six editorial topics tracked for the diaspora desk.
pub const DEFAULT_TOPICS: [&str; 6] = ["employment", "immigration", "future-goals", "housing", "healthcare", "politics"];

const DEFAULT_LEXICONS_JSON: &str = include_str!("../../data/lexicons.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LexiconTerm {
    pub token: String,
    pub weight: f64,
}

/// Weighted term list defining one topic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicLexicon {
    pub topic: String,
    pub terms: Vec<LexiconTerm>,
}

impl TopicLexicon {
    /// Normalizes tokens and checks weights. Duplicate tokens are merged by summing.
    pub fn normalized(self) -> Result<Self, FeatureError> {
        let mut terms: Vec<LexiconTerm> = Vec::with_capacity(self.terms.len());
        for t in self.terms {
            if !(t.weight.is_finite() && t.weight > 0.0) {
                return Err(FeatureError::InvalidLexicon(format!(
                    "{}: weight {} for `{}` must be positive",
                    self.topic, t.weight, t.token
                )));
            }
            let token = normalize(t.token.trim());
            if token.is_empty() {
                return Err(FeatureError::InvalidLexicon(format!("{}: empty token", self.topic)));
            }
            match terms.iter_mut().find(|e| e.token == token) {
                Some(existing) => existing.weight += t.weight,
                None => terms.push(LexiconTerm { token, weight: t.weight }),
            }
        }
        Ok(Self { topic: self.topic, terms })
    }

    pub fn weight_of(&self, token: &str) -> Option<f64> {
        self.terms.iter().find(|t| t.token == token).map(|t| t.weight)
    }
}

pub fn validate_lexicons(lexicons: Vec<TopicLexicon>) -> Result<Vec<TopicLexicon>, FeatureError> {
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(lexicons.len());
    for lex in lexicons {
        if !seen.insert(lex.topic.clone()) {
            return Err(FeatureError::InvalidLexicon(format!("duplicate topic `{}`", lex.topic)));
        }
        out.push(lex.normalized()?);
    }
    Ok(out)
}

pub fn load_lexicons(path: impl AsRef<Path>) -> Result<Vec<TopicLexicon>, FeatureError> {
    let raw = std::fs::read_to_string(path)?;
    let parsed: Vec<TopicLexicon> =
        serde_json::from_str(&raw).map_err(|e| FeatureError::InvalidLexicon(e.to_string()))?;
    validate_lexicons(parsed)
}

/// The bundled lexicons, one per entry of [`DEFAULT_TOPICS`].
pub fn default_lexicons() -> Vec<TopicLexicon> {
    let parsed: Vec<TopicLexicon> = serde_json::from_str(DEFAULT_LEXICONS_JSON).expect("bundled lexicons parse");
    validate_lexicons(parsed).expect("bundled lexicons are valid")
}
