//! Dictionary-based stand-in for a translation model.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};

use unicode_general_category::{get_general_category, GeneralCategory};

use super::{TranslateError, TranslationBackend};
use crate::text::normalize;

const BUNDLED_GLOSSARY_JSON: &str = include_str!("../../data/glossary.json");

/// English token → Bangla string, keys normalized (NFC, lowercase).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Glossary(BTreeMap<String, String>);

impl Glossary {
    pub fn new<I, K, V>(entries: I) -> Self
    where
        I: IntoIterator<Item = (K, V)>,
        K: AsRef<str>,
        V: Into<String>,
    {
        Self(entries.into_iter().map(|(k, v)| (normalize(k.as_ref()), v.into())).collect())
    }

    pub fn from_json(raw: &str) -> Result<Self, serde_json::Error> {
        let map: BTreeMap<String, String> = serde_json::from_str(raw)?;
        Ok(Self::new(map))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, TranslateError> {
        let raw = std::fs::read_to_string(path.as_ref())
            .map_err(|e| TranslateError::InvalidBackend(format!("{}: {e}", path.as_ref().display())))?;
        Self::from_json(&raw).map_err(|e| TranslateError::InvalidBackend(e.to_string()))
    }

    /// The ~150-entry glossary covering the bundled topic lexicons.
    pub fn bundled() -> Self {
        Self::from_json(BUNDLED_GLOSSARY_JSON).expect("bundled glossary parses")
    }

    pub fn get(&self, token: &str) -> Option<&str> {
        self.0.get(&normalize(token)).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn entries(&self) -> &BTreeMap<String, String> {
        &self.0
    }
}

fn is_mark(c: char) -> bool {
    matches!(
        get_general_category(c),
        GeneralCategory::NonspacingMark | GeneralCategory::SpacingMark | GeneralCategory::EnclosingMark
    )
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || is_mark(c)
}

/// Token-by-token substitution.
///
/// Glossary words become their Bangla value, digit runs (with inner `,`/`.`)
/// and punctuation are copied, whitespace is kept, and unknown words are
/// emitted verbatim inside `⟨…⟩`.
pub fn mock_translate(text: &str, glossary: &Glossary) -> String {
    let chars: Vec<char> = text.chars().collect();
    let mut out = String::with_capacity(text.len() * 2);
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_numeric() {
            let start = i;
            i += 1;
            while i < chars.len()
                && (chars[i].is_numeric()
                    || (matches!(chars[i], ',' | '.') && chars.get(i + 1).is_some_and(|n| n.is_numeric())))
            {
                i += 1;
            }
            out.extend(&chars[start..i]);
        } else if is_word_char(c) {
            let start = i;
            while i < chars.len() && is_word_char(chars[i]) {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            match glossary.get(&word) {
                Some(bangla) => out.push_str(bangla),
                None => {
                    out.push('⟨');
                    out.push_str(&word);
                    out.push('⟩');
                }
            }
        } else {
            out.push(c);
            i += 1;
        }
    }
    out
}

/// Glossary backend; counts calls so tests can observe request volume.
#[derive(Debug)]
pub struct GlossaryBackend {
    id: String,
    glossary: Glossary,
    calls: AtomicUsize,
}

impl GlossaryBackend {
    pub fn new(id: impl Into<String>, glossary: Glossary) -> Self {
        Self {
            id: id.into(),
            glossary,
            calls: AtomicUsize::new(0),
        }
    }

    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }
}

impl TranslationBackend for GlossaryBackend {
    fn id(&self) -> &str {
        &self.id
    }

    fn translate_chunk(&self, chunk: &str) -> Result<String, TranslateError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        Ok(mock_translate(chunk, &self.glossary))
    }
}
