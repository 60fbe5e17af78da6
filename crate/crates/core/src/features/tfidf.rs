//! Vocabulary fitting and smoothed TF-IDF.
//!
//! `idf(t) = ln((1 + N) / (1 + df_t)) + 1`, term frequency is the raw count,
//! and each nonzero row is scaled to unit L2 norm.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::{Document, FeatureError, FeatureMatrix, FeatureMode, FeatureSchema};
use crate::text::tokenize;

/// Column schema for bag-of-words mode. Terms are sorted lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vocabulary {
    pub terms: Vec<String>,
    pub document_frequency: Vec<u32>,
    pub corpus_size: usize,
}

impl Vocabulary {
    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn df(&self, term: &str) -> Option<u32> {
        self.index_of(term).map(|i| self.document_frequency[i])
    }

    pub fn index_of(&self, term: &str) -> Option<usize> {
        self.terms.binary_search_by(|t| t.as_str().cmp(term)).ok()
    }
}

pub fn idf(corpus_size: usize, df: u32) -> f64 {
    ((1.0 + corpus_size as f64) / (1.0 + df as f64)).ln() + 1.0
}

/// Keeps terms with document frequency ≥ `min_df`; when more than `max_terms`
/// survive, the highest-df terms win, ties going to the lexicographically smaller term.
pub fn build_vocabulary<D: Document>(corpus: &[D], min_df: u32, max_terms: usize) -> Result<Vocabulary, FeatureError> {
    if corpus.is_empty() {
        return Err(FeatureError::EmptyCorpus);
    }
    if min_df == 0 {
        return Err(FeatureError::InvalidParameter("min_df must be at least 1".into()));
    }
    let mut df: BTreeMap<String, u32> = BTreeMap::new();
    for doc in corpus {
        let unique: BTreeSet<String> = tokenize(&doc.doc_text()).into_iter().collect();
        for t in unique {
            *df.entry(t).or_default() += 1;
        }
    }
    let mut kept: Vec<(String, u32)> = df.into_iter().filter(|(_, c)| *c >= min_df).collect();
    if kept.len() > max_terms {
        kept.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        kept.truncate(max_terms);
        kept.sort_by(|a, b| a.0.cmp(&b.0));
    }
    let (terms, document_frequency) = kept.into_iter().unzip();
    Ok(Vocabulary {
        terms,
        document_frequency,
        corpus_size: corpus.len(),
    })
}

pub fn featurize_tfidf<D: Document>(corpus: &[D], vocab: &Vocabulary) -> Result<FeatureMatrix, FeatureError> {
    if vocab.is_empty() {
        return Err(FeatureError::SchemaMismatch("vocabulary is empty".into()));
    }
    let m = vocab.len();
    let idfs: Vec<f64> = vocab
        .document_frequency
        .iter()
        .map(|&df| idf(vocab.corpus_size, df))
        .collect();
    let mut values = vec![0.0; corpus.len() * m];
    for (i, doc) in corpus.iter().enumerate() {
        let mut counts: HashMap<usize, u32> = HashMap::new();
        for tok in tokenize(&doc.doc_text()) {
            if let Some(j) = vocab.index_of(&tok) {
                *counts.entry(j).or_default() += 1;
            }
        }
        let row = &mut values[i * m..(i + 1) * m];
        for (j, c) in counts {
            row[j] = c as f64 * idfs[j];
        }
        let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            row.iter_mut().for_each(|v| *v /= norm);
        }
    }
    let schema = FeatureSchema::Tfidf { vocabulary: vocab.clone() };
    FeatureMatrix::new(
        corpus.iter().map(|d| d.doc_id().to_owned()).collect(),
        vocab.terms.clone(),
        FeatureMode::Tfidf,
        schema.digest(),
        values,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn docs(texts: &[&'static str]) -> Vec<(String, String)> {
        texts
            .iter()
            .enumerate()
            .map(|(i, t)| (format!("d{i}"), t.to_string()))
            .collect()
    }

    #[test]
    fn vocabulary_enumeration() {
        let corpus = docs(&["a b", "b c"]);
        let v = build_vocabulary(&corpus, 1, usize::MAX).unwrap();
        assert_eq!(v.terms, ["a", "b", "c"]);
        assert_eq!(v.document_frequency, [1, 2, 1]);
        assert_eq!(v.corpus_size, 2);
    }

    #[test]
    fn vocabulary_min_df() {
        let v = build_vocabulary(&docs(&["a b", "b c"]), 2, usize::MAX).unwrap();
        assert_eq!(v.terms, ["b"]);
    }

    #[test]
    fn vocabulary_max_terms_prefers_df() {
        let v = build_vocabulary(&docs(&["a b", "b c"]), 1, 1).unwrap();
        assert_eq!(v.terms, ["b"]);
        // tie on df=1 between a and c: lexicographic order keeps a
        let v = build_vocabulary(&docs(&["a b", "b c"]), 1, 2).unwrap();
        assert_eq!(v.terms, ["a", "b"]);
    }

    #[test]
    fn vocabulary_empty_corpus() {
        let empty: Vec<(String, String)> = vec![];
        assert!(matches!(build_vocabulary(&empty, 1, 10), Err(FeatureError::EmptyCorpus)));
    }

    #[test]
    fn idf_values() {
        assert_eq!(idf(1, 1), 1.0);
        assert!((idf(2, 1) - 1.405_465_108_108_164_4).abs() < 1e-12);
    }

    #[test]
    fn single_token_row_is_unit() {
        let corpus = docs(&["housing", "jobs jobs rent"]);
        let v = build_vocabulary(&corpus, 1, usize::MAX).unwrap();
        let m = featurize_tfidf(&corpus, &v).unwrap();
        let row = m.row(0);
        assert_eq!(row.iter().filter(|x| **x != 0.0).count(), 1);
        assert_eq!(row[v.index_of("housing").unwrap()], 1.0);
    }

    #[test]
    fn empty_vocab_is_schema_mismatch() {
        let v = Vocabulary { terms: vec![], document_frequency: vec![], corpus_size: 1 };
        assert!(matches!(featurize_tfidf(&docs(&["a"]), &v), Err(FeatureError::SchemaMismatch(_))));
    }

    #[test]
    fn out_of_vocabulary_doc_gives_zero_row() {
        let corpus = docs(&["a b"]);
        let v = build_vocabulary(&corpus, 1, usize::MAX).unwrap();
        let m = featurize_tfidf(&docs(&["zzz"]), &v).unwrap();
        assert!(m.row(0).iter().all(|x| *x == 0.0));
    }
}
