use super::{Document, FeatureError, FeatureMatrix, FeatureMode, FeatureSchema, TopicLexicon};
use crate::text::tokenize;

/// Scores each article against each topic lexicon.
///
/// The score is the summed lexicon weight of matching tokens (with
/// multiplicity) over the article's token count, clamped to `[0, 1]`.
pub fn featurize_topics<D: Document>(corpus: &[D], lexicons: &[TopicLexicon]) -> Result<FeatureMatrix, FeatureError> {
    if lexicons.is_empty() {
        return Err(FeatureError::EmptyLexicons);
    }
    let q = lexicons.len();
    let mut values = vec![0.0; corpus.len() * q];
    for (i, doc) in corpus.iter().enumerate() {
        let tokens = tokenize(&doc.doc_text());
        if tokens.is_empty() {
            continue;
        }
        let row = &mut values[i * q..(i + 1) * q];
        for (j, lex) in lexicons.iter().enumerate() {
            let hits = tokens.iter().filter_map(|t| lex.weight_of(t)).fold(0.0, |acc, w| acc + w);
            row[j] = (hits / tokens.len() as f64).clamp(0.0, 1.0);
        }
    }
    let schema = FeatureSchema::TopicRelevance {
        lexicons: lexicons.to_vec(),
    };
    FeatureMatrix::new(
        corpus.iter().map(|d| d.doc_id().to_owned()).collect(),
        schema.columns(),
        FeatureMode::TopicRelevance,
        schema.digest(),
        values,
    )
}
