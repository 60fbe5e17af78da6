//! Automatic checks run on every finished translation.

use serde::{Deserialize, Serialize};

use crate::text::{ascii_digit, digit_runs, is_bengali, is_separator};

pub const LENGTH_RATIO_BOUNDS: (f64, f64) = (0.3, 3.0);
pub const MIN_BENGALI_LETTER_SHARE: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QaReport {
    pub numerals_preserved: bool,
    pub missing_numerals: Vec<String>,
    /// Advisory only; never affects `passed`.
    pub entities_preserved: bool,
    pub missing_entities: Vec<String>,
    pub script_ok: bool,
    pub length_ratio: f64,
    pub passed: bool,
}

/// Checks numerals, capitalized names, output script and length ratio.
///
/// Bengali digits in the output count as their ASCII values. `passed`
/// requires preserved numerals, a mostly-Bengali output and a length ratio
/// inside [`LENGTH_RATIO_BOUNDS`].
pub fn qa_check(source: &str, output: &str) -> QaReport {
    let mapped: String = output.chars().map(ascii_digit).collect();
    let output_runs = digit_runs(&mapped);
    let mut missing_numerals: Vec<String> = Vec::new();
    for run in digit_runs(source) {
        if !output_runs.contains(&run) && !missing_numerals.contains(&run) {
            missing_numerals.push(run);
        }
    }

    // Naive NER: any capitalized token with at least two letters.
    let mut missing_entities: Vec<String> = Vec::new();
    for tok in source.split(is_separator) {
        let capitalized = tok.chars().next().is_some_and(char::is_uppercase);
        let letters = tok.chars().filter(|c| c.is_alphabetic()).count();
        if capitalized && letters >= 2 && !output.contains(tok) && !missing_entities.iter().any(|e| e == tok) {
            missing_entities.push(tok.to_owned());
        }
    }

    let letters: Vec<char> = output.chars().filter(|c| c.is_alphabetic()).collect();
    let bengali = letters.iter().filter(|c| is_bengali(**c)).count();
    let script_ok = !letters.is_empty() && bengali as f64 >= MIN_BENGALI_LETTER_SHARE * letters.len() as f64;

    let source_chars = source.chars().count().max(1);
    let length_ratio = output.chars().count() as f64 / source_chars as f64;
    let numerals_preserved = missing_numerals.is_empty();
    let passed = numerals_preserved
        && script_ok
        && (LENGTH_RATIO_BOUNDS.0..=LENGTH_RATIO_BOUNDS.1).contains(&length_ratio);
    QaReport {
        numerals_preserved,
        missing_numerals,
        entities_preserved: missing_entities.is_empty(),
        missing_entities,
        script_ok,
        length_ratio,
        passed,
    }
}
