//! Unicode text helpers shared by tokenization, deduplication and QA.

use unicode_general_category::{get_general_category, GeneralCategory};
use unicode_normalization::UnicodeNormalization;

/// NFC-normalizes and lowercases `text`.
pub fn normalize(text: &str) -> String {
    text.nfc().collect::<String>().to_lowercase()
}

/// Collapses every run of Unicode whitespace into one ASCII space and trims.
pub fn collapse_whitespace(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// True for characters that separate tokens: whitespace, punctuation and symbols.
pub fn is_separator(c: char) -> bool {
    if c.is_ascii() {
        // every ASCII non-alphanumeric is whitespace, control, punctuation or a symbol
        return !c.is_ascii_alphanumeric();
    }
    if c.is_whitespace() {
        return true;
    }
    use GeneralCategory::*;
    matches!(
        get_general_category(c),
        ConnectorPunctuation
            | DashPunctuation
            | OpenPunctuation
            | ClosePunctuation
            | InitialPunctuation
            | FinalPunctuation
            | OtherPunctuation
            | MathSymbol
            | CurrencySymbol
            | ModifierSymbol
            | OtherSymbol
            | Control
    )
}

/// Splits text into normalized tokens.
///
/// Text is NFC-normalized and lowercased, then split on whitespace,
/// punctuation and symbols. Only tokens containing at least one letter or
/// digit survive. Combining marks (Bengali vowel signs, virama) stay attached
/// to their base letters. No stemming.
pub fn tokenize(text: &str) -> Vec<String> {
    normalize(text)
        .split(is_separator)
        .filter(|t| t.chars().any(char::is_alphanumeric))
        .map(str::to_owned)
        .collect()
}

pub const BENGALI_BLOCK: std::ops::RangeInclusive<char> = '\u{0980}'..='\u{09FF}';

pub fn is_bengali(c: char) -> bool {
    BENGALI_BLOCK.contains(&c)
}

/// Maps Bengali digits ০-৯ to their ASCII equivalents, leaving other characters intact.
pub fn ascii_digit(c: char) -> char {
    match c {
        '\u{09E6}'..='\u{09EF}' => char::from(b'0' + (c as u32 - 0x09E6) as u8),
        _ => c,
    }
}

/// Maximal runs of ASCII digits, in order of appearance.
pub fn digit_runs(text: &str) -> Vec<String> {
    let mut runs = Vec::new();
    let mut cur = String::new();
    for c in text.chars() {
        if c.is_ascii_digit() {
            cur.push(c);
        } else if !cur.is_empty() {
            runs.push(std::mem::take(&mut cur));
        }
    }
    if !cur.is_empty() {
        runs.push(cur);
    }
    runs
}
