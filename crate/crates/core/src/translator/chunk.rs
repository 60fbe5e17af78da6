//! Sentence-aware greedy chunking.

use serde::{Deserialize, Serialize};

pub const MIN_CHUNK_CHARS: usize = 200;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Chunk {
    pub text: String,
    /// A single sentence longer than the limit.
    pub oversized: bool,
}

fn is_terminator(c: char) -> bool {
    matches!(c, '.' | '!' | '?' | '\u{0964}')
}

/// Byte ranges of sentences. A sentence ends at a terminator (`.`, `!`, `?`,
/// `।`) that is followed by whitespace or the end of text; surrounding
/// whitespace is excluded.
pub fn sentence_spans(text: &str) -> Vec<(usize, usize)> {
    let mut spans = Vec::new();
    let mut start: Option<usize> = None;
    let mut iter = text.char_indices().peekable();
    while let Some((pos, c)) = iter.next() {
        if start.is_none() {
            if c.is_whitespace() {
                continue;
            }
            start = Some(pos);
        }
        let at_boundary = iter.peek().is_none_or(|(_, next)| next.is_whitespace());
        if is_terminator(c) && at_boundary {
            spans.push((start.take().expect("inside a sentence"), pos + c.len_utf8()));
        }
    }
    if let Some(s) = start {
        spans.push((s, text.trim_end().len()));
    }
    spans
}

/// Packs whole sentences into chunks of at most `max_chunk_chars` characters.
///
/// Each chunk is the longest run of remaining sentences that fits, taken as a
/// verbatim slice of `text` (inner whitespace kept). A sentence that alone
/// exceeds the limit becomes its own chunk with `oversized` set. Joining the
/// chunks with single spaces restores `text` up to the whitespace at chunk
/// boundaries.
pub fn chunk_text(text: &str, max_chunk_chars: usize) -> Vec<Chunk> {
    let spans = sentence_spans(text);
    let char_len = |a: usize, b: usize| text[a..b].chars().count();
    let mut chunks = Vec::new();
    let mut i = 0;
    while i < spans.len() {
        let start = spans[i].0;
        let mut end_idx = i;
        while end_idx + 1 < spans.len() && char_len(start, spans[end_idx + 1].1) <= max_chunk_chars {
            end_idx += 1;
        }
        let end = spans[end_idx].1;
        chunks.push(Chunk {
            text: text[start..end].to_owned(),
            oversized: char_len(start, end) > max_chunk_chars,
        });
        i = end_idx + 1;
    }
    chunks
}
