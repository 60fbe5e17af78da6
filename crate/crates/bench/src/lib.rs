//! Shared inputs for the criterion benches.

use newsdesk_core::features::{default_lexicons, DEFAULT_TOPICS};

/// `n` deterministic pseudo-articles built from the bundled lexicons.
pub fn corpus(n: usize) -> Vec<(String, String)> {
    let lexicons = default_lexicons();
    let filler = ["city", "residents", "said", "report", "week", "local", "program", "in", "of", "and"];
    let mut state: u64 = 0x9e37_79b9_7f4a_7c15;
    let mut next = move || {
        // xorshift64
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        state
    };
    (0..n)
        .map(|i| {
            let topic = &lexicons[i % DEFAULT_TOPICS.len()];
            let words: Vec<&str> = (0..120)
                .map(|_| {
                    let r = next();
                    if r % 3 == 0 {
                        topic.terms[(r as usize / 3) % topic.terms.len()].token.as_str()
                    } else {
                        filler[(r as usize) % filler.len()]
                    }
                })
                .collect();
            (format!("doc{i:05}"), format!("{}.", words.join(" ")))
        })
        .collect()
}

/// Class label of `corpus(n)[i]`.
pub fn label(i: usize) -> String {
    DEFAULT_TOPICS[i % DEFAULT_TOPICS.len()].to_owned()
}
