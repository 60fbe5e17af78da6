use sha2::{Digest, Sha256};

use crate::text::{collapse_whitespace, normalize};

/// 64-bit content fingerprint of NFC-normalized, lowercased,
/// whitespace-collapsed text (first eight bytes of its SHA-256, big-endian).
pub fn dedup_key(body: &str) -> u64 {
    let normalized = collapse_whitespace(&normalize(body));
    let digest = Sha256::digest(normalized.as_bytes());
    u64::from_be_bytes(digest[..8].try_into().expect("sha256 is 32 bytes"))
}
