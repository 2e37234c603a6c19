//! Configuration fingerprints: a short SHA-256 digest of the canonical JSON
//! form of a configuration.

use serde::Serialize;
use sha2::{Digest, Sha256};

/// First 16 hex digits of SHA-256 over the compact JSON encoding.
pub fn fingerprint<C: Serialize + ?Sized>(config: &C) -> String {
    let json = serde_json::to_vec(config).expect("configuration serializes to JSON");
    let digest = Sha256::digest(&json);
    digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

/// Stable 64-bit hash of a string, used to derive per-image seeds.
pub fn stable_hash(text: &str) -> u64 {
    let digest = Sha256::digest(text.as_bytes());
    u64::from_le_bytes(digest[..8].try_into().expect("8 bytes"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fingerprint_is_stable_and_sensitive() {
        let a = fingerprint(&serde_json::json!({"bins": 32}));
        assert_eq!(a.len(), 16);
        assert_eq!(a, fingerprint(&serde_json::json!({"bins": 32})));
        assert_ne!(a, fingerprint(&serde_json::json!({"bins": 16})));
        assert_ne!(stable_hash("a"), stable_hash("b"));
    }
}
