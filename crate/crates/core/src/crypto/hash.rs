//! SHA-256 based hashing with explicit domain separation.
//!
//! Every input part is length-prefixed so that concatenation ambiguities
//! (`"ab" ‖ "c"` vs `"a" ‖ "bc"`) cannot produce equal digests.

use sha2::{Digest, Sha256};

pub type Digest32 = [u8; 32];

/// Plain SHA-256 of a byte string.
pub fn sha256(data: &[u8]) -> Digest32 {
    Sha256::digest(data).into()
}

/// SHA-256 over a domain label and length-prefixed parts.
pub fn hash_parts(domain: &[u8], parts: &[&[u8]]) -> Digest32 {
    let mut h = Sha256::new();
    h.update((domain.len() as u32).to_be_bytes());
    h.update(domain);
    for part in parts {
        h.update((part.len() as u64).to_be_bytes());
        h.update(part);
    }
    h.finalize().into()
}

/// 64 pseudo-random bytes derived from `(domain, parts)` by two counter-mode
/// SHA-256 invocations.
pub fn expand64(domain: &[u8], parts: &[&[u8]]) -> [u8; 64] {
    let mut out = [0u8; 64];
    for (i, chunk) in out.chunks_mut(32).enumerate() {
        let mut h = Sha256::new();
        h.update([i as u8]);
        h.update((domain.len() as u32).to_be_bytes());
        h.update(domain);
        for part in parts {
            h.update((part.len() as u64).to_be_bytes());
            h.update(part);
        }
        chunk.copy_from_slice(&h.finalize());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sha256_known_answer() {
        assert_eq!(
            hex::encode(sha256(b"abc")),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn parts_are_unambiguous() {
        assert_ne!(
            hash_parts(b"d", &[b"ab", b"c"]),
            hash_parts(b"d", &[b"a", b"bc"])
        );
        assert_ne!(hash_parts(b"d1", &[b"x"]), hash_parts(b"d2", &[b"x"]));
    }
}
