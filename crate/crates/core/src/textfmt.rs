//! Shared helpers for the plain-text artifact formats.

use sha2::{Digest, Sha256};

/// 17 significant digits, enough for an exact `f64` round trip.
pub fn real(x: f64) -> String {
    format!("{x:.16e}")
}

/// Short content hash (first 16 hex digits of SHA-256).
pub fn content_hash(text: &str) -> String {
    let digest = Sha256::digest(text.as_bytes());
    hex::encode(&digest[..8])
}

/// Parse `key=value` out of a header token.
pub(crate) fn header_field<'a>(token: Option<&'a str>, key: &str) -> Option<&'a str> {
    token?.strip_prefix(key)?.strip_prefix('=')
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn real_round_trips() {
        for x in [0.1, 1.0 / 3.0, 6.283185307179587, 1e-300, 640000.0, -2.5e17] {
            assert_eq!(real(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn hash_is_stable() {
        assert_eq!(content_hash("abc"), "ba7816bf8f01cfea");
    }
}
