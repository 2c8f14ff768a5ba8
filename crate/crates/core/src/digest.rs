//! Stable content digests for configurations.

use serde::Serialize;
use sha2::{Digest, Sha256};

/// SHA-256 of the compact JSON encoding of `value`, hex encoded.
///
/// Struct fields serialize in declaration order, so equal values give equal
/// digests across runs.
pub fn json_digest<T: Serialize>(value: &T) -> String {
    let bytes = serde_json::to_vec(value).expect("serializable value");
    hex::encode(Sha256::digest(&bytes))
}
