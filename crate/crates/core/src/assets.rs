//! Versioned text assets embedded in the binary, and their content hashes.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const STOPWORDS_EN: &str = include_str!("../assets/stopwords_en.txt");
pub const LEXICON_EN: &str = include_str!("../assets/lexicon_en.tsv");

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Hashes of the assets a run depended on, carried into result metadata.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssetHashes {
    pub stopwords: String,
    pub lexicon: String,
}

impl AssetHashes {
    pub fn embedded() -> Self {
        AssetHashes {
            stopwords: sha256_hex(STOPWORDS_EN.as_bytes()),
            lexicon: sha256_hex(LEXICON_EN.as_bytes()),
        }
    }
}
