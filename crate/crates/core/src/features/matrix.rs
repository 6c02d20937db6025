use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{build_vocabulary, count_terms, CountOptions, FeatureMethod, TermCounts, Vocabulary};
use crate::assets::{self, AssetHashes};
use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::pos::Lexicon;
use crate::text::StopwordPolicy;

/// Where a feature matrix came from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureMetadata {
    pub corpus_hash: String,
    pub stopwords: StopwordPolicy,
    pub stopwords_hash: String,
    pub lexicon_hash: String,
}

impl FeatureMetadata {
    pub fn new(corpus: &Corpus, lexicon: &Lexicon, stopwords: StopwordPolicy) -> Self {
        FeatureMetadata {
            corpus_hash: corpus.content_hash(),
            stopwords,
            stopwords_hash: AssetHashes::embedded().stopwords,
            lexicon_hash: lexicon.hash().to_string(),
        }
    }

    /// Placeholder for matrices assembled by hand rather than from a corpus.
    pub fn synthetic() -> Self {
        FeatureMetadata {
            corpus_hash: String::new(),
            stopwords: StopwordPolicy::Enabled,
            stopwords_hash: assets::sha256_hex(assets::STOPWORDS_EN.as_bytes()),
            lexicon_hash: String::new(),
        }
    }
}

/// N businesses × K relative term frequencies, with star targets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    pub row_ids: Vec<String>,
    pub x: Matrix,
    pub y: Vec<f64>,
    pub vocabulary: Vocabulary,
    pub metadata: FeatureMetadata,
}

impl FeatureMatrix {
    /// Assemble from precomputed counts. Rows follow the corpus's business-id
    /// order; a business without counts gets an all-zero row.
    pub fn from_counts(
        corpus: &Corpus,
        counts: &TermCounts,
        vocabulary: Vocabulary,
        metadata: FeatureMetadata,
    ) -> Self {
        let empty = HashMap::new();
        let k = vocabulary.len();
        let mut x = Matrix::zeros(corpus.len(), k);
        let mut row_ids = Vec::with_capacity(corpus.len());
        let mut y = Vec::with_capacity(corpus.len());
        let index: HashMap<&str, usize> = vocabulary
            .term_names()
            .enumerate()
            .map(|(i, t)| (t, i))
            .collect();
        for (r, business) in corpus.businesses().enumerate() {
            let business_counts = counts.business(&business.business_id).unwrap_or(&empty);
            fill_row(business_counts, &index, x.row_mut(r));
            row_ids.push(business.business_id.clone());
            y.push(business.stars);
        }
        FeatureMatrix {
            row_ids,
            x,
            y,
            vocabulary,
            metadata,
        }
    }

    pub fn n(&self) -> usize {
        self.row_ids.len()
    }

    pub fn k(&self) -> usize {
        self.x.cols()
    }
}

fn fill_row(counts: &HashMap<String, u64>, index: &HashMap<&str, usize>, row: &mut [f64]) {
    let mut raw = vec![0u64; row.len()];
    // Iterate the smaller side.
    if counts.len() < index.len() {
        for (term, &c) in counts {
            if let Some(&i) = index.get(term.as_str()) {
                raw[i] = c;
            }
        }
    } else {
        for (term, &i) in index {
            raw[i] = counts.get(*term).copied().unwrap_or(0);
        }
    }
    let total: u64 = raw.iter().sum();
    if total == 0 {
        return;
    }
    let total = total as f64;
    for (dst, c) in row.iter_mut().zip(raw) {
        *dst = c as f64 / total;
    }
}

/// Relative frequency of each vocabulary term in one business's counts:
/// `v[i] = x_i / Σ_j x_j`, or all zeros when the business uses no vocabulary term.
pub fn freq_vector(business_counts: &HashMap<String, u64>, vocabulary: &Vocabulary) -> Vec<f64> {
    let raw: Vec<u64> = vocabulary
        .terms
        .iter()
        .map(|t| business_counts.get(&t.term).copied().unwrap_or(0))
        .collect();
    let total: u64 = raw.iter().sum();
    if total == 0 {
        return vec![0.0; raw.len()];
    }
    raw.into_iter().map(|c| c as f64 / total as f64).collect()
}

/// Count, select the top-`k` vocabulary, and build the frequency matrix.
pub fn build_matrix(
    corpus: &Corpus,
    method: FeatureMethod,
    k: usize,
    lexicon: &Lexicon,
    opts: &CountOptions,
) -> Result<FeatureMatrix> {
    if corpus.is_empty() {
        return Err(Error::DegenerateInput("corpus has no businesses".into()));
    }
    let counts = count_terms(corpus, method, lexicon, opts)?;
    let vocabulary = build_vocabulary(&counts.global, method, k)?;
    let metadata = FeatureMetadata::new(corpus, lexicon, opts.stopwords);
    Ok(FeatureMatrix::from_counts(
        corpus, &counts, vocabulary, metadata,
    ))
}
