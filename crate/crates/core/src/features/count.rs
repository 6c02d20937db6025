use std::collections::{BTreeMap, HashMap};
use std::path::PathBuf;

use log::debug;
use serde::{Deserialize, Serialize};

use super::spill::{self, merge_parts, part_path, write_part};
use super::{FeatureMethod, TermExtractor};
use crate::corpus::{chunk_reviews, Corpus};
use crate::error::{Error, Result};
use crate::par::{self, Execution};
use crate::pos::Lexicon;
use crate::text::StopwordPolicy;

/// Businesses with more reviews than this are counted chunk by chunk.
pub const DEFAULT_CHUNK_THRESHOLD: usize = 10_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountOptions {
    pub stopwords: StopwordPolicy,
    pub chunk_threshold: usize,
    /// Base directory for spill files; `None` means [`spill::spill_base_dir`].
    pub spill_dir: Option<PathBuf>,
    pub execution: Execution,
}

impl Default for CountOptions {
    fn default() -> Self {
        CountOptions {
            stopwords: StopwordPolicy::Enabled,
            chunk_threshold: DEFAULT_CHUNK_THRESHOLD,
            spill_dir: None,
            execution: Execution::default(),
        }
    }
}

/// Per-business term counts and their sum.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TermCounts {
    pub method: FeatureMethod,
    pub per_business: BTreeMap<String, HashMap<String, u64>>,
    pub global: HashMap<String, u64>,
}

impl TermCounts {
    pub fn business(&self, id: &str) -> Option<&HashMap<String, u64>> {
        self.per_business.get(id)
    }
}

/// Count one review list in a single pass.
pub fn count_reviews(reviews: &[String], extractor: &TermExtractor<'_>) -> HashMap<String, u64> {
    let mut counts = HashMap::new();
    for review in reviews {
        extractor.count_into(review, &mut counts);
    }
    counts
}

/// Count every business of `corpus` under `method`.
pub fn count_terms(
    corpus: &Corpus,
    method: FeatureMethod,
    lexicon: &Lexicon,
    opts: &CountOptions,
) -> Result<TermCounts> {
    if corpus.is_empty() {
        return Err(Error::DegenerateInput("corpus has no businesses".into()));
    }
    if opts.chunk_threshold == 0 {
        return Err(Error::DegenerateInput(
            "chunk threshold must be at least 1".into(),
        ));
    }
    let extractor = TermExtractor {
        method,
        lexicon,
        stopwords: opts.stopwords,
    };
    let ids: Vec<&str> = corpus.ids().collect();
    let oversized = ids
        .iter()
        .any(|id| corpus.reviews(id).map_or(0, <[String]>::len) > opts.chunk_threshold);
    let spill_dir = if oversized {
        let base = opts.spill_dir.clone().unwrap_or_else(spill::spill_base_dir);
        std::fs::create_dir_all(&base)?;
        Some(
            tempfile::Builder::new()
                .prefix("starforge-spill-")
                .tempdir_in(base)?,
        )
    } else {
        None
    };

    let per = par::try_map(opts.execution, &ids, |id| {
        let reviews = corpus.reviews(id).unwrap_or_default();
        let counts = match &spill_dir {
            Some(dir) if reviews.len() > opts.chunk_threshold => {
                let chunks = chunk_reviews(corpus, id, opts.chunk_threshold)?;
                debug!(
                    "{id}: counting {} reviews in {} chunks",
                    reviews.len(),
                    chunks.len()
                );
                let mut parts = Vec::with_capacity(chunks.len());
                for (i, chunk) in chunks.iter().enumerate() {
                    let path = part_path(dir.path(), id, i);
                    write_part(&path, &count_reviews(chunk, &extractor))?;
                    parts.push(path);
                }
                merge_parts(&parts)?
            }
            _ => count_reviews(reviews, &extractor),
        };
        Ok::<_, Error>((id.to_string(), counts))
    })?;

    let mut global: HashMap<String, u64> = HashMap::new();
    for (_, counts) in &per {
        for (term, &c) in counts {
            match global.get_mut(term) {
                Some(g) => *g += c,
                None => {
                    global.insert(term.clone(), c);
                }
            }
        }
    }
    Ok(TermCounts {
        method,
        per_business: per.into_iter().collect(),
        global,
    })
}
