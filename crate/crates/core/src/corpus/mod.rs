//! Streaming ingestion of Yelp-challenge JSON-lines dumps.
//!
//! [`build_corpus`] makes one pass over the business file, keeping a seeded
//! reservoir sample of the businesses that match the category filter, then one
//! pass over the review file, keeping only reviews of sampled businesses. The
//! review file is never held in memory; the result is two ordered maps keyed by
//! business id: id to record, and id to review texts.

mod cache;
mod record;

use std::collections::{BTreeMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use log::warn;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use cache::{read_cache, write_cache, CACHE_MAGIC, CACHE_VERSION};
pub use record::{
    parse_business_line, parse_review_line, BusinessRecord, Parsed, ReviewRecord, SkipReason,
};

use crate::error::{Error, Result};

/// Which businesses to keep.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Selection {
    /// Exact category name that must appear in a business's categories.
    /// `None` keeps every business.
    pub category: Option<String>,
    /// Reservoir sample size. `None` keeps every matching business.
    pub sample_n: Option<usize>,
    pub seed: u64,
}

impl Selection {
    pub fn all() -> Self {
        Selection {
            category: None,
            sample_n: None,
            seed: 0,
        }
    }

    fn matches(&self, business: &BusinessRecord) -> bool {
        self.category
            .as_deref()
            .is_none_or(|c| business.has_category(c))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub business_path: String,
    pub review_path: String,
    pub selection: Selection,
}

/// Counters collected during ingestion.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestStats {
    pub business_lines: usize,
    pub businesses_parsed: usize,
    pub businesses_matched: usize,
    pub businesses_sampled: usize,
    pub duplicate_businesses: usize,
    pub review_lines: usize,
    pub reviews_parsed: usize,
    pub reviews_retained: usize,
    pub malformed_lines: usize,
    pub skipped_records: usize,
}

/// Sampled businesses and their review texts, in business-id order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Corpus {
    businesses: BTreeMap<String, BusinessRecord>,
    reviews: BTreeMap<String, Vec<String>>,
    provenance: Provenance,
}

impl Corpus {
    /// Apply `selection` to in-memory records, exactly as [`build_corpus`]
    /// does for files.
    pub fn from_records<B, R>(
        businesses: B,
        reviews: R,
        selection: &Selection,
    ) -> Result<(Corpus, IngestStats)>
    where
        B: IntoIterator<Item = BusinessRecord>,
        R: IntoIterator<Item = ReviewRecord>,
    {
        let mut builder = Builder::new(selection.clone());
        for b in businesses {
            builder.stats.business_lines += 1;
            builder.offer_business(b);
        }
        let mut joiner = builder.finish_businesses()?;
        for r in reviews {
            joiner.stats.review_lines += 1;
            joiner.offer_review(r);
        }
        Ok(joiner.finish(Provenance {
            business_path: "<memory>".into(),
            review_path: "<memory>".into(),
            selection: selection.clone(),
        }))
    }

    pub(crate) fn from_parts(
        businesses: BTreeMap<String, BusinessRecord>,
        reviews: BTreeMap<String, Vec<String>>,
        provenance: Provenance,
    ) -> Result<Corpus> {
        if let Some(orphan) = reviews.keys().find(|id| !businesses.contains_key(*id)) {
            return Err(Error::UnknownBusiness(orphan.clone()));
        }
        let mut reviews = reviews;
        for id in businesses.keys() {
            reviews.entry(id.clone()).or_default();
        }
        Ok(Corpus {
            businesses,
            reviews,
            provenance,
        })
    }

    pub fn len(&self) -> usize {
        self.businesses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.businesses.is_empty()
    }

    /// Businesses sorted by id.
    pub fn businesses(&self) -> impl ExactSizeIterator<Item = &BusinessRecord> {
        self.businesses.values()
    }

    pub fn business(&self, id: &str) -> Option<&BusinessRecord> {
        self.businesses.get(id)
    }

    pub fn ids(&self) -> impl ExactSizeIterator<Item = &str> {
        self.businesses.keys().map(String::as_str)
    }

    /// Reviews of one business in file order. Every business has an entry,
    /// possibly empty.
    pub fn reviews(&self, id: &str) -> Option<&[String]> {
        self.reviews.get(id).map(Vec::as_slice)
    }

    pub fn review_count(&self) -> usize {
        self.reviews.values().map(Vec::len).sum()
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    /// SHA-256 of the cached business and review entries. Provenance is not
    /// hashed, so the same content read from different paths hashes equally.
    pub fn content_hash(&self) -> String {
        cache::content_hash(self)
    }
}

/// Build a corpus from a business file and a review file.
pub fn build_corpus(
    business_path: &Path,
    review_path: &Path,
    selection: &Selection,
) -> Result<(Corpus, IngestStats)> {
    for p in [business_path, review_path] {
        if !p.is_file() {
            return Err(Error::FileNotFound(p.to_path_buf()));
        }
    }
    let mut builder = Builder::new(selection.clone());
    for_each_line(business_path, |line_no, line| {
        builder.stats.business_lines += 1;
        match parse_business_line(line, line_no) {
            Ok(Parsed::Record(b)) => builder.offer_business(b),
            Ok(Parsed::Skip(reason)) => builder.skip(reason),
            Err(e) => builder.malformed(business_path, e),
        }
    })?;
    let mut joiner = builder.finish_businesses()?;
    for_each_line(review_path, |line_no, line| {
        joiner.stats.review_lines += 1;
        match parse_review_line(line, line_no) {
            Ok(Parsed::Record(r)) => joiner.offer_review(r),
            Ok(Parsed::Skip(reason)) => joiner.skip(reason),
            Err(e) => joiner.malformed(review_path, e),
        }
    })?;
    Ok(joiner.finish(Provenance {
        business_path: business_path.display().to_string(),
        review_path: review_path.display().to_string(),
        selection: selection.clone(),
    }))
}

/// Split one business's reviews into consecutive chunks of at most
/// `max_reviews_per_chunk` reviews.
pub fn chunk_reviews<'a>(
    corpus: &'a Corpus,
    business_id: &str,
    max_reviews_per_chunk: usize,
) -> Result<Vec<&'a [String]>> {
    if max_reviews_per_chunk == 0 {
        return Err(Error::DegenerateInput(
            "chunk size must be at least 1".into(),
        ));
    }
    let reviews = corpus
        .reviews(business_id)
        .ok_or_else(|| Error::UnknownBusiness(business_id.to_string()))?;
    Ok(reviews.chunks(max_reviews_per_chunk).collect())
}

/// Calls `f` with 1-based line numbers, skipping blank lines. Lines that are not
/// valid UTF-8 are passed through lossily so the JSON parser reports them.
fn for_each_line(path: &Path, mut f: impl FnMut(usize, &str)) -> Result<()> {
    let mut reader = BufReader::new(File::open(path)?);
    let mut buf = Vec::new();
    let mut line_no = 0;
    loop {
        buf.clear();
        if reader.read_until(b'\n', &mut buf)? == 0 {
            return Ok(());
        }
        line_no += 1;
        let line = String::from_utf8_lossy(&buf);
        let line = line.trim_end_matches(['\n', '\r']);
        if !line.trim().is_empty() {
            f(line_no, line);
        }
    }
}

const MAX_WARNINGS: usize = 10;

struct Builder {
    selection: Selection,
    stats: IngestStats,
    seen: HashSet<String>,
    reservoir: Vec<BusinessRecord>,
    rng: ChaCha8Rng,
}

impl Builder {
    fn new(selection: Selection) -> Self {
        let rng = ChaCha8Rng::seed_from_u64(selection.seed);
        Builder {
            selection,
            stats: IngestStats::default(),
            seen: HashSet::new(),
            reservoir: Vec::new(),
            rng,
        }
    }

    fn skip(&mut self, reason: SkipReason) {
        self.stats.skipped_records += 1;
        if let SkipReason::MissingField(field) = reason {
            if self.stats.skipped_records <= MAX_WARNINGS {
                warn!("skipping business record without {field}");
            }
        }
    }

    fn malformed(&mut self, path: &Path, e: Error) {
        self.stats.malformed_lines += 1;
        if self.stats.malformed_lines <= MAX_WARNINGS {
            warn!("{}: {e}", path.display());
        }
    }

    fn offer_business(&mut self, business: BusinessRecord) {
        self.stats.businesses_parsed += 1;
        if !self.seen.insert(business.business_id.clone()) {
            self.stats.duplicate_businesses += 1;
            return;
        }
        if !self.selection.matches(&business) {
            return;
        }
        let seen = self.stats.businesses_matched;
        self.stats.businesses_matched += 1;
        match self.selection.sample_n {
            Some(cap) if seen >= cap => {
                // Algorithm R: the i-th match replaces a random slot with probability cap/(i+1).
                let slot = self.rng.random_range(0..=seen);
                if slot < cap {
                    self.reservoir[slot] = business;
                }
            }
            _ => self.reservoir.push(business),
        }
    }

    fn finish_businesses(mut self) -> Result<Joiner> {
        if self.selection.sample_n == Some(0) {
            return Err(Error::DegenerateInput(
                "sample size must be at least 1".into(),
            ));
        }
        if self.reservoir.is_empty() {
            let filter = self
                .selection
                .category
                .clone()
                .unwrap_or_else(|| "<any>".into());
            return Err(Error::EmptySelection(filter));
        }
        self.stats.businesses_sampled = self.reservoir.len();
        let reviews = self
            .reservoir
            .iter()
            .map(|b| (b.business_id.clone(), Vec::new()))
            .collect();
        let businesses = self
            .reservoir
            .into_iter()
            .map(|b| (b.business_id.clone(), b))
            .collect();
        Ok(Joiner {
            stats: self.stats,
            businesses,
            reviews,
        })
    }
}

struct Joiner {
    stats: IngestStats,
    businesses: BTreeMap<String, BusinessRecord>,
    reviews: BTreeMap<String, Vec<String>>,
}

impl Joiner {
    fn skip(&mut self, reason: SkipReason) {
        self.stats.skipped_records += 1;
        if let SkipReason::MissingField(field) = reason {
            if self.stats.skipped_records <= MAX_WARNINGS {
                warn!("skipping review record without {field}");
            }
        }
    }

    fn malformed(&mut self, path: &Path, e: Error) {
        self.stats.malformed_lines += 1;
        if self.stats.malformed_lines <= MAX_WARNINGS {
            warn!("{}: {e}", path.display());
        }
    }

    fn offer_review(&mut self, review: ReviewRecord) {
        self.stats.reviews_parsed += 1;
        if let Some(list) = self.reviews.get_mut(&review.business_id) {
            list.push(review.text);
            self.stats.reviews_retained += 1;
        }
    }

    fn finish(self, provenance: Provenance) -> (Corpus, IngestStats) {
        let corpus = Corpus {
            businesses: self.businesses,
            reviews: self.reviews,
            provenance,
        };
        (corpus, self.stats)
    }
}
