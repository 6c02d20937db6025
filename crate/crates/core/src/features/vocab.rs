use std::cmp::{Ordering, Reverse};
use std::collections::{BinaryHeap, HashMap};

use serde::{Deserialize, Serialize};

use super::FeatureMethod;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermCount {
    pub term: String,
    pub count: u64,
}

/// The top-K terms of a corpus, most frequent first. Equal counts are ordered
/// by term, ascending.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vocabulary {
    pub method: FeatureMethod,
    /// Requested size. `terms` is shorter when the corpus has fewer distinct terms.
    pub k: usize,
    pub terms: Vec<TermCount>,
    /// Total number of counted tokens in the corpus, over all terms.
    pub total_tokens: u64,
}

impl Vocabulary {
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// How many terms short of `k` this vocabulary is.
    pub fn shortfall(&self) -> usize {
        self.k.saturating_sub(self.terms.len())
    }

    /// The vocabulary that [`build_vocabulary`] would return for a smaller `k`.
    pub fn prefix(&self, k: usize) -> Vocabulary {
        Vocabulary {
            method: self.method,
            k,
            terms: self.terms.iter().take(k).cloned().collect(),
            total_tokens: self.total_tokens,
        }
    }

    pub fn term_names(&self) -> impl Iterator<Item = &str> {
        self.terms.iter().map(|t| t.term.as_str())
    }
}

#[derive(PartialEq, Eq)]
struct Ranked<'a> {
    count: u64,
    term: &'a str,
}

// Greater means ranked higher: larger count, then smaller term.
impl Ord for Ranked<'_> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.count
            .cmp(&other.count)
            .then_with(|| other.term.cmp(self.term))
    }
}

impl PartialOrd for Ranked<'_> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Select the `k` most frequent terms with a bounded min-heap.
pub fn build_vocabulary(
    global_counts: &HashMap<String, u64>,
    method: FeatureMethod,
    k: usize,
) -> Result<Vocabulary> {
    if k == 0 {
        return Err(Error::DegenerateInput(
            "vocabulary size must be at least 1".into(),
        ));
    }
    let mut heap: BinaryHeap<Reverse<Ranked<'_>>> =
        BinaryHeap::with_capacity(k.saturating_add(1).min(1 << 20));
    let mut total_tokens = 0u64;
    for (term, &count) in global_counts {
        total_tokens += count;
        if count == 0 {
            continue;
        }
        let candidate = Ranked { count, term };
        if heap.len() < k {
            heap.push(Reverse(candidate));
        } else if let Some(Reverse(worst)) = heap.peek() {
            if candidate > *worst {
                heap.pop();
                heap.push(Reverse(candidate));
            }
        }
    }
    // Ascending order of Reverse<_> is descending rank.
    let terms = heap
        .into_sorted_vec()
        .into_iter()
        .map(|Reverse(r)| TermCount {
            term: r.term.to_string(),
            count: r.count,
        })
        .collect();
    Ok(Vocabulary {
        method,
        k,
        terms,
        total_tokens,
    })
}

/// The first `top_n` terms with their share of all counted tokens.
pub fn vocabulary_report(vocabulary: &Vocabulary, top_n: usize) -> Vec<(String, f64)> {
    let total = vocabulary.total_tokens.max(1) as f64;
    vocabulary
        .terms
        .iter()
        .take(top_n)
        .map(|t| (t.term.clone(), t.count as f64 / total))
        .collect()
}
