//! Bag-of-words features: term counting under the three feature methods,
//! top-K vocabulary selection, and the per-business frequency matrix.

mod count;
mod export;
mod matrix;
mod spill;
mod vocab;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use count::{count_reviews, count_terms, CountOptions, TermCounts, DEFAULT_CHUNK_THRESHOLD};
pub use export::FeatureSidecar;
pub use matrix::{build_matrix, freq_vector, FeatureMatrix, FeatureMetadata};
pub use spill::{spill_base_dir, SPILL_DIR_ENV};
pub use vocab::{build_vocabulary, vocabulary_report, TermCount, Vocabulary};

use crate::pos::{extract_adjectives, open_class_filter, tag_sentence, Lexicon};
use crate::text::{is_stopword, sentences, StopwordPolicy};

/// Which tokens of a review are counted.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FeatureMethod {
    /// Every token norm except stopwords.
    Baseline,
    /// Nouns, verbs, adjectives and adverbs after tagging.
    WordsAfterPos,
    /// Adjectives after tagging.
    AdjectivesAfterPos,
}

impl FeatureMethod {
    pub const ALL: [FeatureMethod; 3] = [
        FeatureMethod::Baseline,
        FeatureMethod::WordsAfterPos,
        FeatureMethod::AdjectivesAfterPos,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FeatureMethod::Baseline => "baseline",
            FeatureMethod::WordsAfterPos => "words-pos",
            FeatureMethod::AdjectivesAfterPos => "adjectives-pos",
        }
    }
}

impl fmt::Display for FeatureMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl FromStr for FeatureMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "baseline" => Ok(FeatureMethod::Baseline),
            "words-pos" | "words" | "words-after-pos" => Ok(FeatureMethod::WordsAfterPos),
            "adjectives-pos" | "adjectives" | "adjectives-after-pos" => {
                Ok(FeatureMethod::AdjectivesAfterPos)
            }
            _ => Err(format!(
                "unknown feature method {s:?} (expected baseline, words-pos or adjectives-pos)"
            )),
        }
    }
}

/// Produces the counted token stream of a review for one feature method.
#[derive(Clone, Copy, Debug)]
pub struct TermExtractor<'a> {
    pub method: FeatureMethod,
    pub lexicon: &'a Lexicon,
    /// Only consulted by [`FeatureMethod::Baseline`]; the tag-based methods
    /// already drop closed-class words.
    pub stopwords: StopwordPolicy,
}

impl TermExtractor<'_> {
    pub fn for_each_term(&self, text: &str, mut f: impl FnMut(&str)) {
        for sentence in sentences(text) {
            match self.method {
                FeatureMethod::Baseline => sentence
                    .norms()
                    .filter(|n| !is_stopword(n, self.stopwords))
                    .for_each(&mut f),
                FeatureMethod::WordsAfterPos => {
                    open_class_filter(&tag_sentence(&sentence, self.lexicon))
                        .into_iter()
                        .for_each(&mut f)
                }
                FeatureMethod::AdjectivesAfterPos => {
                    extract_adjectives(&tag_sentence(&sentence, self.lexicon))
                        .into_iter()
                        .for_each(&mut f)
                }
            }
        }
    }

    pub fn terms(&self, text: &str) -> Vec<String> {
        let mut out = Vec::new();
        self.for_each_term(text, |t| out.push(t.to_string()));
        out
    }

    pub fn count_into(&self, text: &str, counts: &mut HashMap<String, u64>) {
        self.for_each_term(text, |t| match counts.get_mut(t) {
            Some(c) => *c += 1,
            None => {
                counts.insert(t.to_string(), 1);
            }
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ex(method: FeatureMethod) -> TermExtractor<'static> {
        TermExtractor {
            method,
            lexicon: Lexicon::embedded(),
            stopwords: StopwordPolicy::Enabled,
        }
    }

    #[test]
    fn method_streams() {
        let text = "The food was great. We loved the tasty noodles!";
        assert_eq!(
            ex(FeatureMethod::Baseline).terms(text),
            vec!["food", "great", "loved", "tasty", "noodles"]
        );
        assert_eq!(
            ex(FeatureMethod::WordsAfterPos).terms(text),
            vec!["food", "was", "great", "loved", "tasty", "noodles"]
        );
        assert_eq!(
            ex(FeatureMethod::AdjectivesAfterPos).terms(text),
            vec!["great", "tasty"]
        );
    }

    #[test]
    fn stopword_policy_only_affects_baseline() {
        let mut e = ex(FeatureMethod::Baseline);
        e.stopwords = StopwordPolicy::Disabled;
        assert_eq!(e.terms("the food"), vec!["the", "food"]);
        let mut e = ex(FeatureMethod::WordsAfterPos);
        e.stopwords = StopwordPolicy::Disabled;
        assert_eq!(e.terms("the food"), vec!["food"]);
    }

    #[test]
    fn method_names_round_trip() {
        for m in FeatureMethod::ALL {
            assert_eq!(m.name().parse::<FeatureMethod>().unwrap(), m);
        }
        assert!("pos".parse::<FeatureMethod>().is_err());
    }
}
