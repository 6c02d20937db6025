//! Seeded synthetic corpora in the Yelp JSON-lines schema, with a planted
//! word-to-star signal.
//!
//! Each business draws a latent level on the half-star grid and a mixture over
//! the positive, negative and neutral word pools whose expected planted score
//! equals that level. Review text is sampled from the mixture, and the business
//! star is computed from the words actually written:
//!
//! ```text
//! star = clamp(round_half(base + Σ_w weight_w · share_w + N(0, σ²)), 1, 5)
//! ```
//!
//! where `share_w` is `w`'s fraction of all pool-word tokens of the business.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const POSITIVE: [(&str, f64); 8] = [
    ("delicious", 2.5),
    ("excellent", 2.5),
    ("amazing", 2.0),
    ("friendly", 1.5),
    ("fresh", 1.5),
    ("perfect", 2.0),
    ("wonderful", 2.0),
    ("tasty", 1.5),
];

const NEGATIVE: [(&str, f64); 8] = [
    ("terrible", -2.5),
    ("awful", -2.5),
    ("rude", -2.0),
    ("bland", -1.5),
    ("horrible", -2.0),
    ("dirty", -2.0),
    ("greasy", -1.5),
    ("stale", -1.5),
];

const NEUTRAL: [&str; 14] = [
    "pizza", "service", "menu", "chicken", "burger", "table", "waiter", "sauce", "salad", "price",
    "dinner", "staff", "coffee", "bread",
];

const CUISINES: [&str; 6] = [
    "Italian",
    "Mexican",
    "American (New)",
    "Chinese",
    "Pizza",
    "Burgers",
];

/// Share of tokens given to the pool that pulls against a business's level.
const COUNTER_POOL_SHARE: f64 = 0.05;
const STAR_MIN: f64 = 1.0;
const STAR_MAX: f64 = 5.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub n_businesses: usize,
    /// Inclusive range of reviews per business.
    pub reviews_per_business: (usize, usize),
    /// Inclusive range of pool-word tokens per review.
    pub words_per_review: (usize, usize),
    pub positive: Vec<String>,
    pub negative: Vec<String>,
    pub neutral: Vec<String>,
    pub planted_weights: BTreeMap<String, f64>,
    pub base: f64,
    pub noise_sigma: f64,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        let owned = |ws: &[&str]| ws.iter().map(|w| w.to_string()).collect::<Vec<_>>();
        SynthSpec {
            n_businesses: 500,
            reviews_per_business: (4, 12),
            words_per_review: (20, 40),
            positive: owned(&POSITIVE.map(|p| p.0)),
            negative: owned(&NEGATIVE.map(|p| p.0)),
            neutral: owned(&NEUTRAL),
            planted_weights: POSITIVE
                .iter()
                .chain(&NEGATIVE)
                .map(|&(w, v)| (w.to_string(), v))
                .collect(),
            base: 3.0,
            noise_sigma: 0.1,
            seed: 0,
        }
    }
}

impl SynthSpec {
    fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::DegenerateInput(m.to_string()));
        if self.n_businesses == 0 {
            return bad("n_businesses must be at least 1");
        }
        if self.positive.is_empty() || self.negative.is_empty() || self.neutral.is_empty() {
            return bad("word pools must be non-empty");
        }
        let (rmin, rmax) = self.reviews_per_business;
        let (wmin, wmax) = self.words_per_review;
        if rmin == 0 || rmin > rmax || wmin == 0 || wmin > wmax {
            return bad("review and word ranges must be non-empty and start at 1 or more");
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return bad("noise sigma must be a non-negative number");
        }
        Ok(())
    }

    fn weight(&self, word: &str) -> f64 {
        self.planted_weights.get(word).copied().unwrap_or(0.0)
    }
}

/// `x` rounded to the nearest half star, halves rounded away from zero.
pub fn round_half(x: f64) -> f64 {
    (x * 2.0).round() / 2.0
}

/// Planted score `base + Σ weight_w · share_w` over pool-word counts.
pub fn planted_score(spec: &SynthSpec, counts: &BTreeMap<String, u64>) -> f64 {
    let total: u64 = counts.values().sum();
    if total == 0 {
        return spec.base;
    }
    spec.base
        + counts
            .iter()
            .map(|(w, &c)| spec.weight(w) * c as f64 / total as f64)
            .sum::<f64>()
}

/// Business star for a score and a noise draw.
pub fn planted_star(score: f64, noise: f64) -> f64 {
    round_half(score + noise).clamp(STAR_MIN, STAR_MAX)
}

#[derive(Serialize)]
struct BusinessLine<'a> {
    #[serde(rename = "type")]
    kind: &'static str,
    business_id: &'a str,
    name: String,
    categories: Vec<&'static str>,
    stars: f64,
    review_count: usize,
}

#[derive(Serialize)]
struct ReviewLine<'a> {
    #[serde(rename = "type")]
    kind: &'static str,
    review_id: String,
    business_id: &'a str,
    user_id: String,
    stars: u8,
    text: String,
}

/// A pool with Zipf-like word probabilities `∝ 1/(rank + 1)`.
struct Pool<'a> {
    words: &'a [String],
    cumulative: Vec<f64>,
}

impl<'a> Pool<'a> {
    fn new(words: &'a [String]) -> Self {
        let mut acc = 0.0;
        let mut cumulative: Vec<f64> = (0..words.len())
            .map(|r| {
                acc += 1.0 / (r as f64 + 1.0);
                acc
            })
            .collect();
        for c in &mut cumulative {
            *c /= acc;
        }
        Pool { words, cumulative }
    }

    fn probability(&self, i: usize) -> f64 {
        self.cumulative[i] - if i == 0 { 0.0 } else { self.cumulative[i - 1] }
    }

    fn mean_weight(&self, spec: &SynthSpec) -> f64 {
        self.words
            .iter()
            .enumerate()
            .map(|(i, w)| self.probability(i) * spec.weight(w))
            .sum()
    }

    fn sample(&self, rng: &mut impl Rng) -> &'a str {
        let u: f64 = rng.random();
        let i = self
            .cumulative
            .partition_point(|&c| c <= u)
            .min(self.words.len() - 1);
        &self.words[i]
    }
}

/// Probabilities of drawing from the positive and negative pools so that the
/// expected planted score equals `level`.
fn mixture_for(level: f64, spec: &SynthSpec, pos_mean: f64, neg_mean: f64) -> (f64, f64) {
    let target = level - spec.base;
    let max = 1.0 - COUNTER_POOL_SHARE;
    if pos_mean <= 0.0 || neg_mean >= 0.0 {
        return (0.2, 0.2);
    }
    if target >= 0.0 {
        let p_neg = COUNTER_POOL_SHARE;
        let p_pos = ((target - p_neg * neg_mean) / pos_mean).clamp(0.0, max);
        (p_pos, p_neg)
    } else {
        let p_pos = COUNTER_POOL_SHARE;
        let p_neg = ((target - p_pos * pos_mean) / neg_mean).clamp(0.0, max);
        (p_pos, p_neg)
    }
}

const FILLERS: [&str; 8] = ["the", "it", "was", "very", "so", "and", "with", "too"];

/// Turn a sequence of pool words into sentences, with stopword filler and
/// punctuation between them.
fn render(words: &[&str], rng: &mut impl Rng) -> String {
    let mut out = String::new();
    let mut i = 0;
    while i < words.len() {
        let len = rng.random_range(1..=3usize).min(words.len() - i);
        let group = &words[i..i + len];
        i += len;
        let mut sentence = String::new();
        match group {
            [a] => {
                sentence.push_str(["the ", "", "it was "][rng.random_range(0..3)]);
                sentence.push_str(a);
            }
            [a, b] => {
                sentence.push_str(&format!("the {a} was {b}"));
            }
            _ => {
                let joined: Vec<&str> = group.to_vec();
                let (last, head) = joined.split_last().expect("three words");
                sentence.push_str(&format!("{} and {last}", head.join(", ")));
                if rng.random_bool(0.5) {
                    sentence =
                        format!("{} {sentence}", FILLERS[rng.random_range(0..FILLERS.len())]);
                }
            }
        }
        let mut chars = sentence.chars();
        if let Some(first) = chars.next() {
            if !out.is_empty() {
                out.push(' ');
            }
            out.extend(first.to_uppercase());
            out.push_str(chars.as_str());
        }
        out.push(['.', '.', '!', '?'][rng.random_range(0..4)]);
    }
    out
}

/// Write a business file and a review file for `spec`. Output bytes depend
/// only on `spec`.
pub fn write_corpus<B: Write, R: Write>(
    spec: &SynthSpec,
    mut businesses: B,
    mut reviews: R,
) -> Result<()> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let normal = Normal::new(0.0, spec.noise_sigma.max(0.0))
        .map_err(|e| Error::DegenerateInput(e.to_string()))?;
    let (pos, neg, neu) = (
        Pool::new(&spec.positive),
        Pool::new(&spec.negative),
        Pool::new(&spec.neutral),
    );
    let (pos_mean, neg_mean) = (pos.mean_weight(spec), neg.mean_weight(spec));
    let levels: Vec<f64> = (3..=9).map(|h| h as f64 / 2.0).collect();
    let id_width = spec.n_businesses.to_string().len().max(4);

    for b in 0..spec.n_businesses {
        let business_id = format!("syn-{b:0id_width$}");
        let level = levels[rng.random_range(0..levels.len())];
        let (p_pos, p_neg) = mixture_for(level, spec, pos_mean, neg_mean);
        let n_reviews = rng.random_range(spec.reviews_per_business.0..=spec.reviews_per_business.1);

        let mut counts: BTreeMap<String, u64> = BTreeMap::new();
        let mut texts = Vec::with_capacity(n_reviews);
        for _ in 0..n_reviews {
            let n_words = rng.random_range(spec.words_per_review.0..=spec.words_per_review.1);
            let words: Vec<&str> = (0..n_words)
                .map(|_| {
                    let u: f64 = rng.random();
                    if u < p_pos {
                        pos.sample(&mut rng)
                    } else if u < p_pos + p_neg {
                        neg.sample(&mut rng)
                    } else {
                        neu.sample(&mut rng)
                    }
                })
                .collect();
            for w in &words {
                *counts.entry(w.to_string()).or_insert(0) += 1;
            }
            texts.push(render(&words, &mut rng));
        }

        let noise = if spec.noise_sigma > 0.0 {
            normal.sample(&mut rng)
        } else {
            0.0
        };
        let stars = planted_star(planted_score(spec, &counts), noise);
        let line = BusinessLine {
            kind: "business",
            business_id: &business_id,
            name: format!("Synthetic Eatery {b}"),
            categories: vec!["Restaurants", CUISINES[b % CUISINES.len()]],
            stars,
            review_count: n_reviews,
        };
        serde_json::to_writer(&mut businesses, &line)?;
        businesses.write_all(b"\n")?;

        for (r, text) in texts.into_iter().enumerate() {
            let jitter = [-1.0, 0.0, 0.0, 0.0, 1.0][rng.random_range(0..5)];
            let line = ReviewLine {
                kind: "review",
                review_id: format!("{business_id}-r{r}"),
                business_id: &business_id,
                user_id: format!("user-{}", rng.random_range(0..10_000u32)),
                stars: (stars + jitter).round().clamp(STAR_MIN, STAR_MAX) as u8,
                text,
            };
            serde_json::to_writer(&mut reviews, &line)?;
            reviews.write_all(b"\n")?;
        }
    }
    businesses.flush()?;
    reviews.flush()?;
    Ok(())
}

/// Paths of a generated dataset.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SynthFiles {
    pub business: PathBuf,
    pub review: PathBuf,
}

/// Generate `business.json` and `review.json` under `dir`.
pub fn generate(spec: &SynthSpec, dir: &Path) -> Result<SynthFiles> {
    fs::create_dir_all(dir)?;
    let files = SynthFiles {
        business: dir.join("business.json"),
        review: dir.join("review.json"),
    };
    write_corpus(
        spec,
        BufWriter::new(File::create(&files.business)?),
        BufWriter::new(File::create(&files.review)?),
    )?;
    Ok(files)
}
