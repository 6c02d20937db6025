//! Sentence splitting, tokenization, and stopword filtering for review text.
//!
//! Everything here is a pure function of its input bytes. Case folding uses
//! Unicode lowercase mappings, so results do not depend on the platform locale.
//! No stemming is applied anywhere: "like", "likes" and "liked" stay distinct.

use std::collections::HashSet;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::assets;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    /// The substring as it appeared in the text.
    pub surface: String,
    /// Lower-cased form used for counting and lookup.
    pub norm: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Sentence {
    pub tokens: Vec<Token>,
}

impl Sentence {
    pub fn norms(&self) -> impl Iterator<Item = &str> {
        self.tokens.iter().map(|t| t.norm.as_str())
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StopwordPolicy {
    #[default]
    Enabled,
    Disabled,
}

fn is_terminal(c: char) -> bool {
    matches!(c, '.' | '!' | '?')
}

fn is_apostrophe(c: char) -> bool {
    matches!(c, '\'' | '\u{2019}')
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '-' || is_apostrophe(c)
}

/// Split text into sentences at `.`, `!` or `?` followed by whitespace or the
/// end of input. The terminator stays with its sentence; the whitespace
/// between sentences is dropped. Whitespace-only pieces are discarded.
pub fn split_sentences(text: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut start = 0;
    let mut chars = text.char_indices().peekable();
    while let Some((i, c)) = chars.next() {
        if !is_terminal(c) {
            continue;
        }
        let boundary = match chars.peek() {
            None => true,
            Some(&(_, next)) => next.is_whitespace(),
        };
        if boundary {
            let end = i + c.len_utf8();
            push_trimmed(&mut out, &text[start..end]);
            start = end;
        }
    }
    push_trimmed(&mut out, &text[start..]);
    out
}

fn push_trimmed<'a>(out: &mut Vec<&'a str>, piece: &'a str) {
    let piece = piece.trim();
    if !piece.is_empty() {
        out.push(piece);
    }
}

/// Tokenize one sentence into maximal runs of letters, digits, apostrophes and
/// hyphens. Apostrophes and hyphens at the edges of a run are trimmed, so a
/// stray `-` or a quoted `'word'` never produces an empty or edge-punctuated
/// token. A typographic apostrophe (U+2019) normalizes to `'`.
pub fn tokenize(sentence: &str) -> Sentence {
    let mut tokens = Vec::new();
    for run in sentence.split(|c: char| !is_word_char(c)) {
        let surface = run.trim_matches(|c: char| c == '-' || is_apostrophe(c));
        if surface.is_empty() {
            continue;
        }
        let norm: String = surface
            .to_lowercase()
            .chars()
            .map(|c| if is_apostrophe(c) { '\'' } else { c })
            .filter(|&c| is_word_char(c))
            .collect();
        let norm = norm.trim_matches(|c: char| c == '-' || c == '\'');
        if norm.is_empty() {
            continue;
        }
        tokens.push(Token {
            surface: surface.to_string(),
            norm: norm.to_string(),
        });
    }
    Sentence { tokens }
}

/// Split and tokenize a whole review, dropping sentences with no tokens.
pub fn sentences(text: &str) -> impl Iterator<Item = Sentence> + '_ {
    split_sentences(text)
        .into_iter()
        .map(tokenize)
        .filter(|s| !s.is_empty())
}

fn stopword_set() -> &'static HashSet<&'static str> {
    static SET: OnceLock<HashSet<&'static str>> = OnceLock::new();
    SET.get_or_init(|| stopword_list().collect())
}

/// The embedded English stopword list, in file order.
pub fn stopword_list() -> impl Iterator<Item = &'static str> {
    assets::STOPWORDS_EN
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
}

pub fn is_stopword(norm: &str, policy: StopwordPolicy) -> bool {
    policy == StopwordPolicy::Enabled && stopword_set().contains(norm)
}
