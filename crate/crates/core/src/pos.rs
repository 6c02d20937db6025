//! Lexicon and suffix-rule part-of-speech tagger.
//!
//! Each token is tagged by the first rule that applies:
//!
//! 1. exact lexicon lookup on the normalized form;
//! 2. numeric pattern, giving [`PosTag::Number`];
//! 3. suffix rules for unknown words;
//! 4. a token right after a determiner whose tag would otherwise be
//!    [`PosTag::Other`] becomes a noun;
//! 5. anything still untagged is a noun.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::assets;
use crate::error::{Error, Result};
use crate::text::{Sentence, Token};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PosTag {
    Noun,
    Verb,
    Adjective,
    Adverb,
    Pronoun,
    Determiner,
    Preposition,
    Conjunction,
    Number,
    Other,
}

impl PosTag {
    /// Nouns, verbs, adjectives and adverbs.
    pub fn is_open_class(self) -> bool {
        matches!(
            self,
            PosTag::Noun | PosTag::Verb | PosTag::Adjective | PosTag::Adverb
        )
    }

    pub fn code(self) -> &'static str {
        match self {
            PosTag::Noun => "NOUN",
            PosTag::Verb => "VERB",
            PosTag::Adjective => "ADJ",
            PosTag::Adverb => "ADV",
            PosTag::Pronoun => "PRON",
            PosTag::Determiner => "DET",
            PosTag::Preposition => "PREP",
            PosTag::Conjunction => "CONJ",
            PosTag::Number => "NUM",
            PosTag::Other => "OTHER",
        }
    }
}

impl fmt::Display for PosTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for PosTag {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let tag = match s.to_ascii_uppercase().as_str() {
            "NOUN" => PosTag::Noun,
            "VERB" => PosTag::Verb,
            "ADJ" | "ADJECTIVE" => PosTag::Adjective,
            "ADV" | "ADVERB" => PosTag::Adverb,
            "PRON" | "PRONOUN" => PosTag::Pronoun,
            "DET" | "DETERMINER" => PosTag::Determiner,
            "PREP" | "PREPOSITION" => PosTag::Preposition,
            "CONJ" | "CONJUNCTION" => PosTag::Conjunction,
            "NUM" | "NUMBER" => PosTag::Number,
            "OTHER" => PosTag::Other,
            _ => return Err(format!("unknown tag {s:?}")),
        };
        Ok(tag)
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TaggedSentence {
    pub pairs: Vec<(Token, PosTag)>,
}

impl TaggedSentence {
    pub fn tags(&self) -> Vec<PosTag> {
        self.pairs.iter().map(|(_, t)| *t).collect()
    }
}

/// Word-to-tag table loaded from a `word<TAB>TAG` file.
#[derive(Clone, Debug)]
pub struct Lexicon {
    entries: HashMap<String, PosTag>,
    hash: String,
}

impl Lexicon {
    /// Parse the TSV format. Blank lines and lines starting with `#` are
    /// skipped; words are lower-cased. A later duplicate overrides an earlier one.
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = HashMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim_end_matches('\r');
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            let invalid = |message: String| Error::InvalidLexicon {
                line: idx + 1,
                message,
            };
            let (word, tag) = line
                .split_once('\t')
                .ok_or_else(|| invalid("expected word<TAB>TAG".into()))?;
            let word = word.trim();
            if word.is_empty() {
                return Err(invalid("empty word".into()));
            }
            let tag = tag.trim().parse::<PosTag>().map_err(invalid)?;
            entries.insert(word.to_lowercase(), tag);
        }
        Ok(Lexicon {
            entries,
            hash: assets::sha256_hex(text.as_bytes()),
        })
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        if !path.exists() {
            return Err(Error::FileNotFound(path.to_path_buf()));
        }
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// The lexicon shipped with the crate.
    pub fn embedded() -> &'static Lexicon {
        static LEXICON: OnceLock<Lexicon> = OnceLock::new();
        LEXICON.get_or_init(|| Lexicon::parse(assets::LEXICON_EN).expect("embedded lexicon parses"))
    }

    pub fn get(&self, word: &str) -> Option<PosTag> {
        self.entries.get(word).copied()
    }

    /// Add or replace an entry. The content hash then no longer describes a
    /// file on disk and is marked as modified.
    pub fn insert(&mut self, word: &str, tag: PosTag) {
        self.entries.insert(word.to_lowercase(), tag);
        if !self.hash.ends_with("+modified") {
            self.hash.push_str("+modified");
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// SHA-256 of the source text.
    pub fn hash(&self) -> &str {
        &self.hash
    }
}

// Checked in order; longer or more specific endings come before the endings
// they contain (-ity before -y, -ly before -y).
const SUFFIX_RULES: &[(&str, PosTag)] = &[
    ("tion", PosTag::Noun),
    ("ness", PosTag::Noun),
    ("ment", PosTag::Noun),
    ("ity", PosTag::Noun),
    ("ly", PosTag::Adverb),
    ("ous", PosTag::Adjective),
    ("ful", PosTag::Adjective),
    ("ive", PosTag::Adjective),
    ("able", PosTag::Adjective),
    ("ible", PosTag::Adjective),
    ("less", PosTag::Adjective),
    ("al", PosTag::Adjective),
    ("ic", PosTag::Adjective),
    ("ing", PosTag::Verb),
    ("ed", PosTag::Verb),
    ("y", PosTag::Adjective),
];

/// Minimum number of characters left after removing a suffix for the rule to fire.
const MIN_STEM_CHARS: usize = 3;

fn suffix_tag(norm: &str) -> Option<PosTag> {
    let chars = norm.chars().count();
    SUFFIX_RULES
        .iter()
        .find(|(suffix, _)| norm.ends_with(suffix) && chars >= suffix.len() + MIN_STEM_CHARS)
        .map(|&(_, tag)| tag)
}

fn is_numeric(norm: &str) -> bool {
    let digits = norm.chars().take_while(|c| c.is_ascii_digit()).count();
    if digits == 0 {
        return false;
    }
    let rest = &norm[digits..];
    rest.is_empty()
        || matches!(rest, "st" | "nd" | "rd" | "th" | "s")
        || rest.chars().all(|c| c.is_ascii_digit() || c == '-')
}

fn intrinsic_tag(norm: &str, lexicon: &Lexicon) -> Option<PosTag> {
    lexicon
        .get(norm)
        .or_else(|| is_numeric(norm).then_some(PosTag::Number))
        .or_else(|| suffix_tag(norm))
}

pub fn tag_sentence(sentence: &Sentence, lexicon: &Lexicon) -> TaggedSentence {
    let mut pairs: Vec<(Token, PosTag)> = Vec::with_capacity(sentence.len());
    for token in &sentence.tokens {
        let after_determiner = matches!(pairs.last(), Some((_, PosTag::Determiner)));
        let tag = match intrinsic_tag(&token.norm, lexicon) {
            Some(PosTag::Other) | None if after_determiner => PosTag::Noun,
            Some(tag) => tag,
            None => PosTag::Noun,
        };
        pairs.push((token.clone(), tag));
    }
    TaggedSentence { pairs }
}

pub fn extract_adjectives(tagged: &TaggedSentence) -> Vec<&str> {
    tagged
        .pairs
        .iter()
        .filter(|(_, tag)| *tag == PosTag::Adjective)
        .map(|(tok, _)| tok.norm.as_str())
        .collect()
}

pub fn open_class_filter(tagged: &TaggedSentence) -> Vec<&str> {
    tagged
        .pairs
        .iter()
        .filter(|(_, tag)| tag.is_open_class())
        .map(|(tok, _)| tok.norm.as_str())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::tokenize;
    use proptest::prelude::*;

    fn tags(s: &str) -> Vec<PosTag> {
        tag_sentence(&tokenize(s), Lexicon::embedded()).tags()
    }

    fn tagged(pairs: &[(&str, PosTag)]) -> TaggedSentence {
        TaggedSentence {
            pairs: pairs
                .iter()
                .map(|&(w, t)| {
                    (
                        Token {
                            surface: w.into(),
                            norm: w.into(),
                        },
                        t,
                    )
                })
                .collect(),
        }
    }

    #[test]
    fn lexicon_words() {
        use PosTag::*;
        assert_eq!(
            tags("the delicious food"),
            vec![Determiner, Adjective, Noun]
        );
        assert_eq!(tags("better best"), vec![Adjective, Adjective]);
    }

    #[test]
    fn embedded_lexicon_is_substantial() {
        let lex = Lexicon::embedded();
        assert!(lex.len() >= 2000, "{}", lex.len());
        assert_eq!(lex.hash().len(), 64);
        assert_eq!(lex.get("scrumptious"), None);
    }

    #[test]
    fn suffix_rules() {
        use PosTag::*;
        assert_eq!(tags("scrumptious"), vec![Adjective]);
        assert_eq!(tags("blissfully"), vec![Adverb]);
        assert_eq!(tags("marinating"), vec![Verb]);
        assert_eq!(tags("freshness"), vec![Noun]);
        assert_eq!(tags("sincerity"), vec![Noun]);
        assert_eq!(tags("smeary"), vec![Adjective]);
        assert_eq!(tags("zzq"), vec![Noun]);
    }

    #[test]
    fn short_stems_fall_back_to_noun() {
        assert_eq!(suffix_tag("bed"), None);
        assert_eq!(suffix_tag("icy"), None);
    }

    #[test]
    fn numbers() {
        assert_eq!(tags("42"), vec![PosTag::Number]);
        assert_eq!(tags("21st"), vec![PosTag::Number]);
        assert_eq!(tags("5pm"), vec![PosTag::Noun]);
    }

    #[test]
    fn other_after_determiner_becomes_noun() {
        use PosTag::*;
        assert_eq!(tags("wow"), vec![Other]);
        assert_eq!(tags("the wow"), vec![Determiner, Noun]);
    }

    #[test]
    fn lexicon_overrides_suffix_rules() {
        let mut lex = Lexicon::parse("dangerous\tNOUN\n").unwrap();
        let s = tokenize("dangerous");
        assert_eq!(tag_sentence(&s, &lex).tags(), vec![PosTag::Noun]);
        lex.insert("dangerous", PosTag::Verb);
        assert_eq!(tag_sentence(&s, &lex).tags(), vec![PosTag::Verb]);
        assert!(lex.hash().ends_with("+modified"));
    }

    #[test]
    fn lexicon_parse_errors() {
        assert!(matches!(
            Lexicon::parse("# c\nfood NOUN\n"),
            Err(Error::InvalidLexicon { line: 2, .. })
        ));
        assert!(matches!(
            Lexicon::parse("food\tTHING\n"),
            Err(Error::InvalidLexicon { line: 1, .. })
        ));
        let lex = Lexicon::parse("# comment\n\nFood\tnoun\r\n").unwrap();
        assert_eq!(lex.get("food"), Some(PosTag::Noun));
    }

    #[test]
    fn adjective_extraction() {
        use PosTag::*;
        let s = tagged(&[("great", Adjective), ("food", Noun), ("great", Adjective)]);
        assert_eq!(extract_adjectives(&s), vec!["great", "great"]);
        assert!(extract_adjectives(&tagged(&[("food", Noun), ("place", Noun)])).is_empty());
        assert_eq!(
            extract_adjectives(&tagged(&[("tasty", Adjective)])),
            vec!["tasty"]
        );
    }

    #[test]
    fn open_class() {
        use PosTag::*;
        let s = tagged(&[
            ("the", Determiner),
            ("food", Noun),
            ("was", Verb),
            ("great", Adjective),
        ]);
        assert_eq!(open_class_filter(&s), vec!["food", "was", "great"]);
        assert!(open_class_filter(&tagged(&[("the", Determiner), ("a", Determiner)])).is_empty());
        assert_eq!(
            open_class_filter(&tagged(&[("very", Adverb)])),
            vec!["very"]
        );
    }

    proptest! {
        #[test]
        fn tagging_is_total_and_nested(s in "[a-zA-Z0-9' ]{0,80}") {
            let sentence = tokenize(&s);
            let t = tag_sentence(&sentence, Lexicon::embedded());
            prop_assert_eq!(t.pairs.len(), sentence.len());
            for (a, (b, _)) in sentence.tokens.iter().zip(&t.pairs) {
                prop_assert_eq!(a, b);
            }
            let mut open: Vec<&str> = open_class_filter(&t);
            for adj in extract_adjectives(&t) {
                let pos = open.iter().position(|w| *w == adj);
                prop_assert!(pos.is_some());
                open.swap_remove(pos.unwrap());
            }
            prop_assert_eq!(t.tags(), tag_sentence(&sentence, Lexicon::embedded()).tags());
        }
    }
}
