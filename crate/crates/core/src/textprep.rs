//! Text normalization and tokenization.
//!
//! The same pipeline must be used for parallel text, documents and queries,
//! otherwise translation-table tokens and index tokens stop matching. Stages
//! run in a fixed order: whitespace split, case fold, diacritic strip,
//! punctuation strip, stopword removal. Tokens emptied by any stage are
//! dropped.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use unicode_normalization::char::is_combining_mark;
use unicode_normalization::UnicodeNormalization;
use unicode_properties::{GeneralCategoryGroup, UnicodeGeneralCategory};

use crate::error::{PsqError, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenizerConfig {
    pub lowercase: bool,
    pub strip_diacritics: bool,
    pub strip_punctuation: bool,
    pub stopwords: BTreeSet<String>,
    pub language: String,
}

impl Default for TokenizerConfig {
    fn default() -> Self {
        TokenizerConfig {
            lowercase: true,
            strip_diacritics: true,
            strip_punctuation: true,
            stopwords: BTreeSet::new(),
            language: String::new(),
        }
    }
}

impl TokenizerConfig {
    /// All normalization off, no stopwords: plain whitespace splitting.
    pub fn raw() -> Self {
        TokenizerConfig {
            lowercase: false,
            strip_diacritics: false,
            strip_punctuation: false,
            stopwords: BTreeSet::new(),
            language: String::new(),
        }
    }

    pub fn with_language(mut self, language: impl Into<String>) -> Self {
        self.language = language.into();
        self
    }

    pub fn with_stopwords<I, S>(mut self, words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.stopwords = words.into_iter().map(Into::into).collect();
        self
    }
}

/// An ordered list of non-empty, whitespace-free tokens.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TokenSequence(Vec<String>);

impl TokenSequence {
    pub fn new(tokens: Vec<String>) -> Result<Self> {
        if let Some(bad) = tokens
            .iter()
            .find(|t| t.is_empty() || t.chars().any(char::is_whitespace))
        {
            return Err(PsqError::InvalidConfig(format!(
                "token {bad:?} is empty or contains whitespace"
            )));
        }
        Ok(TokenSequence(tokens))
    }

    /// Splits on Unicode whitespace with no further normalization.
    pub fn from_whitespace(text: &str) -> Self {
        TokenSequence(text.split_whitespace().map(str::to_owned).collect())
    }

    pub fn tokens(&self) -> &[String] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<String> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(String::as_str)
    }
}

impl AsRef<[String]> for TokenSequence {
    fn as_ref(&self) -> &[String] {
        &self.0
    }
}

/// A tokenizer with its stopword list pre-normalized.
///
/// Stopword entries go through the same case/diacritic/punctuation stages as
/// tokens, so an entry like `"The"` still removes `"the"` when lowercasing.
#[derive(Debug, Clone)]
pub struct Tokenizer {
    config: TokenizerConfig,
    stopwords: BTreeSet<String>,
}

impl Tokenizer {
    pub fn new(config: TokenizerConfig) -> Self {
        let stopwords = config
            .stopwords
            .iter()
            .flat_map(|w| w.split_whitespace())
            .map(|w| normalize_token(w, &config))
            .filter(|w| !w.is_empty())
            .collect();
        Tokenizer { config, stopwords }
    }

    pub fn config(&self) -> &TokenizerConfig {
        &self.config
    }

    pub fn tokenize(&self, text: &str) -> TokenSequence {
        let tokens = text
            .split_whitespace()
            .map(|w| normalize_token(w, &self.config))
            .filter(|t| !t.is_empty() && !self.stopwords.contains(t))
            .collect();
        TokenSequence(tokens)
    }

    pub fn tokenize_bytes(&self, bytes: &[u8]) -> Result<TokenSequence> {
        Ok(self.tokenize(std::str::from_utf8(bytes)?))
    }
}

/// One-shot tokenization. Prefer building a [`Tokenizer`] when processing
/// many texts with the same configuration.
pub fn tokenize(text: &str, config: &TokenizerConfig) -> TokenSequence {
    Tokenizer::new(config.clone()).tokenize(text)
}

fn normalize_token(word: &str, config: &TokenizerConfig) -> String {
    let mut token = if config.lowercase {
        word.to_lowercase()
    } else {
        word.to_owned()
    };
    if config.strip_diacritics {
        // Recompose afterwards so scripts that decompose into non-mark
        // jamo (Hangul) come back in their usual form.
        token = token
            .nfkd()
            .filter(|&c| !is_combining_mark(c))
            .nfc()
            .collect();
    }
    if config.strip_punctuation {
        token.retain(|c| c.general_category_group() != GeneralCategoryGroup::Punctuation);
    }
    // Compatibility decomposition can introduce spaces (e.g. U+00A8).
    if token.chars().any(char::is_whitespace) {
        token.retain(|c| !c.is_whitespace());
    }
    token
}

/// Reads a stopword file: UTF-8, one token per line, `#` comment lines and
/// blank lines ignored.
pub fn load_stopwords(path: impl AsRef<Path>) -> Result<BTreeSet<String>> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| PsqError::io(path, e))?;
    let text = std::str::from_utf8(&bytes)?;
    Ok(parse_stopwords(text))
}

pub fn parse_stopwords(text: &str) -> BTreeSet<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_owned)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn all_on(stop: &[&str]) -> TokenizerConfig {
        TokenizerConfig::default().with_stopwords(stop.iter().copied())
    }

    #[test]
    fn full_pipeline_example() {
        let toks = tokenize("The Café, open!", &all_on(&["the"]));
        assert_eq!(toks.tokens(), ["cafe", "open"]);
    }

    #[test]
    fn empty_input() {
        assert!(tokenize("", &all_on(&[])).is_empty());
        assert!(tokenize("   \t\n", &TokenizerConfig::raw()).is_empty());
    }

    #[test]
    fn identity_case() {
        assert_eq!(tokenize("abc", &TokenizerConfig::raw()).tokens(), ["abc"]);
        assert_eq!(
            tokenize("Abc, DEF!", &TokenizerConfig::raw()).tokens(),
            ["Abc,", "DEF!"]
        );
    }

    #[test]
    fn punctuation_only_tokens_dropped() {
        let toks = tokenize("hello -- ... world", &all_on(&[]));
        assert_eq!(toks.tokens(), ["hello", "world"]);
    }

    #[test]
    fn stopwords_normalized_like_tokens() {
        let toks = tokenize("The der Ünter x", &all_on(&["THE", "ünter"]));
        assert_eq!(toks.tokens(), ["der", "x"]);
    }

    #[test]
    fn diacritics_and_hangul() {
        let cfg = all_on(&[]);
        assert_eq!(tokenize("naïve ÉLAN", &cfg).tokens(), ["naive", "elan"]);
        assert_eq!(tokenize("한국어", &cfg).tokens(), ["한국어"]);
    }

    #[test]
    fn invalid_utf8_is_decode_error() {
        let tok = Tokenizer::new(TokenizerConfig::default());
        assert!(matches!(
            tok.tokenize_bytes(&[0x61, 0xff, 0x62]),
            Err(PsqError::Decode(_))
        ));
        assert_eq!(tok.tokenize_bytes(b"A b").unwrap().tokens(), ["a", "b"]);
    }

    #[test]
    fn stopword_file_parsing() {
        let set = parse_stopwords("# comment\nthe\n\n  a  \n#x\n");
        assert_eq!(set.into_iter().collect::<Vec<_>>(), ["a", "the"]);
    }

    #[test]
    fn token_sequence_validation() {
        assert!(TokenSequence::new(vec!["a".into(), "".into()]).is_err());
        assert!(TokenSequence::new(vec!["a b".into()]).is_err());
        assert!(TokenSequence::new(vec!["ab".into()]).is_ok());
    }

    fn arb_config() -> impl Strategy<Value = TokenizerConfig> {
        (
            any::<bool>(),
            any::<bool>(),
            any::<bool>(),
            prop::collection::btree_set("[a-zA-Zé]{1,3}", 0..4),
        )
            .prop_map(|(l, d, p, s)| TokenizerConfig {
                lowercase: l,
                strip_diacritics: d,
                strip_punctuation: p,
                stopwords: s,
                language: String::new(),
            })
    }

    proptest! {
        #[test]
        fn deterministic_and_well_formed(text in "\\PC{0,60}", cfg in arb_config()) {
            let a = tokenize(&text, &cfg);
            let b = tokenize(&text, &cfg);
            prop_assert_eq!(&a, &b);
            prop_assert!(a.len() <= text.split_whitespace().count());
            for t in a.iter() {
                prop_assert!(!t.is_empty());
                prop_assert!(!t.chars().any(char::is_whitespace));
            }
        }

        #[test]
        fn raw_config_is_whitespace_split(text in "\\PC{0,60}") {
            let toks = tokenize(&text, &TokenizerConfig::raw());
            let expect: Vec<String> = text.split_whitespace().map(str::to_owned).collect();
            prop_assert_eq!(toks.into_inner(), expect);
        }

        #[test]
        fn lowercased_stopwords_never_survive(text in "[a-zA-Z ,.]{0,40}", cfg in arb_config()) {
            let cfg = TokenizerConfig { lowercase: true, ..cfg };
            let out = tokenize(&text, &cfg);
            let tok = Tokenizer::new(cfg.clone());
            for t in out.iter() {
                prop_assert!(!tok.stopwords.contains(t));
                prop_assert!(!cfg.stopwords.contains(t));
            }
        }
    }
}
