//! Post text normalization and tokenization.
//!
//! Stages, in order: lowercase, strip URLs, strip `@` mentions, drop the `#`
//! sigil (keeping the hashtag body), split on non-alphanumeric boundaries,
//! drop pure-numeric tokens, drop closed-class function words, then an
//! optional pluggable filter (for example a noun remover backed by a tagger).

use std::collections::HashSet;
use std::fmt;
use std::sync::{Arc, OnceLock};

use regex::Regex;

const FUNCTION_WORDS: &str = include_str!("../data/function_words.txt");

/// Lowercase word tokens that survived filtering.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct TokenList(Vec<String>);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid token {0:?}")]
pub struct InvalidToken(pub String);

impl TokenList {
    /// Wraps already-normalized tokens, checking the token invariants:
    /// non-empty, lowercase, no whitespace, no URL scheme, no leading `@`/`#`.
    pub fn from_tokens<I, S>(tokens: I) -> Result<Self, InvalidToken>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let tokens: Vec<String> = tokens.into_iter().map(Into::into).collect();
        if let Some(bad) = tokens.iter().find(|t| !is_valid_token(t)) {
            return Err(InvalidToken(bad.clone()));
        }
        Ok(Self(tokens))
    }

    pub fn as_slice(&self) -> &[String] {
        &self.0
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

    pub fn into_vec(self) -> Vec<String> {
        self.0
    }
}

fn is_valid_token(t: &str) -> bool {
    !t.is_empty()
        && !t.chars().any(char::is_whitespace)
        && !t.starts_with('@')
        && !t.starts_with('#')
        && !t.contains("://")
        && t.to_lowercase() == t
}

/// Final, optional filtering stage over the token sequence.
pub trait TokenFilter: Send + Sync {
    fn filter(&self, tokens: Vec<String>) -> Vec<String>;
}

/// Removes every token found in a fixed word list, e.g. a list of common
/// nouns when no part-of-speech tagger is available.
#[derive(Debug, Clone, Default)]
pub struct WordListFilter {
    words: HashSet<String>,
}

impl WordListFilter {
    pub fn new<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        Self { words: words.into_iter().map(|w| w.as_ref().to_lowercase()).collect() }
    }

    /// One word per line; blank lines and `#` comments are ignored.
    pub fn parse(list: &str) -> Self {
        Self::new(parse_word_list(list))
    }
}

impl TokenFilter for WordListFilter {
    fn filter(&self, mut tokens: Vec<String>) -> Vec<String> {
        tokens.retain(|t| !self.words.contains(t));
        tokens
    }
}

fn parse_word_list(list: &str) -> impl Iterator<Item = &str> {
    list.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
}

fn url_pattern() -> &'static Regex {
    static URL: OnceLock<Regex> = OnceLock::new();
    URL.get_or_init(|| Regex::new(r"(?:[a-z][a-z0-9+.\-]*://|www\.)\S*").unwrap())
}

fn mention_pattern() -> &'static Regex {
    static MENTION: OnceLock<Regex> = OnceLock::new();
    MENTION.get_or_init(|| Regex::new(r"@[\p{Alphabetic}\p{N}_]*").unwrap())
}

/// Deterministic text → [`TokenList`] pipeline.
#[derive(Clone)]
pub struct Preprocessor {
    function_words: Arc<HashSet<String>>,
    extra: Option<Arc<dyn TokenFilter>>,
}

impl fmt::Debug for Preprocessor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Preprocessor")
            .field("function_words", &self.function_words.len())
            .field("extra_filter", &self.extra.is_some())
            .finish()
    }
}

impl Default for Preprocessor {
    fn default() -> Self {
        Self::bundled()
    }
}

impl Preprocessor {
    /// Uses the bundled function-word list and no extra filter.
    pub fn bundled() -> Self {
        static WORDS: OnceLock<Arc<HashSet<String>>> = OnceLock::new();
        let words = WORDS
            .get_or_init(|| Arc::new(parse_word_list(FUNCTION_WORDS).map(str::to_string).collect()))
            .clone();
        Self { function_words: words, extra: None }
    }

    pub fn with_function_words(list: &str) -> Self {
        Self {
            function_words: Arc::new(parse_word_list(list).map(str::to_lowercase).collect()),
            extra: None,
        }
    }

    /// Installs the last-stage filter (noun removal, off by default).
    pub fn with_filter(mut self, filter: Arc<dyn TokenFilter>) -> Self {
        self.extra = Some(filter);
        self
    }

    pub fn is_function_word(&self, token: &str) -> bool {
        self.function_words.contains(token)
    }

    pub fn preprocess(&self, text: &str) -> TokenList {
        let lowered = text.to_lowercase();
        let no_urls = url_pattern().replace_all(&lowered, " ");
        let no_mentions = mention_pattern().replace_all(&no_urls, " ");

        let tokens: Vec<String> = no_mentions
            .split(|c: char| !c.is_alphanumeric())
            .filter(|t| !t.is_empty())
            .filter(|t| !t.chars().all(char::is_numeric))
            .filter(|t| !self.function_words.contains(*t))
            .map(str::to_string)
            .collect();

        let tokens = match &self.extra {
            Some(filter) => filter.filter(tokens),
            None => tokens,
        };
        TokenList(tokens)
    }
}

/// [`Preprocessor::preprocess`] with the bundled configuration.
pub fn preprocess(text: &str) -> TokenList {
    static DEFAULT: OnceLock<Preprocessor> = OnceLock::new();
    DEFAULT.get_or_init(Preprocessor::bundled).preprocess(text)
}
