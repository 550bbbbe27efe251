//! Emotion keyword lexicon.
//!
//! The lexicon file is CSV with a `word,emotion` header and one keyword per
//! row. Emotion names are matched case-insensitively and `joy` is accepted as
//! an alias for Happiness. A headerless two-column file and a gzip-compressed
//! stream are also accepted, which covers the distribution form of the
//! original keyword dataset.

use std::collections::HashMap;
use std::fs::File;
use std::io::{self, BufReader, Read};
use std::path::Path;

use flate2::read::GzDecoder;
use log::warn;

use crate::emotion::EmotionLabel;

const SAMPLE_LEXICON: &str = include_str!("../data/lexicon/sample_emotions.csv");

#[derive(Debug, thiserror::Error)]
pub enum LexiconError {
    #[error("empty lexicon")]
    Empty,
    #[error("line {line}: {message}")]
    Malformed { line: u64, message: String },
    #[error("line {line}: unknown emotion {value:?}")]
    UnknownEmotion { line: u64, value: String },
    #[error("reading lexicon: {0}")]
    Io(#[from] io::Error),
}

/// A keyword that appeared more than once. The first mapping is kept.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DuplicateKeyword {
    pub word: String,
    pub line: u64,
    pub kept: EmotionLabel,
    pub ignored: EmotionLabel,
}

/// Immutable keyword → emotion map.
#[derive(Debug, Clone)]
pub struct Lexicon {
    entries: HashMap<String, EmotionLabel>,
    counts: [usize; 6],
    duplicates: Vec<DuplicateKeyword>,
}

impl Lexicon {
    /// The small starter lexicon bundled with the crate. It is meant for demos
    /// and tests; production runs should pass the full keyword dataset.
    pub fn bundled_sample() -> Self {
        load_lexicon(SAMPLE_LEXICON.as_bytes()).expect("bundled lexicon is valid")
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self, LexiconError> {
        let file = File::open(path)?;
        load_lexicon(BufReader::new(file))
    }

    /// Builds a lexicon from `(word, emotion)` pairs without going through CSV.
    pub fn from_pairs<'a, I>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (&'a str, EmotionLabel)>,
    {
        let mut builder = Builder::default();
        for (i, (word, emotion)) in pairs.into_iter().enumerate() {
            builder.insert(word.to_lowercase(), emotion, i as u64 + 1);
        }
        builder.finish()
    }

    pub fn lookup(&self, token: &str) -> Option<EmotionLabel> {
        self.entries.get(token).copied()
    }

    /// Number of keywords mapped to `emotion`. Always 0 for `Neutral`.
    pub fn count(&self, emotion: EmotionLabel) -> usize {
        if emotion.is_basic() {
            self.counts[emotion.index()]
        } else {
            0
        }
    }

    pub fn counts(&self) -> impl Iterator<Item = (EmotionLabel, usize)> + '_ {
        EmotionLabel::BASIC.into_iter().map(|e| (e, self.counts[e.index()]))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn duplicates(&self) -> &[DuplicateKeyword] {
        &self.duplicates
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, EmotionLabel)> {
        self.entries.iter().map(|(w, e)| (w.as_str(), *e))
    }
}

#[derive(Default)]
struct Builder {
    entries: HashMap<String, EmotionLabel>,
    counts: [usize; 6],
    duplicates: Vec<DuplicateKeyword>,
}

impl Builder {
    fn insert(&mut self, word: String, emotion: EmotionLabel, line: u64) {
        debug_assert!(emotion.is_basic());
        if let Some(&kept) = self.entries.get(&word) {
            warn!("lexicon line {line}: duplicate keyword {word:?} ({emotion}), keeping {kept}");
            self.duplicates.push(DuplicateKeyword { word, line, kept, ignored: emotion });
            return;
        }
        self.counts[emotion.index()] += 1;
        self.entries.insert(word, emotion);
    }

    fn finish(self) -> Lexicon {
        Lexicon {
            entries: self.entries,
            counts: self.counts,
            duplicates: self.duplicates,
        }
    }
}

/// Reads a keyword file from `source`. Gzip input is detected by its magic
/// bytes and decompressed transparently.
pub fn load_lexicon<R: Read>(source: R) -> Result<Lexicon, LexiconError> {
    let mut bytes = Vec::new();
    let mut source = source;
    source.read_to_end(&mut bytes)?;
    if bytes.starts_with(&[0x1f, 0x8b]) {
        let mut plain = Vec::new();
        GzDecoder::new(bytes.as_slice()).read_to_end(&mut plain)?;
        bytes = plain;
    }
    parse_csv(&bytes)
}

fn parse_csv(bytes: &[u8]) -> Result<Lexicon, LexiconError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(bytes);

    let mut builder = Builder::default();
    let mut columns: Option<(usize, usize)> = None;
    let mut record = csv::StringRecord::new();

    loop {
        match reader.read_record(&mut record) {
            Ok(false) => break,
            Ok(true) => {}
            Err(e) => {
                let line = e.position().map(|p| p.line()).unwrap_or(0);
                return Err(LexiconError::Malformed { line, message: e.to_string() });
            }
        }
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if record.iter().all(str::is_empty) {
            continue;
        }

        let (word_col, emotion_col) = match columns {
            Some(cols) => cols,
            None => {
                let cols = header_columns(&record);
                columns = Some(cols.unwrap_or((0, 1)));
                if cols.is_some() {
                    continue;
                }
                (0, 1)
            }
        };

        let (Some(word), Some(emotion)) = (record.get(word_col), record.get(emotion_col)) else {
            return Err(LexiconError::Malformed {
                line,
                message: format!("expected 2 fields, found {}", record.len()),
            });
        };
        if word.is_empty() || word.chars().any(char::is_whitespace) {
            return Err(LexiconError::Malformed {
                line,
                message: format!("keyword {word:?} is not a single token"),
            });
        }
        let label = EmotionLabel::from_lexicon_name(emotion).ok_or_else(|| {
            LexiconError::UnknownEmotion { line, value: emotion.to_string() }
        })?;
        builder.insert(word.to_lowercase(), label, line);
    }

    let lexicon = builder.finish();
    if lexicon.is_empty() {
        return Err(LexiconError::Empty);
    }
    Ok(lexicon)
}

/// Returns `(word, emotion)` column indices when `record` is a header row.
fn header_columns(record: &csv::StringRecord) -> Option<(usize, usize)> {
    let find = |name: &str| record.iter().position(|f| f.eq_ignore_ascii_case(name));
    Some((find("word")?, find("emotion")?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    use flate2::write::GzEncoder;
    use flate2::Compression;

    const FIXTURE: &str = "word,emotion\nhappy,happiness\nglad,happiness\nangry,anger\n";

    #[test]
    fn three_row_fixture_counts() {
        let lex = load_lexicon(FIXTURE.as_bytes()).unwrap();
        assert_eq!(lex.count(EmotionLabel::Happiness), 2);
        assert_eq!(lex.count(EmotionLabel::Anger), 1);
        for e in [EmotionLabel::Disgust, EmotionLabel::Fear, EmotionLabel::Sadness, EmotionLabel::Surprise] {
            assert_eq!(lex.count(e), 0);
        }
        assert_eq!(lex.lookup("glad"), Some(EmotionLabel::Happiness));
    }

    #[test]
    fn empty_stream_is_rejected() {
        let err = load_lexicon(&b""[..]).unwrap_err();
        assert_eq!(err.to_string(), "empty lexicon");
        let err = load_lexicon(&b"word,emotion\n"[..]).unwrap_err();
        assert!(matches!(err, LexiconError::Empty));
    }

    #[test]
    fn unknown_emotion_names_the_value() {
        let err = load_lexicon(&b"word,emotion\nhappy,joy\nmeh,boredom\n"[..]).unwrap_err();
        match err {
            LexiconError::UnknownEmotion { line, value } => {
                assert_eq!(line, 3);
                assert_eq!(value, "boredom");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_row_reports_line() {
        let err = load_lexicon(&b"word,emotion\nhappy,joy\nlonely\n"[..]).unwrap_err();
        assert!(matches!(err, LexiconError::Malformed { line: 3, .. }), "{err:?}");
        let err = load_lexicon(&b"word,emotion\nvery happy,joy\n"[..]).unwrap_err();
        assert!(matches!(err, LexiconError::Malformed { line: 2, .. }), "{err:?}");
    }

    #[test]
    fn first_duplicate_wins() {
        let lex = load_lexicon(&b"word,emotion\nawful,disgust\nAwful,sadness\n"[..]).unwrap();
        assert_eq!(lex.lookup("awful"), Some(EmotionLabel::Disgust));
        assert_eq!(lex.count(EmotionLabel::Disgust), 1);
        assert_eq!(lex.count(EmotionLabel::Sadness), 0);
        assert_eq!(lex.duplicates().len(), 1);
        assert_eq!(lex.duplicates()[0].ignored, EmotionLabel::Sadness);
    }

    #[test]
    fn headerless_and_gzip_input() {
        let lex = load_lexicon(&b"abhor,anger\nglee,joy\n"[..]).unwrap();
        assert_eq!(lex.len(), 2);

        let mut enc = GzEncoder::new(Vec::new(), Compression::default());
        enc.write_all(FIXTURE.as_bytes()).unwrap();
        let gz = enc.finish().unwrap();
        let lex = load_lexicon(gz.as_slice()).unwrap();
        assert_eq!(lex.count(EmotionLabel::Happiness), 2);
    }

    #[test]
    fn reordered_header_columns() {
        let lex = load_lexicon(&b"emotion,word\nfear,afraid\n"[..]).unwrap();
        assert_eq!(lex.lookup("afraid"), Some(EmotionLabel::Fear));
    }

    #[test]
    fn counts_match_entries_and_never_neutral() {
        let lex = Lexicon::bundled_sample();
        let total: usize = lex.counts().map(|(_, c)| c).sum();
        assert_eq!(total, lex.len());
        assert!(lex.iter().all(|(_, e)| e.is_basic()));
        assert_eq!(lex.count(EmotionLabel::Neutral), 0);
    }
}
