//! Keyword-rank scoring and seven-way labeling.

use std::sync::Arc;

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::emotion::EmotionLabel;
use crate::lexicon::Lexicon;
use crate::preprocess::{Preprocessor, TokenList};

/// Denominator used when turning match counts into a displayed rank.
///
/// Labels are computed from raw match counts and do not depend on this.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum RankNormalization {
    /// matched / number of tokens in the post
    #[default]
    TokenCount,
    /// matched / number of lexicon keywords for the category
    LexiconSize,
}

/// Per-emotion keyword matches for one post.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EmotionScores {
    matched: [u32; 6],
    token_count: u32,
}

impl EmotionScores {
    /// Panics if any match count exceeds `token_count`.
    pub fn from_matches(matched: [u32; 6], token_count: u32) -> Self {
        assert!(
            matched.iter().all(|&m| m <= token_count),
            "matched count exceeds token count"
        );
        Self { matched, token_count }
    }

    pub fn matched(&self, emotion: EmotionLabel) -> u32 {
        if emotion.is_basic() {
            self.matched[emotion.index()]
        } else {
            0
        }
    }

    pub fn token_count(&self) -> u32 {
        self.token_count
    }

    /// `(numerator, denominator)` of the rank; `(0, 0)` for an empty post.
    pub fn ratio(&self, emotion: EmotionLabel) -> (u32, u32) {
        (self.matched(emotion), self.token_count)
    }

    /// matched / token_count, or 0 when the post has no tokens.
    pub fn score(&self, emotion: EmotionLabel) -> f64 {
        if self.token_count == 0 {
            0.0
        } else {
            f64::from(self.matched(emotion)) / f64::from(self.token_count)
        }
    }

    /// Rank under an explicit normalization. `LexiconSize` divides by the
    /// category's keyword count and yields 0 for an empty category.
    pub fn normalized(&self, emotion: EmotionLabel, norm: RankNormalization, lexicon: &Lexicon) -> f64 {
        match norm {
            RankNormalization::TokenCount => self.score(emotion),
            RankNormalization::LexiconSize => match lexicon.count(emotion) {
                0 => 0.0,
                n => f64::from(self.matched(emotion)) / n as f64,
            },
        }
    }

    pub fn any_match(&self) -> bool {
        self.matched.iter().any(|&m| m > 0)
    }
}

impl Serialize for EmotionScores {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let score: std::collections::BTreeMap<&str, f64> =
            EmotionLabel::BASIC.iter().map(|e| (e.name(), self.score(*e))).collect();
        let matched: std::collections::BTreeMap<&str, u32> =
            EmotionLabel::BASIC.iter().map(|e| (e.name(), self.matched(*e))).collect();
        let mut s = serializer.serialize_struct("EmotionScores", 3)?;
        s.serialize_field("score", &score)?;
        s.serialize_field("matched", &matched)?;
        s.serialize_field("token_count", &self.token_count)?;
        s.end()
    }
}

/// Counts keyword occurrences (not distinct keywords) per emotion.
pub fn score(tokens: &TokenList, lexicon: &Lexicon) -> EmotionScores {
    let mut matched = [0u32; 6];
    for token in tokens.iter() {
        if let Some(e) = lexicon.lookup(token) {
            matched[e.index()] += 1;
        }
    }
    EmotionScores { matched, token_count: tokens.len() as u32 }
}

/// Highest-ranked emotion, `Neutral` when nothing matched. Ties go to the
/// first emotion in canonical order.
pub fn label(scores: &EmotionScores) -> EmotionLabel {
    // All ranks share the token-count denominator, so comparing the integer
    // numerators is exact and gives the same argmax.
    let mut best = EmotionLabel::Neutral;
    let mut best_count = 0;
    for e in EmotionLabel::BASIC {
        let m = scores.matched(e);
        if m > best_count {
            best = e;
            best_count = m;
        }
    }
    best
}

/// Lexicon plus preprocessing configuration. Cheap to clone and safe to
/// share across threads.
#[derive(Debug, Clone)]
pub struct Classifier {
    lexicon: Arc<Lexicon>,
    preprocessor: Preprocessor,
}

impl Classifier {
    pub fn new(lexicon: Arc<Lexicon>, preprocessor: Preprocessor) -> Self {
        Self { lexicon, preprocessor }
    }

    pub fn with_lexicon(lexicon: Lexicon) -> Self {
        Self::new(Arc::new(lexicon), Preprocessor::bundled())
    }

    pub fn lexicon(&self) -> &Lexicon {
        &self.lexicon
    }

    pub fn preprocessor(&self) -> &Preprocessor {
        &self.preprocessor
    }

    pub fn classify(&self, text: &str) -> (EmotionLabel, EmotionScores) {
        let scores = score(&self.preprocessor.preprocess(text), &self.lexicon);
        (label(&scores), scores)
    }
}

/// `label(score(preprocess(text)))` with the bundled preprocessing.
pub fn classify(text: &str, lexicon: &Lexicon) -> (EmotionLabel, EmotionScores) {
    let scores = score(&crate::preprocess::preprocess(text), lexicon);
    (label(&scores), scores)
}
