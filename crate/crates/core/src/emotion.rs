//! The seven emotion categories and fixed-size per-category count vectors.

use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut};
use std::str::FromStr;

use serde::de::{self, MapAccess, Visitor};
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// One of the six basic emotions, or the `Neutral` fallback.
///
/// Declaration order is the canonical order used for tie-breaking:
/// Anger, Disgust, Fear, Happiness, Sadness, Surprise, then Neutral.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EmotionLabel {
    Anger,
    Disgust,
    Fear,
    Happiness,
    Sadness,
    Surprise,
    Neutral,
}

impl EmotionLabel {
    /// All seven labels in canonical order.
    pub const ALL: [EmotionLabel; 7] = [
        EmotionLabel::Anger,
        EmotionLabel::Disgust,
        EmotionLabel::Fear,
        EmotionLabel::Happiness,
        EmotionLabel::Sadness,
        EmotionLabel::Surprise,
        EmotionLabel::Neutral,
    ];

    /// The six lexicon-backed emotions in canonical order.
    pub const BASIC: [EmotionLabel; 6] = [
        EmotionLabel::Anger,
        EmotionLabel::Disgust,
        EmotionLabel::Fear,
        EmotionLabel::Happiness,
        EmotionLabel::Sadness,
        EmotionLabel::Surprise,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn is_basic(self) -> bool {
        self != EmotionLabel::Neutral
    }

    /// Short column code: A, D, F, H, SA, S, N.
    pub fn code(self) -> &'static str {
        match self {
            EmotionLabel::Anger => "A",
            EmotionLabel::Disgust => "D",
            EmotionLabel::Fear => "F",
            EmotionLabel::Happiness => "H",
            EmotionLabel::Sadness => "SA",
            EmotionLabel::Surprise => "S",
            EmotionLabel::Neutral => "N",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            EmotionLabel::Anger => "Anger",
            EmotionLabel::Disgust => "Disgust",
            EmotionLabel::Fear => "Fear",
            EmotionLabel::Happiness => "Happiness",
            EmotionLabel::Sadness => "Sadness",
            EmotionLabel::Surprise => "Surprise",
            EmotionLabel::Neutral => "Neutral",
        }
    }

    pub fn from_code(code: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|e| e.code().eq_ignore_ascii_case(code))
    }

    /// Parses a lexicon emotion name. Case-insensitive; `joy` maps to
    /// `Happiness`. `Neutral` is not a lexicon emotion and is rejected.
    pub fn from_lexicon_name(name: &str) -> Option<Self> {
        match name.trim().to_ascii_lowercase().as_str() {
            "anger" => Some(EmotionLabel::Anger),
            "disgust" => Some(EmotionLabel::Disgust),
            "fear" => Some(EmotionLabel::Fear),
            "happiness" | "joy" => Some(EmotionLabel::Happiness),
            "sadness" => Some(EmotionLabel::Sadness),
            "surprise" => Some(EmotionLabel::Surprise),
            _ => None,
        }
    }
}

impl fmt::Display for EmotionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown emotion label {0:?}")]
pub struct UnknownLabel(pub String);

impl FromStr for EmotionLabel {
    type Err = UnknownLabel;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|e| e.name().eq_ignore_ascii_case(s))
            .or_else(|| Self::from_code(s))
            .ok_or_else(|| UnknownLabel(s.to_string()))
    }
}

/// Post counts for each of the seven labels.
///
/// Serialized as a JSON object keyed by label name, always with all seven keys.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct EmotionCounts([u64; 7]);

impl EmotionCounts {
    pub fn new(counts: [u64; 7]) -> Self {
        Self(counts)
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn as_array(&self) -> &[u64; 7] {
        &self.0
    }

    pub fn total(&self) -> u64 {
        self.0.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    pub fn increment(&mut self, label: EmotionLabel) {
        self.0[label.index()] += 1;
    }

    pub fn iter(&self) -> impl Iterator<Item = (EmotionLabel, u64)> + '_ {
        EmotionLabel::ALL.into_iter().map(move |e| (e, self.0[e.index()]))
    }

    pub fn scaled(&self, factor: u64) -> Self {
        Self(self.0.map(|c| c * factor))
    }
}

impl Index<EmotionLabel> for EmotionCounts {
    type Output = u64;

    fn index(&self, label: EmotionLabel) -> &u64 {
        &self.0[label.index()]
    }
}

impl IndexMut<EmotionLabel> for EmotionCounts {
    fn index_mut(&mut self, label: EmotionLabel) -> &mut u64 {
        &mut self.0[label.index()]
    }
}

impl Add for EmotionCounts {
    type Output = EmotionCounts;

    fn add(mut self, rhs: EmotionCounts) -> EmotionCounts {
        self += rhs;
        self
    }
}

impl AddAssign for EmotionCounts {
    fn add_assign(&mut self, rhs: EmotionCounts) {
        for (a, b) in self.0.iter_mut().zip(rhs.0) {
            *a += b;
        }
    }
}

impl std::iter::Sum for EmotionCounts {
    fn sum<I: Iterator<Item = EmotionCounts>>(iter: I) -> Self {
        iter.fold(EmotionCounts::zero(), |acc, c| acc + c)
    }
}

impl FromIterator<EmotionLabel> for EmotionCounts {
    fn from_iter<I: IntoIterator<Item = EmotionLabel>>(iter: I) -> Self {
        let mut counts = EmotionCounts::zero();
        for label in iter {
            counts.increment(label);
        }
        counts
    }
}

impl Serialize for EmotionCounts {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(7))?;
        for (label, count) in self.iter() {
            map.serialize_entry(label.name(), &count)?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for EmotionCounts {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct CountsVisitor;

        impl<'de> Visitor<'de> for CountsVisitor {
            type Value = EmotionCounts;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a map from emotion label to count")
            }

            fn visit_map<A: MapAccess<'de>>(self, mut access: A) -> Result<EmotionCounts, A::Error> {
                let mut counts = EmotionCounts::zero();
                while let Some((key, value)) = access.next_entry::<String, u64>()? {
                    let label: EmotionLabel = key.parse().map_err(de::Error::custom)?;
                    counts[label] = value;
                }
                Ok(counts)
            }
        }

        deserializer.deserialize_map(CountsVisitor)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seven_variants_in_canonical_order() {
        assert_eq!(EmotionLabel::ALL.len(), 7);
        assert!(EmotionLabel::ALL.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(EmotionLabel::ALL[6], EmotionLabel::Neutral);
    }

    #[test]
    fn joy_maps_to_happiness() {
        assert_eq!(EmotionLabel::from_lexicon_name("JOY"), Some(EmotionLabel::Happiness));
        assert_eq!(EmotionLabel::from_lexicon_name("neutral"), None);
    }

    #[test]
    fn codes_round_trip() {
        for e in EmotionLabel::ALL {
            assert_eq!(EmotionLabel::from_code(e.code()), Some(e));
            assert_eq!(e.name().parse::<EmotionLabel>().unwrap(), e);
        }
    }

    #[test]
    fn counts_json_has_all_keys() {
        let counts: EmotionCounts = [EmotionLabel::Happiness, EmotionLabel::Happiness].into_iter().collect();
        let json = serde_json::to_value(counts).unwrap();
        assert_eq!(json.as_object().unwrap().len(), 7);
        assert_eq!(json["Happiness"], 2);
        let back: EmotionCounts = serde_json::from_value(json).unwrap();
        assert_eq!(back, counts);
    }
}
