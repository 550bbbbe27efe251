//! Region identifiers: the 33 states and union territories, six cities, and
//! the nation.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// State codes and display names, in the reporting order used for fixtures.
pub const STATES: [(&str, &str); 33] = [
    ("BR", "Bihar"),
    ("GA", "Goa"),
    ("PB", "Punjab"),
    ("UP", "Uttar Pradesh"),
    ("CH", "Chandigarh"),
    ("DN", "Dadra and Nagar Haveli"),
    ("DD", "Daman and Diu"),
    ("DL", "Delhi"),
    ("RJ", "Rajasthan"),
    ("TN", "Tamil Nadu"),
    ("WB", "West Bengal"),
    ("MH", "Maharashtra"),
    ("TG", "Telangana"),
    ("PY", "Pondicherry"),
    ("AP", "Andhra Pradesh"),
    ("CT", "Chhattisgarh"),
    ("GJ", "Gujarat"),
    ("KA", "Karnataka"),
    ("MN", "Manipur"),
    ("HR", "Haryana"),
    ("JH", "Jharkhand"),
    ("AN", "Andaman and Nicobar Islands"),
    ("TR", "Tripura"),
    ("OR", "Orissa"),
    ("ML", "Meghalaya"),
    ("SK", "Sikkim"),
    ("AR", "Arunachal Pradesh"),
    ("HP", "Himachal Pradesh"),
    ("NL", "Nagaland"),
    ("MP", "Madhya Pradesh"),
    ("MZ", "Mizoram"),
    ("KL", "Kerala"),
    ("AS", "Assam"),
];

/// Cities with their enclosing state code.
pub const CITIES: [(&str, &str); 6] = [
    ("Mumbai", "MH"),
    ("Chennai", "TN"),
    ("Pune", "MH"),
    ("Hyderabad", "TG"),
    ("Bangalore", "KA"),
    ("Tirupati", "AP"),
];

pub const NATION_CODE: &str = "IN";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RegionKind {
    State,
    City,
    Nation,
}

/// A state (by code), a city (by name), or the nation (`IN`).
///
/// Constructors validate against the fixed region tables, so every value
/// names a known region. Serialized as its code string.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RegionId {
    kind: RegionKind,
    code: &'static str,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown region {0:?}")]
pub struct UnknownRegion(pub String);

impl RegionId {
    pub fn state(code: &str) -> Result<Self, UnknownRegion> {
        STATES
            .iter()
            .find(|(c, _)| c.eq_ignore_ascii_case(code))
            .map(|(c, _)| RegionId { kind: RegionKind::State, code: c })
            .ok_or_else(|| UnknownRegion(code.to_string()))
    }

    pub fn city(name: &str) -> Result<Self, UnknownRegion> {
        CITIES
            .iter()
            .find(|(c, _)| c.eq_ignore_ascii_case(name))
            .map(|(c, _)| RegionId { kind: RegionKind::City, code: c })
            .ok_or_else(|| UnknownRegion(name.to_string()))
    }

    pub fn nation() -> Self {
        RegionId { kind: RegionKind::Nation, code: NATION_CODE }
    }

    /// Accepts `IN`, any state code, or any city name (case-insensitive).
    pub fn parse(s: &str) -> Result<Self, UnknownRegion> {
        if s.eq_ignore_ascii_case(NATION_CODE) {
            return Ok(Self::nation());
        }
        Self::state(s).or_else(|_| Self::city(s))
    }

    pub fn kind(&self) -> RegionKind {
        self.kind
    }

    pub fn code(&self) -> &'static str {
        self.code
    }

    pub fn is_state(&self) -> bool {
        self.kind == RegionKind::State
    }

    pub fn display_name(&self) -> &'static str {
        match self.kind {
            RegionKind::State => STATES.iter().find(|(c, _)| *c == self.code).map(|(_, n)| *n).unwrap_or(self.code),
            RegionKind::City => self.code,
            RegionKind::Nation => "India",
        }
    }

    /// State enclosing a city; `None` for states and the nation.
    pub fn enclosing_state(&self) -> Option<RegionId> {
        match self.kind {
            RegionKind::City => CITIES
                .iter()
                .find(|(c, _)| *c == self.code)
                .and_then(|(_, s)| RegionId::state(s).ok()),
            _ => None,
        }
    }

    pub fn all_states() -> impl Iterator<Item = RegionId> {
        STATES.iter().map(|(c, _)| RegionId { kind: RegionKind::State, code: c })
    }

    pub fn all_cities() -> impl Iterator<Item = RegionId> {
        CITIES.iter().map(|(c, _)| RegionId { kind: RegionKind::City, code: c })
    }
}

impl fmt::Display for RegionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code)
    }
}

impl FromStr for RegionId {
    type Err = UnknownRegion;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        RegionId::parse(s)
    }
}

impl Serialize for RegionId {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.code)
    }
}

impl<'de> Deserialize<'de> for RegionId {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        RegionId::parse(&s).map_err(serde::de::Error::custom)
    }
}
