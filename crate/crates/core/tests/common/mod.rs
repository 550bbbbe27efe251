//! Independent oracles for integration and acceptance tests. Nothing here
//! calls into the library's tokenizer, lexicon loader or geometry code.
#![allow(dead_code)]

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::PathBuf;

use chrono::{DateTime, FixedOffset, NaiveDate, Utc};
use rand::seq::SliceRandom;
use rand::Rng;
use serde_json::Value;

/// Canonical order: A, D, F, H, SA, S, then N.
pub const CODES: [&str; 7] = ["A", "D", "F", "H", "SA", "S", "N"];
pub const NEUTRAL: usize = 6;

pub fn data(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(rel)
}

pub fn emotion_index(name: &str) -> usize {
    match name {
        "anger" => 0,
        "disgust" => 1,
        "fear" => 2,
        "joy" | "happiness" => 3,
        "sadness" => 4,
        "surprise" => 5,
        other => panic!("unknown emotion {other}"),
    }
}

/// Brute-force keyword matcher: linear scans, no hashing, no regex.
pub struct Oracle {
    keywords: Vec<(String, usize)>,
    function_words: Vec<String>,
}

impl Oracle {
    pub fn bundled() -> Self {
        let mut keywords: Vec<(String, usize)> = Vec::new();
        let csv = fs::read_to_string(data("lexicon/sample_emotions.csv")).unwrap();
        for line in csv.lines().skip(1).filter(|l| !l.trim().is_empty()) {
            let (w, e) = line.split_once(',').unwrap();
            let w = w.trim().to_lowercase();
            if !keywords.iter().any(|(k, _)| *k == w) {
                keywords.push((w, emotion_index(e.trim())));
            }
        }
        let function_words = fs::read_to_string(data("function_words.txt"))
            .unwrap()
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(str::to_lowercase)
            .collect();
        Oracle { keywords, function_words }
    }

    pub fn keywords(&self) -> &[(String, usize)] {
        &self.keywords
    }

    pub fn function_words(&self) -> &[String] {
        &self.function_words
    }

    pub fn emotion_of(&self, word: &str) -> Option<usize> {
        self.keywords.iter().find(|(k, _)| k == word).map(|(_, e)| *e)
    }

    pub fn tokens(&self, text: &str) -> Vec<String> {
        let lower = text.to_lowercase();
        let mut kept = String::new();
        for chunk in lower.split(char::is_whitespace) {
            kept.push_str(strip_url(chunk));
            kept.push(' ');
        }
        let mut no_mentions = String::new();
        let mut chars = kept.chars().peekable();
        while let Some(c) = chars.next() {
            if c == '@' {
                while chars.peek().is_some_and(|n| n.is_alphabetic() || n.is_numeric() || *n == '_') {
                    chars.next();
                }
                no_mentions.push(' ');
            } else {
                no_mentions.push(c);
            }
        }
        let mut out = Vec::new();
        let mut cur = String::new();
        for c in no_mentions.chars().chain(std::iter::once(' ')) {
            if c.is_alphanumeric() {
                cur.push(c);
            } else if !cur.is_empty() {
                let t = std::mem::take(&mut cur);
                let numeric = t.chars().all(|c| c.is_numeric());
                if !numeric && !self.function_words.contains(&t) {
                    out.push(t);
                }
            }
        }
        out
    }

    /// Match counts per basic emotion and the token count.
    pub fn counts(&self, text: &str) -> ([u32; 6], u32) {
        let tokens = self.tokens(text);
        let mut m = [0u32; 6];
        for t in &tokens {
            for (k, e) in &self.keywords {
                if k == t {
                    m[*e] += 1;
                }
            }
        }
        (m, tokens.len() as u32)
    }

    /// Index into [`CODES`].
    pub fn label(&self, text: &str) -> usize {
        let (m, _) = self.counts(text);
        let mut best = NEUTRAL;
        let mut best_count = 0;
        for (i, c) in m.iter().enumerate() {
            if *c > best_count {
                best = i;
                best_count = *c;
            }
        }
        best
    }
}

fn is_scheme_char(c: u8) -> bool {
    c.is_ascii_lowercase() || c.is_ascii_digit() || matches!(c, b'+' | b'.' | b'-')
}

/// Prefix of a lowercased chunk before any URL it contains.
fn strip_url(chunk: &str) -> &str {
    let b = chunk.as_bytes();
    let mut cut = chunk.len();
    if let Some(i) = chunk.find("www.") {
        cut = cut.min(i);
    }
    let mut from = 0;
    while let Some(rel) = chunk[from..].find("://") {
        let i = from + rel;
        let mut start = i;
        while start > 0 && is_scheme_char(b[start - 1]) {
            start -= 1;
        }
        // the scheme must start with a letter; take the leftmost one
        if let Some(p) = (start..i).find(|&p| b[p].is_ascii_lowercase()) {
            cut = cut.min(p);
            break;
        }
        from = i + 3;
    }
    &chunk[..cut]
}

pub struct StateRow {
    pub code: String,
    pub name: String,
    /// Canonical order A, D, F, H, SA, S, N.
    pub counts: [u64; 7],
    pub tot: u64,
    pub con: u64,
    pub rec: u64,
    pub dec: u64,
}

pub fn state_totals() -> Vec<StateRow> {
    let mut rdr = csv::Reader::from_path(data("fixtures/state_totals.csv")).unwrap();
    let headers = rdr.headers().unwrap().clone();
    let col = |name: &str| headers.iter().position(|h| h == name).unwrap();
    let (a, d, h, s, f, sa, n) = (col("A"), col("D"), col("H"), col("S"), col("F"), col("SA"), col("N"));
    rdr.records()
        .map(|r| {
            let r = r.unwrap();
            let num = |i: usize| r[i].parse::<u64>().unwrap();
            StateRow {
                code: r[0].to_string(),
                name: r[1].to_string(),
                counts: [num(a), num(d), num(f), num(h), num(sa), num(s), num(n)],
                tot: num(col("Tot")),
                con: num(col("Con")),
                rec: num(col("Rec")),
                dec: num(col("Dec")),
            }
        })
        .collect()
}

type Ring = Vec<(f64, f64)>;

/// Even-odd ray casting over every ring of every polygon, first feature wins.
pub struct OracleMap {
    states: Vec<(String, Vec<Ring>)>,
}

impl OracleMap {
    pub fn bundled() -> Self {
        let v: Value = serde_json::from_str(&fs::read_to_string(data("geo/india_states.geojson")).unwrap()).unwrap();
        let mut states = Vec::new();
        for f in v["features"].as_array().unwrap() {
            let code = f["properties"]["state_code"].as_str().unwrap().to_string();
            let g = &f["geometry"];
            let polys: Vec<&Value> = match g["type"].as_str().unwrap() {
                "Polygon" => vec![&g["coordinates"]],
                "MultiPolygon" => g["coordinates"].as_array().unwrap().iter().collect(),
                t => panic!("{t}"),
            };
            let mut rings = Vec::new();
            for p in polys {
                for ring in p.as_array().unwrap() {
                    rings.push(
                        ring.as_array()
                            .unwrap()
                            .iter()
                            .map(|pt| (pt[0].as_f64().unwrap(), pt[1].as_f64().unwrap()))
                            .collect(),
                    );
                }
            }
            states.push((code, rings));
        }
        OracleMap { states }
    }

    pub fn state_of(&self, lat: f64, lon: f64) -> Option<&str> {
        for (code, rings) in &self.states {
            let mut inside = false;
            for ring in rings {
                let n = ring.len();
                for i in 0..n {
                    let (x1, y1) = ring[i];
                    let (x2, y2) = ring[(i + 1) % n];
                    if (y1 > lat) != (y2 > lat) && lon < x1 + (lat - y1) * (x2 - x1) / (y2 - y1) {
                        inside = !inside;
                    }
                }
            }
            if inside {
                return Some(code);
            }
        }
        None
    }
}

pub fn ist() -> FixedOffset {
    FixedOffset::east_opt(19800).unwrap()
}

#[derive(Debug, Clone, serde::Deserialize)]
pub struct RawPost {
    pub id: String,
    pub created_at: String,
    pub text: String,
    pub lat: Option<f64>,
    pub lon: Option<f64>,
    #[serde(default)]
    pub hashtags: Vec<String>,
}

impl RawPost {
    pub fn ist_day(&self) -> NaiveDate {
        DateTime::parse_from_rfc3339(&self.created_at).unwrap().with_timezone(&ist()).date_naive()
    }
}

pub fn corpus() -> Vec<RawPost> {
    fs::read_to_string(data("fixtures/posts_5000.jsonl"))
        .unwrap()
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

/// Per-day counts in canonical order, for posts accepted by `keep`.
pub fn oracle_daily<F: Fn(&RawPost) -> bool>(oracle: &Oracle, posts: &[RawPost], keep: F) -> BTreeMap<NaiveDate, [u64; 7]> {
    let mut out: BTreeMap<NaiveDate, [u64; 7]> = BTreeMap::new();
    let mut seen = HashSet::new();
    for p in posts {
        if !keep(p) || !seen.insert(p.id.clone()) {
            continue;
        }
        out.entry(p.ist_day()).or_default()[oracle.label(&p.text)] += 1;
    }
    out
}

const FILLERS: [&str; 16] = [
    "lockdown", "india", "news", "update", "streets", "home", "workers", "week", "city", "masks", "testing", "today",
    "people", "government", "hospital", "vaccine",
];
const NOISE: [&str; 8] = ["http://t.co/Ab12", "https://example.org/x?y=1", "www.news.in/a", "@PMOIndia", "@who_news", "2020", "19", "#StayHome"];

/// A random post text. Keywords come from the oracle's own table with random
/// case and punctuation, mixed with fillers, function words, URLs, mentions
/// and numbers.
pub fn random_text<R: Rng>(rng: &mut R, oracle: &Oracle, max_keywords: usize) -> String {
    let mut words: Vec<String> = Vec::new();
    for _ in 0..rng.gen_range(0..=max_keywords) {
        let (k, _) = oracle.keywords().choose(rng).unwrap();
        let k = k.clone();
        words.push(decorate(rng, &k));
    }
    for _ in 0..rng.gen_range(0..6) {
        let f = *FILLERS.choose(rng).unwrap();
        words.push(decorate(rng, f));
    }
    for _ in 0..rng.gen_range(0..4) {
        words.push(oracle.function_words().choose(rng).unwrap().clone());
    }
    for _ in 0..rng.gen_range(0..3) {
        words.push(NOISE.choose(rng).unwrap().to_string());
    }
    words.shuffle(rng);
    words.join(" ")
}

/// Text with no keyword at all.
pub fn neutral_text<R: Rng>(rng: &mut R, oracle: &Oracle) -> String {
    random_text(rng, oracle, 0)
}

fn decorate<R: Rng>(rng: &mut R, w: &str) -> String {
    let w = match rng.gen_range(0..4) {
        0 => w.to_uppercase(),
        1 => {
            let mut c = w.chars();
            c.next().map(|f| f.to_uppercase().collect::<String>() + c.as_str()).unwrap_or_default()
        }
        _ => w.to_string(),
    };
    match rng.gen_range(0..6) {
        0 => format!("{w}!!"),
        1 => format!("#{w}"),
        2 => format!("({w}),"),
        _ => w,
    }
}

pub fn utc(s: &str) -> DateTime<Utc> {
    DateTime::parse_from_rfc3339(s).unwrap().with_timezone(&Utc)
}

pub fn day(s: &str) -> NaiveDate {
    NaiveDate::parse_from_str(s, "%Y-%m-%d").unwrap()
}
