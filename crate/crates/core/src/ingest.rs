//! File-based replay of post corpora and daily case statistics.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fs::File;
use std::io::{self, BufRead, BufReader, Read};
use std::num::NonZeroUsize;
use std::path::Path;

use chrono::{DateTime, FixedOffset, NaiveDate, Utc};
use log::{debug, warn};
use serde::{Deserialize, Serialize};

use crate::geo::GeoPoint;
use crate::region::RegionId;

/// Hashtags tracked by default, before normalization.
pub const DEFAULT_HASHTAGS: [&str; 5] = ["CoronaVirus", "Covid-19", "India Fight Corona", "Covid", "Lockdown"];

/// Lowercases a hashtag and drops everything that is not alphanumeric, so
/// `#India Fight Corona`, `IndiaFightCorona` and `indiafightcorona` compare equal.
pub fn normalize_hashtag(tag: &str) -> String {
    tag.chars().filter(|c| c.is_alphanumeric()).flat_map(char::to_lowercase).collect()
}

/// Indian Standard Time, the default day boundary.
pub fn ist() -> FixedOffset {
    FixedOffset::east_opt(5 * 3600 + 30 * 60).unwrap()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Post {
    pub id: String,
    pub created_at: DateTime<Utc>,
    pub text: String,
    pub point: Option<GeoPoint>,
    /// Normalized hashtags.
    pub hashtags: BTreeSet<String>,
}

impl Post {
    pub fn local_date(&self, tz: FixedOffset) -> NaiveDate {
        self.created_at.with_timezone(&tz).date_naive()
    }
}

/// Wire format of one line of a post file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PostRecord {
    pub id: String,
    pub created_at: String,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lat: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lon: Option<f64>,
    #[serde(default)]
    pub hashtags: Vec<String>,
}

impl TryFrom<PostRecord> for Post {
    type Error = String;

    fn try_from(r: PostRecord) -> Result<Self, String> {
        if r.id.trim().is_empty() {
            return Err("empty id".into());
        }
        let created_at = DateTime::parse_from_rfc3339(&r.created_at)
            .map_err(|e| format!("created_at {:?}: {e}", r.created_at))?
            .with_timezone(&Utc);
        let point = match (r.lat, r.lon) {
            (Some(lat), Some(lon)) => Some(GeoPoint::new(lat, lon).map_err(|e| e.to_string())?),
            (None, None) => None,
            _ => return Err("lat and lon must both be present or both absent".into()),
        };
        let hashtags = r.hashtags.iter().map(|t| normalize_hashtag(t)).filter(|t| !t.is_empty()).collect();
        Ok(Post { id: r.id, created_at, text: r.text, point, hashtags })
    }
}

impl From<&Post> for PostRecord {
    fn from(p: &Post) -> Self {
        PostRecord {
            id: p.id.clone(),
            created_at: p.created_at.to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            text: p.text.clone(),
            lat: p.point.map(|g| g.lat()),
            lon: p.point.map(|g| g.lon()),
            hashtags: p.hashtags.iter().cloned().collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IngestConfig {
    tracked_hashtags: BTreeSet<String>,
    daily_cap: NonZeroUsize,
    per_state_cap: Option<NonZeroUsize>,
    day_boundary: FixedOffset,
}

impl Default for IngestConfig {
    fn default() -> Self {
        Self {
            tracked_hashtags: DEFAULT_HASHTAGS.iter().map(|t| normalize_hashtag(t)).collect(),
            daily_cap: NonZeroUsize::new(10_000).unwrap(),
            per_state_cap: None,
            day_boundary: ist(),
        }
    }
}

impl IngestConfig {
    pub fn with_hashtags<I, S>(mut self, tags: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        self.tracked_hashtags = tags.into_iter().map(|t| normalize_hashtag(t.as_ref())).collect();
        self
    }

    pub fn add_hashtag(mut self, tag: &str) -> Self {
        self.tracked_hashtags.insert(normalize_hashtag(tag));
        self
    }

    pub fn with_daily_cap(mut self, cap: NonZeroUsize) -> Self {
        self.daily_cap = cap;
        self
    }

    /// Optional per-state per-day cap, enforced after region resolution.
    pub fn with_per_state_cap(mut self, cap: Option<NonZeroUsize>) -> Self {
        self.per_state_cap = cap;
        self
    }

    pub fn with_day_boundary(mut self, tz: FixedOffset) -> Self {
        self.day_boundary = tz;
        self
    }

    pub fn tracked_hashtags(&self) -> &BTreeSet<String> {
        &self.tracked_hashtags
    }

    pub fn daily_cap(&self) -> usize {
        self.daily_cap.get()
    }

    pub fn per_state_cap(&self) -> Option<usize> {
        self.per_state_cap.map(NonZeroUsize::get)
    }

    pub fn day_boundary(&self) -> FixedOffset {
        self.day_boundary
    }

    pub fn is_tracked(&self, post: &Post) -> bool {
        post.hashtags.iter().any(|t| self.tracked_hashtags.contains(t))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct IngestStats {
    pub lines: usize,
    pub emitted: usize,
    pub malformed: usize,
    pub untracked: usize,
    pub over_cap: usize,
    pub duplicate_ids: usize,
}

/// Streaming reader over a line-delimited post file.
///
/// Yields tracked posts in file order, at most `daily_cap` per calendar day
/// in the configured timezone. Malformed lines are skipped and counted;
/// only I/O errors are surfaced.
pub struct PostReader<R> {
    lines: io::Lines<R>,
    cfg: IngestConfig,
    per_day: HashMap<NaiveDate, usize>,
    seen: HashSet<String>,
    stats: IngestStats,
}

impl<R: BufRead> PostReader<R> {
    pub fn new(source: R, cfg: IngestConfig) -> Self {
        Self {
            lines: source.lines(),
            cfg,
            per_day: HashMap::new(),
            seen: HashSet::new(),
            stats: IngestStats::default(),
        }
    }

    pub fn stats(&self) -> IngestStats {
        self.stats
    }

    fn accept(&mut self, line: &str) -> Option<Post> {
        let record: PostRecord = match serde_json::from_str(line) {
            Ok(r) => r,
            Err(e) => {
                debug!("line {}: {e}", self.stats.lines);
                self.stats.malformed += 1;
                return None;
            }
        };
        let post = match Post::try_from(record) {
            Ok(p) => p,
            Err(e) => {
                debug!("line {}: {e}", self.stats.lines);
                self.stats.malformed += 1;
                return None;
            }
        };
        if !self.cfg.is_tracked(&post) {
            self.stats.untracked += 1;
            return None;
        }
        if self.seen.contains(&post.id) {
            self.stats.duplicate_ids += 1;
            return None;
        }
        let day = post.local_date(self.cfg.day_boundary);
        let count = self.per_day.entry(day).or_default();
        if *count >= self.cfg.daily_cap() {
            self.stats.over_cap += 1;
            return None;
        }
        *count += 1;
        self.seen.insert(post.id.clone());
        self.stats.emitted += 1;
        Some(post)
    }
}

impl<R: BufRead> Iterator for PostReader<R> {
    type Item = io::Result<Post>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let line = match self.lines.next()? {
                Ok(l) => l,
                Err(e) if e.kind() == io::ErrorKind::InvalidData => {
                    self.stats.lines += 1;
                    self.stats.malformed += 1;
                    continue;
                }
                Err(e) => return Some(Err(e)),
            };
            self.stats.lines += 1;
            if line.trim().is_empty() {
                continue;
            }
            if let Some(post) = self.accept(&line) {
                return Some(Ok(post));
            }
        }
    }
}

/// Wraps `source` in a [`PostReader`].
pub fn ingest_posts<R: BufRead>(source: R, cfg: IngestConfig) -> PostReader<R> {
    PostReader::new(source, cfg)
}

#[derive(Debug, Clone)]
pub struct PostBatch {
    pub posts: Vec<Post>,
    pub stats: IngestStats,
}

/// Reads a whole post file. Fails only when the file cannot be read.
pub fn read_post_file(path: impl AsRef<Path>, cfg: &IngestConfig) -> io::Result<PostBatch> {
    let file = File::open(path)?;
    let mut reader = PostReader::new(BufReader::new(file), cfg.clone());
    let posts = reader.by_ref().collect::<io::Result<Vec<_>>>()?;
    if reader.stats().malformed > 0 {
        warn!("skipped {} malformed post lines", reader.stats().malformed);
    }
    Ok(PostBatch { posts, stats: reader.stats() })
}

/// Confirmed, recovered and deceased counts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CaseCounts {
    pub confirmed: u64,
    pub recovered: u64,
    pub deceased: u64,
}

impl std::ops::Add for CaseCounts {
    type Output = CaseCounts;

    fn add(self, o: CaseCounts) -> CaseCounts {
        CaseCounts {
            confirmed: self.confirmed + o.confirmed,
            recovered: self.recovered + o.recovered,
            deceased: self.deceased + o.deceased,
        }
    }
}

impl std::ops::AddAssign for CaseCounts {
    fn add_assign(&mut self, o: CaseCounts) {
        *self = *self + o;
    }
}

impl std::iter::Sum for CaseCounts {
    fn sum<I: Iterator<Item = CaseCounts>>(iter: I) -> Self {
        iter.fold(CaseCounts::default(), |a, b| a + b)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CovidDailyStats {
    pub region: RegionId,
    pub date: NaiveDate,
    #[serde(flatten)]
    pub counts: CaseCounts,
}

#[derive(Debug, Deserialize)]
struct CovidFile {
    records: Vec<CovidRecord>,
}

/// Wire format of one record of the daily-changes file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CovidRecord {
    pub date: String,
    pub state_code: String,
    pub confirmed: i64,
    pub recovered: i64,
    pub deceased: i64,
}

#[derive(Debug, thiserror::Error)]
pub enum CovidError {
    #[error("reading case data: {0}")]
    Io(#[from] io::Error),
    #[error("case data: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RejectedRecord {
    pub index: usize,
    pub reason: String,
}

#[derive(Debug, Clone, Default)]
pub struct CovidBatch {
    /// State records followed by national totals, sorted by (date, region).
    pub records: Vec<CovidDailyStats>,
    pub rejected: Vec<RejectedRecord>,
}

/// Parses the daily-changes JSON. One record per (state, date) is kept and a
/// national record summing the states is added for every date present.
/// Records with negative counts, unknown state codes, bad dates or repeated
/// keys are rejected with a diagnostic.
pub fn ingest_covid_stats<R: Read>(source: R) -> Result<CovidBatch, CovidError> {
    let file: CovidFile = serde_json::from_reader(source)?;
    let mut rejected = Vec::new();
    let mut by_key: BTreeMap<(NaiveDate, RegionId), CaseCounts> = BTreeMap::new();

    for (index, r) in file.records.into_iter().enumerate() {
        let mut reject = |reason: String| {
            warn!("case record {index}: {reason}");
            rejected.push(RejectedRecord { index, reason });
        };
        let Ok(date) = NaiveDate::parse_from_str(&r.date, "%Y-%m-%d") else {
            reject(format!("bad date {:?}", r.date));
            continue;
        };
        let Ok(region) = RegionId::state(&r.state_code) else {
            reject(format!("unknown state code {:?}", r.state_code));
            continue;
        };
        if r.confirmed < 0 || r.recovered < 0 || r.deceased < 0 {
            reject(format!(
                "negative count for {} on {date}: {}/{}/{}",
                r.state_code, r.confirmed, r.recovered, r.deceased
            ));
            continue;
        }
        let counts = CaseCounts {
            confirmed: r.confirmed as u64,
            recovered: r.recovered as u64,
            deceased: r.deceased as u64,
        };
        if by_key.contains_key(&(date, region.clone())) {
            reject(format!("duplicate record for {region} on {date}"));
            continue;
        }
        by_key.insert((date, region), counts);
    }

    let mut national: BTreeMap<NaiveDate, CaseCounts> = BTreeMap::new();
    for ((date, _), counts) in &by_key {
        *national.entry(*date).or_default() += *counts;
    }
    let nation = RegionId::nation();
    let mut records: Vec<CovidDailyStats> = by_key
        .into_iter()
        .map(|((date, region), counts)| CovidDailyStats { region, date, counts })
        .chain(national.into_iter().map(|(date, counts)| CovidDailyStats { region: nation.clone(), date, counts }))
        .collect();
    records.sort_by(|a, b| (a.date, &a.region).cmp(&(b.date, &b.region)));

    Ok(CovidBatch { records, rejected })
}

pub fn read_covid_file(path: impl AsRef<Path>) -> Result<CovidBatch, CovidError> {
    ingest_covid_stats(BufReader::new(File::open(path)?))
}
