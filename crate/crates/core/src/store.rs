//! Embedded record store keyed by (region, date).
//!
//! Readers see an immutable snapshot of the whole store; writers go through a
//! single commit path that builds the next state, persists it with a
//! write-then-rename, and only then publishes it. A failed or interrupted
//! commit leaves the previous file and in-memory state untouched.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::aggregate::{
    build_report, check_range, mood_summary, trend_series, MoodSummary, RangeError, RegionDayAggregate, Report, RowSumMismatch,
    TrendSeries,
};
use crate::emotion::EmotionLabel;
use crate::ingest::{CaseCounts, CovidDailyStats};
use crate::region::{RegionId, UnknownRegion};

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("not found: {0}")]
    NotFound(#[from] UnknownRegion),
    #[error(transparent)]
    Range(#[from] RangeError),
    #[error("rejected: {0}")]
    Invariant(#[from] RowSumMismatch),
    #[error("storage I/O: {0}")]
    Io(#[from] io::Error),
    #[error("corrupt store file: {0}")]
    Corrupt(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoreRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aggregate: Option<RegionDayAggregate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub covid: Option<CaseCounts>,
}

type Key = (RegionId, NaiveDate);

#[derive(Debug, Clone, Default)]
struct State {
    records: BTreeMap<Key, StoreRecord>,
    last_job_day: Option<NaiveDate>,
}

#[derive(Serialize, Deserialize)]
struct PersistedRecord {
    region: RegionId,
    date: NaiveDate,
    #[serde(flatten)]
    record: StoreRecord,
}

#[derive(Serialize, Deserialize)]
struct PersistedStore {
    version: u32,
    last_job_day: Option<NaiveDate>,
    records: Vec<PersistedRecord>,
}

/// Counts of keys touched by one upsert.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct UpsertReceipt {
    pub inserted: usize,
    pub updated: usize,
    /// Updated keys whose stored value actually changed.
    pub changed: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovidDay {
    pub date: NaiveDate,
    #[serde(flatten)]
    pub counts: CaseCounts,
}

/// Response for a region and date range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryResponse {
    pub region: RegionId,
    pub region_name: String,
    pub from: NaiveDate,
    pub to: NaiveDate,
    /// Posts analysed over the whole range.
    pub total_posts: u64,
    pub series: TrendSeries,
    pub summary: MoodSummary,
    pub covid: CaseCounts,
    pub covid_daily: Vec<CovidDay>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotEntry {
    pub region: RegionId,
    pub name: String,
    pub top_two: Vec<EmotionLabel>,
    pub total_posts: u64,
    pub confirmed: u64,
    /// confirmed / max confirmed across states that day, in [0, 1].
    pub intensity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub date: NaiveDate,
    pub states: Vec<SnapshotEntry>,
}

#[derive(Debug)]
pub struct Store {
    path: Option<PathBuf>,
    state: RwLock<Arc<State>>,
    writer: Mutex<()>,
}

impl Store {
    pub fn in_memory() -> Self {
        Self { path: None, state: RwLock::new(Arc::default()), writer: Mutex::new(()) }
    }

    /// Opens a file-backed store, creating an empty one if `path` is absent.
    pub fn open(path: impl Into<PathBuf>) -> Result<Self, StoreError> {
        let path = path.into();
        let state = match File::open(&path) {
            Ok(f) => {
                let persisted: PersistedStore = serde_json::from_reader(BufReader::new(f))?;
                let mut records = BTreeMap::new();
                for r in persisted.records {
                    if let Some(agg) = &r.record.aggregate {
                        agg.check()?;
                    }
                    records.insert((r.region, r.date), r.record);
                }
                State { records, last_job_day: persisted.last_job_day }
            }
            Err(e) if e.kind() == io::ErrorKind::NotFound => State::default(),
            Err(e) => return Err(e.into()),
        };
        Ok(Self { path: Some(path), state: RwLock::new(Arc::new(state)), writer: Mutex::new(()) })
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    fn current(&self) -> Arc<State> {
        self.state.read().unwrap_or_else(|e| e.into_inner()).clone()
    }

    fn persist(&self, state: &State) -> io::Result<()> {
        let Some(path) = &self.path else {
            return Ok(());
        };
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir)?;
        }
        let tmp = path.with_extension("json.tmp");
        let persisted = PersistedStore {
            version: 1,
            last_job_day: state.last_job_day,
            records: state
                .records
                .iter()
                .map(|((region, date), record)| PersistedRecord {
                    region: region.clone(),
                    date: *date,
                    record: record.clone(),
                })
                .collect(),
        };
        {
            let mut w = BufWriter::new(File::create(&tmp)?);
            serde_json::to_writer(&mut w, &persisted)?;
            w.flush()?;
            w.get_ref().sync_all()?;
        }
        fs::rename(&tmp, path)
    }

    /// Validates, applies, persists and publishes one batch. Nothing is
    /// visible or written unless every step succeeds.
    fn commit(
        &self,
        aggs: &[RegionDayAggregate],
        covid: &[CovidDailyStats],
        job_day: Option<NaiveDate>,
    ) -> Result<UpsertReceipt, StoreError> {
        for a in aggs {
            a.check()?;
        }
        let _guard = self.writer.lock().unwrap_or_else(|e| e.into_inner());
        let current = self.current();

        let mut staged: BTreeMap<Key, StoreRecord> = BTreeMap::new();
        for a in aggs {
            let key = (a.region.clone(), a.date);
            let rec = staged
                .entry(key.clone())
                .or_insert_with(|| current.records.get(&key).cloned().unwrap_or_default());
            rec.aggregate = Some(a.clone());
        }
        for c in covid {
            let key = (c.region.clone(), c.date);
            let rec = staged
                .entry(key.clone())
                .or_insert_with(|| current.records.get(&key).cloned().unwrap_or_default());
            rec.covid = Some(c.counts);
        }

        let mut receipt = UpsertReceipt::default();
        for (key, rec) in &staged {
            match current.records.get(key) {
                None => receipt.inserted += 1,
                Some(old) => {
                    receipt.updated += 1;
                    receipt.changed += usize::from(old != rec);
                }
            }
        }
        let job_changed = job_day.is_some() && job_day != current.last_job_day;
        if receipt.inserted == 0 && receipt.changed == 0 && !job_changed {
            return Ok(receipt);
        }

        let mut next = (*current).clone();
        next.records.extend(staged);
        if job_day.is_some() {
            next.last_job_day = job_day;
        }
        self.persist(&next)?;
        *self.state.write().unwrap_or_else(|e| e.into_inner()) = Arc::new(next);
        Ok(receipt)
    }

    /// Inserts or replaces aggregates and case counts, atomically per call.
    pub fn upsert_day(
        &self,
        aggs: &[RegionDayAggregate],
        covid: &[CovidDailyStats],
    ) -> Result<UpsertReceipt, StoreError> {
        self.commit(aggs, covid, None)
    }

    /// Same as [`Store::upsert_day`], also recording `day` as the last day
    /// completed by the daily job.
    pub fn commit_job_day(
        &self,
        day: NaiveDate,
        aggs: &[RegionDayAggregate],
        covid: &[CovidDailyStats],
    ) -> Result<UpsertReceipt, StoreError> {
        self.commit(aggs, covid, Some(day))
    }

    pub fn last_job_day(&self) -> Option<NaiveDate> {
        self.current().last_job_day
    }

    pub fn len(&self) -> usize {
        self.current().records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, region: &RegionId, date: NaiveDate) -> Option<StoreRecord> {
        self.current().records.get(&(region.clone(), date)).cloned()
    }

    /// Earliest and latest day with emotion data.
    pub fn data_range(&self) -> Option<(NaiveDate, NaiveDate)> {
        let state = self.current();
        let mut dates = state.records.iter().filter(|(_, r)| r.aggregate.is_some()).map(|((_, d), _)| *d);
        let first = dates.next()?;
        Some(dates.fold((first, first), |(lo, hi), d| (lo.min(d), hi.max(d))))
    }

    /// Empty when `from > to`.
    pub fn aggregates(&self, region: &RegionId, from: NaiveDate, to: NaiveDate) -> Vec<RegionDayAggregate> {
        if from > to {
            return Vec::new();
        }
        let state = self.current();
        state
            .records
            .range((region.clone(), from)..=(region.clone(), to))
            .filter_map(|(_, r)| r.aggregate.clone())
            .collect()
    }

    /// Empty when `from > to`.
    pub fn covid(&self, region: &RegionId, from: NaiveDate, to: NaiveDate) -> Vec<CovidDailyStats> {
        if from > to {
            return Vec::new();
        }
        let state = self.current();
        state
            .records
            .range((region.clone(), from)..=(region.clone(), to))
            .filter_map(|((region, date), r)| {
                r.covid.map(|counts| CovidDailyStats { region: region.clone(), date: *date, counts })
            })
            .collect()
    }

    /// Trend, range summary and case totals for a region code (`IN`, a
    /// state code, or a city name).
    pub fn query(&self, region: &str, from: NaiveDate, to: NaiveDate) -> Result<QueryResponse, StoreError> {
        let region = RegionId::parse(region)?;
        self.query_region(&region, from, to)
    }

    pub fn query_region(&self, region: &RegionId, from: NaiveDate, to: NaiveDate) -> Result<QueryResponse, StoreError> {
        check_range(from, to)?;
        let series = trend_series(&self.aggregates(region, from, to), region, from, to)?;
        let summary = mood_summary(region.clone(), &series.range_counts());
        let covid_daily: Vec<CovidDay> = self
            .covid(region, from, to)
            .into_iter()
            .map(|c| CovidDay { date: c.date, counts: c.counts })
            .collect();
        Ok(QueryResponse {
            region: region.clone(),
            region_name: region.display_name().to_string(),
            from,
            to,
            total_posts: series.total_posts,
            covid: covid_daily.iter().map(|c| c.counts).sum(),
            covid_daily,
            summary,
            series,
        })
    }

    pub fn report(&self, region: &RegionId, from: NaiveDate, to: NaiveDate) -> Result<Report, StoreError> {
        check_range(from, to)?;
        Ok(build_report(
            region,
            from,
            to,
            &self.aggregates(region, from, to),
            &self.covid(region, from, to),
        )?)
    }

    /// Map state for one day: all 33 states, zero-filled where absent.
    pub fn snapshot(&self, date: NaiveDate) -> Snapshot {
        let state = self.current();
        let mut entries: Vec<SnapshotEntry> = RegionId::all_states()
            .map(|region| {
                let rec = state.records.get(&(region.clone(), date));
                let counts = rec.and_then(|r| r.aggregate.as_ref()).map(|a| a.counts).unwrap_or_default();
                let confirmed = rec.and_then(|r| r.covid).map(|c| c.confirmed).unwrap_or(0);
                SnapshotEntry {
                    name: region.display_name().to_string(),
                    top_two: mood_summary(region.clone(), &counts).top_two,
                    total_posts: counts.total(),
                    confirmed,
                    intensity: 0.0,
                    region,
                }
            })
            .collect();
        let max = entries.iter().map(|e| e.confirmed).max().unwrap_or(0);
        if max > 0 {
            for e in &mut entries {
                e.intensity = e.confirmed as f64 / max as f64;
            }
        }
        Snapshot { date, states: entries }
    }
}
