//! The daily refresh job and its schedule.
//!
//! Each run processes the previous local day: it reads
//! `<data_dir>/incoming/posts-YYYY-MM-DD.jsonl` and
//! `<data_dir>/incoming/covid-YYYY-MM-DD.json`, runs the pipeline and commits
//! the result together with the job marker in one store transaction.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use chrono::{DateTime, Duration, FixedOffset, NaiveDate, NaiveTime, TimeZone, Utc};
use serde::Serialize;

use crate::ingest::{read_covid_file, read_post_file, IngestStats};
use crate::pipeline::Pipeline;
use crate::store::{Store, UpsertReceipt};

/// A daily wall-clock time at a fixed UTC offset, written `HH:MM+HH:MM`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Schedule {
    time: NaiveTime,
    offset: FixedOffset,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid schedule {0:?}, expected HH:MM+HH:MM (e.g. 16:00+05:30)")]
pub struct ScheduleError(String);

impl Default for Schedule {
    fn default() -> Self {
        Self {
            time: NaiveTime::from_hms_opt(16, 0, 0).unwrap(),
            offset: crate::ingest::ist(),
        }
    }
}

impl Schedule {
    pub fn new(time: NaiveTime, offset: FixedOffset) -> Self {
        Self { time, offset }
    }

    pub fn offset(&self) -> FixedOffset {
        self.offset
    }

    /// First firing strictly after `now`.
    pub fn next_after(&self, now: DateTime<Utc>) -> DateTime<Utc> {
        let local_day = now.with_timezone(&self.offset).date_naive();
        let at = |day: NaiveDate| {
            self.offset
                .from_local_datetime(&day.and_time(self.time))
                .single()
                .expect("fixed offsets are unambiguous")
                .with_timezone(&Utc)
        };
        let today = at(local_day);
        if today > now {
            today
        } else {
            at(local_day + Duration::days(1))
        }
    }
}

impl FromStr for Schedule {
    type Err = ScheduleError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ScheduleError(s.to_string());
        let split = s.find(['+', '-']).ok_or_else(err)?;
        let (time, offset) = s.split_at(split);
        let time = NaiveTime::parse_from_str(time.trim(), "%H:%M").map_err(|_| err())?;
        let sign = if offset.starts_with('-') { -1 } else { 1 };
        let (h, m) = offset[1..].split_once(':').ok_or_else(err)?;
        if h.len() != 2 || m.len() != 2 {
            return Err(err());
        }
        let (h, m): (i32, i32) = (h.parse().map_err(|_| err())?, m.parse().map_err(|_| err())?);
        if h > 14 || m >= 60 {
            return Err(err());
        }
        let offset = FixedOffset::east_opt(sign * (h * 3600 + m * 60)).ok_or_else(err)?;
        Ok(Schedule { time, offset })
    }
}

impl fmt::Display for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.time.format("%H:%M"), self.offset)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum JobReport {
    Completed {
        day: NaiveDate,
        receipt: UpsertReceipt,
        ingest: IngestStats,
        covid_rejected: usize,
    },
    Skipped {
        day: NaiveDate,
        reason: String,
    },
    Failed {
        day: NaiveDate,
        error: String,
    },
}

impl JobReport {
    pub fn day(&self) -> NaiveDate {
        match self {
            JobReport::Completed { day, .. } | JobReport::Skipped { day, .. } | JobReport::Failed { day, .. } => *day,
        }
    }
}

impl fmt::Display for JobReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            JobReport::Completed { day, receipt, ingest, .. } => write!(
                f,
                "completed {day}: {} posts, inserted {}, updated {}",
                ingest.emitted, receipt.inserted, receipt.updated
            ),
            JobReport::Skipped { day, reason } => write!(f, "skipped {day}: {reason}"),
            JobReport::Failed { day, error } => write!(f, "failed {day}: {error}"),
        }
    }
}

pub fn posts_file(data_dir: &Path, day: NaiveDate) -> PathBuf {
    data_dir.join("incoming").join(format!("posts-{day}.jsonl"))
}

pub fn covid_file(data_dir: &Path, day: NaiveDate) -> PathBuf {
    data_dir.join("incoming").join(format!("covid-{day}.json"))
}

/// Processes the day before `now` (in the pipeline's day-boundary timezone).
///
/// The job is strict where manual ingestion is lenient: a missing input file
/// or any malformed post line fails the run and leaves the store untouched.
pub fn run_daily_job(now: DateTime<Utc>, data_dir: &Path, pipeline: &Pipeline, store: &Store) -> JobReport {
    let tz = pipeline.config().day_boundary();
    let day = now.with_timezone(&tz).date_naive() - Duration::days(1);
    if store.last_job_day().is_some_and(|last| last >= day) {
        return JobReport::Skipped { day, reason: "up-to-date".into() };
    }
    let fail = |error: String| {
        log::error!("daily job for {day} failed: {error}");
        JobReport::Failed { day, error }
    };

    let posts_path = posts_file(data_dir, day);
    let covid_path = covid_file(data_dir, day);
    for p in [&posts_path, &covid_path] {
        if !p.is_file() {
            return fail(format!("missing input file {}", p.display()));
        }
    }
    let batch = match read_post_file(&posts_path, pipeline.config()) {
        Ok(b) => b,
        Err(e) => return fail(format!("{}: {e}", posts_path.display())),
    };
    if batch.stats.malformed > 0 {
        return fail(format!("{}: {} malformed lines", posts_path.display(), batch.stats.malformed));
    }
    let covid = match read_covid_file(&covid_path) {
        Ok(c) => c,
        Err(e) => return fail(format!("{}: {e}", covid_path.display())),
    };

    let posts: Vec<_> = batch.posts.into_iter().filter(|p| p.local_date(tz) == day).collect();
    let out = pipeline.run(posts);
    let covid_day: Vec<_> = covid.records.into_iter().filter(|c| c.date == day).collect();
    match store.commit_job_day(day, &out.aggregates, &covid_day) {
        Ok(receipt) => JobReport::Completed {
            day,
            receipt,
            ingest: batch.stats,
            covid_rejected: covid.rejected.len(),
        },
        Err(e) => fail(e.to_string()),
    }
}
