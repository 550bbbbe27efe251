//! The `mood` command line.
//!
//! Exit codes: 0 on success, 1 on a fatal error, 2 on a usage error.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::net::SocketAddr;
use std::num::NonZeroUsize;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use chrono::{DateTime, NaiveDate, Utc};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::aggregate::{bundled_events, load_events, write_report_csv, TriggerEvent};
use crate::classify::Classifier;
use crate::emotion::EmotionLabel;
use crate::geo::BoundarySet;
use crate::ingest::{read_covid_file, read_post_file, IngestConfig};
use crate::job::{run_daily_job, JobReport, Schedule};
use crate::lexicon::Lexicon;
use crate::pipeline::Pipeline;
use crate::region::RegionId;
use crate::server::{router, spawn_scheduler, AppState};
use crate::store::Store;

type Result<T> = std::result::Result<T, Box<dyn std::error::Error + Send + Sync>>;

#[derive(Debug, Parser)]
#[command(name = "mood", version, about = "Emotion trends of geotagged posts by region and day")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Global {
    /// HTTP port for `serve`.
    #[arg(long, global = true, env = "MOOD_PORT", default_value_t = 8080)]
    pub port: u16,
    /// Directory holding store.json and incoming/ job inputs.
    #[arg(long, global = true, env = "MOOD_DATA_DIR", default_value = "mood-data")]
    pub data_dir: PathBuf,
    /// Emotion lexicon CSV (optionally gzipped). Defaults to the bundled sample.
    #[arg(long, global = true, env = "MOOD_LEXICON")]
    pub lexicon: Option<PathBuf>,
    /// State boundary GeoJSON. Must be given together with --cities.
    #[arg(long, global = true, env = "MOOD_BOUNDARIES", requires = "cities")]
    pub boundaries: Option<PathBuf>,
    /// City centers CSV. Must be given together with --boundaries.
    #[arg(long, global = true, env = "MOOD_CITIES", requires = "boundaries")]
    pub cities: Option<PathBuf>,
    /// Daily job time, `HH:MM+HH:MM`.
    #[arg(long, global = true, env = "MOOD_SCHEDULE", default_value = "16:00+05:30")]
    pub schedule: String,
    /// Trigger events JSON. Defaults to the bundled list.
    #[arg(long, global = true, env = "MOOD_EVENTS")]
    pub events: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Replay a post file and a case-statistics file into the store.
    Ingest {
        posts: PathBuf,
        covid: PathBuf,
        /// Posts kept per day.
        #[arg(long, default_value = "10000")]
        cap: NonZeroUsize,
        /// Posts kept per state per day.
        #[arg(long)]
        per_state_cap: Option<NonZeroUsize>,
        /// Extra tracked hashtag; repeatable.
        #[arg(long = "hashtag")]
        hashtags: Vec<String>,
    },
    /// Classify one text and print its label and per-emotion scores.
    Classify { text: String },
    /// Serve the HTTP API and run the daily job on schedule.
    Serve {
        #[arg(long, default_value = "0.0.0.0")]
        host: std::net::IpAddr,
        /// Serve static files (the web client) from this directory.
        #[arg(long)]
        static_dir: Option<PathBuf>,
        /// Bearer token for POST /api/admin/ingest. Unset disables the endpoint.
        #[arg(long, env = "MOOD_ADMIN_TOKEN", hide_env_values = true)]
        admin_token: Option<String>,
        #[arg(long)]
        no_scheduler: bool,
    },
    /// Write a region report for a date range as JSON and CSV.
    Report {
        #[arg(long, default_value = "IN")]
        region: String,
        #[arg(long)]
        from: NaiveDate,
        #[arg(long)]
        to: NaiveDate,
        /// Output stem; writes `<out>.json` and `<out>.csv`. Prints JSON to stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the per-state map snapshot for one day.
    Snapshot { date: NaiveDate },
    /// Run the daily job once, as if at `--now`.
    Job {
        #[arg(long)]
        now: Option<DateTime<Utc>>,
    },
}

impl Global {
    /// Parsed at use so a bad value is a fatal error (exit 1), not a usage error.
    pub fn schedule(&self) -> Result<Schedule> {
        Ok(self.schedule.parse::<Schedule>()?)
    }

    pub fn store_path(&self) -> PathBuf {
        self.data_dir.join("store.json")
    }

    pub fn open_store(&self) -> Result<Store> {
        Ok(Store::open(self.store_path())?)
    }

    pub fn classifier(&self) -> Result<Classifier> {
        let lexicon = match &self.lexicon {
            Some(p) => Lexicon::from_path(p).map_err(|e| format!("{}: {e}", p.display()))?,
            None => Lexicon::bundled_sample(),
        };
        Ok(Classifier::with_lexicon(lexicon))
    }

    pub fn boundary_set(&self) -> Result<BoundarySet> {
        match (&self.boundaries, &self.cities) {
            (Some(b), Some(c)) => Ok(BoundarySet::from_paths(b, c)?),
            _ => Ok(BoundarySet::bundled()),
        }
    }

    pub fn pipeline(&self, cfg: IngestConfig) -> Result<Pipeline> {
        Ok(Pipeline::new(self.classifier()?, Arc::new(self.boundary_set()?), cfg))
    }

    pub fn trigger_events(&self) -> Result<Vec<TriggerEvent>> {
        match &self.events {
            Some(p) => Ok(load_events(File::open(p)?).map_err(|e| format!("{}: {e}", p.display()))?),
            None => Ok(bundled_events()),
        }
    }
}

fn ingest(
    g: &Global,
    posts: &Path,
    covid: &Path,
    cap: NonZeroUsize,
    per_state_cap: Option<NonZeroUsize>,
    hashtags: &[String],
) -> Result<()> {
    let mut cfg = IngestConfig::default().with_daily_cap(cap).with_per_state_cap(per_state_cap);
    for tag in hashtags {
        cfg = cfg.add_hashtag(tag);
    }
    let pipeline = g.pipeline(cfg)?;
    let store = g.open_store()?;
    let batch = read_post_file(posts, pipeline.config()).map_err(|e| format!("{}: {e}", posts.display()))?;
    let covid = read_covid_file(covid).map_err(|e| format!("{}: {e}", covid.display()))?;
    for r in &covid.rejected {
        log::warn!("covid record {} rejected: {}", r.index, r.reason);
    }
    let out = pipeline.run(batch.posts);
    let receipt = store.upsert_day(&out.aggregates, &covid.records)?;
    let summary = json!({
        "ingest": batch.stats,
        "pipeline": out,
        "covid_records": covid.records.len(),
        "covid_rejected": covid.rejected.len(),
        "receipt": receipt,
    });
    println!("{}", serde_json::to_string_pretty(&summary)?);
    Ok(())
}

fn classify(g: &Global, text: &str) -> Result<()> {
    let (label, scores) = g.classifier()?.classify(text);
    let mut out = io::stdout().lock();
    writeln!(out, "{}", label.name())?;
    for e in EmotionLabel::BASIC {
        let (m, n) = scores.ratio(e);
        writeln!(out, "{:<9} {m}/{n} {:.4}", e.name(), scores.score(e))?;
    }
    Ok(())
}

async fn serve(g: &Global, host: std::net::IpAddr, static_dir: Option<PathBuf>, admin_token: Option<String>, no_scheduler: bool) -> Result<()> {
    let schedule = g.schedule()?;
    let store = Arc::new(g.open_store()?);
    let pipeline = Arc::new(g.pipeline(IngestConfig::default())?);
    let state = AppState {
        store: store.clone(),
        pipeline: pipeline.clone(),
        events: Arc::new(g.trigger_events()?),
        admin_token,
    };
    let listener = tokio::net::TcpListener::bind(SocketAddr::new(host, g.port)).await?;
    println!("listening on http://{}", listener.local_addr()?);
    let scheduler = (!no_scheduler).then(|| spawn_scheduler(schedule, g.data_dir.clone(), pipeline, store));
    axum::serve(listener, router(state, static_dir))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    if let Some(s) = scheduler {
        s.abort();
    }
    Ok(())
}

fn report(g: &Global, region: &str, from: NaiveDate, to: NaiveDate, out: Option<&Path>) -> Result<()> {
    let region = RegionId::parse(region)?;
    let report = g.open_store()?.report(&region, from, to)?;
    match out {
        None => println!("{}", serde_json::to_string_pretty(&report)?),
        Some(stem) => {
            let json_path = stem.with_extension("json");
            let csv_path = stem.with_extension("csv");
            serde_json::to_writer_pretty(BufWriter::new(File::create(&json_path)?), &report)?;
            write_report_csv(BufWriter::new(File::create(&csv_path)?), &report)?;
            println!("wrote {} and {}", json_path.display(), csv_path.display());
        }
    }
    Ok(())
}

fn job(g: &Global, now: Option<DateTime<Utc>>) -> Result<()> {
    let store = g.open_store()?;
    let pipeline = g.pipeline(IngestConfig::default())?;
    let report = run_daily_job(now.unwrap_or_else(Utc::now), &g.data_dir, &pipeline, &store);
    println!("{}", serde_json::to_string(&report)?);
    match report {
        JobReport::Failed { error, .. } => Err(error.into()),
        _ => Ok(()),
    }
}

pub fn run(cli: Cli) -> Result<()> {
    let g = &cli.global;
    match cli.command {
        Command::Ingest { posts, covid, cap, per_state_cap, hashtags } => {
            ingest(g, &posts, &covid, cap, per_state_cap, &hashtags)
        }
        Command::Classify { text } => classify(g, &text),
        Command::Serve { host, static_dir, admin_token, no_scheduler } => tokio::runtime::Builder::new_multi_thread()
            .enable_all()
            .build()?
            .block_on(serve(g, host, static_dir, admin_token, no_scheduler)),
        Command::Report { region, from, to, out } => report(g, &region, from, to, out.as_deref()),
        Command::Snapshot { date } => {
            println!("{}", serde_json::to_string_pretty(&g.open_store()?.snapshot(date))?);
            Ok(())
        }
        Command::Job { now } => job(g, now),
    }
}

/// Parses arguments from the process environment and runs.
pub fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    // clap exits with 2 on usage errors.
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
