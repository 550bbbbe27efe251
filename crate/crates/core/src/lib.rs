//! Emotion classification of geotagged posts, per-region daily aggregation,
//! an embedded store and the HTTP API that serves it.
//!
//! The pipeline is `ingest → preprocess → classify → resolve → aggregate →
//! store`. See [`pipeline::Pipeline`] for the batch entry point.

pub mod aggregate;
pub mod classify;
pub mod cli;
pub mod emotion;
pub mod geo;
pub mod ingest;
pub mod job;
pub mod lexicon;
pub mod pipeline;
pub mod preprocess;
pub mod region;
pub mod server;
pub mod store;

pub use aggregate::{aggregate_day, mood_summary, LabeledPost, MoodSummary, RegionDayAggregate};
pub use classify::{classify, label, score, Classifier, EmotionScores, RankNormalization};
pub use emotion::{EmotionCounts, EmotionLabel};
pub use geo::{load_boundaries, BoundaryError, BoundarySet, GeoPoint};
pub use ingest::{ingest_covid_stats, ingest_posts, CaseCounts, CovidDailyStats, IngestConfig, Post};
pub use lexicon::{load_lexicon, Lexicon, LexiconError};
pub use pipeline::{Pipeline, PipelineOutput};
pub use preprocess::{preprocess, Preprocessor, TokenList};
pub use region::RegionId;
pub use store::{Store, StoreError};
