//! ingest → classify → resolve → aggregate, over a whole post batch.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use chrono::NaiveDate;
use rayon::prelude::*;
use serde::Serialize;

use crate::aggregate::{aggregate_day, LabeledPost, RegionDayAggregate};
use crate::classify::Classifier;
use crate::emotion::EmotionCounts;
use crate::geo::BoundarySet;
use crate::ingest::{IngestConfig, Post};
use crate::region::RegionId;

#[derive(Debug, Clone)]
pub struct Pipeline {
    classifier: Classifier,
    boundaries: Arc<BoundarySet>,
    config: IngestConfig,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct PipelineOutput {
    /// Aggregates for every day present, ordered by date then region order.
    #[serde(skip)]
    pub aggregates: Vec<RegionDayAggregate>,
    pub posts: usize,
    pub unresolved: usize,
    pub over_state_cap: usize,
    pub national: EmotionCounts,
}

impl Pipeline {
    pub fn new(classifier: Classifier, boundaries: Arc<BoundarySet>, config: IngestConfig) -> Self {
        Self { classifier, boundaries, config }
    }

    pub fn classifier(&self) -> &Classifier {
        &self.classifier
    }

    pub fn boundaries(&self) -> &BoundarySet {
        &self.boundaries
    }

    pub fn config(&self) -> &IngestConfig {
        &self.config
    }

    /// Classifies and places posts. Runs in parallel; output order matches input.
    pub fn label_posts(&self, posts: Vec<Post>) -> Vec<LabeledPost> {
        posts
            .into_par_iter()
            .map(|post| {
                let (label, _) = self.classifier.classify(&post.text);
                let (state, city) = match &post.point {
                    Some(p) => (self.boundaries.resolve_state(p), self.boundaries.resolve_city(p)),
                    None => (None, None),
                };
                LabeledPost { post, label, state, city }
            })
            .collect()
    }

    /// Applies the optional per-state daily cap in input order. Posts without
    /// a state are not capped.
    fn apply_state_cap(&self, labeled: Vec<LabeledPost>) -> (Vec<LabeledPost>, usize) {
        let Some(cap) = self.config.per_state_cap() else {
            return (labeled, 0);
        };
        let tz = self.config.day_boundary();
        let mut seen: HashMap<(RegionId, NaiveDate), usize> = HashMap::new();
        let mut dropped = 0;
        let kept = labeled
            .into_iter()
            .filter(|lp| match &lp.state {
                Some(s) => {
                    let n = seen.entry((s.clone(), lp.post.local_date(tz))).or_default();
                    *n += 1;
                    let keep = *n <= cap;
                    dropped += usize::from(!keep);
                    keep
                }
                None => true,
            })
            .collect();
        (kept, dropped)
    }

    pub fn run(&self, posts: Vec<Post>) -> PipelineOutput {
        let count = posts.len();
        let (labeled, over_state_cap) = self.apply_state_cap(self.label_posts(posts));
        let unresolved = labeled.iter().filter(|lp| lp.state.is_none()).count();

        let tz = self.config.day_boundary();
        let mut by_day: BTreeMap<NaiveDate, Vec<LabeledPost>> = BTreeMap::new();
        for lp in labeled {
            by_day.entry(lp.post.local_date(tz)).or_default().push(lp);
        }
        let mut aggregates = Vec::new();
        for (day, group) in &by_day {
            aggregates.extend(aggregate_day(group, *day, tz).aggregates);
        }
        let national = aggregates
            .iter()
            .filter(|a| a.region == RegionId::nation())
            .map(|a| a.counts)
            .sum();
        PipelineOutput { aggregates, posts: count - over_state_cap, unresolved, over_state_cap, national }
    }
}
