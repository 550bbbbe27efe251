//! Per-region per-day emotion rollups, summaries, trends and reports.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use chrono::{FixedOffset, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::emotion::{EmotionCounts, EmotionLabel};
use crate::ingest::{CaseCounts, CovidDailyStats, Post};
use crate::region::{RegionId, RegionKind};

/// A classified post with its resolved placement.
#[derive(Debug, Clone)]
pub struct LabeledPost {
    pub post: Post,
    pub label: EmotionLabel,
    /// `None` when the coordinates fall in no served state.
    pub state: Option<RegionId>,
    pub city: Option<RegionId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegionDayAggregate {
    pub region: RegionId,
    pub date: NaiveDate,
    pub counts: EmotionCounts,
    pub total: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{region} {date}: total {total} != sum of counts {sum}")]
pub struct RowSumMismatch {
    pub region: RegionId,
    pub date: NaiveDate,
    pub total: u64,
    pub sum: u64,
}

impl RegionDayAggregate {
    pub fn new(region: RegionId, date: NaiveDate, counts: EmotionCounts) -> Self {
        Self { region, date, total: counts.total(), counts }
    }

    pub fn check(&self) -> Result<(), RowSumMismatch> {
        let sum = self.counts.total();
        if sum == self.total {
            Ok(())
        } else {
            Err(RowSumMismatch { region: self.region.clone(), date: self.date, total: self.total, sum })
        }
    }

    /// Sums counts of two aggregates for the same region and day.
    pub fn merge(&self, other: &RegionDayAggregate) -> RegionDayAggregate {
        debug_assert_eq!((&self.region, self.date), (&other.region, other.date));
        RegionDayAggregate {
            region: self.region.clone(),
            date: self.date,
            counts: self.counts + other.counts,
            total: self.total + other.total,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DateMismatch {
    pub post_id: String,
    pub expected: NaiveDate,
    pub actual: NaiveDate,
}

#[derive(Debug, Clone, Default)]
pub struct DayAggregation {
    /// States in reporting order, then cities, then the nation.
    pub aggregates: Vec<RegionDayAggregate>,
    pub rejected: Vec<DateMismatch>,
}

/// Groups one day's labeled posts by region.
///
/// Produces an aggregate for every state and city present and a nation
/// aggregate over all accepted posts, including those with no resolved state.
/// Posts whose local date (in `tz`) differs from `date` are rejected.
pub fn aggregate_day(labeled: &[LabeledPost], date: NaiveDate, tz: FixedOffset) -> DayAggregation {
    let mut rejected = Vec::new();
    let mut by_region: BTreeMap<RegionId, EmotionCounts> = BTreeMap::new();
    let mut nation = EmotionCounts::zero();
    let mut any = false;

    for lp in labeled {
        let actual = lp.post.local_date(tz);
        if actual != date {
            log::warn!("post {} falls on {actual}, not {date}", lp.post.id);
            rejected.push(DateMismatch { post_id: lp.post.id.clone(), expected: date, actual });
            continue;
        }
        any = true;
        nation.increment(lp.label);
        for region in lp.state.iter().chain(lp.city.iter()) {
            by_region.entry(region.clone()).or_default().increment(lp.label);
        }
    }

    let mut aggregates: Vec<RegionDayAggregate> = RegionId::all_states()
        .chain(RegionId::all_cities())
        .filter_map(|r| by_region.remove(&r).map(|c| RegionDayAggregate::new(r, date, c)))
        .collect();
    if any {
        aggregates.push(RegionDayAggregate::new(RegionId::nation(), date, nation));
    }
    DayAggregation { aggregates, rejected }
}

/// Fraction of posts per label.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Percentages([f64; 7]);

impl Percentages {
    pub fn get(&self, label: EmotionLabel) -> f64 {
        self.0[label.index()]
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }
}

impl Serialize for Percentages {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut map = serializer.serialize_map(Some(7))?;
        for e in EmotionLabel::ALL {
            map.serialize_entry(e.name(), &self.0[e.index()])?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for Percentages {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let map = BTreeMap::<String, f64>::deserialize(deserializer)?;
        let mut out = [0.0; 7];
        for (k, v) in map {
            let label: EmotionLabel = k.parse().map_err(serde::de::Error::custom)?;
            out[label.index()] = v;
        }
        Ok(Percentages(out))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MoodSummary {
    pub region: RegionId,
    /// Up to two labels with the largest non-zero counts.
    pub top_two: Vec<EmotionLabel>,
    pub percentages: Percentages,
    pub total: u64,
}

/// Top two emotions and per-label shares. Ties go to canonical order
/// (Anger … Surprise, Neutral last); labels with zero posts never appear.
pub fn mood_summary(region: RegionId, counts: &EmotionCounts) -> MoodSummary {
    let total = counts.total();
    let mut ranked: Vec<(EmotionLabel, u64)> = counts.iter().filter(|(_, c)| *c > 0).collect();
    // Stable sort keeps canonical order among equal counts.
    ranked.sort_by_key(|(_, c)| std::cmp::Reverse(*c));
    let top_two = ranked.into_iter().take(2).map(|(e, _)| e).collect();

    let mut shares = [0.0; 7];
    if total > 0 {
        for (e, c) in counts.iter() {
            shares[e.index()] = c as f64 / total as f64;
        }
    }
    MoodSummary { region, top_two, percentages: Percentages(shares), total }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrendPoint {
    pub date: NaiveDate,
    pub counts: EmotionCounts,
    pub total: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrendSeries {
    pub region: RegionId,
    pub from: NaiveDate,
    pub to: NaiveDate,
    pub points: Vec<TrendPoint>,
    pub total_posts: u64,
}

impl TrendSeries {
    pub fn range_counts(&self) -> EmotionCounts {
        self.points.iter().map(|p| p.counts).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid date range: {from} is after {to}")]
pub struct RangeError {
    pub from: NaiveDate,
    pub to: NaiveDate,
}

pub fn check_range(from: NaiveDate, to: NaiveDate) -> Result<(), RangeError> {
    if from > to {
        Err(RangeError { from, to })
    } else {
        Ok(())
    }
}

pub fn days(from: NaiveDate, to: NaiveDate) -> impl Iterator<Item = NaiveDate> {
    from.iter_days().take_while(move |d| *d <= to)
}

/// One point per day in `[from, to]`, zero-filled where `aggs` has no row
/// for `region`. Multiple rows for the same day are summed.
pub fn trend_series(
    aggs: &[RegionDayAggregate],
    region: &RegionId,
    from: NaiveDate,
    to: NaiveDate,
) -> Result<TrendSeries, RangeError> {
    check_range(from, to)?;
    let mut by_day: BTreeMap<NaiveDate, EmotionCounts> = BTreeMap::new();
    for a in aggs.iter().filter(|a| &a.region == region && a.date >= from && a.date <= to) {
        *by_day.entry(a.date).or_default() += a.counts;
    }
    let points: Vec<TrendPoint> = days(from, to)
        .map(|date| {
            let counts = by_day.get(&date).copied().unwrap_or_default();
            TrendPoint { date, total: counts.total(), counts }
        })
        .collect();
    let total_posts = points.iter().map(|p| p.total).sum();
    Ok(TrendSeries { region: region.clone(), from, to, points, total_posts })
}

/// A named national event shown as a selectable date.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TriggerEvent {
    pub name: String,
    pub date: NaiveDate,
}

#[derive(Deserialize)]
struct EventsFile {
    events: Vec<TriggerEvent>,
}

pub fn load_events<R: Read>(source: R) -> serde_json::Result<Vec<TriggerEvent>> {
    let file: EventsFile = serde_json::from_reader(source)?;
    Ok(file.events)
}

pub fn bundled_events() -> Vec<TriggerEvent> {
    load_events(include_str!("../data/events.json").as_bytes()).expect("bundled events are valid")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDay {
    pub date: NaiveDate,
    pub counts: EmotionCounts,
    pub total: u64,
    pub summary: MoodSummary,
    pub covid: CaseCounts,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportTotals {
    pub counts: EmotionCounts,
    pub total: u64,
    pub summary: MoodSummary,
    pub covid: CaseCounts,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub region: RegionId,
    pub region_name: String,
    pub from: NaiveDate,
    pub to: NaiveDate,
    pub days: Vec<ReportDay>,
    pub totals: ReportTotals,
}

/// Case counts for `region` per day. Cities have no case data of their own.
fn covid_by_day(covid: &[CovidDailyStats], region: &RegionId) -> BTreeMap<NaiveDate, CaseCounts> {
    let mut out = BTreeMap::new();
    if region.kind() == RegionKind::City {
        return out;
    }
    for c in covid.iter().filter(|c| &c.region == region) {
        *out.entry(c.date).or_default() += c.counts;
    }
    out
}

/// Day-by-day emotion counts, summaries and case statistics for a range.
/// A region with no data yields a zero-filled report.
pub fn build_report(
    region: &RegionId,
    from: NaiveDate,
    to: NaiveDate,
    aggs: &[RegionDayAggregate],
    covid: &[CovidDailyStats],
) -> Result<Report, RangeError> {
    let series = trend_series(aggs, region, from, to)?;
    let cases = covid_by_day(covid, region);
    let days: Vec<ReportDay> = series
        .points
        .iter()
        .map(|p| ReportDay {
            date: p.date,
            counts: p.counts,
            total: p.total,
            summary: mood_summary(region.clone(), &p.counts),
            covid: cases.get(&p.date).copied().unwrap_or_default(),
        })
        .collect();
    let counts = series.range_counts();
    let totals = ReportTotals {
        counts,
        total: counts.total(),
        summary: mood_summary(region.clone(), &counts),
        covid: days.iter().map(|d| d.covid).sum(),
    };
    Ok(Report {
        region: region.clone(),
        region_name: region.display_name().to_string(),
        from,
        to,
        days,
        totals,
    })
}

const CSV_LABELS: [EmotionLabel; 7] = EmotionLabel::ALL;

/// Writes `region,date,A,D,F,H,SA,S,N,total` rows.
pub fn write_aggregates_csv<W: Write>(out: W, aggs: &[RegionDayAggregate]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["region", "date"];
    header.extend(CSV_LABELS.iter().map(|e| e.code()));
    header.push("total");
    w.write_record(&header)?;
    for a in aggs {
        let mut row = vec![a.region.to_string(), a.date.to_string()];
        row.extend(CSV_LABELS.iter().map(|e| a.counts[*e].to_string()));
        row.push(a.total.to_string());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, thiserror::Error)]
pub enum CsvImportError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("line {line}: {message}")]
    Row { line: u64, message: String },
}

pub fn read_aggregates_csv<R: Read>(source: R) -> Result<Vec<RegionDayAggregate>, CsvImportError> {
    let mut r = csv::Reader::from_reader(source);
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        let err = |message: String| CsvImportError::Row { line, message };
        if rec.len() != 10 {
            return Err(err(format!("expected 10 fields, found {}", rec.len())));
        }
        let region = RegionId::parse(&rec[0]).map_err(|e| err(e.to_string()))?;
        let date = NaiveDate::parse_from_str(&rec[1], "%Y-%m-%d").map_err(|e| err(e.to_string()))?;
        let mut nums = [0u64; 8];
        for (i, n) in nums.iter_mut().enumerate() {
            *n = rec[i + 2].parse().map_err(|e| err(format!("field {}: {e}", i + 3)))?;
        }
        let mut counts = EmotionCounts::zero();
        for (i, e) in CSV_LABELS.iter().enumerate() {
            counts[*e] = nums[i];
        }
        out.push(RegionDayAggregate { region, date, counts, total: nums[7] });
    }
    Ok(out)
}

/// Writes one row per report day plus a trailing `total` row.
pub fn write_report_csv<W: Write>(out: W, report: &Report) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["date"];
    header.extend(CSV_LABELS.iter().map(|e| e.code()));
    header.extend(["total", "confirmed", "recovered", "deceased"]);
    w.write_record(&header)?;
    let row = |label: String, counts: &EmotionCounts, total: u64, covid: &CaseCounts| {
        let mut row = vec![label];
        row.extend(CSV_LABELS.iter().map(|e| counts[*e].to_string()));
        row.extend([total, covid.confirmed, covid.recovered, covid.deceased].map(|n| n.to_string()));
        row
    };
    for d in &report.days {
        w.write_record(row(d.date.to_string(), &d.counts, d.total, &d.covid))?;
    }
    let t = &report.totals;
    w.write_record(row("total".into(), &t.counts, t.total, &t.covid))?;
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::ist;
    use chrono::{TimeZone, Utc};
    use proptest::prelude::*;
    use std::collections::BTreeSet;
    use EmotionLabel::*;

    fn d(s: &str) -> NaiveDate {
        NaiveDate::parse_from_str(s, "%Y-%m-%d").unwrap()
    }

    fn post(id: &str, hour_utc: u32) -> Post {
        Post {
            id: id.into(),
            created_at: Utc.with_ymd_and_hms(2020, 4, 10, hour_utc, 0, 0).unwrap(),
            text: String::new(),
            point: None,
            hashtags: BTreeSet::new(),
        }
    }

    fn lp(id: &str, label: EmotionLabel, state: Option<&str>) -> LabeledPost {
        LabeledPost { post: post(id, 6), label, state: state.map(|s| RegionId::state(s).unwrap()), city: None }
    }

    fn counts(pairs: &[(EmotionLabel, u64)]) -> EmotionCounts {
        let mut c = EmotionCounts::zero();
        for (e, n) in pairs {
            c[*e] = *n;
        }
        c
    }

    #[test]
    fn two_happy_one_angry() {
        let input = [lp("1", Happiness, Some("PB")), lp("2", Happiness, Some("PB")), lp("3", Anger, Some("PB"))];
        let out = aggregate_day(&input, d("2020-04-10"), ist());
        assert!(out.rejected.is_empty());
        let pb = &out.aggregates[0];
        assert_eq!(pb.region.code(), "PB");
        assert_eq!(pb.counts, counts(&[(Happiness, 2), (Anger, 1)]));
        assert_eq!(pb.total, 3);
        assert_eq!(out.aggregates.last().unwrap().region, RegionId::nation());
    }

    #[test]
    fn empty_input_gives_nothing() {
        assert!(aggregate_day(&[], d("2020-04-10"), ist()).aggregates.is_empty());
    }

    #[test]
    fn unresolved_counts_toward_nation_only() {
        let input = [lp("1", Fear, Some("DL")), lp("2", Sadness, None)];
        let out = aggregate_day(&input, d("2020-04-10"), ist());
        assert_eq!(out.aggregates.len(), 2);
        assert_eq!(out.aggregates[1].total, 2);
        assert_eq!(out.aggregates[0].total, 1);
    }

    #[test]
    fn mismatched_date_rejected() {
        let mut late = lp("late", Fear, Some("DL"));
        late.post = post("late", 20); // 01:30 IST next day
        let out = aggregate_day(&[lp("ok", Fear, Some("DL")), late], d("2020-04-10"), ist());
        assert_eq!(out.rejected.len(), 1);
        assert_eq!(out.rejected[0].actual, d("2020-04-11"));
        assert_eq!(out.aggregates.last().unwrap().total, 1);
    }

    #[test]
    fn summary_ties_and_zeros() {
        let r = RegionId::nation();
        let s = mood_summary(r.clone(), &counts(&[(Fear, 3), (Anger, 3), (Neutral, 3)]));
        assert_eq!(s.top_two, [Anger, Fear]);
        let s = mood_summary(r.clone(), &counts(&[(Surprise, 2), (Neutral, 2), (Happiness, 5)]));
        assert_eq!(s.top_two, [Happiness, Surprise]);
        let s = mood_summary(r.clone(), &counts(&[(Sadness, 1)]));
        assert_eq!(s.top_two, [Sadness]);
        let s = mood_summary(r, &EmotionCounts::zero());
        assert!(s.top_two.is_empty());
        assert_eq!(s.percentages.sum(), 0.0);
    }

    #[test]
    fn trend_fills_gaps() {
        let pb = RegionId::state("PB").unwrap();
        let aggs = vec![
            RegionDayAggregate::new(pb.clone(), d("2020-04-01"), counts(&[(Anger, 2)])),
            RegionDayAggregate::new(pb.clone(), d("2020-04-03"), counts(&[(Fear, 1)])),
            RegionDayAggregate::new(RegionId::nation(), d("2020-04-02"), counts(&[(Fear, 9)])),
        ];
        let t = trend_series(&aggs, &pb, d("2020-04-01"), d("2020-04-03")).unwrap();
        assert_eq!(t.points.len(), 3);
        assert!(t.points[1].counts.is_zero());
        assert_eq!(t.total_posts, 3);

        let one = trend_series(&aggs, &pb, d("2020-04-01"), d("2020-04-01")).unwrap();
        assert_eq!(one.points[0].counts, aggs[0].counts);

        assert!(trend_series(&aggs, &pb, d("2020-04-03"), d("2020-04-01")).is_err());
    }

    #[test]
    fn report_zero_fill_and_city_cases() {
        let chennai = RegionId::city("Chennai").unwrap();
        let covid = vec![CovidDailyStats {
            region: RegionId::state("TN").unwrap(),
            date: d("2020-04-01"),
            counts: CaseCounts { confirmed: 5, recovered: 1, deceased: 0 },
        }];
        let r = build_report(&chennai, d("2020-04-01"), d("2020-04-02"), &[], &covid).unwrap();
        assert_eq!(r.days.len(), 2);
        assert_eq!(r.totals.total, 0);
        assert_eq!(r.totals.covid, CaseCounts::default());

        let tn = RegionId::state("TN").unwrap();
        let r = build_report(&tn, d("2020-04-01"), d("2020-04-02"), &[], &covid).unwrap();
        assert_eq!(r.totals.covid.confirmed, 5);
    }

    #[test]
    fn csv_export_columns() {
        let agg = RegionDayAggregate::new(
            RegionId::state("PB").unwrap(),
            d("2020-05-04"),
            counts(&[(Anger, 1), (Disgust, 2), (Fear, 3), (Happiness, 4), (Sadness, 5), (Surprise, 6), (Neutral, 7)]),
        );
        let mut buf = Vec::new();
        write_aggregates_csv(&mut buf, std::slice::from_ref(&agg)).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text, "region,date,A,D,F,H,SA,S,N,total\nPB,2020-05-04,1,2,3,4,5,6,7,28\n");
        assert_eq!(read_aggregates_csv(buf.as_slice()).unwrap(), vec![agg]);
    }

    fn arb_counts() -> impl Strategy<Value = EmotionCounts> {
        proptest::array::uniform7(0u64..10_000).prop_map(EmotionCounts::new)
    }

    proptest! {
        #[test]
        fn percentages_sum_to_one(c in arb_counts()) {
            let s = mood_summary(RegionId::nation(), &c);
            if c.total() > 0 {
                prop_assert!((s.percentages.sum() - 1.0).abs() < 1e-9);
                prop_assert!(!s.top_two.is_empty());
            } else {
                prop_assert!(s.top_two.is_empty());
            }
        }

        #[test]
        fn top_two_scale_invariant(c in arb_counts(), k in 1u64..50) {
            let a = mood_summary(RegionId::nation(), &c);
            let b = mood_summary(RegionId::nation(), &c.scaled(k));
            prop_assert_eq!(a.top_two, b.top_two);
        }

        #[test]
        fn merge_is_commutative_and_associative(a in arb_counts(), b in arb_counts(), c in arb_counts()) {
            let r = RegionId::nation();
            let day = d("2020-04-01");
            let (x, y, z) = (
                RegionDayAggregate::new(r.clone(), day, a),
                RegionDayAggregate::new(r.clone(), day, b),
                RegionDayAggregate::new(r, day, c),
            );
            prop_assert_eq!(x.merge(&y), y.merge(&x));
            prop_assert_eq!(x.merge(&y).merge(&z), x.merge(&y.merge(&z)));
            prop_assert!(x.merge(&y).check().is_ok());
        }

        #[test]
        fn csv_round_trip(rows in proptest::collection::vec((0usize..33, 0i64..60, arb_counts()), 0..20)) {
            let base = d("2020-03-14");
            let aggs: Vec<_> = rows
                .into_iter()
                .map(|(s, off, c)| {
                    let region = RegionId::all_states().nth(s).unwrap();
                    RegionDayAggregate::new(region, base + chrono::Duration::days(off), c)
                })
                .collect();
            let mut buf = Vec::new();
            write_aggregates_csv(&mut buf, &aggs).unwrap();
            prop_assert_eq!(read_aggregates_csv(buf.as_slice()).unwrap(), aggs);
        }
    }
}
