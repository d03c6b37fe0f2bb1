//! Lookup counters and the reported ratios.
//!
//! `hit_miss_ratio` is hits / misses (the "Ratio" column of a threshold
//! study), `hit_rate` is hits / lookups and `expired_ratio` is the share of
//! lookups that found an entry older than the threshold.

use std::cmp::Ordering;
use std::io::Write;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::cache::{trim_float, CacheEvent, Capacity, Minutes, Outcome};
use crate::policies::PolicyKind;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("event log contains no lookups")]
    EmptyLog,
}

pub const CSV_HEADER: [&str; 11] = [
    "policy",
    "threshold",
    "queries",
    "capacity",
    "hits",
    "misses",
    "lookups",
    "expired",
    "hit_miss_ratio",
    "hit_rate",
    "expired_ratio",
];

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counters {
    pub hits: u64,
    pub misses: u64,
    pub expired_events: u64,
    pub lookups: u64,
    pub evicted_expired: u64,
    pub evicted_capacity: u64,
}

/// Identifies the experiment cell a report belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReportConfig {
    pub policy: PolicyKind,
    pub threshold_t: Minutes,
    pub num_queries: usize,
    pub capacity: Capacity,
    /// Count an expired entry found at lookup as a hit instead of a miss.
    #[serde(default)]
    pub count_expired_as_hit: bool,
}

fn serialize_ratio<S: Serializer>(value: &f64, serializer: S) -> Result<S::Ok, S::Error> {
    if value.is_infinite() {
        serializer.serialize_str("inf")
    } else {
        serializer.serialize_f64(*value)
    }
}

fn deserialize_ratio<'de, D: Deserializer<'de>>(deserializer: D) -> Result<f64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Number(f64),
        Text(String),
    }
    match Raw::deserialize(deserializer)? {
        Raw::Number(x) => Ok(x),
        Raw::Text(s) if s == "inf" => Ok(f64::INFINITY),
        Raw::Text(s) => Err(serde::de::Error::custom(format!("bad ratio `{s}`"))),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub policy: PolicyKind,
    pub threshold_t: Minutes,
    pub num_queries: usize,
    pub capacity: Capacity,
    /// Capacity resolved to entries, when known.
    #[serde(default)]
    pub capacity_entries: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub repetition: Option<usize>,
    pub counters: Counters,
    /// hits / misses at full precision; `inf` when there were no misses.
    #[serde(serialize_with = "serialize_ratio", deserialize_with = "deserialize_ratio")]
    pub hit_miss_ratio: f64,
    pub hit_rate: f64,
    pub expired_ratio: f64,
}

/// hits / misses; zero misses give +inf, zero of both give 0.
pub fn hit_miss_ratio(hits: f64, misses: f64) -> f64 {
    if misses == 0.0 {
        if hits == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        hits / misses
    }
}

/// One-decimal rendering used in tables, `inf` for an infinite ratio.
pub fn display_ratio(ratio: f64) -> String {
    if ratio.is_infinite() {
        "inf".to_string()
    } else {
        format!("{:.1}", ratio)
    }
}

pub fn tally(events: &[CacheEvent], count_expired_as_hit: bool) -> Counters {
    let mut c = Counters::default();
    for event in events {
        match event.outcome {
            Outcome::Hit => c.hits += 1,
            Outcome::StaleHit => {
                c.hits += 1;
                c.expired_events += 1;
            }
            Outcome::ExpiredHit => {
                c.expired_events += 1;
                if count_expired_as_hit {
                    c.hits += 1;
                } else {
                    c.misses += 1;
                }
            }
            Outcome::Miss => c.misses += 1,
            Outcome::EvictedExpired => c.evicted_expired += 1,
            Outcome::EvictedCapacity => c.evicted_capacity += 1,
            _ => {}
        }
    }
    c.lookups = c.hits + c.misses;
    c
}

impl SimulationReport {
    pub fn from_counters(config: &ReportConfig, counters: Counters) -> Self {
        let lookups = counters.lookups as f64;
        Self {
            policy: config.policy,
            threshold_t: config.threshold_t,
            num_queries: config.num_queries,
            capacity: config.capacity,
            capacity_entries: None,
            seed: None,
            repetition: None,
            counters,
            hit_miss_ratio: hit_miss_ratio(counters.hits as f64, counters.misses as f64),
            hit_rate: if lookups > 0.0 { counters.hits as f64 / lookups } else { 0.0 },
            expired_ratio: if lookups > 0.0 { counters.expired_events as f64 / lookups } else { 0.0 },
        }
    }

    pub fn display_hit_miss_ratio(&self) -> String {
        display_ratio(self.hit_miss_ratio)
    }

    pub fn csv_record(&self) -> Vec<String> {
        vec![
            self.policy.to_string(),
            trim_float(self.threshold_t),
            self.num_queries.to_string(),
            self.capacity.to_string(),
            self.counters.hits.to_string(),
            self.counters.misses.to_string(),
            self.counters.lookups.to_string(),
            self.counters.expired_events.to_string(),
            self.display_hit_miss_ratio(),
            format!("{:.6}", self.hit_rate),
            format!("{:.6}", self.expired_ratio),
        ]
    }
}

pub fn compute_report(events: &[CacheEvent], config: &ReportConfig) -> Result<SimulationReport, MetricsError> {
    let counters = tally(events, config.count_expired_as_hit);
    if counters.lookups == 0 {
        return Err(MetricsError::EmptyLog);
    }
    Ok(SimulationReport::from_counters(config, counters))
}

pub fn write_reports_csv<W: Write>(out: W, reports: &[SimulationReport]) -> csv::Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(CSV_HEADER)?;
    for report in reports {
        writer.write_record(report.csv_record())?;
    }
    writer.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupKey {
    Policy,
    Threshold,
    Queries,
    Capacity,
}

impl std::str::FromStr for GroupKey {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "policy" => Ok(GroupKey::Policy),
            "threshold" => Ok(GroupKey::Threshold),
            "queries" => Ok(GroupKey::Queries),
            "capacity" => Ok(GroupKey::Capacity),
            other => Err(format!("unknown group key `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum GroupValue {
    Policy(PolicyKind),
    Threshold(f64),
    Queries(usize),
    Capacity(Capacity),
}

impl GroupValue {
    fn of(report: &SimulationReport, key: GroupKey) -> Self {
        match key {
            GroupKey::Policy => GroupValue::Policy(report.policy),
            GroupKey::Threshold => GroupValue::Threshold(report.threshold_t),
            GroupKey::Queries => GroupValue::Queries(report.num_queries),
            GroupKey::Capacity => GroupValue::Capacity(report.capacity),
        }
    }

    fn rank(&self) -> u8 {
        match self {
            GroupValue::Policy(_) => 0,
            GroupValue::Threshold(_) => 1,
            GroupValue::Queries(_) => 2,
            GroupValue::Capacity(_) => 3,
        }
    }

    fn cmp_value(&self, other: &Self) -> Ordering {
        fn capacity_key(c: &Capacity) -> (u8, f64) {
            match c {
                Capacity::Count(n) => (0, *n as f64),
                Capacity::Fraction(f) => (1, *f),
            }
        }
        match (self, other) {
            (GroupValue::Policy(a), GroupValue::Policy(b)) => a.cmp(b),
            (GroupValue::Threshold(a), GroupValue::Threshold(b)) => a.total_cmp(b),
            (GroupValue::Queries(a), GroupValue::Queries(b)) => a.cmp(b),
            (GroupValue::Capacity(a), GroupValue::Capacity(b)) => {
                let (ka, va) = capacity_key(a);
                let (kb, vb) = capacity_key(b);
                ka.cmp(&kb).then(va.total_cmp(&vb))
            }
            _ => self.rank().cmp(&other.rank()),
        }
    }

    pub fn label(&self) -> String {
        match self {
            GroupValue::Policy(p) => p.to_string(),
            GroupValue::Threshold(t) => trim_float(*t),
            GroupValue::Queries(q) => q.to_string(),
            GroupValue::Capacity(c) => c.to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Stat {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

impl Stat {
    fn of(values: &[f64]) -> Self {
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Self { mean, min, max }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub key: Vec<GroupValue>,
    pub reports: usize,
    pub hits: Stat,
    pub misses: Stat,
    pub lookups: Stat,
    pub expired: Stat,
    pub hit_rate: Stat,
    pub expired_ratio: Stat,
    /// Mean hits over mean misses.
    #[serde(serialize_with = "serialize_ratio")]
    pub hit_miss_ratio: f64,
}

impl SummaryRow {
    /// Average hits per report in this group.
    pub fn avg_hits(&self) -> f64 {
        self.hits.mean
    }

    pub fn value(&self, key: GroupKey) -> Option<&GroupValue> {
        self.key.iter().find(|v| {
            matches!(
                (key, v),
                (GroupKey::Policy, GroupValue::Policy(_))
                    | (GroupKey::Threshold, GroupValue::Threshold(_))
                    | (GroupKey::Queries, GroupValue::Queries(_))
                    | (GroupKey::Capacity, GroupValue::Capacity(_))
            )
        })
    }
}

/// Group reports and summarise each metric; rows come sorted by group key.
pub fn aggregate(reports: &[SimulationReport], group_by: &[GroupKey]) -> Vec<SummaryRow> {
    let mut groups: Vec<(Vec<GroupValue>, Vec<&SimulationReport>)> = Vec::new();
    for report in reports {
        let key: Vec<GroupValue> = group_by.iter().map(|k| GroupValue::of(report, *k)).collect();
        match groups
            .iter_mut()
            .find(|(k, _)| k.iter().zip(&key).all(|(a, b)| a.cmp_value(b) == Ordering::Equal))
        {
            Some((_, members)) => members.push(report),
            None => groups.push((key, vec![report])),
        }
    }
    groups.sort_by(|(a, _), (b, _)| {
        a.iter()
            .zip(b)
            .map(|(x, y)| x.cmp_value(y))
            .find(|o| *o != Ordering::Equal)
            .unwrap_or(Ordering::Equal)
    });
    groups
        .into_iter()
        .map(|(key, members)| {
            let pick = |f: &dyn Fn(&SimulationReport) -> f64| -> Stat {
                Stat::of(&members.iter().map(|r| f(r)).collect::<Vec<_>>())
            };
            let hits = pick(&|r| r.counters.hits as f64);
            let misses = pick(&|r| r.counters.misses as f64);
            SummaryRow {
                reports: members.len(),
                lookups: pick(&|r| r.counters.lookups as f64),
                expired: pick(&|r| r.counters.expired_events as f64),
                hit_rate: pick(&|r| r.hit_rate),
                expired_ratio: pick(&|r| r.expired_ratio),
                hit_miss_ratio: hit_miss_ratio(hits.mean, misses.mean),
                hits,
                misses,
                key,
            }
        })
        .collect()
}

/// Mean values per group in the report CSV schema (all four keys grouped).
pub fn write_summary_csv<W: Write>(out: W, rows: &[SummaryRow]) -> csv::Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(CSV_HEADER)?;
    for row in rows {
        let label = |key: GroupKey| row.value(key).map(GroupValue::label).unwrap_or_else(|| "*".into());
        writer.write_record([
            label(GroupKey::Policy),
            label(GroupKey::Threshold),
            label(GroupKey::Queries),
            label(GroupKey::Capacity),
            format!("{:.3}", row.hits.mean),
            format!("{:.3}", row.misses.mean),
            format!("{:.3}", row.lookups.mean),
            format!("{:.3}", row.expired.mean),
            display_ratio(row.hit_miss_ratio),
            format!("{:.6}", row.hit_rate.mean),
            format!("{:.6}", row.expired_ratio.mean),
        ])?;
    }
    writer.flush()?;
    Ok(())
}

/// Group-by summary with min/mean/max columns, for the `report` command.
pub fn write_stats_csv<W: Write>(out: W, group_by: &[GroupKey], rows: &[SummaryRow]) -> csv::Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    let mut header: Vec<String> = group_by
        .iter()
        .map(|k| serde_json::to_value(k).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default())
        .collect();
    header.push("reports".into());
    for metric in ["hits", "misses", "lookups", "expired", "hit_rate", "expired_ratio"] {
        for stat in ["mean", "min", "max"] {
            header.push(format!("{metric}_{stat}"));
        }
    }
    header.push("hit_miss_ratio".into());
    writer.write_record(&header)?;
    for row in rows {
        let mut record: Vec<String> = row.key.iter().map(GroupValue::label).collect();
        record.push(row.reports.to_string());
        for stat in [row.hits, row.misses, row.lookups, row.expired, row.hit_rate, row.expired_ratio] {
            record.push(format!("{:.6}", stat.mean));
            record.push(format!("{:.6}", stat.min));
            record.push(format!("{:.6}", stat.max));
        }
        record.push(display_ratio(row.hit_miss_ratio));
        writer.write_record(&record)?;
    }
    writer.flush()?;
    Ok(())
}
