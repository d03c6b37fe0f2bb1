//! Seeded synthetic observation and query traces.
//!
//! Each attribute publishes readings at jittered intervals around its own
//! cadence; queries arrive at jittered intervals and each asks for
//! `attributes_per_query` distinct attributes. Every attribute and the query
//! stream draw from their own ChaCha8 stream, so a trace with fewer queries
//! is a prefix of a longer one with the same seed.

use std::io::{self, BufRead, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ahp::AttributeRanking;
use crate::attribute::AttributeId;
use crate::cache::{Minutes, Observation, Payload};

/// Seed of the shipped road-work scenario.
pub const ROAD_WORK_SEED: u64 = 20_231_104;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WorkloadError {
    #[error("invalid workload configuration: {0}")]
    ConfigInvalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ValueDistribution {
    Uniform { low: f64, high: f64 },
    Choice { options: Vec<String> },
}

impl ValueDistribution {
    fn sample(&self, rng: &mut ChaCha8Rng) -> Payload {
        match self {
            ValueDistribution::Uniform { low, high } => {
                let u: f64 = rng.random();
                // Two decimals keep traces readable.
                Payload::Number(((low + (high - low) * u) * 100.0).round() / 100.0)
            }
            ValueDistribution::Choice { options } => {
                Payload::Text(options[rng.random_range(0..options.len())].clone())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeProfile {
    pub attribute: AttributeId,
    /// Mean minutes between readings.
    pub update_interval_mean: Minutes,
    /// Intervals are uniform on `mean * [1 - jitter, 1 + jitter]`.
    pub update_interval_jitter: f64,
    pub value: ValueDistribution,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuerySelection {
    /// Every query asks for the best-ranked attributes.
    #[default]
    TopRanked,
    /// Distinct attributes drawn without replacement, proportional to weight.
    Weighted,
}

fn default_attributes_per_query() -> usize {
    4
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorkloadConfig {
    pub profiles: Vec<AttributeProfile>,
    pub num_queries: usize,
    pub query_interarrival_mean: Minutes,
    #[serde(default)]
    pub query_interarrival_jitter: f64,
    #[serde(default = "default_attributes_per_query")]
    pub attributes_per_query: usize,
    #[serde(default)]
    pub selection: QuerySelection,
    pub seed: u64,
    /// Traces whose last query would fall after this time are rejected.
    #[serde(default)]
    pub duration_cap: Option<Minutes>,
}

impl WorkloadConfig {
    pub fn validate(&self) -> Result<(), WorkloadError> {
        let invalid = |msg: String| Err(WorkloadError::ConfigInvalid(msg));
        if self.profiles.is_empty() {
            return invalid("at least one attribute profile is required".into());
        }
        let mut seen = std::collections::HashSet::new();
        for p in &self.profiles {
            if !seen.insert(&p.attribute) {
                return invalid(format!("attribute `{}` has two profiles", p.attribute));
            }
            if !(p.update_interval_mean.is_finite() && p.update_interval_mean > 0.0) {
                return invalid(format!("`{}` needs a positive update interval", p.attribute));
            }
            if !(0.0..1.0).contains(&p.update_interval_jitter) {
                return invalid(format!("`{}` jitter must lie in [0, 1)", p.attribute));
            }
            match &p.value {
                ValueDistribution::Uniform { low, high } if !low.is_finite() || !high.is_finite() || low > high => {
                    return invalid(format!("`{}` has an empty value range", p.attribute));
                }
                ValueDistribution::Choice { options } if options.is_empty() => {
                    return invalid(format!("`{}` has no value options", p.attribute));
                }
                _ => {}
            }
        }
        if self.num_queries == 0 {
            return invalid("num_queries must be at least 1".into());
        }
        if !(self.query_interarrival_mean.is_finite() && self.query_interarrival_mean > 0.0) {
            return invalid("query interarrival mean must be positive".into());
        }
        if !(0.0..1.0).contains(&self.query_interarrival_jitter) {
            return invalid("query interarrival jitter must lie in [0, 1)".into());
        }
        if self.attributes_per_query == 0 || self.attributes_per_query > self.profiles.len() {
            return invalid(format!(
                "attributes_per_query must lie in 1..={}, got {}",
                self.profiles.len(),
                self.attributes_per_query
            ));
        }
        Ok(())
    }

    pub fn attributes(&self) -> Vec<AttributeId> {
        self.profiles.iter().map(|p| p.attribute.clone()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TraceKind {
    Observation { attribute: AttributeId, value: Payload },
    Query { attributes: Vec<AttributeId> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub time: Minutes,
    #[serde(flatten)]
    pub kind: TraceKind,
}

impl TraceEvent {
    pub fn observation(&self) -> Option<Observation> {
        match &self.kind {
            TraceKind::Observation { attribute, value } => {
                Some(Observation::new(attribute.clone(), value.clone(), self.time))
            }
            TraceKind::Query { .. } => None,
        }
    }

    pub fn is_query(&self) -> bool {
        matches!(self.kind, TraceKind::Query { .. })
    }
}

fn jittered(rng: &mut ChaCha8Rng, mean: f64, jitter: f64) -> f64 {
    let u: f64 = rng.random();
    mean * (1.0 + jitter * (2.0 * u - 1.0))
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

fn pick_weighted(rng: &mut ChaCha8Rng, pool: &[(AttributeId, f64)], k: usize) -> Vec<AttributeId> {
    let mut remaining: Vec<(AttributeId, f64)> = pool.to_vec();
    let mut chosen = Vec::with_capacity(k);
    for _ in 0..k {
        let total: f64 = remaining.iter().map(|(_, w)| w).sum();
        let mut target = rng.random::<f64>() * total;
        let mut index = remaining.len() - 1;
        for (i, (_, w)) in remaining.iter().enumerate() {
            if target < *w {
                index = i;
                break;
            }
            target -= w;
        }
        chosen.push(remaining.remove(index).0);
    }
    chosen
}

/// Build the merged, time-ordered trace for `config`.
///
/// Queries target attributes by `ranking`; observations of all profiled
/// attributes are generated up to the time of the last query. Equal times
/// order observations before queries.
pub fn generate_trace(
    config: &WorkloadConfig,
    ranking: &AttributeRanking,
) -> Result<Vec<TraceEvent>, WorkloadError> {
    config.validate()?;
    let profiled = config.attributes();
    let ranked: Vec<(AttributeId, f64)> = ranking
        .by_rank()
        .into_iter()
        .filter(|a| profiled.contains(&a.id))
        .map(|a| (a.id.clone(), a.weight))
        .collect();
    if ranked.len() < config.attributes_per_query {
        return Err(WorkloadError::ConfigInvalid(format!(
            "ranking covers {} profiled attributes, queries need {}",
            ranked.len(),
            config.attributes_per_query
        )));
    }
    let top: Vec<AttributeId> = ranked
        .iter()
        .take(config.attributes_per_query)
        .map(|(id, _)| id.clone())
        .collect();

    // (time, kind order, stream, sequence) keeps the merge total and stable.
    let mut keyed: Vec<((Minutes, u8, usize, usize), TraceEvent)> = Vec::new();

    let mut rng = stream(config.seed, 0);
    let mut time = 0.0;
    for q in 0..config.num_queries {
        time += jittered(&mut rng, config.query_interarrival_mean, config.query_interarrival_jitter);
        let attributes = match config.selection {
            QuerySelection::TopRanked => top.clone(),
            QuerySelection::Weighted => pick_weighted(&mut rng, &ranked, config.attributes_per_query),
        };
        keyed.push(((time, 1, 0, q), TraceEvent { time, kind: TraceKind::Query { attributes } }));
    }
    let horizon = time;
    if let Some(cap) = config.duration_cap {
        if horizon > cap {
            return Err(WorkloadError::ConfigInvalid(format!(
                "{} queries need {horizon:.1} minutes, beyond the {cap} minute cap",
                config.num_queries
            )));
        }
    }

    for (index, profile) in config.profiles.iter().enumerate() {
        let mut rng = stream(config.seed, index as u64 + 1);
        let mean = profile.update_interval_mean;
        let mut t = rng.random::<f64>() * mean;
        let mut seq = 0;
        while t <= horizon {
            let value = profile.value.sample(&mut rng);
            keyed.push((
                (t, 0, index + 1, seq),
                TraceEvent {
                    time: t,
                    kind: TraceKind::Observation { attribute: profile.attribute.clone(), value },
                },
            ));
            seq += 1;
            t += jittered(&mut rng, mean, profile.update_interval_jitter);
        }
    }

    keyed.sort_by(|(a, _), (b, _)| {
        a.0.total_cmp(&b.0)
            .then(a.1.cmp(&b.1))
            .then(a.2.cmp(&b.2))
            .then(a.3.cmp(&b.3))
    });
    Ok(keyed.into_iter().map(|(_, event)| event).collect())
}

pub fn lookup_count(trace: &[TraceEvent]) -> usize {
    trace
        .iter()
        .map(|e| match &e.kind {
            TraceKind::Query { attributes } => attributes.len(),
            TraceKind::Observation { .. } => 0,
        })
        .sum()
}

fn uniform(low: f64, high: f64) -> ValueDistribution {
    ValueDistribution::Uniform { low, high }
}

fn choice(options: &[&str]) -> ValueDistribution {
    ValueDistribution::Choice { options: options.iter().map(|s| s.to_string()).collect() }
}

fn profile(name: &str, mean: f64, jitter: f64, value: ValueDistribution) -> AttributeProfile {
    AttributeProfile {
        attribute: AttributeId::from(name),
        update_interval_mean: mean,
        update_interval_jitter: jitter,
        value,
    }
}

/// The shipped road-work scenario: eight attributes with distinct cadences.
///
/// Cadences are calibration choices, not measurements. Pair with
/// [`ROAD_WORK_JUDGMENTS`] for the ranking.
pub fn scenario_road_work() -> WorkloadConfig {
    WorkloadConfig {
        profiles: vec![
            profile("speed", 2.0, 0.5, uniform(0.0, 110.0)),
            profile("weather", 45.0, 0.3, choice(&["clear", "rain", "fog", "wind"])),
            profile("traffic_density", 6.0, 0.4, uniform(0.0, 1.0)),
            profile("road_quality", 120.0, 0.2, uniform(0.0, 10.0)),
            profile("roadblock_presence", 30.0, 0.5, choice(&["none", "partial", "full"])),
            profile("machinery_detected", 17.0, 0.2, choice(&["none", "excavator", "roller", "crane"])),
            profile("dust_level", 12.0, 0.5, uniform(0.0, 500.0)),
            profile("lane_closures", 25.0, 0.4, uniform(0.0, 3.0)),
        ],
        num_queries: 500,
        query_interarrival_mean: 3.0,
        query_interarrival_jitter: 0.5,
        attributes_per_query: 4,
        selection: QuerySelection::TopRanked,
        seed: ROAD_WORK_SEED,
        duration_cap: None,
    }
}

/// Judgment set shipped with the road-work scenario.
pub const ROAD_WORK_JUDGMENTS: &str = include_str!("../specs/roadwork_judgments.json");

pub fn write_trace_jsonl<W: Write>(mut out: W, trace: &[TraceEvent]) -> io::Result<()> {
    for event in trace {
        serde_json::to_writer(&mut out, event)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_trace_jsonl<R: BufRead>(input: R) -> io::Result<Vec<TraceEvent>> {
    let mut trace: Vec<TraceEvent> = Vec::new();
    for (n, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let event: TraceEvent = serde_json::from_str(&line)
            .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, format!("line {}: {e}", n + 1)))?;
        if trace.last().is_some_and(|prev| event.time < prev.time) {
            return Err(io::Error::new(
                io::ErrorKind::InvalidData,
                format!("line {}: trace time goes backwards", n + 1),
            ));
        }
        trace.push(event);
    }
    Ok(trace)
}
