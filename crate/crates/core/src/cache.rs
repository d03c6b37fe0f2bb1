//! Types shared by the freshness cache and the baseline policies.

use std::fmt;
use std::io::{self, BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::attribute::AttributeId;

/// Simulated time in minutes.
pub type Minutes = f64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CacheError {
    #[error("timestamp regression: {got} is earlier than {previous}")]
    TimestampRegression { previous: Minutes, got: Minutes },
    #[error("invalid cache configuration: {0}")]
    ConfigInvalid(String),
}

/// Opaque attribute reading.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Payload {
    Null,
    Number(f64),
    Text(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub attribute: AttributeId,
    pub value: Payload,
    pub timestamp: Minutes,
}

impl Observation {
    pub fn new(attribute: AttributeId, value: Payload, timestamp: Minutes) -> Self {
        Self { attribute, value, timestamp }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Op {
    Ingest,
    Lookup,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Inserted,
    Refreshed,
    EvictedExpired,
    EvictedCapacity,
    IgnoredNotAdmissible,
    /// Cache full and every resident entry outranks the candidate.
    IgnoredLowPriority,
    /// The reading was already older than the threshold when it arrived.
    IgnoredStale,
    Hit,
    /// Served from cache although older than the threshold (baselines only).
    StaleHit,
    /// Found older than the threshold at lookup, evicted and refetched.
    ExpiredHit,
    Miss,
}

impl Outcome {
    pub fn is_lookup(self) -> bool {
        matches!(self, Outcome::Hit | Outcome::StaleHit | Outcome::ExpiredHit | Outcome::Miss)
    }
}

/// One line of the event log: `{"t", "op", "attribute", "outcome"}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CacheEvent {
    pub t: Minutes,
    pub op: Op,
    pub attribute: AttributeId,
    pub outcome: Outcome,
}

impl CacheEvent {
    pub fn new(t: Minutes, op: Op, attribute: &AttributeId, outcome: Outcome) -> Self {
        Self { t, op, attribute: attribute.clone(), outcome }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LookupOutcome {
    /// `stale` is only ever true for baselines, which serve old entries.
    Hit { stale: bool },
    ExpiredHit,
    Miss,
}

impl LookupOutcome {
    pub fn as_outcome(self) -> Outcome {
        match self {
            LookupOutcome::Hit { stale: false } => Outcome::Hit,
            LookupOutcome::Hit { stale: true } => Outcome::StaleHit,
            LookupOutcome::ExpiredHit => Outcome::ExpiredHit,
            LookupOutcome::Miss => Outcome::Miss,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LookupResult {
    pub outcome: LookupOutcome,
    /// All events caused by the lookup, including the lookup outcome itself.
    pub events: Vec<CacheEvent>,
}

/// Cache capacity as an absolute entry count or a share of the attribute universe.
///
/// Serialized as an integer count or a percentage string such as `"20%"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Capacity {
    Count(usize),
    Fraction(f64),
}

impl Capacity {
    /// Resolve to an entry count: fractions round up, never below one.
    pub fn resolve(self, universe: usize) -> Result<usize, CacheError> {
        match self {
            Capacity::Count(0) => Err(CacheError::ConfigInvalid("capacity must be at least 1".into())),
            Capacity::Count(n) => Ok(n),
            Capacity::Fraction(f) if !(f > 0.0 && f <= 1.0) => Err(CacheError::ConfigInvalid(format!(
                "capacity fraction must lie in (0, 1], got {f}"
            ))),
            Capacity::Fraction(f) => {
                // 0.2 * 15 is 3.0000000000000004 in binary; do not round that up to 4.
                let exact = f * universe as f64;
                let rounded = exact.round();
                let count = if (exact - rounded).abs() < 1e-9 { rounded } else { exact.ceil() };
                Ok((count as usize).max(1))
            }
        }
    }

    /// Stable label used in file names and CSV cells, e.g. `20pct` or `5`.
    pub fn label(self) -> String {
        match self {
            Capacity::Count(n) => n.to_string(),
            Capacity::Fraction(f) => format!("{}pct", trim_float(f * 100.0)),
        }
    }
}

pub(crate) fn trim_float(x: f64) -> String {
    let s = format!("{:.6}", x);
    let s = s.trim_end_matches('0').trim_end_matches('.');
    s.to_string()
}

impl fmt::Display for Capacity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Capacity::Count(n) => write!(f, "{n}"),
            Capacity::Fraction(x) => write!(f, "{}%", trim_float(x * 100.0)),
        }
    }
}

impl FromStr for Capacity {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if let Some(pct) = s.strip_suffix('%') {
            let value: f64 = pct.trim().parse().map_err(|_| format!("bad capacity percentage `{s}`"))?;
            return Ok(Capacity::Fraction(value / 100.0));
        }
        if let Ok(count) = s.parse::<usize>() {
            return Ok(Capacity::Count(count));
        }
        match s.parse::<f64>() {
            Ok(f) if f > 0.0 && f < 1.0 => Ok(Capacity::Fraction(f)),
            _ => Err(format!("bad capacity `{s}` (use a count like 5 or a share like 20%)")),
        }
    }
}

impl Serialize for Capacity {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Capacity::Count(n) => serializer.serialize_u64(*n as u64),
            Capacity::Fraction(_) => serializer.serialize_str(&self.to_string()),
        }
    }
}

impl<'de> Deserialize<'de> for Capacity {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Count(u64),
            Number(f64),
            Text(String),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Count(n) => Ok(Capacity::Count(n as usize)),
            Raw::Number(f) => f.to_string().parse().map_err(serde::de::Error::custom),
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Common surface of every simulated cache.
pub trait ContextCache {
    fn ingest(&mut self, observation: &Observation, now: Minutes) -> Result<Vec<CacheEvent>, CacheError>;
    fn lookup(&mut self, attribute: &AttributeId, now: Minutes) -> LookupResult;
    fn len(&self) -> usize;
    fn capacity(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

pub fn write_events_jsonl<W: Write>(mut out: W, events: &[CacheEvent]) -> io::Result<()> {
    for event in events {
        serde_json::to_writer(&mut out, event)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_events_jsonl<R: BufRead>(input: R) -> io::Result<Vec<CacheEvent>> {
    let mut events = Vec::new();
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        events.push(serde_json::from_str(&line).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))?);
    }
    Ok(events)
}
