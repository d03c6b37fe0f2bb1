//! Demand-filled baseline caches: FIFO, LFU and recency (RU).
//!
//! Baselines share the freshness threshold only to classify what they serve:
//! a resident entry is always a hit, flagged stale when older than the
//! threshold. They cache any requested attribute and refresh an entry from
//! the observation stream only while it is resident.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::attribute::AttributeId;
use crate::cache::{
    CacheError, CacheEvent, ContextCache, LookupOutcome, LookupResult, Minutes, Observation, Op,
    Outcome, Payload,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolicyKind {
    Pfpa,
    Lfu,
    #[serde(alias = "lru")]
    Ru,
    Fifo,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 4] = [PolicyKind::Pfpa, PolicyKind::Lfu, PolicyKind::Ru, PolicyKind::Fifo];

    pub fn as_str(self) -> &'static str {
        match self {
            PolicyKind::Pfpa => "pfpa",
            PolicyKind::Lfu => "lfu",
            PolicyKind::Ru => "ru",
            PolicyKind::Fifo => "fifo",
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PolicyKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "pfpa" => Ok(PolicyKind::Pfpa),
            "lfu" => Ok(PolicyKind::Lfu),
            "ru" | "lru" => Ok(PolicyKind::Ru),
            "fifo" => Ok(PolicyKind::Fifo),
            other => Err(format!("unknown policy `{other}` (expected pfpa, lfu, ru or fifo)")),
        }
    }
}

/// Which end of the recency order RU evicts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecencyVictim {
    #[default]
    LeastRecent,
    MostRecent,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineEntry {
    pub attribute: AttributeId,
    pub value: Payload,
    pub inserted_at: Minutes,
    pub last_refreshed: Minutes,
    pub last_accessed: Minutes,
    pub access_count: u64,
    insert_seq: u64,
    access_seq: u64,
}

#[derive(Debug, Clone)]
pub struct BaselineCache {
    policy: PolicyKind,
    recency_victim: RecencyVictim,
    capacity: usize,
    threshold: Minutes,
    entries: BTreeMap<AttributeId, BaselineEntry>,
    latest: HashMap<AttributeId, Payload>,
    clock: Minutes,
    last_reading: Minutes,
    seq: u64,
}

impl BaselineCache {
    pub fn new(policy: PolicyKind, capacity: usize, threshold_t: Minutes) -> Result<Self, CacheError> {
        if policy == PolicyKind::Pfpa {
            return Err(CacheError::ConfigInvalid("pfpa is not a baseline policy".into()));
        }
        if capacity == 0 {
            return Err(CacheError::ConfigInvalid("capacity must be at least 1".into()));
        }
        if !(threshold_t.is_finite() && threshold_t > 0.0) {
            return Err(CacheError::ConfigInvalid(format!("threshold must be positive, got {threshold_t}")));
        }
        Ok(Self {
            policy,
            recency_victim: RecencyVictim::default(),
            capacity,
            threshold: threshold_t,
            entries: BTreeMap::new(),
            latest: HashMap::new(),
            clock: 0.0,
            last_reading: f64::NEG_INFINITY,
            seq: 0,
        })
    }

    pub fn with_recency_victim(mut self, victim: RecencyVictim) -> Self {
        self.recency_victim = victim;
        self
    }

    pub fn policy(&self) -> PolicyKind {
        self.policy
    }

    pub fn entry(&self, attribute: &AttributeId) -> Option<&BaselineEntry> {
        self.entries.get(attribute)
    }

    pub fn entries(&self) -> impl Iterator<Item = &BaselineEntry> {
        self.entries.values()
    }

    /// The entry this policy would evict next.
    pub fn victim(&self) -> Option<&AttributeId> {
        let entries = self.entries.values();
        let chosen = match (self.policy, self.recency_victim) {
            (PolicyKind::Fifo, _) | (PolicyKind::Pfpa, _) => entries.min_by_key(|e| e.insert_seq),
            (PolicyKind::Lfu, _) => entries.min_by_key(|e| (e.access_count, e.insert_seq)),
            (PolicyKind::Ru, RecencyVictim::LeastRecent) => entries.min_by_key(|e| e.access_seq),
            (PolicyKind::Ru, RecencyVictim::MostRecent) => entries.max_by_key(|e| e.access_seq),
        };
        chosen.map(|e| &e.attribute)
    }

    fn next_seq(&mut self) -> u64 {
        self.seq += 1;
        self.seq
    }
}

impl ContextCache for BaselineCache {
    fn ingest(&mut self, observation: &Observation, now: Minutes) -> Result<Vec<CacheEvent>, CacheError> {
        if observation.timestamp < self.last_reading {
            return Err(CacheError::TimestampRegression {
                previous: self.last_reading,
                got: observation.timestamp,
            });
        }
        if now < self.clock || now < observation.timestamp {
            return Err(CacheError::TimestampRegression {
                previous: self.clock.max(observation.timestamp),
                got: now,
            });
        }
        self.clock = now;
        self.last_reading = observation.timestamp;
        self.latest.insert(observation.attribute.clone(), observation.value.clone());
        match self.entries.get_mut(&observation.attribute) {
            Some(entry) => {
                entry.value = observation.value.clone();
                entry.last_refreshed = observation.timestamp;
                Ok(vec![CacheEvent::new(now, Op::Ingest, &observation.attribute, Outcome::Refreshed)])
            }
            None => Ok(Vec::new()),
        }
    }

    fn lookup(&mut self, attribute: &AttributeId, now: Minutes) -> LookupResult {
        let now = now.max(self.clock).max(self.last_reading);
        self.clock = now;
        let seq = self.next_seq();
        let threshold = self.threshold;
        if let Some(entry) = self.entries.get_mut(attribute) {
            entry.access_count += 1;
            entry.last_accessed = now;
            entry.access_seq = seq;
            let outcome = LookupOutcome::Hit { stale: now - entry.last_refreshed > threshold };
            let events = vec![CacheEvent::new(now, Op::Lookup, attribute, outcome.as_outcome())];
            return LookupResult { outcome, events };
        }

        let mut events = vec![CacheEvent::new(now, Op::Lookup, attribute, Outcome::Miss)];
        if self.entries.len() >= self.capacity {
            let victim = self.victim().cloned().expect("full cache has a victim");
            self.entries.remove(&victim);
            events.push(CacheEvent::new(now, Op::Lookup, &victim, Outcome::EvictedCapacity));
        }
        let value = self.latest.get(attribute).cloned().unwrap_or(Payload::Null);
        self.entries.insert(
            attribute.clone(),
            BaselineEntry {
                attribute: attribute.clone(),
                value,
                inserted_at: now,
                last_refreshed: now,
                last_accessed: now,
                access_count: 0,
                insert_seq: seq,
                access_seq: seq,
            },
        );
        events.push(CacheEvent::new(now, Op::Lookup, attribute, Outcome::Inserted));
        LookupResult { outcome: LookupOutcome::Miss, events }
    }

    fn len(&self) -> usize {
        self.entries.len()
    }

    fn capacity(&self) -> usize {
        self.capacity
    }
}
