//! Threshold-monitored context cache fed by the attribute ranking.
//!
//! Every reading that reaches the cache, whether pushed by a provider
//! ([`FreshnessCache::ingest`]) or fetched on a miss, enters a bounded sliding
//! window. On each operation the window front is popped while it is older
//! than the threshold; when the popped reading was the last one of its
//! attribute the monitoring unit flags the attribute stale and its cache
//! entry is evicted. Only the `top_k` ranked attributes are admitted, and a
//! full cache gives way to higher-weight attributes first.

mod cmu;
mod window;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::ahp::AttributeRanking;
use crate::attribute::AttributeId;
use crate::cache::{
    CacheError, CacheEvent, Capacity, ContextCache, LookupOutcome, LookupResult, Minutes,
    Observation, Op, Outcome, Payload,
};

pub use cmu::CmuState;
pub use window::{Popped, SlidingWindow, WindowItem};

pub const DEFAULT_WINDOW_SIZE: usize = 64;
pub const DEFAULT_TOP_K: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FreshnessConfig {
    pub threshold_t: Minutes,
    pub window_size: usize,
    pub capacity: Capacity,
    pub top_k: usize,
}

impl FreshnessConfig {
    pub fn new(threshold_t: Minutes, capacity: Capacity) -> Self {
        Self {
            threshold_t,
            window_size: DEFAULT_WINDOW_SIZE,
            capacity,
            top_k: DEFAULT_TOP_K,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CacheEntry {
    pub attribute: AttributeId,
    pub value: Payload,
    pub inserted_at: Minutes,
    pub last_refreshed: Minutes,
    pub weight: f64,
    seq: u64,
}

impl CacheEntry {
    pub fn age(&self, now: Minutes) -> Minutes {
        now - self.last_refreshed
    }
}

#[derive(Debug, Clone)]
pub struct FreshnessCache {
    threshold: Minutes,
    capacity: usize,
    admission: BTreeSet<AttributeId>,
    admission_order: Vec<AttributeId>,
    weights: HashMap<AttributeId, f64>,
    window: SlidingWindow,
    cmu: CmuState,
    entries: BTreeMap<AttributeId, CacheEntry>,
    latest: HashMap<AttributeId, Payload>,
    clock: Minutes,
    last_reading: Minutes,
    seq: u64,
}

impl FreshnessCache {
    pub fn new(config: FreshnessConfig, ranking: &AttributeRanking) -> Result<Self, CacheError> {
        let invalid = |msg: String| Err(CacheError::ConfigInvalid(msg));
        if !(config.threshold_t.is_finite() && config.threshold_t > 0.0) {
            return invalid(format!("threshold must be positive, got {}", config.threshold_t));
        }
        if config.window_size == 0 {
            return invalid("window size must be at least 1".into());
        }
        if config.top_k == 0 || config.top_k > ranking.len() {
            return invalid(format!("top_k must lie in 1..={}, got {}", ranking.len(), config.top_k));
        }
        let capacity = config.capacity.resolve(ranking.len())?;
        let admission_order = ranking.top(config.top_k);
        Ok(Self {
            threshold: config.threshold_t,
            capacity,
            admission: admission_order.iter().cloned().collect(),
            cmu: CmuState::new(&admission_order),
            admission_order,
            weights: ranking.attributes.iter().map(|a| (a.id.clone(), a.weight)).collect(),
            window: SlidingWindow::new(config.window_size),
            entries: BTreeMap::new(),
            latest: HashMap::new(),
            clock: 0.0,
            last_reading: f64::NEG_INFINITY,
            seq: 0,
        })
    }

    pub fn threshold(&self) -> Minutes {
        self.threshold
    }

    /// Admitted attributes, best rank first.
    pub fn admission_set(&self) -> &[AttributeId] {
        &self.admission_order
    }

    pub fn is_admissible(&self, attribute: &AttributeId) -> bool {
        self.admission.contains(attribute)
    }

    pub fn entry(&self, attribute: &AttributeId) -> Option<&CacheEntry> {
        self.entries.get(attribute)
    }

    pub fn entries(&self) -> impl Iterator<Item = &CacheEntry> {
        self.entries.values()
    }

    pub fn window(&self) -> &SlidingWindow {
        &self.window
    }

    pub fn cmu(&self) -> &CmuState {
        &self.cmu
    }

    /// True iff every admitted attribute is cached and within the threshold.
    pub fn context_is_fresh(&self, now: Minutes) -> bool {
        self.admission_order.iter().all(|id| {
            self.entries
                .get(id)
                .is_some_and(|entry| entry.age(now) <= self.threshold)
        })
    }

    /// Feed one reading into the window and the monitoring unit.
    fn record_reading(&mut self, attribute: &AttributeId, value: &Payload, timestamp: Minutes) {
        // Overflow drops the oldest reading. An entry whose last reading leaves
        // this way is no longer tracked by the window and is caught by the age
        // check at lookup instead.
        let _ = self.window.push(attribute.clone(), timestamp);
        self.cmu.record(attribute, timestamp);
        self.latest.insert(attribute.clone(), value.clone());
        self.last_reading = timestamp;
    }

    /// Pop expired readings and evict entries that lost their last one.
    fn sweep(&mut self, now: Minutes, op: Op, events: &mut Vec<CacheEvent>) {
        for popped in self.window.pop_expired(now, self.threshold) {
            if !popped.last_of_attribute {
                continue;
            }
            let attribute = &popped.item.attribute;
            self.cmu.mark_stale(attribute);
            let expired = self
                .entries
                .get(attribute)
                .is_some_and(|entry| entry.age(now) > self.threshold);
            if expired {
                self.entries.remove(attribute);
                events.push(CacheEvent::new(now, op, attribute, Outcome::EvictedExpired));
            }
        }
    }

    /// Lowest weight first, then oldest refresh, then oldest insertion.
    fn capacity_victim(&self) -> Option<&CacheEntry> {
        self.entries.values().min_by(|a, b| {
            a.weight
                .total_cmp(&b.weight)
                .then(a.last_refreshed.total_cmp(&b.last_refreshed))
                .then(a.seq.cmp(&b.seq))
        })
    }

    fn store(
        &mut self,
        attribute: &AttributeId,
        value: Payload,
        timestamp: Minutes,
        now: Minutes,
        op: Op,
        events: &mut Vec<CacheEvent>,
    ) {
        if !self.admission.contains(attribute) {
            events.push(CacheEvent::new(now, op, attribute, Outcome::IgnoredNotAdmissible));
            return;
        }
        if now - timestamp > self.threshold {
            events.push(CacheEvent::new(now, op, attribute, Outcome::IgnoredStale));
            return;
        }
        if let Some(entry) = self.entries.get_mut(attribute) {
            entry.value = value;
            entry.last_refreshed = timestamp;
            events.push(CacheEvent::new(now, op, attribute, Outcome::Refreshed));
            return;
        }
        let weight = self.weights.get(attribute).copied().unwrap_or(0.0);
        if self.entries.len() >= self.capacity {
            let victim = self.capacity_victim().expect("full cache has entries");
            if weight < victim.weight {
                events.push(CacheEvent::new(now, op, attribute, Outcome::IgnoredLowPriority));
                return;
            }
            let victim = victim.attribute.clone();
            self.entries.remove(&victim);
            events.push(CacheEvent::new(now, op, &victim, Outcome::EvictedCapacity));
        }
        self.seq += 1;
        self.entries.insert(
            attribute.clone(),
            CacheEntry {
                attribute: attribute.clone(),
                value,
                inserted_at: timestamp,
                last_refreshed: timestamp,
                weight,
                seq: self.seq,
            },
        );
        events.push(CacheEvent::new(now, op, attribute, Outcome::Inserted));
    }
}

impl ContextCache for FreshnessCache {
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
        let mut events = Vec::new();
        self.record_reading(&observation.attribute, &observation.value, observation.timestamp);
        self.sweep(now, Op::Ingest, &mut events);
        self.store(
            &observation.attribute,
            observation.value.clone(),
            observation.timestamp,
            now,
            Op::Ingest,
            &mut events,
        );
        Ok(events)
    }

    /// A `now` earlier than the cache clock is treated as the clock.
    fn lookup(&mut self, attribute: &AttributeId, now: Minutes) -> LookupResult {
        let now = now.max(self.clock).max(self.last_reading);
        self.clock = now;
        let mut events = Vec::new();
        self.sweep(now, Op::Lookup, &mut events);

        let outcome = match self.entries.get(attribute) {
            Some(entry) if entry.age(now) <= self.threshold => LookupOutcome::Hit { stale: false },
            Some(_) => LookupOutcome::ExpiredHit,
            None => LookupOutcome::Miss,
        };
        events.push(CacheEvent::new(now, Op::Lookup, attribute, outcome.as_outcome()));
        if outcome == LookupOutcome::ExpiredHit {
            self.entries.remove(attribute);
            events.push(CacheEvent::new(now, Op::Lookup, attribute, Outcome::EvictedExpired));
        }
        if outcome != (LookupOutcome::Hit { stale: false }) {
            // Simulated provider fetch, completing instantly at `now`.
            let value = self.latest.get(attribute).cloned().unwrap_or(Payload::Null);
            self.record_reading(attribute, &value, now);
            self.store(attribute, value, now, now, Op::Lookup, &mut events);
        }
        LookupResult { outcome, events }
    }

    fn len(&self) -> usize {
        self.entries.len()
    }

    fn capacity(&self) -> usize {
        self.capacity
    }
}
