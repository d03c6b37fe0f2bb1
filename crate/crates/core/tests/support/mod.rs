//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use std::collections::HashMap;

use cclab::ahp::{rank_matrix, AttributeRanking, ComparisonMatrix, DsaOptions};
use cclab::cache::{CacheEvent, ContextCache, Minutes, Observation, Op, Outcome, Payload};
use cclab::policies::{PolicyKind, RecencyVictim};
use cclab::AttributeId;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Principal eigenpair of a positive matrix by dense eigendecomposition.
///
/// Returns (lambda_max, weights normalised to sum 1).
pub fn dense_principal_eigen(rows: &[Vec<f64>]) -> (f64, Vec<f64>) {
    let n = rows.len();
    let m = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
    let eigen = m.clone().complex_eigenvalues();
    let lambda = eigen.iter().map(|l| l.re).fold(f64::NEG_INFINITY, f64::max);
    // Null space of (A - lambda I) through SVD: right singular vector of the
    // smallest singular value.
    let shifted = &m - DMatrix::identity(n, n) * lambda;
    let svd = shifted.svd(false, true);
    let v_t = svd.v_t.unwrap();
    let smallest = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap();
    let v: Vec<f64> = v_t.row(smallest).iter().copied().collect();
    let sum: f64 = v.iter().sum();
    (lambda, v.iter().map(|x| x / sum).collect())
}

pub fn ids(n: usize) -> Vec<AttributeId> {
    (0..n).map(|i| AttributeId::from(format!("a{i}").as_str())).collect()
}

/// Consistent ranking with the given weights, attributes `a0..`.
pub fn ranking_from_weights(weights: &[f64]) -> AttributeRanking {
    let matrix = ComparisonMatrix::from_weights(&ids(weights.len()), weights).unwrap();
    rank_matrix(&matrix, &DsaOptions { trials: 1, ..DsaOptions::default() }).unwrap()
}

#[derive(Debug, Clone)]
pub enum Step {
    Ingest(Observation, Minutes),
    Lookup(AttributeId, Minutes),
}

/// Random interleaving of readings (some delayed) and lookups.
pub fn random_steps(seed: u64, attributes: usize, len: usize) -> Vec<Step> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let names = ids(attributes);
    let mut now = 0.0;
    let mut last_reading: f64 = 0.0;
    let mut steps = Vec::with_capacity(len);
    for i in 0..len {
        // Coarse steps make equal times and exact threshold ages common.
        now += f64::from(rng.random_range(0..4u8));
        let attribute = names[rng.random_range(0..attributes)].clone();
        if rng.random_bool(0.5) {
            let delay = f64::from(rng.random_range(0..20u8));
            let timestamp = (now - delay).max(last_reading);
            last_reading = timestamp;
            steps.push(Step::Ingest(Observation::new(attribute, Payload::Number(i as f64), timestamp), now));
        } else {
            last_reading = now;
            steps.push(Step::Lookup(attribute, now));
        }
    }
    steps
}

pub fn run_steps(cache: &mut dyn ContextCache, steps: &[Step]) -> Vec<CacheEvent> {
    let mut log = Vec::new();
    for step in steps {
        match step {
            Step::Ingest(observation, now) => log.extend(cache.ingest(observation, *now).unwrap()),
            Step::Lookup(attribute, now) => log.extend(cache.lookup(attribute, *now).events),
        }
    }
    log
}

struct NaiveEntry {
    attribute: AttributeId,
    weight: f64,
    last_refreshed: Minutes,
    seq: u64,
}

/// Freshness cache without a window structure: every reading is kept and
/// every entry is rescanned at each step.
///
/// Readings arrive in time order, so "still in the window" means "among the
/// last `window_size` readings and not older than the threshold".
pub struct NaivePfpa {
    threshold: Minutes,
    window_size: usize,
    capacity: usize,
    admissible: Vec<AttributeId>,
    weights: HashMap<AttributeId, f64>,
    readings: Vec<(AttributeId, Minutes)>,
    latest: HashMap<AttributeId, Payload>,
    entries: Vec<NaiveEntry>,
    clock: Minutes,
    last_reading: Minutes,
    seq: u64,
}

impl NaivePfpa {
    pub fn new(threshold: Minutes, window_size: usize, capacity: usize, top_k: usize, ranking: &AttributeRanking) -> Self {
        let mut by_weight: Vec<(AttributeId, f64)> =
            ranking.attributes.iter().map(|a| (a.id.clone(), a.weight)).collect();
        by_weight.sort_by(|a, b| b.1.total_cmp(&a.1));
        Self {
            threshold,
            window_size,
            capacity,
            admissible: by_weight.iter().take(top_k).map(|(id, _)| id.clone()).collect(),
            weights: by_weight.into_iter().collect(),
            readings: Vec::new(),
            latest: HashMap::new(),
            entries: Vec::new(),
            clock: f64::NEG_INFINITY,
            last_reading: f64::NEG_INFINITY,
            seq: 0,
        }
    }

    fn read(&mut self, attribute: &AttributeId, value: Payload, timestamp: Minutes) {
        self.readings.push((attribute.clone(), timestamp));
        self.latest.insert(attribute.clone(), value);
        self.last_reading = timestamp;
    }

    fn sweep(&mut self, now: Minutes, op: Op, log: &mut Vec<CacheEvent>) {
        let tracked_from = self.readings.len().saturating_sub(self.window_size);
        let mut expired: Vec<(Minutes, usize, AttributeId)> = Vec::new();
        for entry in &self.entries {
            let last = self.readings.iter().rposition(|(a, _)| *a == entry.attribute).unwrap();
            let (_, ts) = self.readings[last];
            if last >= tracked_from && now - ts > self.threshold && now - entry.last_refreshed > self.threshold {
                expired.push((ts, last, entry.attribute.clone()));
            }
        }
        expired.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        for (_, _, attribute) in expired {
            self.entries.retain(|e| e.attribute != attribute);
            log.push(CacheEvent::new(now, op, &attribute, Outcome::EvictedExpired));
        }
    }

    fn store(&mut self, attribute: &AttributeId, timestamp: Minutes, now: Minutes, op: Op, log: &mut Vec<CacheEvent>) {
        let event = |a: &AttributeId, o| CacheEvent::new(now, op, a, o);
        if !self.admissible.contains(attribute) {
            log.push(event(attribute, Outcome::IgnoredNotAdmissible));
            return;
        }
        if now - timestamp > self.threshold {
            log.push(event(attribute, Outcome::IgnoredStale));
            return;
        }
        if let Some(entry) = self.entries.iter_mut().find(|e| e.attribute == *attribute) {
            entry.last_refreshed = timestamp;
            log.push(event(attribute, Outcome::Refreshed));
            return;
        }
        let weight = self.weights[attribute];
        if self.entries.len() >= self.capacity {
            let mut victim = 0;
            for (i, e) in self.entries.iter().enumerate() {
                let v = &self.entries[victim];
                let better = (e.weight, e.last_refreshed, e.seq) < (v.weight, v.last_refreshed, v.seq);
                if better {
                    victim = i;
                }
            }
            if weight < self.entries[victim].weight {
                log.push(event(attribute, Outcome::IgnoredLowPriority));
                return;
            }
            let gone = self.entries.remove(victim);
            log.push(event(&gone.attribute, Outcome::EvictedCapacity));
        }
        self.seq += 1;
        self.entries.push(NaiveEntry { attribute: attribute.clone(), weight, last_refreshed: timestamp, seq: self.seq });
        log.push(event(attribute, Outcome::Inserted));
    }

    pub fn ingest(&mut self, observation: &Observation, now: Minutes) -> Vec<CacheEvent> {
        let mut log = Vec::new();
        self.clock = now;
        self.read(&observation.attribute, observation.value.clone(), observation.timestamp);
        self.sweep(now, Op::Ingest, &mut log);
        self.store(&observation.attribute, observation.timestamp, now, Op::Ingest, &mut log);
        log
    }

    pub fn lookup(&mut self, attribute: &AttributeId, now: Minutes) -> Vec<CacheEvent> {
        let now = now.max(self.clock).max(self.last_reading);
        self.clock = now;
        let mut log = Vec::new();
        self.sweep(now, Op::Lookup, &mut log);
        let age = self.entries.iter().find(|e| e.attribute == *attribute).map(|e| now - e.last_refreshed);
        match age {
            Some(age) if age <= self.threshold => {
                log.push(CacheEvent::new(now, Op::Lookup, attribute, Outcome::Hit));
                return log;
            }
            Some(_) => {
                log.push(CacheEvent::new(now, Op::Lookup, attribute, Outcome::ExpiredHit));
                self.entries.retain(|e| e.attribute != *attribute);
                log.push(CacheEvent::new(now, Op::Lookup, attribute, Outcome::EvictedExpired));
            }
            None => log.push(CacheEvent::new(now, Op::Lookup, attribute, Outcome::Miss)),
        }
        let value = self.latest.get(attribute).cloned().unwrap_or(Payload::Null);
        self.read(attribute, value, now);
        self.store(attribute, now, now, Op::Lookup, &mut log);
        log
    }

    pub fn run(&mut self, steps: &[Step]) -> Vec<CacheEvent> {
        let mut log = Vec::new();
        for step in steps {
            match step {
                Step::Ingest(observation, now) => log.extend(self.ingest(observation, *now)),
                Step::Lookup(attribute, now) => log.extend(self.lookup(attribute, *now)),
            }
        }
        log
    }
}

/// Recompute every capacity victim of a baseline run from the event history
/// alone. Returns the number of evictions checked, or the first mismatch.
pub fn replay_victims(policy: PolicyKind, victim: RecencyVictim, log: &[CacheEvent]) -> Result<usize, String> {
    struct Resident {
        inserted: usize,
        touched: usize,
        hits: usize,
    }
    let mut resident: HashMap<AttributeId, Resident> = HashMap::new();
    let mut checked = 0;
    for (i, event) in log.iter().enumerate() {
        match event.outcome {
            Outcome::Inserted => {
                resident.insert(event.attribute.clone(), Resident { inserted: i, touched: i, hits: 0 });
            }
            Outcome::Hit | Outcome::StaleHit => {
                let r = resident.get_mut(&event.attribute).ok_or(format!("hit on absent entry at {i}"))?;
                r.touched = i;
                r.hits += 1;
            }
            Outcome::EvictedCapacity => {
                let expected = resident
                    .iter()
                    .min_by_key(|(_, r)| match (policy, victim) {
                        (PolicyKind::Lfu, _) => (r.hits, r.inserted),
                        (PolicyKind::Ru, RecencyVictim::LeastRecent) => (r.touched, 0),
                        (PolicyKind::Ru, RecencyVictim::MostRecent) => (usize::MAX - r.touched, 0),
                        _ => (r.inserted, 0),
                    })
                    .map(|(a, _)| a.clone())
                    .ok_or(format!("eviction from empty cache at {i}"))?;
                if expected != event.attribute {
                    return Err(format!("event {i}: evicted {} but history says {}", event.attribute, expected));
                }
                resident.remove(&expected);
                checked += 1;
            }
            _ => {}
        }
    }
    Ok(checked)
}
