use std::collections::BTreeMap;

use crate::attribute::AttributeId;
use crate::cache::Minutes;

/// Continuous monitoring unit: per-attribute recency and stale flags.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CmuState {
    last_refreshed: BTreeMap<AttributeId, Minutes>,
    stale: BTreeMap<AttributeId, bool>,
}

impl CmuState {
    pub fn new(prioritized: &[AttributeId]) -> Self {
        let mut state = Self::default();
        for id in prioritized {
            state.stale.insert(id.clone(), true);
        }
        state
    }

    pub fn record(&mut self, attribute: &AttributeId, timestamp: Minutes) {
        self.last_refreshed.insert(attribute.clone(), timestamp);
        self.stale.insert(attribute.clone(), false);
    }

    pub fn mark_stale(&mut self, attribute: &AttributeId) {
        self.stale.insert(attribute.clone(), true);
    }

    pub fn last_refreshed(&self, attribute: &AttributeId) -> Option<Minutes> {
        self.last_refreshed.get(attribute).copied()
    }

    /// Age of the newest reading of `attribute`, if any was seen.
    pub fn check_threshold(&self, attribute: &AttributeId, now: Minutes) -> Option<Minutes> {
        self.last_refreshed(attribute).map(|t| now - t)
    }

    /// Attributes never seen count as stale.
    pub fn is_stale(&self, attribute: &AttributeId) -> bool {
        self.stale.get(attribute).copied().unwrap_or(true)
    }
}
