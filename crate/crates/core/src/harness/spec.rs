use serde::{Deserialize, Serialize};

use super::{Cell, HarnessError};
use crate::cache::{Capacity, Minutes};
use crate::policies::{PolicyKind, RecencyVictim};
use crate::workload::{scenario_road_work, QuerySelection, WorkloadConfig};

fn default_repetitions() -> usize {
    10
}

fn default_window_size() -> usize {
    64
}

fn default_top_k() -> usize {
    4
}

/// A sweep definition, usually read from JSON.
///
/// `judgments` is resolved against the directory holding the spec file;
/// without it the built-in road-work judgments are used. Without
/// `workload` the road-work scenario is used. `num_queries` and `seed` of
/// the workload are replaced per cell; `selection` and
/// `attributes_per_query` override the workload's own values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub name: String,
    pub policies: Vec<PolicyKind>,
    pub thresholds: Vec<Minutes>,
    pub queries: Vec<usize>,
    pub capacities: Vec<Capacity>,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub workload: Option<WorkloadConfig>,
    /// Replaces the workload's query selection.
    #[serde(default)]
    pub selection: Option<QuerySelection>,
    /// Replaces the workload's attributes per query.
    #[serde(default)]
    pub attributes_per_query: Option<usize>,
    #[serde(default)]
    pub judgments: Option<String>,
    #[serde(default)]
    pub output_dir: Option<String>,
    #[serde(default = "default_window_size")]
    pub window_size: usize,
    #[serde(default = "default_top_k")]
    pub top_k: usize,
    #[serde(default)]
    pub workers: Option<usize>,
    #[serde(default)]
    pub emit_events: bool,
    #[serde(default)]
    pub count_expired_as_hit: bool,
    #[serde(default)]
    pub recency_victim: RecencyVictim,
    #[serde(default)]
    pub notes: Option<String>,
}

/// Per-cell knobs that do not vary across the product.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellSettings {
    pub window_size: usize,
    pub top_k: usize,
    pub recency_victim: RecencyVictim,
    pub count_expired_as_hit: bool,
}

impl Default for CellSettings {
    fn default() -> Self {
        Self {
            window_size: default_window_size(),
            top_k: default_top_k(),
            recency_victim: RecencyVictim::LeastRecent,
            count_expired_as_hit: false,
        }
    }
}

impl ExperimentSpec {
    /// Road-work defaults: PFPA only, T = 20, 500 queries, full capacity.
    pub fn named(name: &str) -> Self {
        Self {
            name: name.to_string(),
            policies: vec![PolicyKind::Pfpa],
            thresholds: vec![20.0],
            queries: vec![500],
            capacities: vec![Capacity::Fraction(1.0)],
            repetitions: default_repetitions(),
            seed: None,
            workload: None,
            selection: None,
            attributes_per_query: None,
            judgments: None,
            output_dir: None,
            window_size: default_window_size(),
            top_k: default_top_k(),
            workers: None,
            emit_events: false,
            count_expired_as_hit: false,
            recency_victim: RecencyVictim::LeastRecent,
            notes: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        serde_json::from_str(text).map_err(|e| HarnessError::ConfigInvalid(format!("experiment spec: {e}")))
    }

    pub fn load(path: &std::path::Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Self::from_json(&text).map_err(|e| HarnessError::ConfigInvalid(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let invalid = |what: &str| Err(HarnessError::ConfigInvalid(what.to_string()));
        if self.name.is_empty() || !self.name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
            return invalid("name must be non-empty and use [A-Za-z0-9_-]");
        }
        if self.policies.is_empty() {
            return invalid("policy list is empty");
        }
        if self.thresholds.is_empty() {
            return invalid("threshold list is empty");
        }
        if self.queries.is_empty() {
            return invalid("query-volume list is empty");
        }
        if self.capacities.is_empty() {
            return invalid("capacity list is empty");
        }
        if self.repetitions == 0 {
            return invalid("repetitions must be at least 1");
        }
        if let Some(t) = self.thresholds.iter().find(|t| !(t.is_finite() && **t > 0.0)) {
            return Err(HarnessError::ConfigInvalid(format!("threshold {t} must be positive")));
        }
        if self.queries.contains(&0) {
            return invalid("query volumes must be positive");
        }
        Ok(())
    }

    pub fn workload_config(&self) -> WorkloadConfig {
        let mut config = self.workload.clone().unwrap_or_else(scenario_road_work);
        if let Some(selection) = self.selection {
            config.selection = selection;
        }
        if let Some(k) = self.attributes_per_query {
            config.attributes_per_query = k;
        }
        config
    }

    pub fn base_seed(&self) -> u64 {
        self.seed.unwrap_or_else(|| self.workload_config().seed)
    }

    pub fn settings(&self) -> CellSettings {
        CellSettings {
            window_size: self.window_size,
            top_k: self.top_k,
            recency_victim: self.recency_victim,
            count_expired_as_hit: self.count_expired_as_hit,
        }
    }

    /// Cells in policy, threshold, volume, capacity, repetition order.
    ///
    /// Repetition `r` uses seed `base + r` in every cell, so policies and
    /// settings are compared on the same traces.
    pub fn cells(&self) -> Vec<Cell> {
        let base = self.base_seed();
        let mut cells = Vec::new();
        for &policy in &self.policies {
            for &threshold_t in &self.thresholds {
                for &queries in &self.queries {
                    for &capacity in &self.capacities {
                        for repetition in 0..self.repetitions {
                            cells.push(Cell {
                                index: cells.len(),
                                policy,
                                threshold_t,
                                queries,
                                capacity,
                                repetition,
                                seed: base.wrapping_add(repetition as u64),
                            });
                        }
                    }
                }
            }
        }
        cells
    }

    /// Number of cells in the product.
    pub fn cell_count(&self) -> usize {
        self.policies.len() * self.thresholds.len() * self.queries.len() * self.capacities.len() * self.repetitions
    }
}
