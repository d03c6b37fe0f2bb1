use serde::{Deserialize, Serialize};

use super::ConsistencyDiagnostics;
use crate::attribute::AttributeId;

/// Rank 1 goes to the largest weight. Equal weights keep list order.
pub fn rank_criteria(weights: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..weights.len()).collect();
    // Stable sort keeps earlier attributes ahead on ties.
    order.sort_by(|&a, &b| weights[b].total_cmp(&weights[a]));
    let mut ranks = vec![0; weights.len()];
    for (position, index) in order.into_iter().enumerate() {
        ranks[index] = position + 1;
    }
    ranks
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedAttribute {
    pub id: AttributeId,
    pub weight: f64,
    pub rank: usize,
    /// Fraction of sensitivity trials in which this attribute kept its rank.
    pub stability: f64,
}

/// Output of the decision stage, in the order the attributes were declared.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeRanking {
    pub attributes: Vec<RankedAttribute>,
    pub diagnostics: ConsistencyDiagnostics,
}

impl AttributeRanking {
    pub(crate) fn new(
        ids: Vec<AttributeId>,
        weights: Vec<f64>,
        ranks: Vec<usize>,
        stability: Vec<f64>,
        diagnostics: ConsistencyDiagnostics,
    ) -> Self {
        let attributes = ids
            .into_iter()
            .zip(weights)
            .zip(ranks)
            .zip(stability)
            .map(|(((id, weight), rank), stability)| RankedAttribute { id, weight, rank, stability })
            .collect();
        Self { attributes, diagnostics }
    }

    pub fn len(&self) -> usize {
        self.attributes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.attributes.is_empty()
    }

    pub fn ids(&self) -> Vec<AttributeId> {
        self.attributes.iter().map(|a| a.id.clone()).collect()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.attributes.iter().map(|a| a.weight).collect()
    }

    pub fn ranks(&self) -> Vec<usize> {
        self.attributes.iter().map(|a| a.rank).collect()
    }

    pub fn get(&self, id: &AttributeId) -> Option<&RankedAttribute> {
        self.attributes.iter().find(|a| &a.id == id)
    }

    pub fn weight(&self, id: &AttributeId) -> Option<f64> {
        self.get(id).map(|a| a.weight)
    }

    pub fn rank(&self, id: &AttributeId) -> Option<usize> {
        self.get(id).map(|a| a.rank)
    }

    /// Attribute ids ordered by rank, best first.
    pub fn by_rank(&self) -> Vec<&RankedAttribute> {
        let mut sorted: Vec<&RankedAttribute> = self.attributes.iter().collect();
        sorted.sort_by_key(|a| a.rank);
        sorted
    }

    pub fn top(&self, k: usize) -> Vec<AttributeId> {
        self.by_rank().into_iter().take(k).map(|a| a.id.clone()).collect()
    }
}
