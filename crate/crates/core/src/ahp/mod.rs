//! Analytic hierarchy process used to prioritise context attributes.
//!
//! A context is treated as the goal and its attributes as the criteria of a
//! single-layer hierarchy. Pairwise judgments are turned into a positive
//! reciprocal matrix, the principal eigenvector gives the priority weights,
//! and the consistency ratio gates whether the judgments may be used at all.
//! With one criteria layer the global weights are the criteria weights.

mod consistency;
mod file;
mod matrix;
mod ranking;
mod sensitivity;
mod weights;

use thiserror::Error;

use crate::attribute::AttributeId;

pub use consistency::{
    calculate_consistency, random_index, ConsistencyDiagnostics, DEFAULT_CR_THRESHOLD,
    MAX_RANDOM_INDEX_ORDER, RANDOM_INDEX,
};
pub use file::{JudgmentFile, NamedJudgment};
pub use matrix::{build_comparison_matrix, ComparisonMatrix, Judgment, RECIPROCAL_TOLERANCE};
pub use ranking::{rank_criteria, AttributeRanking, RankedAttribute};
pub use sensitivity::perform_sensitivity_analysis;
pub use weights::{calculate_priority_weights, POWER_MAX_ITERATIONS, POWER_TOLERANCE};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AhpError {
    #[error("at least two attributes are required, got {0}")]
    TooFewAttributes(usize),
    #[error("attribute `{0}` listed more than once")]
    DuplicateAttribute(AttributeId),
    #[error("unknown attribute `{0}` in judgment")]
    UnknownAttribute(String),
    #[error("judgment index ({row}, {col}) out of range for {order} attributes")]
    IndexOutOfRange { row: usize, col: usize, order: usize },
    #[error("attribute `{0}` compared with itself")]
    SelfComparison(AttributeId),
    #[error("pair ({a}, {b}) judged more than once")]
    DuplicatePair { a: AttributeId, b: AttributeId },
    #[error("pair ({a}, {b}) has no judgment")]
    MissingPair { a: AttributeId, b: AttributeId },
    #[error("judgment for ({a}, {b}) must be positive and finite, got {value}")]
    NonPositiveJudgment { a: AttributeId, b: AttributeId, value: f64 },
    #[error("matrix is not a positive reciprocal matrix at ({row}, {col})")]
    NotReciprocal { row: usize, col: usize },
    #[error("power iteration did not converge within {0} iterations")]
    NonConvergence(usize),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("no random index for order {0} (supported: 1..=15)")]
    UnsupportedOrder(usize),
    #[error("invalid sensitivity parameters: {0}")]
    InvalidSensitivity(String),
    #[error("consistency ratio threshold must be positive and finite, got {0}")]
    InvalidThreshold(f64),
    #[error("Inconsistent pairwise comparisons (CR = {cr:.4} > {threshold:.4})", cr = .0.cr, threshold = .0.cr_threshold)]
    InconsistentJudgments(Box<ConsistencyDiagnostics>),
}

/// Knobs for [`run_dsa`] beyond the judgments themselves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DsaOptions {
    pub cr_threshold: f64,
    /// Relative half-width of the multiplicative judgment perturbation.
    pub perturbation: f64,
    pub trials: usize,
    pub seed: u64,
}

impl Default for DsaOptions {
    fn default() -> Self {
        Self {
            cr_threshold: DEFAULT_CR_THRESHOLD,
            perturbation: 0.1,
            trials: 200,
            seed: 0,
        }
    }
}

/// Full decision pipeline: matrix, weights, consistency gate, sensitivity, ranking.
///
/// Judgments whose consistency ratio exceeds `options.cr_threshold` are rejected
/// with [`AhpError::InconsistentJudgments`] before any ranking is produced.
pub fn run_dsa(
    attributes: &[AttributeId],
    judgments: &[Judgment],
    options: &DsaOptions,
) -> Result<AttributeRanking, AhpError> {
    if !(options.cr_threshold.is_finite() && options.cr_threshold > 0.0) {
        return Err(AhpError::InvalidThreshold(options.cr_threshold));
    }
    let matrix = build_comparison_matrix(attributes, judgments)?;
    rank_matrix(&matrix, options)
}

/// [`run_dsa`] for an already built matrix.
pub fn rank_matrix(
    matrix: &ComparisonMatrix,
    options: &DsaOptions,
) -> Result<AttributeRanking, AhpError> {
    let weights = calculate_priority_weights(matrix)?;
    let mut diagnostics = calculate_consistency(matrix, &weights)?;
    diagnostics.apply_threshold(options.cr_threshold);
    if !diagnostics.consistent {
        return Err(AhpError::InconsistentJudgments(Box::new(diagnostics)));
    }
    // Single criteria layer: global weights are the criteria weights.
    let global_weights = weights;
    let stability = perform_sensitivity_analysis(
        matrix,
        &global_weights,
        options.perturbation,
        options.trials,
        options.seed,
    )?;
    let ranks = rank_criteria(&global_weights);
    Ok(AttributeRanking::new(
        matrix.attributes().to_vec(),
        global_weights,
        ranks,
        stability,
        diagnostics,
    ))
}
