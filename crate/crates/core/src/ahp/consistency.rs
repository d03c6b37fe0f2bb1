use serde::{Deserialize, Serialize};

use super::{AhpError, ComparisonMatrix};

pub const DEFAULT_CR_THRESHOLD: f64 = 0.10;
pub const MAX_RANDOM_INDEX_ORDER: usize = 15;

/// Consistency indices below this are floating point residue of a
/// consistent matrix and are reported as exactly zero.
const CI_NOISE_FLOOR: f64 = 1e-10;

/// Mean consistency index of random reciprocal matrices, indexed by order.
///
/// Orders 1 and 2 are zero by definition. The remaining entries come from
/// `examples/random_index.rs` (200,000 matrices per order, judgments drawn
/// uniformly from the 17-point scale 1/9..9, seed 0x5EED).
pub const RANDOM_INDEX: [f64; MAX_RANDOM_INDEX_ORDER + 1] = [
    0.0, // unused
    0.0, 0.0, RI_3, RI_4, RI_5, RI_6, RI_7, RI_8, RI_9, RI_10, RI_11, RI_12, RI_13, RI_14, RI_15,
];

const RI_3: f64 = 0.5259;
const RI_4: f64 = 0.8853;
const RI_5: f64 = 1.1092;
const RI_6: f64 = 1.2487;
const RI_7: f64 = 1.3412;
const RI_8: f64 = 1.4029;
const RI_9: f64 = 1.4502;
const RI_10: f64 = 1.4858;
const RI_11: f64 = 1.5140;
const RI_12: f64 = 1.5364;
const RI_13: f64 = 1.5555;
const RI_14: f64 = 1.5700;
const RI_15: f64 = 1.5844;

pub fn random_index(order: usize) -> Result<f64, AhpError> {
    if !(1..=MAX_RANDOM_INDEX_ORDER).contains(&order) {
        return Err(AhpError::UnsupportedOrder(order));
    }
    Ok(RANDOM_INDEX[order])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyDiagnostics {
    pub lambda_max: f64,
    pub ci: f64,
    /// Single-matrix hierarchy: the average consistency index equals CI.
    pub aci: f64,
    pub cr: f64,
    pub ri: f64,
    pub cr_threshold: f64,
    pub consistent: bool,
}

impl ConsistencyDiagnostics {
    pub(crate) fn apply_threshold(&mut self, threshold: f64) {
        self.cr_threshold = threshold;
        self.consistent = self.cr <= threshold;
    }
}

/// Saaty consistency diagnostics for a matrix and its priority weights.
///
/// `lambda_max` is the mean of `(A w)_i / w_i`. The verdict uses
/// [`DEFAULT_CR_THRESHOLD`]; [`super::run_dsa`] re-applies its own threshold.
pub fn calculate_consistency(
    matrix: &ComparisonMatrix,
    weights: &[f64],
) -> Result<ConsistencyDiagnostics, AhpError> {
    let n = matrix.order();
    if weights.len() != n {
        return Err(AhpError::DimensionMismatch { expected: n, found: weights.len() });
    }
    let product = matrix.mul_vec(weights);
    let lambda_max = product.iter().zip(weights).map(|(aw, w)| aw / w).sum::<f64>() / n as f64;
    let ri = random_index(n)?;
    let (ci, cr) = if n <= 2 {
        (0.0, 0.0)
    } else {
        let raw = (lambda_max - n as f64) / (n as f64 - 1.0);
        let ci = if raw.abs() < CI_NOISE_FLOOR { 0.0 } else { raw };
        (ci, ci / ri)
    };
    let mut diagnostics = ConsistencyDiagnostics {
        lambda_max,
        ci,
        aci: ci,
        cr,
        ri,
        cr_threshold: DEFAULT_CR_THRESHOLD,
        consistent: false,
    };
    diagnostics.apply_threshold(DEFAULT_CR_THRESHOLD);
    Ok(diagnostics)
}
