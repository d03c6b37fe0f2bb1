use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{
    build_comparison_matrix, calculate_priority_weights, rank_criteria, AhpError, ComparisonMatrix,
    Judgment,
};

/// Per-attribute rank stability under random multiplicative judgment noise.
///
/// Each trial scales every upper-triangle judgment by an independent factor
/// drawn uniformly from `[1 - perturbation, 1 + perturbation)`, mirrors it to
/// the lower triangle, recomputes the weights and compares ranks with the
/// unperturbed ranking. Draws are consumed trial by trial, pairs in row-major
/// order, from a ChaCha8 stream seeded with `seed`.
pub fn perform_sensitivity_analysis(
    matrix: &ComparisonMatrix,
    weights: &[f64],
    perturbation: f64,
    trials: usize,
    seed: u64,
) -> Result<Vec<f64>, AhpError> {
    let n = matrix.order();
    if weights.len() != n {
        return Err(AhpError::DimensionMismatch { expected: n, found: weights.len() });
    }
    if !(0.0..1.0).contains(&perturbation) {
        return Err(AhpError::InvalidSensitivity(format!(
            "perturbation must lie in [0, 1), got {perturbation}"
        )));
    }
    if trials == 0 {
        return Err(AhpError::InvalidSensitivity("at least one trial is required".into()));
    }

    let baseline = rank_criteria(weights);
    let upper = matrix.upper_judgments();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut preserved = vec![0usize; n];
    let mut perturbed = Vec::with_capacity(upper.len());
    for _ in 0..trials {
        perturbed.clear();
        for judgment in &upper {
            let u: f64 = rng.random();
            let factor = 1.0 + perturbation * (2.0 * u - 1.0);
            perturbed.push(Judgment::new(judgment.row, judgment.col, judgment.value * factor));
        }
        let noisy = build_comparison_matrix(matrix.attributes(), &perturbed)?;
        let ranks = rank_criteria(&calculate_priority_weights(&noisy)?);
        for (count, (a, b)) in preserved.iter_mut().zip(ranks.iter().zip(&baseline)) {
            if a == b {
                *count += 1;
            }
        }
    }
    Ok(preserved.into_iter().map(|c| c as f64 / trials as f64).collect())
}
