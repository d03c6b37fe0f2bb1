use super::{AhpError, ComparisonMatrix};

/// Stop when no component moves by more than this fraction between iterations.
pub const POWER_TOLERANCE: f64 = 1e-10;
pub const POWER_MAX_ITERATIONS: usize = 500;

/// Principal right eigenvector of the matrix, normalised to sum 1.
///
/// Power iteration from the uniform vector. For a positive matrix the
/// dominant eigenvalue is simple and its eigenvector strictly positive, so the
/// iterates stay positive and converge geometrically.
pub fn calculate_priority_weights(matrix: &ComparisonMatrix) -> Result<Vec<f64>, AhpError> {
    let n = matrix.order();
    let mut current = vec![1.0 / n as f64; n];
    for _ in 0..POWER_MAX_ITERATIONS {
        let mut next = matrix.mul_vec(&current);
        let total: f64 = next.iter().sum();
        next.iter_mut().for_each(|x| *x /= total);
        let change = next
            .iter()
            .zip(&current)
            .map(|(a, b)| (a - b).abs() / a)
            .fold(0.0, f64::max);
        current = next;
        if change <= POWER_TOLERANCE {
            return Ok(current);
        }
    }
    Err(AhpError::NonConvergence(POWER_MAX_ITERATIONS))
}
