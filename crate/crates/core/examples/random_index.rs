//! Regenerates the random consistency index table in `ahp/consistency.rs`.
//!
//! For every order 3..=15, draws reciprocal matrices whose upper-triangle
//! judgments are uniform over {1/9, ..., 1/2, 1, 2, ..., 9}, and averages the
//! consistency index (lambda_max - n) / (n - 1).
//!
//!     cargo run --release --example random_index [samples]

use cclab::ahp::{calculate_priority_weights, ComparisonMatrix, Judgment, MAX_RANDOM_INDEX_ORDER};
use cclab::ahp::build_comparison_matrix;
use cclab::AttributeId;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

const SEED: u64 = 0x5EED;
const DEFAULT_SAMPLES: usize = 200_000;

fn scale() -> Vec<f64> {
    let mut values: Vec<f64> = (2..=9).rev().map(|k| 1.0 / k as f64).collect();
    values.extend((1..=9).map(|k| k as f64));
    values
}

fn lambda_max(matrix: &ComparisonMatrix) -> f64 {
    let w = calculate_priority_weights(matrix).expect("positive matrices converge");
    let aw = matrix.mul_vec(&w);
    aw.iter().zip(&w).map(|(a, b)| a / b).sum::<f64>() / w.len() as f64
}

fn mean_ci(order: usize, samples: usize) -> f64 {
    let attributes: Vec<AttributeId> = (0..order).map(|i| AttributeId::from(format!("c{i}").as_str())).collect();
    let scale = scale();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ order as u64);
    let mut total = 0.0;
    let mut judgments = Vec::with_capacity(order * (order - 1) / 2);
    for _ in 0..samples {
        judgments.clear();
        for i in 0..order {
            for j in (i + 1)..order {
                judgments.push(Judgment::new(i, j, scale[rng.random_range(0..scale.len())]));
            }
        }
        let matrix = build_comparison_matrix(&attributes, &judgments).expect("valid judgments");
        total += (lambda_max(&matrix) - order as f64) / (order as f64 - 1.0);
    }
    total / samples as f64
}

fn main() {
    let samples = std::env::args()
        .nth(1)
        .map(|s| s.parse().expect("sample count"))
        .unwrap_or(DEFAULT_SAMPLES);
    let table: Vec<(usize, f64)> = (3..=MAX_RANDOM_INDEX_ORDER)
        .into_par_iter()
        .map(|n| (n, mean_ci(n, samples)))
        .collect();
    for (n, ri) in table {
        println!("const RI_{n}: f64 = {ri:.4};");
    }
}
