use std::collections::HashSet;

use serde::Serialize;

use super::AhpError;
use crate::attribute::AttributeId;

/// Relative tolerance for `a[i][j] * a[j][i] == 1`.
pub const RECIPROCAL_TOLERANCE: f64 = 1e-9;

/// One pairwise judgment: how much more important attribute `row` is than `col`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Judgment {
    pub row: usize,
    pub col: usize,
    pub value: f64,
}

impl Judgment {
    pub fn new(row: usize, col: usize, value: f64) -> Self {
        Self { row, col, value }
    }
}

/// Positive reciprocal matrix of pairwise judgments, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonMatrix {
    attributes: Vec<AttributeId>,
    entries: Vec<f64>,
}

fn check_attributes(attributes: &[AttributeId]) -> Result<(), AhpError> {
    if attributes.len() < 2 {
        return Err(AhpError::TooFewAttributes(attributes.len()));
    }
    let mut seen = HashSet::with_capacity(attributes.len());
    for id in attributes {
        if !seen.insert(id) {
            return Err(AhpError::DuplicateAttribute(id.clone()));
        }
    }
    Ok(())
}

/// Assemble the full matrix from the `n(n-1)/2` independent judgments.
///
/// Judgments may be given in either orientation; `(j, i, v)` is read as
/// `(i, j, 1/v)`. Every unordered pair must be judged exactly once.
pub fn build_comparison_matrix(
    attributes: &[AttributeId],
    judgments: &[Judgment],
) -> Result<ComparisonMatrix, AhpError> {
    check_attributes(attributes)?;
    let n = attributes.len();
    let mut entries = vec![f64::NAN; n * n];
    for i in 0..n {
        entries[i * n + i] = 1.0;
    }
    for judgment in judgments {
        let Judgment { row, col, value } = *judgment;
        if row >= n || col >= n {
            return Err(AhpError::IndexOutOfRange { row, col, order: n });
        }
        if row == col {
            return Err(AhpError::SelfComparison(attributes[row].clone()));
        }
        if !(value.is_finite() && value > 0.0) {
            return Err(AhpError::NonPositiveJudgment {
                a: attributes[row].clone(),
                b: attributes[col].clone(),
                value,
            });
        }
        let (i, j, v) = if row < col { (row, col, value) } else { (col, row, 1.0 / value) };
        if !entries[i * n + j].is_nan() {
            return Err(AhpError::DuplicatePair {
                a: attributes[i].clone(),
                b: attributes[j].clone(),
            });
        }
        entries[i * n + j] = v;
        entries[j * n + i] = 1.0 / v;
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if entries[i * n + j].is_nan() {
                return Err(AhpError::MissingPair {
                    a: attributes[i].clone(),
                    b: attributes[j].clone(),
                });
            }
        }
    }
    Ok(ComparisonMatrix {
        attributes: attributes.to_vec(),
        entries,
    })
}

impl ComparisonMatrix {
    /// Validate a fully specified matrix (diagonal one, positive, reciprocal).
    pub fn from_rows(attributes: &[AttributeId], rows: &[Vec<f64>]) -> Result<Self, AhpError> {
        check_attributes(attributes)?;
        let n = attributes.len();
        if rows.len() != n {
            return Err(AhpError::DimensionMismatch { expected: n, found: rows.len() });
        }
        let mut entries = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(AhpError::DimensionMismatch { expected: n, found: row.len() });
            }
            entries.extend_from_slice(row);
        }
        for i in 0..n {
            for j in 0..n {
                let a = entries[i * n + j];
                let b = entries[j * n + i];
                let ok = a.is_finite()
                    && a > 0.0
                    && (a * b - 1.0).abs() <= RECIPROCAL_TOLERANCE
                    && (i != j || a == 1.0);
                if !ok {
                    return Err(AhpError::NotReciprocal { row: i, col: j });
                }
            }
        }
        Ok(Self {
            attributes: attributes.to_vec(),
            entries,
        })
    }

    /// The perfectly consistent matrix `a[i][j] = w[i] / w[j]`.
    pub fn from_weights(attributes: &[AttributeId], weights: &[f64]) -> Result<Self, AhpError> {
        check_attributes(attributes)?;
        let n = attributes.len();
        if weights.len() != n {
            return Err(AhpError::DimensionMismatch { expected: n, found: weights.len() });
        }
        let mut judgments = Vec::with_capacity(n * (n - 1) / 2);
        for i in 0..n {
            for j in (i + 1)..n {
                judgments.push(Judgment::new(i, j, weights[i] / weights[j]));
            }
        }
        build_comparison_matrix(attributes, &judgments)
    }

    pub fn order(&self) -> usize {
        self.attributes.len()
    }

    pub fn attributes(&self) -> &[AttributeId] {
        &self.attributes
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.entries[row * self.order() + col]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.entries.chunks(self.order()).map(<[f64]>::to_vec).collect()
    }

    /// Upper-triangle judgments in row-major order.
    pub fn upper_judgments(&self) -> Vec<Judgment> {
        let n = self.order();
        let mut out = Vec::with_capacity(n * (n - 1) / 2);
        for i in 0..n {
            for j in (i + 1)..n {
                out.push(Judgment::new(i, j, self.get(i, j)));
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        self.entries
            .chunks(self.order())
            .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }
}
