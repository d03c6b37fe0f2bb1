use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{run_dsa, AhpError, AttributeRanking, DsaOptions, Judgment, DEFAULT_CR_THRESHOLD};
use crate::attribute::AttributeId;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedJudgment {
    pub a: String,
    pub b: String,
    pub value: f64,
}

fn default_cr_threshold() -> f64 {
    DEFAULT_CR_THRESHOLD
}

/// On-disk judgment set:
/// `{"attributes": [...], "judgments": [{"a", "b", "value"}], "cr_threshold": 0.1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JudgmentFile {
    pub attributes: Vec<AttributeId>,
    pub judgments: Vec<NamedJudgment>,
    #[serde(default = "default_cr_threshold")]
    pub cr_threshold: f64,
}

impl JudgmentFile {
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn load(path: &Path) -> Result<Self, std::io::Error> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text).map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))
    }

    /// Resolve attribute names to matrix indices.
    pub fn indexed_judgments(&self) -> Result<Vec<Judgment>, AhpError> {
        let index: HashMap<&str, usize> = self
            .attributes
            .iter()
            .enumerate()
            .map(|(i, id)| (id.as_str(), i))
            .collect();
        let lookup = |name: &str| {
            index
                .get(name)
                .copied()
                .ok_or_else(|| AhpError::UnknownAttribute(name.to_string()))
        };
        self.judgments
            .iter()
            .map(|j| Ok(Judgment::new(lookup(&j.a)?, lookup(&j.b)?, j.value)))
            .collect()
    }

    /// Run the decision pipeline with this file's CR threshold.
    pub fn rank(&self, options: &DsaOptions) -> Result<AttributeRanking, AhpError> {
        let options = DsaOptions { cr_threshold: self.cr_threshold, ..*options };
        run_dsa(&self.attributes, &self.indexed_judgments()?, &options)
    }
}
