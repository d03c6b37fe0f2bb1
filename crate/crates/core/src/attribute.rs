use std::fmt;

use serde::{Deserialize, Deserializer, Serialize};

/// Identifier of one context attribute, e.g. `speed` or `traffic_density`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct AttributeId(String);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("attribute id must be non-empty")]
pub struct EmptyAttributeId;

impl AttributeId {
    pub fn new(id: impl Into<String>) -> Result<Self, EmptyAttributeId> {
        let id = id.into();
        if id.trim().is_empty() {
            return Err(EmptyAttributeId);
        }
        Ok(Self(id))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for AttributeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for AttributeId {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(deserializer)?;
        AttributeId::new(raw).map_err(serde::de::Error::custom)
    }
}

/// Convenience for tests and literals. Panics on an empty id.
impl From<&str> for AttributeId {
    fn from(value: &str) -> Self {
        AttributeId::new(value).expect("attribute id literal must be non-empty")
    }
}

/// Build a list of ids from string literals.
pub fn ids<I, S>(names: I) -> Vec<AttributeId>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    names.into_iter().map(|s| AttributeId::from(s.as_ref())).collect()
}
