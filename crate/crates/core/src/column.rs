//! Feature columns and identifiers shared across the crate.

use serde::{Deserialize, Serialize};

/// Identifies a feature by its arrival round in the stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct FeatureId(pub usize);

impl std::fmt::Display for FeatureId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnKind {
    Continuous,
    Categorical,
}

/// One feature's values over all instances.
///
/// Categorical columns hold non-negative integer level codes stored as `f64`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureColumn {
    pub name: String,
    pub kind: ColumnKind,
    pub values: Vec<f64>,
}

impl FeatureColumn {
    pub fn continuous(name: impl Into<String>, values: Vec<f64>) -> Self {
        Self { name: name.into(), kind: ColumnKind::Continuous, values }
    }

    pub fn categorical(name: impl Into<String>, codes: Vec<i64>) -> Self {
        Self {
            name: name.into(),
            kind: ColumnKind::Categorical,
            values: codes.into_iter().map(|c| c as f64).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mean(&self) -> f64 {
        if self.values.is_empty() {
            return 0.0;
        }
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Population variance (denominator n).
    pub fn variance(&self) -> f64 {
        if self.values.is_empty() {
            return 0.0;
        }
        let m = self.mean();
        self.values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / self.values.len() as f64
    }

    pub fn is_constant(&self) -> bool {
        self.variance() <= 1e-24
    }

    /// Distinct integer levels of a categorical column, sorted.
    pub fn levels(&self) -> Vec<i64> {
        let mut lv: Vec<i64> = self.values.iter().map(|v| v.round() as i64).collect();
        lv.sort_unstable();
        lv.dedup();
        lv
    }

    /// Same values rescaled to mean 0, variance 1. Constant columns are
    /// returned unchanged (the caller routes those to Irrelevant).
    pub fn standardized(&self) -> Self {
        let m = self.mean();
        let v = self.variance();
        if v <= 1e-24 {
            return Self { name: self.name.clone(), kind: ColumnKind::Continuous, values: self.values.clone() };
        }
        let sd = v.sqrt();
        Self {
            name: self.name.clone(),
            kind: ColumnKind::Continuous,
            values: self.values.iter().map(|x| (x - m) / sd).collect(),
        }
    }

    /// Restrict to the given row indices.
    pub fn take_rows(&self, rows: &[usize]) -> Self {
        Self {
            name: self.name.clone(),
            kind: self.kind,
            values: rows.iter().map(|&r| self.values[r]).collect(),
        }
    }
}
