//! Dataset ingestion and the feature stream: CSV loading with fixed
//! preprocessing, label/protected designation, and stream ordering.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::column::{ColumnKind, FeatureColumn, FeatureId};

#[derive(Debug, thiserror::Error)]
pub enum DataError {
    #[error("column `{0}` not found in the header")]
    MissingColumn(String),
    #[error("label column `{0}` does not take exactly two values")]
    NonBinaryLabel(String),
    #[error("protected column `{0}` is non-numeric with more than two values")]
    NonBinaryProtected(String),
    #[error("no rows remain after dropping rows with missing values")]
    EmptyAfterCleaning,
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// A fixed instance set with designated binary label and protected columns.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub features: Vec<Arc<FeatureColumn>>,
    pub label: Arc<FeatureColumn>,
    pub protected: Arc<FeatureColumn>,
    pub n: usize,
    /// Rows removed during ingestion because of missing values.
    pub dropped_rows: usize,
}

impl Dataset {
    pub fn d(&self) -> usize {
        self.features.len()
    }

    pub fn feature(&self, id: FeatureId) -> &Arc<FeatureColumn> {
        &self.features[id.0]
    }

    pub fn feature_names(&self) -> Vec<&str> {
        self.features.iter().map(|c| c.name.as_str()).collect()
    }

    /// Restrict every column to the given rows.
    pub fn take_rows(&self, rows: &[usize]) -> Dataset {
        Dataset {
            features: self.features.iter().map(|c| Arc::new(c.take_rows(rows))).collect(),
            label: Arc::new(self.label.take_rows(rows)),
            protected: Arc::new(self.protected.take_rows(rows)),
            n: rows.len(),
            dropped_rows: 0,
        }
    }

    /// Make every column usable under one test kind: continuous mode
    /// standardizes everything (including integer-coded categoricals),
    /// categorical mode discretizes continuous columns into `bins`
    /// equal-frequency bins.
    pub fn coerced(&self, kind: ColumnKind, bins: usize) -> Dataset {
        let convert = |c: &FeatureColumn| -> FeatureColumn {
            match kind {
                ColumnKind::Continuous => c.standardized(),
                ColumnKind::Categorical => match c.kind {
                    ColumnKind::Categorical => c.clone(),
                    ColumnKind::Continuous => discretize(c, bins),
                },
            }
        };
        Dataset {
            features: self.features.iter().map(|c| Arc::new(convert(c))).collect(),
            // Label and protected stay binary 0/1; only the tag changes.
            label: Arc::new(retag(&self.label, kind)),
            protected: Arc::new(retag(&self.protected, kind)),
            n: self.n,
            dropped_rows: self.dropped_rows,
        }
    }
}

fn retag(c: &FeatureColumn, kind: ColumnKind) -> FeatureColumn {
    FeatureColumn { name: c.name.clone(), kind, values: c.values.clone() }
}

/// Equal-frequency binning into at most `bins` levels.
fn discretize(c: &FeatureColumn, bins: usize) -> FeatureColumn {
    let n = c.values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| c.values[a].total_cmp(&c.values[b]));
    let mut codes = vec![0.0; n];
    for (rank, &row) in order.iter().enumerate() {
        codes[row] = ((rank * bins) / n.max(1)).min(bins - 1) as f64;
    }
    FeatureColumn { name: c.name.clone(), kind: ColumnKind::Categorical, values: codes }
}

/// Arrival order of the feature stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StreamOrder {
    Natural,
    Shuffled(u64),
}

impl std::str::FromStr for StreamOrder {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "natural" {
            return Ok(StreamOrder::Natural);
        }
        if let Some(seed) = s.strip_prefix("shuffled:") {
            return seed
                .parse::<u64>()
                .map(StreamOrder::Shuffled)
                .map_err(|_| format!("invalid shuffle seed `{seed}`"));
        }
        Err(format!("invalid order `{s}` (expected `natural` or `shuffled:<seed>`)"))
    }
}

impl std::fmt::Display for StreamOrder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            StreamOrder::Natural => write!(f, "natural"),
            StreamOrder::Shuffled(seed) => write!(f, "shuffled:{seed}"),
        }
    }
}

/// The feature stream: every feature exactly once in the given order.
/// Label and protected columns are never part of the stream.
pub fn stream(dataset: &Dataset, order: StreamOrder) -> Vec<(FeatureId, Arc<FeatureColumn>)> {
    let mut idx: Vec<usize> = (0..dataset.d()).collect();
    if let StreamOrder::Shuffled(seed) = order {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        idx.shuffle(&mut rng);
    }
    idx.into_iter()
        .map(|i| (FeatureId(i), Arc::clone(&dataset.features[i])))
        .collect()
}

/// Load a CSV dataset (RFC-4180 quoting, header row required, UTF-8).
///
/// Rows containing missing values (empty fields or `?`) are dropped and
/// counted. Continuous columns are standardized to mean 0 / variance 1;
/// string columns are integer-encoded by sorted level order. A numeric
/// protected column with more than two values is binarized at its median.
pub fn load_csv(
    path: impl AsRef<Path>,
    label_col: &str,
    protected_col: &str,
    type_map: &BTreeMap<String, ColumnKind>,
) -> Result<Dataset, DataError> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path.as_ref())?;
    let headers: Vec<String> = reader.headers()?.iter().map(|h| h.to_string()).collect();
    let label_idx = headers
        .iter()
        .position(|h| h == label_col)
        .ok_or_else(|| DataError::MissingColumn(label_col.to_string()))?;
    let protected_idx = headers
        .iter()
        .position(|h| h == protected_col)
        .ok_or_else(|| DataError::MissingColumn(protected_col.to_string()))?;

    let mut rows: Vec<Vec<String>> = Vec::new();
    let mut dropped = 0usize;
    for record in reader.records() {
        let record = record?;
        let fields: Vec<String> = record.iter().map(|f| f.to_string()).collect();
        if fields.len() != headers.len() || fields.iter().any(|f| f.is_empty() || f == "?") {
            dropped += 1;
            continue;
        }
        rows.push(fields);
    }
    if rows.is_empty() {
        return Err(DataError::EmptyAfterCleaning);
    }
    let n = rows.len();

    let encode = |col: usize| -> FeatureColumn {
        let raw: Vec<&str> = rows.iter().map(|r| r[col].as_str()).collect();
        let name = &headers[col];
        let forced = type_map.get(name).copied();
        let numeric: Option<Vec<f64>> = raw.iter().map(|v| v.parse::<f64>().ok()).collect();
        match (numeric, forced) {
            (Some(vals), None | Some(ColumnKind::Continuous)) => {
                FeatureColumn::continuous(name.clone(), vals).standardized()
            }
            (Some(vals), Some(ColumnKind::Categorical)) => {
                FeatureColumn::categorical(name.clone(), vals.iter().map(|v| v.round() as i64).collect())
            }
            (None, _) => {
                let mut levels: Vec<&str> = raw.clone();
                levels.sort_unstable();
                levels.dedup();
                let codes = raw
                    .iter()
                    .map(|v| levels.binary_search(v).unwrap() as i64)
                    .collect();
                FeatureColumn::categorical(name.clone(), codes)
            }
        }
    };

    let binarize = |col: usize, is_label: bool| -> Result<FeatureColumn, DataError> {
        let name = &headers[col];
        let raw: Vec<&str> = rows.iter().map(|r| r[col].as_str()).collect();
        let mut levels: Vec<&str> = raw.clone();
        levels.sort_unstable();
        levels.dedup();
        if levels.len() == 2 {
            let values = raw.iter().map(|v| if *v == levels[0] { 0.0 } else { 1.0 }).collect();
            return Ok(FeatureColumn { name: name.clone(), kind: ColumnKind::Continuous, values });
        }
        let numeric: Option<Vec<f64>> = raw.iter().map(|v| v.parse::<f64>().ok()).collect();
        match numeric {
            Some(vals) if !is_label => {
                // Median binarization of a non-binary protected column.
                let mut sorted = vals.clone();
                sorted.sort_by(f64::total_cmp);
                let median = sorted[sorted.len() / 2];
                let values = vals.iter().map(|&v| if v < median { 0.0 } else { 1.0 }).collect();
                Ok(FeatureColumn { name: name.clone(), kind: ColumnKind::Continuous, values })
            }
            _ if is_label => Err(DataError::NonBinaryLabel(name.clone())),
            _ => Err(DataError::NonBinaryProtected(name.clone())),
        }
    };

    let label = binarize(label_idx, true)?;
    let protected = binarize(protected_idx, false)?;
    let features: Vec<Arc<FeatureColumn>> = (0..headers.len())
        .filter(|&i| i != label_idx && i != protected_idx)
        .map(|i| Arc::new(encode(i)))
        .collect();

    Ok(Dataset {
        features,
        label: Arc::new(label),
        protected: Arc::new(protected),
        n,
        dropped_rows: dropped,
    })
}
