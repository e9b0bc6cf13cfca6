//! Non-streaming Markov blanket oracle: exhaustive elimination driven
//! directly by the strong-relevance and redundance definitions, using the
//! same CI tests as the streaming graph. Exponential in D; capped at 12
//! features.

use std::collections::BTreeSet;
use std::sync::Arc;

use itertools::Itertools;

use crate::ci::{self, CiError, SignificanceConfig};
use crate::column::{ColumnKind, FeatureColumn, FeatureId};

pub const MAX_FEATURES: usize = 12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OracleError {
    #[error("exhaustive search supports at most {MAX_FEATURES} features, got {0}")]
    TooManyFeatures(usize),
    #[error(transparent)]
    Ci(#[from] CiError),
}

/// The set of features for which no conditioning subset of the remaining
/// features (up to cfg.max_cond_size) renders the target independent.
///
/// Features are eliminated to a fixpoint, scanning highest arrival index
/// first, so among exact duplicates the lowest index survives.
pub fn brute_force_mb(
    features: &[Arc<FeatureColumn>],
    target: &FeatureColumn,
    cfg: &SignificanceConfig,
    kind: ColumnKind,
) -> Result<BTreeSet<FeatureId>, OracleError> {
    if features.len() > MAX_FEATURES {
        return Err(OracleError::TooManyFeatures(features.len()));
    }

    let mut kept: Vec<usize> = Vec::new();
    for (i, col) in features.iter().enumerate() {
        if col.is_constant() {
            continue;
        }
        match ci::ci_test(col, target, &[], cfg, kind) {
            Ok(res) if res.independent => {}
            Ok(_) => kept.push(i),
            Err(CiError::ZeroVariance(_)) => {}
            Err(e) => return Err(e.into()),
        }
    }

    loop {
        let mut removed = None;
        'outer: for &i in kept.iter().rev() {
            let pool: Vec<usize> = kept.iter().copied().filter(|&j| j != i).collect();
            let max_size = cfg.max_cond_size.min(pool.len());
            for size in 1..=max_size {
                for combo in pool.iter().copied().combinations(size) {
                    let zcols: Vec<&FeatureColumn> = combo.iter().map(|&j| features[j].as_ref()).collect();
                    match ci::ci_test(&features[i], target, &zcols, cfg, kind) {
                        Ok(res) if res.independent => {
                            removed = Some(i);
                            break 'outer;
                        }
                        Ok(_) => {}
                        Err(CiError::SingularMatrix) => {}
                        Err(e) => return Err(e.into()),
                    }
                }
            }
        }
        match removed {
            Some(i) => kept.retain(|&j| j != i),
            None => break,
        }
    }

    Ok(kept.into_iter().map(FeatureId).collect())
}
