//! Set algebra deriving the selected feature subset from the two
//! egocentric graphs: inadmissible (IA), admissible (A), the blanket
//! intersection (MI), the initially selected set (RI), the replacement
//! pools (ICRF, AD1, AD2), and the final selection per variant.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::ci::SignificanceConfig;
use crate::column::FeatureId;
use crate::graph::{EgoGraph, GraphError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    Baseline,
    RemoveS,
    Osfs,
    SfcfRi,
    SfcfAd1,
    SfcfAd2,
}

impl Variant {
    pub const ALL: [Variant; 6] = [
        Variant::Baseline,
        Variant::RemoveS,
        Variant::Osfs,
        Variant::SfcfRi,
        Variant::SfcfAd1,
        Variant::SfcfAd2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Baseline => "baseline",
            Variant::RemoveS => "remove-s",
            Variant::Osfs => "osfs",
            Variant::SfcfRi => "sfcf-ri",
            Variant::SfcfAd1 => "sfcf-ad1",
            Variant::SfcfAd2 => "sfcf-ad2",
        }
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "baseline" => Ok(Variant::Baseline),
            "remove-s" => Ok(Variant::RemoveS),
            "osfs" => Ok(Variant::Osfs),
            "sfcf-ri" => Ok(Variant::SfcfRi),
            "sfcf-ad1" => Ok(Variant::SfcfAd1),
            "sfcf-ad2" => Ok(Variant::SfcfAd2),
            other => Err(format!(
                "unknown variant `{other}` (expected one of: baseline, remove-s, osfs, sfcf-ri, sfcf-ad1, sfcf-ad2)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SelectError {
    #[error("the two graph states cover different feature sets")]
    GraphMismatch,
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// All derived sets at one round, plus the final selection for a variant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionSnapshot {
    pub round: usize,
    pub variant: Variant,
    pub inadmissible: BTreeSet<FeatureId>,
    pub admissible: BTreeSet<FeatureId>,
    pub mi: BTreeSet<FeatureId>,
    pub ri: BTreeSet<FeatureId>,
    pub icrf: BTreeSet<FeatureId>,
    pub ad1: BTreeSet<FeatureId>,
    pub ad2: BTreeSet<FeatureId>,
    pub selected: BTreeSet<FeatureId>,
}

/// JSON shape of a snapshot with features spelled out by name.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SnapshotDump {
    pub round: usize,
    pub variant: String,
    pub inadmissible: Vec<String>,
    pub admissible: Vec<String>,
    pub mi: Vec<String>,
    pub ri: Vec<String>,
    pub icrf: Vec<String>,
    pub ad1: Vec<String>,
    pub ad2: Vec<String>,
    pub selected: Vec<String>,
}

impl SelectionSnapshot {
    pub fn dump(&self, g_y: &EgoGraph) -> SnapshotDump {
        let names = |s: &BTreeSet<FeatureId>| s.iter().map(|&id| g_y.feature_name(id).to_string()).collect();
        SnapshotDump {
            round: self.round,
            variant: self.variant.name().to_string(),
            inadmissible: names(&self.inadmissible),
            admissible: names(&self.admissible),
            mi: names(&self.mi),
            ri: names(&self.ri),
            icrf: names(&self.icrf),
            ad1: names(&self.ad1),
            ad2: names(&self.ad2),
            selected: names(&self.selected),
        }
    }
}

/// IA = MB(S) ∪ Redundant(S): every feature not irrelevant to the
/// protected attribute can leak or reconstruct bias.
pub fn inadmissible_set(g_s: &EgoGraph) -> BTreeSet<FeatureId> {
    g_s.markov_blanket().union(g_s.redundant()).copied().collect()
}

/// A = (MB(Y) ∪ Redundant(Y)) \ IA.
pub fn admissible_set(g_y: &EgoGraph, ia: &BTreeSet<FeatureId>) -> BTreeSet<FeatureId> {
    g_y.markov_blanket()
        .union(g_y.redundant())
        .copied()
        .filter(|f| !ia.contains(f))
        .collect()
}

/// MI = MB(Y) ∩ IA.
pub fn mi_set(g_y: &EgoGraph, ia: &BTreeSet<FeatureId>) -> BTreeSet<FeatureId> {
    g_y.markov_blanket().intersection(ia).copied().collect()
}

/// RI = MB(Y) \ MI.
pub fn ri_set(g_y: &EgoGraph, mi: &BTreeSet<FeatureId>) -> BTreeSet<FeatureId> {
    g_y.markov_blanket().difference(mi).copied().collect()
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SelectOptions {
    /// Re-test each AD replacement candidate against the label conditioned
    /// on RI, dropping candidates that remain independent. Off by default.
    pub revalidate: bool,
}

/// Derive the full snapshot for one variant from the two graph states.
///
/// The protected feature itself is excluded from every selected set
/// unconditionally, even when ingestion was configured to stream it.
pub fn select(
    g_y: &mut EgoGraph,
    g_s: &EgoGraph,
    variant: Variant,
    cfg: &SignificanceConfig,
    opts: &SelectOptions,
) -> Result<SelectionSnapshot, SelectError> {
    let processed_y: BTreeSet<FeatureId> = g_y.processed().iter().copied().collect();
    let processed_s: BTreeSet<FeatureId> = g_s.processed().iter().copied().collect();
    if processed_y != processed_s {
        return Err(SelectError::GraphMismatch);
    }

    let ia = inadmissible_set(g_s);
    let admissible = admissible_set(g_y, &ia);
    let mi = mi_set(g_y, &ia);
    let ri = ri_set(g_y, &mi);
    let icrf = g_y.corresponding_redundant(&mi);
    let mut ad1: BTreeSet<FeatureId> = icrf.intersection(&admissible).copied().collect();
    let mut ad2: BTreeSet<FeatureId> = icrf.intersection(g_s.redundant()).copied().collect();

    if opts.revalidate {
        let ri_vec: Vec<FeatureId> = ri.iter().copied().collect();
        ad1 = revalidate_pool(g_y, &ad1, &ri_vec, cfg);
        ad2 = revalidate_pool(g_y, &ad2, &ri_vec, cfg);
    }

    let mut selected: BTreeSet<FeatureId> = match variant {
        Variant::SfcfRi => ri.clone(),
        Variant::SfcfAd1 => ri.union(&ad1).copied().collect(),
        Variant::SfcfAd2 => ri.union(&ad2).copied().collect(),
        Variant::Osfs => g_y.markov_blanket(),
        Variant::Baseline | Variant::RemoveS => processed_y,
    };
    let protected_name = g_s.target_name().to_string();
    selected.retain(|&f| g_y.feature_name(f) != protected_name);

    Ok(SelectionSnapshot {
        round: g_y.processed().len(),
        variant,
        inadmissible: ia,
        admissible,
        mi,
        ri,
        icrf,
        ad1,
        ad2,
        selected,
    })
}

/// Keep only pool members that test dependent on the label given RI.
/// Unresolved tests (collinear conditioning) keep the candidate.
fn revalidate_pool(
    g_y: &mut EgoGraph,
    pool: &BTreeSet<FeatureId>,
    ri: &[FeatureId],
    cfg: &SignificanceConfig,
) -> BTreeSet<FeatureId> {
    pool.iter()
        .copied()
        .filter(|&c| match g_y.ci(c, ri, cfg) {
            Ok(res) => !res.independent,
            Err(_) => true,
        })
        .collect()
}
