//! Egocentric causal graph state for one target (label or protected
//! feature): the streaming partition of arrived features into
//! StrongRelevant (the Markov blanket), Redundant, and Irrelevant, plus the
//! COR map recording which conditioning set rendered each redundant feature
//! redundant.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::ci::{self, CiError, CiResult, SignificanceConfig};
use crate::column::{ColumnKind, FeatureColumn, FeatureId};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GraphError {
    #[error("feature {0} was already processed")]
    DuplicateFeature(FeatureId),
    #[error("target column `{0}` is constant")]
    ConstantTarget(String),
    #[error(transparent)]
    Ci(#[from] CiError),
}

/// Node key for the pairwise-correlation cache.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Node {
    Target,
    Feat(FeatureId),
}

#[derive(Debug, Clone)]
pub struct EgoGraph {
    target: Arc<FeatureColumn>,
    kind: ColumnKind,
    /// Arrival order of every processed feature.
    arrival: Vec<FeatureId>,
    /// Candidate feature set, equal to StrongRelevant after each scan.
    cfs: Vec<FeatureId>,
    redundant: BTreeSet<FeatureId>,
    irrelevant: BTreeSet<FeatureId>,
    /// Conditioning set -> redundant features it renders redundant.
    cor: BTreeMap<Vec<FeatureId>, BTreeSet<FeatureId>>,
    columns: BTreeMap<FeatureId, Arc<FeatureColumn>>,
    /// Pairwise Pearson correlations, computed once per pair (Fisher's z
    /// path only). Every conditional test then reduces to a small matrix
    /// inversion over cached entries.
    corr_cache: HashMap<(Node, Node), f64>,
}

impl EgoGraph {
    pub fn new(target: Arc<FeatureColumn>, kind: ColumnKind) -> Result<Self, GraphError> {
        if kind == ColumnKind::Continuous && target.is_constant() {
            return Err(GraphError::ConstantTarget(target.name.clone()));
        }
        Ok(Self {
            target,
            kind,
            arrival: Vec::new(),
            cfs: Vec::new(),
            redundant: BTreeSet::new(),
            irrelevant: BTreeSet::new(),
            cor: BTreeMap::new(),
            columns: BTreeMap::new(),
            corr_cache: HashMap::new(),
        })
    }

    pub fn target_name(&self) -> &str {
        &self.target.name
    }

    pub fn column(&self, id: FeatureId) -> Option<&Arc<FeatureColumn>> {
        self.columns.get(&id)
    }

    pub fn feature_name(&self, id: FeatureId) -> &str {
        self.columns.get(&id).map(|c| c.name.as_str()).unwrap_or("?")
    }

    /// All features processed so far, in arrival order.
    pub fn processed(&self) -> &[FeatureId] {
        &self.arrival
    }

    /// The Markov blanket: an immutable snapshot of the current
    /// StrongRelevant set.
    pub fn markov_blanket(&self) -> BTreeSet<FeatureId> {
        self.cfs.iter().copied().collect()
    }

    pub fn redundant(&self) -> &BTreeSet<FeatureId> {
        &self.redundant
    }

    pub fn irrelevant(&self) -> &BTreeSet<FeatureId> {
        &self.irrelevant
    }

    pub fn cor_entries(&self) -> impl Iterator<Item = (&Vec<FeatureId>, &BTreeSet<FeatureId>)> {
        self.cor.iter()
    }

    /// All redundant features whose recorded conditioning set intersects q.
    pub fn corresponding_redundant(&self, q: &BTreeSet<FeatureId>) -> BTreeSet<FeatureId> {
        let mut out = BTreeSet::new();
        if q.is_empty() {
            return out;
        }
        for (key, values) in &self.cor {
            if key.iter().any(|k| q.contains(k)) {
                out.extend(values.iter().copied());
            }
        }
        out
    }

    fn corr(&mut self, a: Node, b: Node) -> Result<f64, CiError> {
        let key = if node_rank(a) <= node_rank(b) { (a, b) } else { (b, a) };
        if let Some(&r) = self.corr_cache.get(&key) {
            return Ok(r);
        }
        let col = |n: Node| -> &FeatureColumn {
            match n {
                Node::Target => &self.target,
                Node::Feat(id) => &self.columns[&id],
            }
        };
        let r = ci::pearson(col(key.0), col(key.1))?;
        self.corr_cache.insert(key, r);
        Ok(r)
    }

    /// CI test of feature x against the target given conditioning features z.
    pub fn ci(&mut self, x: FeatureId, z: &[FeatureId], cfg: &SignificanceConfig) -> Result<CiResult, CiError> {
        match self.kind {
            ColumnKind::Continuous => {
                let n = self.target.len();
                if n <= z.len() + 3 {
                    return Err(CiError::InsufficientSamples { required: z.len() + 3, actual: n });
                }
                let vars: Vec<Node> = std::iter::once(Node::Feat(x))
                    .chain(std::iter::once(Node::Target))
                    .chain(z.iter().map(|&id| Node::Feat(id)))
                    .collect();
                let k = vars.len();
                let mut c = nalgebra::DMatrix::identity(k, k);
                for i in 0..k {
                    for j in (i + 1)..k {
                        let r = self.corr(vars[i], vars[j])?;
                        c[(i, j)] = r;
                        c[(j, i)] = r;
                    }
                }
                let r = ci::partial_corr_from_matrix(&c)?;
                Ok(ci::fisher_z_from_partial(r, n, z.len(), cfg.alpha))
            }
            ColumnKind::Categorical => {
                let xcol = Arc::clone(&self.columns[&x]);
                let zcols: Vec<Arc<FeatureColumn>> = z.iter().map(|id| Arc::clone(&self.columns[id])).collect();
                let zrefs: Vec<&FeatureColumn> = zcols.iter().map(|c| c.as_ref()).collect();
                ci::g2_test(&xcol, &self.target, &zrefs, cfg)
            }
        }
    }

    /// Process one arriving feature: route it to Irrelevant on marginal
    /// independence (or zero variance), otherwise append it to the
    /// candidate set and run the redundancy scan.
    pub fn admit_feature(
        &mut self,
        id: FeatureId,
        col: Arc<FeatureColumn>,
        cfg: &SignificanceConfig,
    ) -> Result<(), GraphError> {
        if self.columns.contains_key(&id) {
            return Err(GraphError::DuplicateFeature(id));
        }
        if col.len() != self.target.len() {
            return Err(GraphError::Ci(CiError::LengthMismatch));
        }
        let constant = col.is_constant();
        self.columns.insert(id, col);
        self.arrival.push(id);
        if constant {
            self.irrelevant.insert(id);
            return Ok(());
        }
        match self.ci(id, &[], cfg) {
            Ok(res) if res.independent => {
                self.irrelevant.insert(id);
                Ok(())
            }
            Ok(_) => {
                self.cfs.push(id);
                self.redundancy_scan(cfg)?;
                Ok(())
            }
            Err(CiError::ZeroVariance(_)) => {
                self.irrelevant.insert(id);
                Ok(())
            }
            Err(e) => Err(GraphError::Ci(e)),
        }
    }

    /// One pass over the candidate set. The newest candidate is examined
    /// first, then the older ones in arrival order; a feature moved to
    /// Redundant is immediately excluded from the conditioning pools of
    /// the candidates scanned after it. Conditioning sets are searched
    /// smallest-cardinality first, lexicographic by arrival index within
    /// a cardinality, and the first separating set wins.
    pub fn redundancy_scan(&mut self, cfg: &SignificanceConfig) -> Result<(), GraphError> {
        let mut order: Vec<FeatureId> = Vec::with_capacity(self.cfs.len());
        if let Some(&newest) = self.cfs.last() {
            order.push(newest);
            order.extend(self.cfs[..self.cfs.len() - 1].iter().copied());
        }
        for x_m in order {
            if !self.cfs.contains(&x_m) {
                continue;
            }
            let pool: Vec<FeatureId> = self.cfs.iter().copied().filter(|&f| f != x_m).collect();
            let max_size = cfg.max_cond_size.min(pool.len());
            let mut separator: Option<Vec<FeatureId>> = None;
            'search: for size in 0..=max_size {
                for combo in pool.iter().copied().combinations(size) {
                    match self.ci(x_m, &combo, cfg) {
                        Ok(res) if res.independent => {
                            separator = Some(combo);
                            break 'search;
                        }
                        Ok(_) => {}
                        // Collinear conditioning sets leave the dependence
                        // unresolved; skip them.
                        Err(CiError::SingularMatrix) => {}
                        Err(e) => return Err(GraphError::Ci(e)),
                    }
                }
            }
            if let Some(mut key) = separator {
                key.sort_unstable();
                self.cfs.retain(|&f| f != x_m);
                self.redundant.insert(x_m);
                self.cor.entry(key).or_default().insert(x_m);
            }
        }
        Ok(())
    }

    /// Disjointness and coverage of the {cfs, redundant, irrelevant}
    /// partition. True after every admit_feature call.
    pub fn partition_holds(&self) -> bool {
        let cfs: BTreeSet<_> = self.cfs.iter().copied().collect();
        if cfs.len() != self.cfs.len() {
            return false;
        }
        let disjoint = cfs.is_disjoint(&self.redundant)
            && cfs.is_disjoint(&self.irrelevant)
            && self.redundant.is_disjoint(&self.irrelevant);
        let covered = cfs.len() + self.redundant.len() + self.irrelevant.len() == self.arrival.len()
            && self.arrival.iter().all(|f| cfs.contains(f) || self.redundant.contains(f) || self.irrelevant.contains(f));
        disjoint && covered
    }

    pub fn dump(&self) -> GraphDump {
        let names = |ids: &mut dyn Iterator<Item = FeatureId>| -> Vec<String> {
            ids.map(|id| self.feature_name(id).to_string()).collect()
        };
        GraphDump {
            target: self.target.name.clone(),
            strong_relevant: names(&mut self.cfs.iter().copied()),
            redundant: names(&mut self.redundant.iter().copied()),
            irrelevant: names(&mut self.irrelevant.iter().copied()),
            cor: self
                .cor
                .iter()
                .map(|(k, v)| {
                    (
                        names(&mut k.iter().copied()),
                        names(&mut v.iter().copied()),
                    )
                })
                .collect(),
        }
    }
}

fn node_rank(n: Node) -> usize {
    match n {
        Node::Target => usize::MAX,
        Node::Feat(FeatureId(i)) => i,
    }
}

/// JSON shape of a graph state: partition lists plus cor entries as
/// [key-array, value-array] pairs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphDump {
    pub target: String,
    pub strong_relevant: Vec<String>,
    pub redundant: Vec<String>,
    pub irrelevant: Vec<String>,
    pub cor: Vec<(Vec<String>, Vec<String>)>,
}
