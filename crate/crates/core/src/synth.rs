//! Synthetic linear-Gaussian structural equation models with known
//! ground-truth Markov blankets, used to validate the streaming graphs.

use std::collections::BTreeSet;
use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::column::{ColumnKind, FeatureColumn};
use crate::data::Dataset;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SynthError {
    #[error("a SEM needs at least 3 nodes, got {0}")]
    TooFewNodes(usize),
    #[error("node index {0} out of range for {1} nodes")]
    NodeOutOfRange(usize, usize),
}

/// Parameters of a random SEM draw.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub nodes: usize,
    pub edge_prob: f64,
    pub noise: f64,
    pub seed: u64,
    /// Node playing the protected attribute. Defaults to the first node.
    pub s_node: usize,
    /// Node playing the label. Defaults to the last node, which keeps it a
    /// sink: its blanket is exactly its parent set.
    pub y_node: usize,
}

impl SyntheticSpec {
    pub fn new(nodes: usize, seed: u64) -> Self {
        Self { nodes, edge_prob: 0.25, noise: 1.0, seed, s_node: 0, y_node: nodes.saturating_sub(1) }
    }
}

/// A linear-Gaussian SEM over nodes 0..p, acyclic by construction
/// (edges only run from lower to higher index).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SemModel {
    pub nodes: usize,
    /// (from, to, weight) with from < to.
    pub edges: Vec<(usize, usize, f64)>,
    pub noise: f64,
    pub s_node: usize,
    pub y_node: usize,
}

impl SemModel {
    /// Draw a random DAG. The label node is guaranteed at least one parent
    /// and the protected node at least one child, so every draw carries
    /// signal for both targets.
    pub fn random(spec: &SyntheticSpec) -> Result<Self, SynthError> {
        if spec.nodes < 3 {
            return Err(SynthError::TooFewNodes(spec.nodes));
        }
        for node in [spec.s_node, spec.y_node] {
            if node >= spec.nodes {
                return Err(SynthError::NodeOutOfRange(node, spec.nodes));
            }
        }
        let p = spec.nodes;
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let mut edges = Vec::new();
        for from in 0..p {
            for to in (from + 1)..p {
                if rng.random::<f64>() < spec.edge_prob {
                    edges.push((from, to, rng.random_range(0.3..1.0)));
                }
            }
        }
        if spec.y_node > 0 && !edges.iter().any(|&(_, to, _)| to == spec.y_node) {
            let from = rng.random_range(0..spec.y_node);
            edges.push((from, spec.y_node, rng.random_range(0.3..1.0)));
        }
        if !edges.iter().any(|&(from, to, _)| from == spec.s_node && to != spec.y_node) {
            let candidates: Vec<usize> =
                ((spec.s_node + 1)..p).filter(|&to| to != spec.y_node).collect();
            if let Some(&to) = candidates.first() {
                edges.push((spec.s_node, to, rng.random_range(0.3..1.0)));
            }
        }
        edges.sort_by_key(|&(f, t, _)| (f, t));
        edges.dedup_by_key(|e| (e.0, e.1));
        Ok(Self { nodes: p, edges, noise: spec.noise, s_node: spec.s_node, y_node: spec.y_node })
    }

    pub fn parents(&self, node: usize) -> BTreeSet<usize> {
        self.edges.iter().filter(|&&(_, to, _)| to == node).map(|&(from, _, _)| from).collect()
    }

    pub fn children(&self, node: usize) -> BTreeSet<usize> {
        self.edges.iter().filter(|&&(from, _, _)| from == node).map(|&(_, to, _)| to).collect()
    }

    /// Markov blanket in the true DAG: parents, children, and spouses.
    pub fn true_mb(&self, node: usize) -> BTreeSet<usize> {
        let mut mb = self.parents(node);
        let children = self.children(node);
        for &child in &children {
            for spouse in self.parents(child) {
                if spouse != node {
                    mb.insert(spouse);
                }
            }
        }
        mb.extend(children);
        mb
    }

    /// Edges run strictly from lower to higher index, so a topological
    /// order exists by construction; this re-checks it explicitly.
    pub fn is_acyclic(&self) -> bool {
        self.edges.iter().all(|&(from, to, _)| from < to)
    }

    /// Draw n samples. The label and protected columns are the designated
    /// nodes' structural values binarized at their medians; descendants
    /// are generated from the continuous structural values.
    pub fn sample(&self, n: usize, seed: u64) -> SemSample {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = self.nodes;
        let mut values = vec![vec![0.0f64; n]; p];
        for node in 0..p {
            let parents: Vec<(usize, f64)> = self
                .edges
                .iter()
                .filter(|&&(_, to, _)| to == node)
                .map(|&(from, _, w)| (from, w))
                .collect();
            for row in 0..n {
                let mut v = self.noise * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng);
                for &(from, w) in &parents {
                    v += w * values[from][row];
                }
                values[node][row] = v;
            }
        }

        let median_binarize = |vals: &[f64]| -> Vec<f64> {
            let mut sorted = vals.to_vec();
            sorted.sort_by(f64::total_cmp);
            let median = sorted[sorted.len() / 2];
            vals.iter().map(|&v| if v < median { 0.0 } else { 1.0 }).collect()
        };

        let node_name = |node: usize| -> String {
            if node == self.s_node {
                "S".to_string()
            } else if node == self.y_node {
                "Y".to_string()
            } else {
                format!("X{node}")
            }
        };

        let mut features = Vec::new();
        let mut feature_nodes = Vec::new();
        for node in 0..p {
            if node == self.s_node || node == self.y_node {
                continue;
            }
            features.push(Arc::new(FeatureColumn::continuous(node_name(node), values[node].clone())));
            feature_nodes.push(node);
        }
        let label = Arc::new(FeatureColumn {
            name: "Y".to_string(),
            kind: ColumnKind::Continuous,
            values: median_binarize(&values[self.y_node]),
        });
        let protected = Arc::new(FeatureColumn {
            name: "S".to_string(),
            kind: ColumnKind::Continuous,
            values: median_binarize(&values[self.s_node]),
        });

        // Ground-truth blankets restricted to streamed features.
        let to_names = |mb: BTreeSet<usize>| -> BTreeSet<String> {
            mb.into_iter().filter(|n| feature_nodes.contains(n)).map(node_name).collect()
        };
        let truth = GroundTruth {
            label: "Y".to_string(),
            protected: "S".to_string(),
            edges: self.edges.iter().map(|&(f, t, _)| (node_name(f), node_name(t))).collect(),
            mb_y: to_names(self.true_mb(self.y_node)),
            mb_s: to_names(self.true_mb(self.s_node)),
        };

        SemSample {
            dataset: Dataset { features, label, protected, n, dropped_rows: 0 },
            truth,
        }
    }
}

/// Ground truth emitted next to a synthetic dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub label: String,
    pub protected: String,
    pub edges: Vec<(String, String)>,
    pub mb_y: BTreeSet<String>,
    pub mb_s: BTreeSet<String>,
}

#[derive(Debug, Clone)]
pub struct SemSample {
    pub dataset: Dataset,
    pub truth: GroundTruth,
}

/// Random SEM, sampled: the one-call entry point used by the CLI.
pub fn generate_sem(spec: &SyntheticSpec, n: usize) -> Result<SemSample, SynthError> {
    let model = SemModel::random(spec)?;
    Ok(model.sample(n, spec.seed))
}
