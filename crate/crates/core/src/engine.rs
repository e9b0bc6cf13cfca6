//! Streaming front end: feeds arriving features to both egocentric graphs
//! (label and protected) and exposes selection over the pair.

use std::sync::Arc;

use crate::ci::SignificanceConfig;
use crate::column::{ColumnKind, FeatureColumn, FeatureId};
use crate::data::{stream, Dataset, StreamOrder};
use crate::graph::{EgoGraph, GraphError};
use crate::select::{self, SelectError, SelectOptions, SelectionSnapshot, Variant};

#[derive(Debug, Clone)]
pub struct StreamEngine {
    pub g_y: EgoGraph,
    pub g_s: EgoGraph,
    cfg: SignificanceConfig,
}

impl StreamEngine {
    pub fn new(
        label: Arc<FeatureColumn>,
        protected: Arc<FeatureColumn>,
        kind: ColumnKind,
        cfg: SignificanceConfig,
    ) -> Result<Self, GraphError> {
        Ok(Self {
            g_y: EgoGraph::new(label, kind)?,
            g_s: EgoGraph::new(protected, kind)?,
            cfg,
        })
    }

    /// Process one arriving feature in both graphs.
    pub fn process(&mut self, id: FeatureId, col: Arc<FeatureColumn>) -> Result<(), GraphError> {
        self.g_y.admit_feature(id, Arc::clone(&col), &self.cfg)?;
        self.g_s.admit_feature(id, col, &self.cfg)?;
        Ok(())
    }

    /// Valid at every round, not just stream end.
    pub fn select(&mut self, variant: Variant, opts: &SelectOptions) -> Result<SelectionSnapshot, SelectError> {
        select::select(&mut self.g_y, &self.g_s, variant, &self.cfg, opts)
    }

    /// Stream every feature of a dataset through a fresh engine.
    pub fn run(
        dataset: &Dataset,
        order: StreamOrder,
        kind: ColumnKind,
        cfg: SignificanceConfig,
    ) -> Result<Self, GraphError> {
        let mut engine = Self::new(Arc::clone(&dataset.label), Arc::clone(&dataset.protected), kind, cfg)?;
        for (id, col) in stream(dataset, order) {
            engine.process(id, col)?;
        }
        Ok(engine)
    }
}
