//! Distance approximators: metric decompositions into tree-plus-few-edges
//! subgraphs, their terminal sparsifiers, and dynamic all-pairs distances.

mod apsp;
mod decomp;
mod sparsifier;

pub use apsp::{greedy_spanner, ApspConfig, ApspStats, DynamicApsp};
pub use decomp::{
    compute_good_j1, k_for_j, log_mu, measured_alpha, metric_jtree, mwu_metric_decomposition, GoodJ1,
    MetricDecomposition, MetricJTree,
};
pub use sparsifier::{DistanceCoreSparsifier, SkeletonIndex};

use thiserror::Error;

use crate::graph::{EdgeId, GraphError, GraphView, VertexId};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricError {
    #[error("k must be at least 1")]
    InvalidK,
    #[error("no termination after {iterations} rounds with k = {k}")]
    NonTermination { iterations: usize, k: usize },
    #[error("unknown edge {0}")]
    UnknownEdge(EdgeId),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Static sparsifier of `j` for terminals `c0`.
pub fn route1_sparsifier(g: &GraphView, j: &MetricJTree, c0: &[VertexId]) -> DistanceCoreSparsifier {
    DistanceCoreSparsifier::new(g, j.tree.clone(), &j.f, c0)
}
