//! j-tree cut approximators: a spanning tree whose envelope components hang
//! off a small core graph, a convex combination of such trees, and the
//! dynamic s-t min-cut structure built on top of them.

mod decomp;
mod dynamic;
mod mincut;
mod tcf;

pub use decomp::{build_decomposition, CutDecomposition, DecompConfig};
pub use dynamic::JTree;
pub use mincut::{CutAnswer, DynamicMinCut, MinCutConfig, MinCutStats, SampleMode};
pub use tcf::{branch_vertices, compute_tcf, is_tree_partition, subtree_cuts, Tcf};

use thiserror::Error;

use crate::graph::{EdgeId, GraphError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum JTreeError {
    #[error("j must be at least 1")]
    InvalidJ,
    #[error("unknown edge {0}")]
    UnknownEdge(EdgeId),
    #[error("source equals sink ({0})")]
    SameEndpoints(usize),
    #[error(transparent)]
    Graph(#[from] GraphError),
}
