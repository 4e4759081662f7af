//! Effective resistances through a chain of approximate Schur complements,
//! each sampled from random walks that stop at terminals.

mod chain;
mod level;
mod solver;
mod walk;

pub use chain::{ErConfig, ErStats, SchurChain};
pub use level::{weight_ratio, ExactLevel, Level, LevelParams, LevelStats, SchurLevel};
pub use solver::{effective_resistance, ErSolver, Solve, DENSE_LIMIT};
pub use walk::{sample_half, HalfWalk, WalkGraph, WalkRecord};

use thiserror::Error;

use crate::graph::{EdgeId, GraphError, VertexId};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SchurError {
    #[error("vertices {0} and {1} are in different components")]
    DifferentComponents(VertexId, VertexId),
    #[error("unknown edge {0}")]
    UnknownEdge(EdgeId),
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    #[error(transparent)]
    Graph(#[from] GraphError),
}
