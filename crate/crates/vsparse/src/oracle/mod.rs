//! Exact ground-truth solvers for desk-scale graphs.

mod flow;
mod linalg;
mod paths;

pub use flow::{edmonds_karp_value, exact_min_cut, max_flow, CutResult, FlowResult};
pub use linalg::{
    exact_effective_resistance, exact_schur_complement, laplacian, schur_complement_restricted,
    DenseLaplacian, ResistanceOracle,
};
pub use paths::{bellman_ford, dijkstra, exact_distance};

use thiserror::Error;

/// Tolerance used when comparing exact linear-algebra results.
pub const TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("vertices {0} and {1} are in different components")]
    DifferentComponents(usize, usize),
    #[error("a connected component has no vertex in the kept set")]
    SingularBlock,
    #[error("kept vertex set is empty")]
    EmptySet,
    #[error("source equals sink ({0})")]
    SameEndpoints(usize),
}
