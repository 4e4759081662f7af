//! Dynamic vertex-sparsifier hierarchies for s-t min-cut, shortest-path
//! distance and effective resistance, with exact oracles for checking.

pub mod framework;
pub mod graph;
pub mod harness;
pub mod jtree;
pub mod lct;
pub mod lsst;
pub mod metric;
pub mod offline;
pub mod oracle;
pub mod par;
pub mod schur;
pub mod spectral;
pub mod trace;
pub mod tz;
