use crate::framework::VertexSparsifier;
use crate::graph::{GraphView, VertexId};
use crate::tz::TzIvs;

use super::tree_flow::{binarize_tree, build_cut_tree, flow_vertex_sparsify, tree_congestion};

/// Output of a static sparsifier: the graph keeps vertex ids `0..n` of its
/// input, extra vertices are numbered above.
#[derive(Debug, Clone, PartialEq)]
pub struct Sparsified {
    pub graph: GraphView,
    pub quality: f64,
    /// Divisor applied to answers computed on this graph.
    pub scale: f64,
}

pub trait StaticPlugin: Sync {
    fn name(&self) -> &'static str;
    fn build(&self, g: &GraphView, terminals: &[VertexId]) -> Result<Sparsified, String>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityPlugin;

impl StaticPlugin for IdentityPlugin {
    fn name(&self) -> &'static str {
        "identity"
    }
    fn build(&self, g: &GraphView, _terminals: &[VertexId]) -> Result<Sparsified, String> {
        Ok(Sparsified { graph: g.clone(), quality: 1.0, scale: 1.0 })
    }
}

/// Bunch-union distance sparsifier with stretch `2r - 1`.
#[derive(Debug, Clone, Copy)]
pub struct DistancePlugin {
    pub r: usize,
}

impl StaticPlugin for DistancePlugin {
    fn name(&self) -> &'static str {
        "distance"
    }
    fn build(&self, g: &GraphView, terminals: &[VertexId]) -> Result<Sparsified, String> {
        let mut ivs = TzIvs::preprocess(g, self.r);
        for &t in terminals {
            ivs.add_terminal(t);
        }
        Ok(Sparsified { graph: ivs.graph().snapshot(), quality: ivs.stretch(), scale: 1.0 })
    }
}

/// Root-path union of a binarized cut tree. Tree cuts never undershoot, so
/// answers are divided by the certified congestion to become lower bounds.
#[derive(Debug, Clone, Copy, Default)]
pub struct FlowPlugin;

impl StaticPlugin for FlowPlugin {
    fn name(&self) -> &'static str {
        "flow"
    }
    fn build(&self, g: &GraphView, terminals: &[VertexId]) -> Result<Sparsified, String> {
        let tree = binarize_tree(&build_cut_tree(g));
        let q = tree_congestion(&tree, g);
        let graph = flow_vertex_sparsify(&tree, terminals).map_err(|e| e.to_string())?;
        Ok(Sparsified { graph, quality: q, scale: q })
    }
}
