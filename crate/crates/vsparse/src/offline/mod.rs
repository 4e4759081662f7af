//! Offline processing of a known event sequence.
//!
//! The time axis `[1, len]` is cut into an interval tree. An edge whose
//! lifetime covers a node's whole interval is permanent there; edges with an
//! event inside the interval are not. Each node keeps a sparsifier of its
//! permanent graph with respect to its boundary (endpoints of non-permanent
//! edges and of queries inside the interval). Children start from the
//! parent's sparsifier plus the edges that just became permanent. Leaves
//! replay their own events on top of their sparsifier.

mod plugins;
mod tree_flow;

use std::collections::HashMap;

use thiserror::Error;

pub use plugins::{DistancePlugin, FlowPlugin, IdentityPlugin, Sparsified, StaticPlugin};
pub use tree_flow::{binarize_tree, build_cut_tree, flow_vertex_sparsify, tree_congestion, CutTree};

use crate::framework::Property;
use crate::graph::{DynamicGraph, EdgeRecord, GraphView, VertexId};
use crate::par;
use crate::trace::Event;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OfflineError {
    #[error("interval lengths must shrink by exact factors: {0:?}")]
    BadBeta(Vec<usize>),
    #[error("terminal {0} is not a leaf of the cut tree")]
    TerminalNotLeaf(VertexId),
    #[error("edge {0} is deleted but was never inserted")]
    UnknownEdge(usize),
    #[error("sparsifier failed at node {node}: {msg}")]
    Plugin { node: usize, msg: String },
}

/// Insertion and deletion times of one edge instance (1-based).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lifetime {
    pub edge: EdgeRecord,
    pub ins: usize,
    /// `None` until the edge is deleted; closed at `len + 1` otherwise.
    pub del: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EventSequence {
    pub n: usize,
    /// Event at time `t` is `events[t - 1]`; `None` is a padding no-op.
    pub events: Vec<Option<Event>>,
    pub lifetimes: Vec<Lifetime>,
}

impl EventSequence {
    pub fn new(n: usize, events: &[Event]) -> Result<Self, OfflineError> {
        let mut lifetimes: Vec<Lifetime> = Vec::new();
        let mut by_id: HashMap<usize, usize> = HashMap::new();
        for (i, ev) in events.iter().enumerate() {
            match *ev {
                Event::Insert(e) => {
                    by_id.insert(e.id, lifetimes.len());
                    lifetimes.push(Lifetime { edge: e, ins: i + 1, del: None });
                }
                Event::Delete(e) => {
                    let k = by_id.remove(&e.id).ok_or(OfflineError::UnknownEdge(e.id))?;
                    lifetimes[k].del = Some(i + 1);
                }
                Event::Query(..) => {}
            }
        }
        Ok(EventSequence { n, events: events.iter().copied().map(Some).collect(), lifetimes })
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }
    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    fn end(&self, l: &Lifetime) -> usize {
        l.del.unwrap_or(self.len() + 1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecompNode {
    pub start: usize,
    pub end: usize,
    pub level: usize,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    /// Lifetimes with an event inside the interval.
    pub non_perm: Vec<usize>,
    /// Lifetimes permanent here but not at the parent.
    pub new_perm: Vec<usize>,
    pub boundary: Vec<VertexId>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionTree {
    pub seq: EventSequence,
    /// Interval length per level; `betas[0]` is the padded sequence length.
    pub betas: Vec<usize>,
    pub nodes: Vec<DecompNode>,
    /// First node id of each level.
    pub level_start: Vec<usize>,
}

/// Branching `b = ceil(m^(1/(l+1)))` and lengths `b^l, ..., b`.
pub fn default_betas(m: usize, levels: usize, branching: Option<usize>) -> Vec<usize> {
    let b = branching.unwrap_or_else(|| (m.max(1) as f64).powf(1.0 / (levels + 1) as f64).ceil() as usize).max(2);
    (1..=levels).map(|i| b.pow((levels + 1 - i) as u32)).collect()
}

impl DecompositionTree {
    pub fn levels(&self) -> usize {
        self.betas.len() - 1
    }
    pub fn leaves(&self) -> std::ops::Range<usize> {
        self.level_start[self.levels()]..self.nodes.len()
    }
    fn node_at(&self, level: usize, t: usize) -> usize {
        self.level_start[level] + (t - 1) / self.betas[level]
    }
}

/// Interval tree with lengths `betas = [b_1, ..., b_l]`, each dividing the
/// previous. The sequence is padded with no-ops to a multiple of `b_1`.
pub fn build_decomposition_tree(seq: &EventSequence, betas: &[usize]) -> Result<DecompositionTree, OfflineError> {
    if betas.contains(&0) || betas.windows(2).any(|w| w[0] % w[1] != 0) {
        return Err(OfflineError::BadBeta(betas.to_vec()));
    }
    let mut seq = seq.clone();
    let unit = betas.first().copied().unwrap_or(1);
    let len = seq.len().max(1).div_ceil(unit) * unit;
    seq.events.resize(len, None);

    let mut all = vec![len];
    all.extend_from_slice(betas);
    let mut nodes = Vec::new();
    let mut level_start = Vec::new();
    for (level, &b) in all.iter().enumerate() {
        level_start.push(nodes.len());
        for k in 0..len / b {
            let parent = (level > 0).then(|| level_start[level - 1] + k * b / all[level - 1]);
            let id = nodes.len();
            if let Some(p) = parent {
                let pn: &mut DecompNode = &mut nodes[p];
                pn.children.push(id);
            }
            nodes.push(DecompNode {
                start: k * b + 1,
                end: (k + 1) * b,
                level,
                parent,
                children: Vec::new(),
                non_perm: Vec::new(),
                new_perm: Vec::new(),
                boundary: Vec::new(),
            });
        }
    }
    let mut tree = DecompositionTree { seq, betas: all, nodes, level_start };

    for (k, l) in tree.seq.lifetimes.iter().enumerate() {
        let d = tree.seq.end(l);
        for level in 0..=tree.levels() {
            let a = tree.node_at(level, l.ins);
            tree.nodes[a].non_perm.push(k);
            if d <= len {
                let b = tree.node_at(level, d);
                if b != a {
                    tree.nodes[b].non_perm.push(k);
                }
            }
        }
    }
    for id in 0..tree.nodes.len() {
        let node = &tree.nodes[id];
        let mut bnd: Vec<VertexId> = node
            .non_perm
            .iter()
            .flat_map(|&k| {
                let e = tree.seq.lifetimes[k].edge;
                [e.u, e.v]
            })
            .collect();
        for t in node.start..=node.end {
            if let Some(Event::Query(a, b)) = tree.seq.events[t - 1] {
                bnd.extend([a, b]);
            }
        }
        bnd.sort_unstable();
        bnd.dedup();
        let new_perm: Vec<usize> = match node.parent {
            None => Vec::new(),
            Some(p) => tree.nodes[p]
                .non_perm
                .iter()
                .copied()
                .filter(|&k| {
                    let l = &tree.seq.lifetimes[k];
                    l.ins < node.start && tree.seq.end(l) > node.end
                })
                .collect(),
        };
        if let Some(p) = node.parent {
            debug_assert!(new_perm.len() <= tree.nodes[p].non_perm.len());
        }
        let node = &mut tree.nodes[id];
        node.boundary = bnd;
        node.new_perm = new_perm;
    }
    Ok(tree)
}

/// Sparsifier stored at one decomposition node.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeSparsifier {
    pub graph: GraphView,
    /// Product of plugin qualities along the root path.
    pub quality: f64,
    /// Product of plugin scales; leaf answers are divided by it.
    pub scale: f64,
}

/// Sparsifiers for every node, root first. The root keeps the empty graph.
pub fn propagate_sparsifiers<P: StaticPlugin>(tree: &DecompositionTree, plugin: &P) -> Result<Vec<NodeSparsifier>, OfflineError> {
    let mut out: Vec<Option<NodeSparsifier>> = vec![None; tree.nodes.len()];
    out[0] = Some(NodeSparsifier { graph: GraphView::from_triples(tree.seq.n, &[]), quality: 1.0, scale: 1.0 });
    for level in 1..=tree.levels() {
        let ids: Vec<usize> = (tree.level_start[level]..tree.nodes.len()).filter(|&i| tree.nodes[i].level == level).collect();
        let built = par::map(&ids, |&id| {
            let node = &tree.nodes[id];
            let parent = out[node.parent.expect("non-root")].as_ref().expect("parents are built first");
            let mut triples: Vec<(VertexId, VertexId, f64)> = parent.graph.edges().iter().map(|e| (e.u, e.v, e.weight)).collect();
            triples.extend(node.new_perm.iter().map(|&k| {
                let e = tree.seq.lifetimes[k].edge;
                (e.u, e.v, e.weight)
            }));
            let g = GraphView::from_triples(parent.graph.n(), &triples);
            let sp = plugin.build(&g, &node.boundary).map_err(|msg| OfflineError::Plugin { node: id, msg })?;
            Ok::<_, OfflineError>(NodeSparsifier {
                graph: sp.graph,
                quality: parent.quality * sp.quality,
                scale: parent.scale * sp.scale,
            })
        });
        for (id, sp) in ids.into_iter().zip(built) {
            out[id] = Some(sp?);
        }
    }
    Ok(out.into_iter().map(|s| s.expect("every node is built")).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct OfflineReport {
    /// One answer per query, in sequence order.
    pub answers: Vec<f64>,
    /// Largest accumulated quality over the leaves.
    pub quality: f64,
    pub nodes: usize,
    pub leaf_len: usize,
}

/// Replay each leaf's events on top of its sparsifier.
pub fn run_offline<Q: Property>(tree: &DecompositionTree, sparsifiers: &[NodeSparsifier], property: &Q) -> OfflineReport {
    let mut answers = Vec::new();
    let mut quality: f64 = 1.0;
    for id in tree.leaves() {
        let node = &tree.nodes[id];
        let sp = &sparsifiers[id];
        quality = quality.max(sp.quality);
        let mut g = DynamicGraph::unbounded(sp.graph.n());
        for e in sp.graph.edges() {
            g.insert_edge(e.u, e.v, e.weight).expect("sparsifier edges are valid");
        }
        let mut local: HashMap<usize, usize> = HashMap::new();
        for &k in &node.non_perm {
            let l = &tree.seq.lifetimes[k];
            if l.ins < node.start {
                let rec = g.insert_edge(l.edge.u, l.edge.v, l.edge.weight).expect("valid edge");
                local.insert(l.edge.id, rec.id);
            }
        }
        for t in node.start..=node.end {
            match tree.seq.events[t - 1] {
                None => {}
                Some(Event::Insert(e)) => {
                    let rec = g.insert_edge(e.u, e.v, e.weight).expect("valid edge");
                    local.insert(e.id, rec.id);
                }
                Some(Event::Delete(e)) => {
                    let id = local.remove(&e.id).expect("non-permanent edge is tracked");
                    g.delete_edge(id).expect("tracked edge is live");
                }
                Some(Event::Query(a, b)) => {
                    let v = if a == b { property.identity_value() } else { property.solve(&g.snapshot(), a, b) / sp.scale };
                    answers.push(v);
                }
            }
        }
    }
    OfflineReport { answers, quality, nodes: tree.nodes.len(), leaf_len: *tree.betas.last().expect("at least the root") }
}

/// Build, propagate and replay in one call.
pub fn solve_offline<P: StaticPlugin, Q: Property>(
    n: usize,
    events: &[Event],
    betas: &[usize],
    plugin: &P,
    property: &Q,
) -> Result<OfflineReport, OfflineError> {
    let seq = EventSequence::new(n, events)?;
    let tree = build_decomposition_tree(&seq, betas)?;
    let sp = propagate_sparsifiers(&tree, plugin)?;
    Ok(run_offline(&tree, &sp, property))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(id: usize, u: usize, v: usize) -> EdgeRecord {
        EdgeRecord { id, u, v, weight: 1.0 }
    }

    #[test]
    fn two_children_of_four() {
        let ev = vec![Event::Insert(rec(0, 0, 1)), Event::Query(0, 1), Event::Query(1, 2), Event::Delete(rec(0, 0, 1))];
        let seq = EventSequence::new(3, &ev).unwrap();
        let t = build_decomposition_tree(&seq, &[2]).unwrap();
        assert_eq!(t.nodes.len(), 3);
        assert_eq!((t.nodes[1].start, t.nodes[1].end), (1, 2));
        assert_eq!((t.nodes[2].start, t.nodes[2].end), (3, 4));
        assert!(t.nodes[2].boundary.contains(&1) && t.nodes[2].boundary.contains(&2));
    }

    #[test]
    fn edge_alive_throughout_is_permanent_below() {
        let ev = vec![Event::Insert(rec(0, 0, 1)), Event::Query(0, 1), Event::Query(0, 1), Event::Query(0, 1), Event::Query(0, 1)];
        let seq = EventSequence::new(2, &ev).unwrap();
        let t = build_decomposition_tree(&seq, &[3]).unwrap();
        // padded to 6: children [1,3] and [4,6]; the edge enters at time 1
        assert_eq!(t.betas[0], 6);
        assert_eq!(t.nodes[1].non_perm, vec![0]);
        assert!(t.nodes[2].non_perm.is_empty());
        assert_eq!(t.nodes[2].new_perm, vec![0]);
    }

    #[test]
    fn rejects_non_dividing_betas() {
        let seq = EventSequence::new(2, &[]).unwrap();
        assert!(build_decomposition_tree(&seq, &[4, 3]).is_err());
    }

    #[test]
    fn default_beta_shape() {
        assert_eq!(default_betas(1000, 1, None), vec![32]);
        assert_eq!(default_betas(1000, 2, None), vec![100, 10]);
        assert_eq!(default_betas(1000, 2, Some(4)), vec![16, 4]);
    }
}
