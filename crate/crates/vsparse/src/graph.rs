//! Weighted undirected multigraph with stable edge ids.
//!
//! [`DynamicGraph`] is the mutable source of truth. [`GraphView`] is an
//! immutable snapshot with a compact adjacency list that the static solvers
//! work on.

use std::collections::BTreeMap;

use indexmap::{IndexMap, IndexSet};
use ordered_float::OrderedFloat;
use thiserror::Error;

pub type VertexId = usize;
pub type EdgeId = usize;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeRecord {
    pub id: EdgeId,
    pub u: VertexId,
    pub v: VertexId,
    pub weight: f64,
}

impl EdgeRecord {
    pub fn other(&self, x: VertexId) -> VertexId {
        if x == self.u {
            self.v
        } else {
            self.u
        }
    }

    /// Endpoints as an ordered pair.
    pub fn key(&self) -> (VertexId, VertexId) {
        pair(self.u, self.v)
    }
}

pub fn pair(a: VertexId, b: VertexId) -> (VertexId, VertexId) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChangeKind {
    Inserted,
    Deleted,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChangeEvent {
    pub kind: ChangeKind,
    pub edge: EdgeRecord,
}

impl ChangeEvent {
    pub fn inserted(edge: EdgeRecord) -> Self {
        ChangeEvent { kind: ChangeKind::Inserted, edge }
    }
    pub fn deleted(edge: EdgeRecord) -> Self {
        ChangeEvent { kind: ChangeKind::Deleted, edge }
    }
}

pub type ChangeSet = Vec<ChangeEvent>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("edge weight must be positive, got {0}")]
    NonPositiveWeight(f64),
    #[error("self-loop at vertex {0}")]
    SelfLoop(VertexId),
    #[error("unknown edge id {0}")]
    UnknownEdge(EdgeId),
    #[error("vertex {v} out of range for n = {n}")]
    VertexOutOfRange { v: VertexId, n: usize },
    #[error("weight ratio {ratio:e} exceeds n^10 = {cap:e}")]
    WeightRatio { ratio: f64, cap: f64 },
    #[error("edge id {0} already in use")]
    DuplicateEdgeId(EdgeId),
}

/// Mutable multigraph on a fixed vertex set `0..n`.
#[derive(Debug, Clone)]
pub struct DynamicGraph {
    n: usize,
    edges: IndexMap<EdgeId, EdgeRecord>,
    adj: Vec<IndexSet<EdgeId>>,
    next_id: EdgeId,
    version: u64,
    weights: BTreeMap<OrderedFloat<f64>, usize>,
    ratio_cap: Option<f64>,
    log: Option<Vec<ChangeEvent>>,
}

impl DynamicGraph {
    /// Graph whose weight ratio is capped at n^10.
    pub fn new(n: usize) -> Self {
        let cap = (n.max(2) as f64).powi(10);
        Self::build(n, Some(cap))
    }

    /// Graph without the weight-ratio cap, for derived sparsifier graphs.
    pub fn unbounded(n: usize) -> Self {
        Self::build(n, None)
    }

    fn build(n: usize, ratio_cap: Option<f64>) -> Self {
        DynamicGraph {
            n,
            edges: IndexMap::new(),
            adj: vec![IndexSet::new(); n],
            next_id: 0,
            version: 0,
            weights: BTreeMap::new(),
            ratio_cap,
            log: None,
        }
    }

    /// Start recording change events; see [`DynamicGraph::take_events`].
    pub fn with_event_log(mut self) -> Self {
        self.log = Some(Vec::new());
        self
    }

    pub fn take_events(&mut self) -> Vec<ChangeEvent> {
        self.log.as_mut().map(std::mem::take).unwrap_or_default()
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn m(&self) -> usize {
        self.edges.len()
    }
    pub fn version(&self) -> u64 {
        self.version
    }
    pub fn next_id(&self) -> EdgeId {
        self.next_id
    }

    pub fn max_weight(&self) -> Option<f64> {
        self.weights.keys().next_back().map(|w| w.0)
    }
    pub fn min_weight(&self) -> Option<f64> {
        self.weights.keys().next().map(|w| w.0)
    }
    /// max/min weight, 1 for an empty graph.
    pub fn weight_ratio(&self) -> f64 {
        match (self.max_weight(), self.min_weight()) {
            (Some(a), Some(b)) => a / b,
            _ => 1.0,
        }
    }

    fn check(&self, u: VertexId, v: VertexId, w: f64) -> Result<(), GraphError> {
        for x in [u, v] {
            if x >= self.n {
                return Err(GraphError::VertexOutOfRange { v: x, n: self.n });
            }
        }
        if !(w > 0.0) || !w.is_finite() {
            return Err(GraphError::NonPositiveWeight(w));
        }
        if u == v {
            return Err(GraphError::SelfLoop(u));
        }
        if let Some(cap) = self.ratio_cap {
            let hi = self.max_weight().map_or(w, |m| m.max(w));
            let lo = self.min_weight().map_or(w, |m| m.min(w));
            if hi / lo > cap {
                return Err(GraphError::WeightRatio { ratio: hi / lo, cap });
            }
        }
        Ok(())
    }

    pub fn insert_edge(&mut self, u: VertexId, v: VertexId, w: f64) -> Result<EdgeRecord, GraphError> {
        self.check(u, v, w)?;
        let id = self.next_id;
        Ok(self.put(EdgeRecord { id, u, v, weight: w }))
    }

    /// Insert under a caller-chosen id, used when mirroring another graph.
    pub fn insert_with_id(&mut self, rec: EdgeRecord) -> Result<EdgeRecord, GraphError> {
        self.check(rec.u, rec.v, rec.weight)?;
        if self.edges.contains_key(&rec.id) {
            return Err(GraphError::DuplicateEdgeId(rec.id));
        }
        Ok(self.put(rec))
    }

    fn put(&mut self, rec: EdgeRecord) -> EdgeRecord {
        self.next_id = self.next_id.max(rec.id + 1);
        self.edges.insert(rec.id, rec);
        self.adj[rec.u].insert(rec.id);
        self.adj[rec.v].insert(rec.id);
        *self.weights.entry(OrderedFloat(rec.weight)).or_insert(0) += 1;
        self.version += 1;
        if let Some(log) = self.log.as_mut() {
            log.push(ChangeEvent::inserted(rec));
        }
        rec
    }

    pub fn delete_edge(&mut self, id: EdgeId) -> Result<EdgeRecord, GraphError> {
        let rec = self.edges.swap_remove(&id).ok_or(GraphError::UnknownEdge(id))?;
        self.adj[rec.u].swap_remove(&id);
        self.adj[rec.v].swap_remove(&id);
        let key = OrderedFloat(rec.weight);
        if let Some(c) = self.weights.get_mut(&key) {
            *c -= 1;
            if *c == 0 {
                self.weights.remove(&key);
            }
        }
        self.version += 1;
        if let Some(log) = self.log.as_mut() {
            log.push(ChangeEvent::deleted(rec));
        }
        Ok(rec)
    }

    /// Apply an event produced by another graph, keeping its edge id.
    pub fn apply(&mut self, ev: &ChangeEvent) -> Result<(), GraphError> {
        match ev.kind {
            ChangeKind::Inserted => self.insert_with_id(ev.edge).map(|_| ()),
            ChangeKind::Deleted => self.delete_edge(ev.edge.id).map(|_| ()),
        }
    }

    pub fn edge(&self, id: EdgeId) -> Option<&EdgeRecord> {
        self.edges.get(&id)
    }
    pub fn contains(&self, id: EdgeId) -> bool {
        self.edges.contains_key(&id)
    }
    pub fn edges(&self) -> impl Iterator<Item = &EdgeRecord> + '_ {
        self.edges.values()
    }
    pub fn incident(&self, v: VertexId) -> impl Iterator<Item = &EdgeRecord> + '_ {
        self.adj[v].iter().map(move |id| &self.edges[id])
    }
    pub fn degree(&self, v: VertexId) -> usize {
        self.adj[v].len()
    }
    pub fn weighted_degree(&self, v: VertexId) -> f64 {
        self.incident(v).map(|e| e.weight).sum()
    }

    /// Live edge between `u` and `v` with the smallest id.
    pub fn find_edge(&self, u: VertexId, v: VertexId) -> Option<EdgeId> {
        if u >= self.n || v >= self.n {
            return None;
        }
        self.adj[u].iter().copied().filter(|id| self.edges[id].other(u) == v).min()
    }

    /// Immutable copy with edges sorted by id.
    pub fn snapshot(&self) -> GraphView {
        let mut edges: Vec<EdgeRecord> = self.edges.values().copied().collect();
        edges.sort_by_key(|e| e.id);
        GraphView::new(self.n, edges)
    }
}

/// Immutable graph with an adjacency list of `(neighbour, edge index)`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GraphView {
    n: usize,
    edges: Vec<EdgeRecord>,
    adj: Vec<Vec<(VertexId, usize)>>,
}

impl GraphView {
    pub fn new(n: usize, edges: Vec<EdgeRecord>) -> Self {
        let mut adj = vec![Vec::new(); n];
        for (i, e) in edges.iter().enumerate() {
            adj[e.u].push((e.v, i));
            if e.u != e.v {
                adj[e.v].push((e.u, i));
            }
        }
        GraphView { n, edges, adj }
    }

    /// Build from `(u, v, w)` triples; ids are positions.
    pub fn from_triples(n: usize, triples: &[(VertexId, VertexId, f64)]) -> Self {
        let edges = triples
            .iter()
            .enumerate()
            .map(|(id, &(u, v, weight))| EdgeRecord { id, u, v, weight })
            .collect();
        Self::new(n, edges)
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn m(&self) -> usize {
        self.edges.len()
    }
    pub fn edges(&self) -> &[EdgeRecord] {
        &self.edges
    }
    pub fn edge(&self, idx: usize) -> &EdgeRecord {
        &self.edges[idx]
    }
    pub fn neighbors(&self, v: VertexId) -> &[(VertexId, usize)] {
        &self.adj[v]
    }
    pub fn weighted_degree(&self, v: VertexId) -> f64 {
        self.adj[v].iter().map(|&(_, i)| self.edges[i].weight).sum()
    }

    /// Connected component label per vertex, labels numbered from 0.
    pub fn components(&self) -> (Vec<usize>, usize) {
        let mut comp = vec![usize::MAX; self.n];
        let mut count = 0;
        let mut stack = Vec::new();
        for s in 0..self.n {
            if comp[s] != usize::MAX {
                continue;
            }
            comp[s] = count;
            stack.push(s);
            while let Some(x) = stack.pop() {
                for &(y, _) in &self.adj[x] {
                    if comp[y] == usize::MAX {
                        comp[y] = count;
                        stack.push(y);
                    }
                }
            }
            count += 1;
        }
        (comp, count)
    }

    /// Sum of weights of edges with exactly one endpoint in `side`.
    /// Total weight crossing the cut. Summed in sorted order so the result
    /// does not depend on edge order.
    pub fn cut_value(&self, side: &[bool]) -> f64 {
        let mut w: Vec<f64> = self.edges.iter().filter(|e| side[e.u] != side[e.v]).map(|e| e.weight).collect();
        w.sort_by(f64::total_cmp);
        w.into_iter().sum()
    }

    /// Replay into a fresh [`DynamicGraph`] keeping ids.
    pub fn to_dynamic(&self) -> DynamicGraph {
        let mut g = DynamicGraph::unbounded(self.n);
        for e in &self.edges {
            g.insert_with_id(*e).expect("view edges are valid");
        }
        g
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_insert_gets_id_zero() {
        let mut g = DynamicGraph::new(2);
        let e = g.insert_edge(0, 1, 1.0).unwrap();
        assert_eq!(e.id, 0);
        assert_eq!(g.m(), 1);
    }

    #[test]
    fn parallel_edges_have_distinct_ids() {
        let mut g = DynamicGraph::new(2);
        let a = g.insert_edge(0, 1, 1.0).unwrap();
        let b = g.insert_edge(0, 1, 1.0).unwrap();
        assert_ne!(a.id, b.id);
        assert_eq!(g.m(), 2);
        g.delete_edge(a.id).unwrap();
        assert!(g.contains(b.id));
        assert_eq!(g.m(), 1);
    }

    #[test]
    fn rejects_bad_inserts() {
        let mut g = DynamicGraph::new(3);
        assert_eq!(g.insert_edge(0, 0, 1.0), Err(GraphError::SelfLoop(0)));
        assert_eq!(g.insert_edge(0, 1, 0.0), Err(GraphError::NonPositiveWeight(0.0)));
        assert!(matches!(g.insert_edge(0, 3, 1.0), Err(GraphError::VertexOutOfRange { .. })));
        g.insert_edge(0, 1, 1.0).unwrap();
        assert!(matches!(g.insert_edge(1, 2, 1e6), Err(GraphError::WeightRatio { .. })));
    }

    #[test]
    fn delete_twice_is_unknown() {
        let mut g = DynamicGraph::new(2);
        let e = g.insert_edge(0, 1, 1.0).unwrap();
        g.delete_edge(e.id).unwrap();
        assert_eq!(g.m(), 0);
        assert_eq!(g.delete_edge(e.id), Err(GraphError::UnknownEdge(e.id)));
    }

    #[test]
    fn snapshot_is_frozen() {
        let mut g = DynamicGraph::new(3);
        assert_eq!(g.snapshot().m(), 0);
        g.insert_edge(0, 1, 2.0).unwrap();
        let s = g.snapshot();
        g.insert_edge(1, 2, 3.0).unwrap();
        assert_eq!(s.m(), 1);
        assert_eq!(g.m(), 2);
    }

    #[test]
    fn version_counts_mutations() {
        let mut g = DynamicGraph::new(3);
        let e = g.insert_edge(0, 1, 2.0).unwrap();
        g.insert_edge(1, 2, 3.0).unwrap();
        g.delete_edge(e.id).unwrap();
        assert_eq!(g.version(), 3);
        assert!(g.delete_edge(e.id).is_err());
        assert_eq!(g.version(), 3);
    }

    #[test]
    fn find_edge_prefers_smallest_id() {
        let mut g = DynamicGraph::new(3);
        g.insert_edge(0, 2, 1.0).unwrap();
        g.insert_edge(1, 0, 1.0).unwrap();
        g.insert_edge(0, 1, 1.0).unwrap();
        assert_eq!(g.find_edge(0, 1), Some(1));
        assert_eq!(g.find_edge(1, 2), None);
    }
}
