//! Deterministic Thorup–Zwick bunches and the bunch-union distance sparsifier.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap, HashMap};

use ordered_float::OrderedFloat;
use thiserror::Error;

use crate::framework::{FrameworkError, SparsifierFactory, VertexSparsifier};
use crate::graph::{pair, ChangeEvent, ChangeSet, DynamicGraph, EdgeRecord, GraphView, VertexId};
use crate::par;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TzError {
    #[error("q = {q} exceeds the {sources} available sources")]
    QTooLarge { q: usize, sources: usize },
    #[error("q must be at least 1")]
    ZeroQ,
    #[error("set {0} of the collection is empty")]
    EmptySetInCollection(usize),
}

type Key = Reverse<(OrderedFloat<f64>, VertexId, VertexId)>;

/// For every vertex, its `q` nearest sources as `(distance, source)`, sorted
/// by distance then source id. Vertices that reach fewer than `q` sources get
/// a shorter list.
pub fn source_detection(g: &GraphView, sources: &[VertexId], q: usize) -> Result<Vec<Vec<(f64, VertexId)>>, TzError> {
    if q == 0 {
        return Err(TzError::ZeroQ);
    }
    let mut src = sources.to_vec();
    src.sort_unstable();
    src.dedup();
    if q > src.len() {
        return Err(TzError::QTooLarge { q, sources: src.len() });
    }
    let mut found: Vec<Vec<(f64, VertexId)>> = vec![Vec::new(); g.n()];
    let mut heap: BinaryHeap<Key> = src.iter().map(|&s| Reverse((OrderedFloat(0.0), s, s))).collect();
    while let Some(Reverse((OrderedFloat(d), s, v))) = heap.pop() {
        let list = &mut found[v];
        if list.len() >= q || list.iter().any(|&(_, x)| x == s) {
            continue;
        }
        list.push((d, s));
        for &(y, i) in g.neighbors(v) {
            let ly = &found[y];
            if ly.len() < q && !ly.iter().any(|&(_, x)| x == s) {
                heap.push(Reverse((OrderedFloat(d + g.edge(i).weight), s, y)));
            }
        }
    }
    Ok(found)
}

/// Two-phase greedy hitting set. Phase 1 takes the element hitting the most
/// unhit sets until at most `|U|/s` sets remain unhit; phase 2 covers each
/// leftover set with its smallest element. Returns the elements sorted.
pub fn greedy_hitting_set(universe: &[VertexId], sets: &[Vec<VertexId>], s: usize) -> Result<Vec<VertexId>, TzError> {
    if let Some(i) = sets.iter().position(|x| x.is_empty()) {
        return Err(TzError::EmptySetInCollection(i));
    }
    let limit = universe.len() as f64 / s.max(1) as f64;
    let mut containing: BTreeMap<VertexId, Vec<usize>> = BTreeMap::new();
    for (i, set) in sets.iter().enumerate() {
        for &x in set {
            containing.entry(x).or_default().push(i);
        }
    }
    let mut count: HashMap<VertexId, usize> = containing.iter().map(|(&x, v)| (x, v.len())).collect();
    let mut heap: BinaryHeap<(usize, Reverse<VertexId>)> = count.iter().map(|(&x, &c)| (c, Reverse(x))).collect();
    let mut hit = vec![false; sets.len()];
    let mut unhit = sets.len();
    let mut chosen = Vec::new();

    while unhit as f64 > limit {
        let Some((c, Reverse(x))) = heap.pop() else { break };
        let cur = count[&x];
        if c != cur {
            heap.push((cur, Reverse(x)));
            continue;
        }
        chosen.push(x);
        count.insert(x, 0);
        for &i in &containing[&x] {
            if !hit[i] {
                hit[i] = true;
                unhit -= 1;
                for &y in &sets[i] {
                    let c = count.get_mut(&y).expect("element was indexed");
                    *c = c.saturating_sub(1);
                }
            }
        }
    }
    let mut in_t: std::collections::HashSet<VertexId> = chosen.iter().copied().collect();
    for (i, set) in sets.iter().enumerate() {
        if hit[i] || set.iter().any(|x| in_t.contains(x)) {
            continue;
        }
        let x = *set.iter().min().expect("non-empty");
        in_t.insert(x);
        chosen.push(x);
    }
    chosen.sort_unstable();
    chosen.dedup();
    Ok(chosen)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CenterHierarchy {
    /// `sets[i]` is A_i, sorted; `sets[r]` is empty.
    pub sets: Vec<Vec<VertexId>>,
    /// `dist[i][v]` is dist(A_i, v).
    pub dist: Vec<Vec<f64>>,
    /// `pivot[i][v]` realises `dist[i][v]`.
    pub pivot: Vec<Vec<Option<VertexId>>>,
    pub q: usize,
}

impl CenterHierarchy {
    pub fn r(&self) -> usize {
        self.sets.len() - 1
    }
}

pub fn hierarchy_q(n: usize, r: usize) -> usize {
    let n = n.max(1) as f64;
    (n.powf(1.0 / r as f64) * (1.0 + n.ln())).ceil() as usize
}

fn nearest(g: &GraphView, set: &[VertexId]) -> (Vec<f64>, Vec<Option<VertexId>>) {
    if set.is_empty() {
        return (vec![f64::INFINITY; g.n()], vec![None; g.n()]);
    }
    let lists = source_detection(g, set, 1).expect("q = 1 with a non-empty set");
    lists
        .into_iter()
        .map(|l| l.first().map_or((f64::INFINITY, None), |&(d, s)| (d, Some(s))))
        .unzip()
}

pub fn det_hierarchy(g: &GraphView, r: usize) -> CenterHierarchy {
    assert!(r >= 1, "r must be at least 1");
    let n = g.n();
    let base_q = hierarchy_q(n, r);
    let mut sets: Vec<Vec<VertexId>> = vec![(0..n).collect()];
    for i in 0..r - 1 {
        let a = &sets[i];
        if a.is_empty() {
            sets.push(Vec::new());
            continue;
        }
        let q = base_q.min(a.len());
        let lists = source_detection(g, a, q).expect("q clamped to |A_i|");
        // vertices that see fewer than q centres have nothing to hit
        let family: Vec<Vec<VertexId>> = lists
            .into_iter()
            .filter(|l| l.len() == q)
            .map(|l| l.into_iter().map(|(_, s)| s).collect())
            .collect();
        let next = if family.is_empty() { Vec::new() } else { greedy_hitting_set(a, &family, q).expect("lists are non-empty") };
        sets.push(next);
    }
    sets.push(Vec::new());

    let mut dist = vec![Vec::new(); r + 1];
    let mut pivot = vec![Vec::new(); r + 1];
    for i in (0..=r).rev() {
        let (d, p) = nearest(g, &sets[i]);
        dist[i] = d;
        pivot[i] = p;
        if i < r {
            for v in 0..n {
                if dist[i][v] == dist[i + 1][v] {
                    pivot[i][v] = pivot[i + 1][v];
                }
            }
        }
    }
    CenterHierarchy { sets, dist, pivot, q: base_q }
}

// Cluster of w: every v with d(w, v) < d(A_{i+1}, v), by pruned Dijkstra.
fn cluster(g: &GraphView, w: VertexId, bound: &[f64]) -> Vec<(VertexId, f64)> {
    let mut best: HashMap<VertexId, f64> = HashMap::from([(w, 0.0)]);
    let mut out = Vec::new();
    let mut heap = BinaryHeap::from([Reverse((OrderedFloat(0.0), w))]);
    while let Some(Reverse((OrderedFloat(d), x))) = heap.pop() {
        if d > best[&x] {
            continue;
        }
        out.push((x, d));
        for &(y, i) in g.neighbors(x) {
            let nd = d + g.edge(i).weight;
            if nd < bound[y] && best.get(&y).is_none_or(|&b| nd < b) {
                best.insert(y, nd);
                heap.push(Reverse((OrderedFloat(nd), y)));
            }
        }
    }
    out
}

/// Bunches of every vertex as ordered maps member -> distance.
pub fn compute_bunches(g: &GraphView, h: &CenterHierarchy) -> Vec<BTreeMap<VertexId, f64>> {
    let n = g.n();
    let r = h.r();
    let mut work: Vec<(VertexId, usize)> = Vec::new();
    for i in 0..r {
        let mut next = vec![false; n];
        h.sets[i + 1].iter().for_each(|&x| next[x] = true);
        work.extend(h.sets[i].iter().filter(|&&w| !next[w]).map(|&w| (w, i)));
    }
    let pieces = par::map(&work, |&(w, i)| cluster(g, w, &h.dist[i + 1]));
    let mut bunches = vec![BTreeMap::new(); n];
    for (&(w, _), piece) in work.iter().zip(pieces) {
        for (v, d) in piece {
            bunches[v].insert(w, d);
        }
    }
    for (v, b) in bunches.iter_mut().enumerate() {
        for i in 0..r {
            if let Some(p) = h.pivot[i][v] {
                b.entry(p).or_insert(h.dist[i][v]);
            }
        }
    }
    bunches
}

/// Distance sparsifier formed by the union of terminal bunch stars.
#[derive(Debug, Clone)]
pub struct TzIvs {
    r: usize,
    hierarchy: CenterHierarchy,
    bunches: Vec<BTreeMap<VertexId, f64>>,
    terminal: Vec<bool>,
    stars: HashMap<(VertexId, VertexId), usize>,
    h: DynamicGraph,
}

impl TzIvs {
    pub fn preprocess(g: &GraphView, r: usize) -> Self {
        let hierarchy = det_hierarchy(g, r);
        let bunches = compute_bunches(g, &hierarchy);
        TzIvs {
            r,
            hierarchy,
            bunches,
            terminal: vec![false; g.n()],
            stars: HashMap::new(),
            h: DynamicGraph::unbounded(g.n()),
        }
    }

    pub fn hierarchy(&self) -> &CenterHierarchy {
        &self.hierarchy
    }
    pub fn bunch(&self, v: VertexId) -> &BTreeMap<VertexId, f64> {
        &self.bunches[v]
    }
    pub fn max_bunch(&self) -> usize {
        self.bunches.iter().map(|b| b.len()).max().unwrap_or(0)
    }
    pub fn stretch(&self) -> f64 {
        (2 * self.r - 1) as f64
    }
    pub fn terminals(&self) -> Vec<VertexId> {
        (0..self.terminal.len()).filter(|&v| self.terminal[v]).collect()
    }
}

impl VertexSparsifier for TzIvs {
    fn add_terminal(&mut self, u: VertexId) -> ChangeSet {
        if self.terminal[u] {
            return Vec::new();
        }
        self.terminal[u] = true;
        let mut out = Vec::new();
        for (&w, &d) in &self.bunches[u] {
            if w == u {
                continue;
            }
            let key = pair(u, w);
            if self.stars.contains_key(&key) {
                continue;
            }
            let rec = self.h.insert_edge(u, w, d).expect("bunch distances are positive");
            self.stars.insert(key, rec.id);
            out.push(ChangeEvent::inserted(rec));
        }
        out
    }

    fn insert(&mut self, e: EdgeRecord) -> Result<ChangeSet, FrameworkError> {
        let mut out = self.add_terminal(e.u);
        out.extend(self.add_terminal(e.v));
        let rec = self.h.insert_edge(e.u, e.v, e.weight)?;
        out.push(ChangeEvent::inserted(rec));
        Ok(out)
    }

    fn graph(&self) -> &DynamicGraph {
        &self.h
    }
    fn is_terminal(&self, u: VertexId) -> bool {
        self.terminal[u]
    }
    fn quality(&self) -> f64 {
        self.stretch()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct TzFactory {
    pub r: usize,
}

impl SparsifierFactory for TzFactory {
    type Output = TzIvs;
    fn build(&self, base: &DynamicGraph, terminals: &[VertexId], _level: usize) -> Result<TzIvs, FrameworkError> {
        let mut ivs = TzIvs::preprocess(&base.snapshot(), self.r);
        for &t in terminals {
            ivs.add_terminal(t);
        }
        Ok(ivs)
    }
}
