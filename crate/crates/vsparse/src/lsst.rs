//! Low-stretch spanning forests.
//!
//! The tree builder is an AKPW-style clustering: edges are bucketed into
//! length classes with base 4, and in round `i` every current cluster that
//! touches an active edge (class <= i) is absorbed into a ball grown by BFS
//! over the cluster graph. A ball stops growing once its boundary count is at
//! most half its internal count. Counts are weighted by edge multiplicity,
//! which is how importance weights enter: an edge of multiplicity r behaves
//! like r parallel copies.

use std::collections::{BTreeMap, VecDeque};

use crate::graph::{GraphView, VertexId};

const CLASS_BASE: f64 = 4.0;
const GROWTH: f64 = 2.0;

struct UnionFind {
    p: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { p: (0..n).collect() }
    }
    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.p[r] != r {
            r = self.p[r];
        }
        let mut y = x;
        while self.p[y] != r {
            let next = self.p[y];
            self.p[y] = r;
            y = next;
        }
        r
    }
    // smaller id becomes the representative, keeping runs reproducible
    fn union(&mut self, a: usize, b: usize) -> bool {
        let (a, b) = (self.find(a), self.find(b));
        if a == b {
            return false;
        }
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        self.p[hi] = lo;
        true
    }
}

/// Spanning-forest edge indices chosen by weighted AKPW clustering.
pub fn akpw_tree_edges(g: &GraphView, lengths: &[f64], mult: &[u64]) -> Vec<usize> {
    let m = g.m();
    assert_eq!(lengths.len(), m);
    assert_eq!(mult.len(), m);
    let min_len = lengths.iter().copied().filter(|&l| l > 0.0).fold(f64::INFINITY, f64::min);
    let class: Vec<u32> = lengths
        .iter()
        .map(|&l| {
            if !(l > 0.0) || !min_len.is_finite() {
                0
            } else {
                ((l / min_len).ln() / CLASS_BASE.ln()).floor().max(0.0) as u32
            }
        })
        .collect();
    let max_class = class.iter().copied().max().unwrap_or(0);

    let mut uf = UnionFind::new(g.n());
    let mut tree = Vec::new();
    let mut round = 0u32;
    loop {
        let active: Vec<usize> = (0..m)
            .filter(|&e| {
                let ed = g.edge(e);
                class[e] <= round && ed.u != ed.v && uf.find(ed.u) != uf.find(ed.v)
            })
            .collect();
        if active.is_empty() {
            if round >= max_class {
                break;
            }
            round += 1;
            continue;
        }
        // cluster graph over the active edges
        let mut adj: BTreeMap<usize, Vec<(usize, usize)>> = BTreeMap::new();
        for &e in &active {
            let (a, b) = (uf.find(g.edge(e).u), uf.find(g.edge(e).v));
            adj.entry(a).or_default().push((b, e));
            adj.entry(b).or_default().push((a, e));
        }
        let count = |c: usize| -> u64 { adj[&c].iter().map(|&(_, e)| mult[e]).sum() };
        let mut centres: Vec<(u64, usize)> = adj.keys().map(|&c| (count(c), c)).collect();
        centres.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));

        let mut ball_of: BTreeMap<usize, usize> = BTreeMap::new();
        let mut chosen: Vec<usize> = Vec::new();
        for &(_, c) in &centres {
            if ball_of.contains_key(&c) {
                continue;
            }
            ball_of.insert(c, c);
            let mut members = vec![c];
            let mut internal: u64 = 0;
            loop {
                let mut boundary: u64 = 0;
                // best attach edge per unclaimed neighbour: min class, max mult, min id
                let mut attach: BTreeMap<usize, usize> = BTreeMap::new();
                for &x in &members {
                    for &(y, e) in &adj[&x] {
                        if ball_of.contains_key(&y) {
                            continue;
                        }
                        boundary += mult[e];
                        let better = match attach.get(&y) {
                            None => true,
                            Some(&f) => (class[e], std::cmp::Reverse(mult[e]), e) < (class[f], std::cmp::Reverse(mult[f]), f),
                        };
                        if better {
                            attach.insert(y, e);
                        }
                    }
                }
                if boundary == 0 || (boundary as f64) * GROWTH <= internal as f64 {
                    break;
                }
                let layer: Vec<usize> = attach.keys().copied().collect();
                for &y in &layer {
                    ball_of.insert(y, c);
                    chosen.push(attach[&y]);
                }
                for &y in &layer {
                    for &(z, e) in &adj[&y] {
                        // count each inside edge once: old-new from the new side, new-new by id order
                        match ball_of.get(&z) {
                            Some(&bz) if bz == c && (!layer.contains(&z) || z > y) => internal += mult[e],
                            _ => {}
                        }
                    }
                }
                members.extend(layer);
            }
        }
        for e in chosen {
            let ed = g.edge(e);
            if uf.union(ed.u, ed.v) {
                tree.push(e);
            }
        }
        round += 1;
    }
    tree.sort_unstable();
    tree
}

/// Replication counts `1 + floor(l_e w_e |E| / sum_f l_f w_f)`.
pub fn replication(lengths: &[f64], importance: &[f64]) -> Vec<u64> {
    let m = lengths.len();
    let vol: f64 = lengths.iter().zip(importance).map(|(l, w)| l * w).sum();
    lengths
        .iter()
        .zip(importance)
        .map(|(l, w)| if vol > 0.0 { 1 + (l * w * m as f64 / vol).floor() as u64 } else { 1 })
        .collect()
}

pub fn lsst(g: &GraphView, lengths: &[f64]) -> RootedForest {
    let edges = akpw_tree_edges(g, lengths, &vec![1; g.m()]);
    RootedForest::new(g, &edges, lengths)
}

/// Tree whose importance-weighted stretch is bounded by replication.
pub fn generalized_lsst(g: &GraphView, lengths: &[f64], importance: &[f64]) -> RootedForest {
    let edges = akpw_tree_edges(g, lengths, &replication(lengths, importance));
    RootedForest::new(g, &edges, lengths)
}

/// Spanning forest rooted at the smallest vertex of each component.
#[derive(Debug, Clone, PartialEq)]
pub struct RootedForest {
    pub parent: Vec<Option<VertexId>>,
    /// Index into the source view's edge list of the edge to the parent.
    pub parent_edge: Vec<Option<usize>>,
    pub depth: Vec<usize>,
    /// Length from the root.
    pub root_dist: Vec<f64>,
    pub root: Vec<VertexId>,
    pub children: Vec<Vec<VertexId>>,
    /// BFS order, roots first.
    pub order: Vec<VertexId>,
    /// Sorted tree edge indices.
    pub tree_edges: Vec<usize>,
    up: Vec<Vec<usize>>,
}

impl RootedForest {
    pub fn new(g: &GraphView, tree_edges: &[usize], lengths: &[f64]) -> Self {
        let n = g.n();
        let mut adj: Vec<Vec<(VertexId, usize)>> = vec![Vec::new(); n];
        for &e in tree_edges {
            let ed = g.edge(e);
            adj[ed.u].push((ed.v, e));
            adj[ed.v].push((ed.u, e));
        }
        adj.iter_mut().for_each(|a| a.sort_unstable());
        let mut f = RootedForest {
            parent: vec![None; n],
            parent_edge: vec![None; n],
            depth: vec![0; n],
            root_dist: vec![0.0; n],
            root: vec![usize::MAX; n],
            children: vec![Vec::new(); n],
            order: Vec::with_capacity(n),
            tree_edges: {
                let mut t = tree_edges.to_vec();
                t.sort_unstable();
                t
            },
            up: Vec::new(),
        };
        for r in 0..n {
            if f.root[r] != usize::MAX {
                continue;
            }
            f.root[r] = r;
            let mut q = VecDeque::from([r]);
            while let Some(x) = q.pop_front() {
                f.order.push(x);
                for &(y, e) in &adj[x] {
                    if f.root[y] == usize::MAX {
                        f.root[y] = r;
                        f.parent[y] = Some(x);
                        f.parent_edge[y] = Some(e);
                        f.depth[y] = f.depth[x] + 1;
                        f.root_dist[y] = f.root_dist[x] + lengths[e];
                        f.children[x].push(y);
                        q.push_back(y);
                    }
                }
            }
        }
        let levels = (usize::BITS - n.max(1).leading_zeros()) as usize;
        let mut up = vec![(0..n).map(|v| f.parent[v].unwrap_or(v)).collect::<Vec<_>>()];
        for k in 1..levels.max(1) {
            let prev = &up[k - 1];
            let next = (0..n).map(|v| prev[prev[v]]).collect();
            up.push(next);
        }
        f.up = up;
        f
    }

    pub fn n(&self) -> usize {
        self.parent.len()
    }

    pub fn is_tree_edge(&self, e: usize) -> bool {
        self.tree_edges.binary_search(&e).is_ok()
    }

    pub fn lca(&self, mut a: VertexId, mut b: VertexId) -> Option<VertexId> {
        if self.root[a] != self.root[b] {
            return None;
        }
        if self.depth[a] < self.depth[b] {
            std::mem::swap(&mut a, &mut b);
        }
        let diff = self.depth[a] - self.depth[b];
        for (k, row) in self.up.iter().enumerate() {
            if diff >> k & 1 == 1 {
                a = row[a];
            }
        }
        if a == b {
            return Some(a);
        }
        for row in self.up.iter().rev() {
            if row[a] != row[b] {
                a = row[a];
                b = row[b];
            }
        }
        self.parent[a]
    }

    /// Tree distance; infinite across components.
    pub fn dist(&self, a: VertexId, b: VertexId) -> f64 {
        match self.lca(a, b) {
            Some(c) => self.root_dist[a] + self.root_dist[b] - 2.0 * self.root_dist[c],
            None => f64::INFINITY,
        }
    }

    /// Vertices on the tree path from `a` to `b`, both included.
    pub fn path(&self, a: VertexId, b: VertexId) -> Vec<VertexId> {
        let Some(c) = self.lca(a, b) else { return Vec::new() };
        let mut left = vec![a];
        let mut x = a;
        while x != c {
            x = self.parent[x].expect("below the lca");
            left.push(x);
        }
        let mut right = Vec::new();
        let mut y = b;
        while y != c {
            right.push(y);
            y = self.parent[y].expect("below the lca");
        }
        left.extend(right.into_iter().rev());
        left
    }

    /// Edge indices on the tree path from `a` to `b`, in walking order.
    pub fn path_edges(&self, a: VertexId, b: VertexId) -> Vec<usize> {
        let p = self.path(a, b);
        p.windows(2)
            .map(|w| {
                if self.parent[w[0]] == Some(w[1]) {
                    self.parent_edge[w[0]].expect("has parent")
                } else {
                    self.parent_edge[w[1]].expect("has parent")
                }
            })
            .collect()
    }
}

/// Mean of d_T(u,v) / l(e) over all edges.
pub fn average_stretch(g: &GraphView, lengths: &[f64], t: &RootedForest) -> f64 {
    if g.m() == 0 {
        return 1.0;
    }
    let s: f64 = g.edges().iter().zip(lengths).map(|(e, &l)| t.dist(e.u, e.v) / l).sum();
    s / g.m() as f64
}

/// sum_e d_T(e) w_e / sum_e l_e w_e.
pub fn weighted_stretch(g: &GraphView, lengths: &[f64], importance: &[f64], t: &RootedForest) -> f64 {
    let num: f64 = g.edges().iter().zip(importance).map(|(e, &w)| t.dist(e.u, e.v) * w).sum();
    let den: f64 = lengths.iter().zip(importance).map(|(l, w)| l * w).sum();
    if den > 0.0 {
        num / den
    } else {
        1.0
    }
}
