//! Hierarchical cut tree used as a flow sparsifier.
//!
//! Clusters are split recursively: first into connected components, then by
//! a balanced spectral sweep. Every tree edge carries the boundary capacity
//! of its cluster, so each tree cut is at least the matching graph cut. The
//! converse direction is certified per tree by routing every tree edge in
//! the graph and measuring congestion.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use nalgebra::{DMatrix, SymmetricEigen};
use ordered_float::OrderedFloat;

use super::OfflineError;
use crate::graph::{GraphView, VertexId};
use crate::oracle;
use crate::par;

#[derive(Debug, Clone, PartialEq)]
pub struct CutTree {
    pub parent: Vec<Option<usize>>,
    /// Capacity of the edge to the parent; 0 at the root.
    pub weight: Vec<f64>,
    pub children: Vec<Vec<usize>>,
    /// Leaf node of each graph vertex.
    pub leaf: Vec<usize>,
    /// Graph vertex of each leaf node.
    pub vertex: Vec<Option<VertexId>>,
}

impl CutTree {
    pub const ROOT: usize = 0;

    pub fn len(&self) -> usize {
        self.parent.len()
    }
    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    fn push(&mut self, parent: Option<usize>, weight: f64, vertex: Option<VertexId>) -> usize {
        let id = self.parent.len();
        self.parent.push(parent);
        self.weight.push(weight);
        self.children.push(Vec::new());
        self.vertex.push(vertex);
        if let Some(p) = parent {
            self.children[p].push(id);
        }
        if let Some(v) = vertex {
            self.leaf[v] = id;
        }
        id
    }

    pub fn depth(&self, mut x: usize) -> usize {
        let mut d = 0;
        while let Some(p) = self.parent[x] {
            x = p;
            d += 1;
        }
        d
    }

    pub fn height(&self) -> usize {
        (0..self.len()).map(|x| self.depth(x)).max().unwrap_or(0)
    }

    /// Largest number of tree neighbours of any node.
    pub fn max_degree(&self) -> usize {
        (0..self.len())
            .map(|x| self.children[x].len() + usize::from(self.parent[x].is_some()))
            .max()
            .unwrap_or(0)
    }

    /// The tree as a graph; node ids are tree node ids.
    pub fn as_graph(&self) -> GraphView {
        let t: Vec<_> = (0..self.len())
            .filter_map(|x| self.parent[x].filter(|_| self.weight[x] > 0.0).map(|p| (x, p, self.weight[x])))
            .collect();
        GraphView::from_triples(self.len(), &t)
    }
}

fn boundary(g: &GraphView, inside: &[bool], cluster: &[VertexId]) -> f64 {
    let mut b = 0.0;
    for &x in cluster {
        for &(y, i) in g.neighbors(x) {
            if !inside[y] {
                b += g.edge(i).weight;
            }
        }
    }
    b
}

fn components_within(g: &GraphView, cluster: &[VertexId], inside: &[bool]) -> Vec<Vec<VertexId>> {
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::new();
    for &s in cluster {
        if !seen.insert(s) {
            continue;
        }
        let mut comp = vec![s];
        let mut stack = vec![s];
        while let Some(x) = stack.pop() {
            for &(y, _) in g.neighbors(x) {
                if inside[y] && seen.insert(y) {
                    comp.push(y);
                    stack.push(y);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

fn fiedler(g: &GraphView, cluster: &[VertexId], pos: &std::collections::HashMap<VertexId, usize>) -> Vec<f64> {
    let k = cluster.len();
    let mut l = DMatrix::<f64>::zeros(k, k);
    for (a, &x) in cluster.iter().enumerate() {
        for &(y, i) in g.neighbors(x) {
            if let Some(&b) = pos.get(&y) {
                let w = g.edge(i).weight;
                l[(a, a)] += w;
                l[(a, b)] -= w;
            }
        }
    }
    if k <= 400 {
        let eig = SymmetricEigen::new(l);
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        return eig.eigenvectors.column(order[1]).iter().copied().collect();
    }
    // power iteration on (c I - L), kept orthogonal to the constant vector
    let c = 2.0 * (0..k).map(|a| l[(a, a)]).fold(0.0, f64::max) + 1.0;
    let mut x: Vec<f64> = (0..k).map(|a| a as f64 - (k as f64 - 1.0) / 2.0).collect();
    for _ in 0..300 {
        let mean = x.iter().sum::<f64>() / k as f64;
        x.iter_mut().for_each(|v| *v -= mean);
        let mut y: Vec<f64> = (0..k).map(|a| c * x[a] - (0..k).map(|b| l[(a, b)] * x[b]).sum::<f64>()).collect();
        let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-300);
        y.iter_mut().for_each(|v| *v /= norm);
        x = y;
    }
    x
}

// Balanced sweep cut of a connected cluster; sizes stay within [k/4, 3k/4].
fn spectral_split(g: &GraphView, cluster: &[VertexId]) -> (Vec<VertexId>, Vec<VertexId>) {
    let k = cluster.len();
    let pos: std::collections::HashMap<VertexId, usize> = cluster.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let f = fiedler(g, cluster, &pos);
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| f[a].total_cmp(&f[b]).then(cluster[a].cmp(&cluster[b])));
    let lo = k.div_ceil(4).max(1);
    let hi = (3 * k / 4).max(lo).min(k - 1);
    let mut in_prefix = vec![false; k];
    let mut cut = 0.0;
    let mut best = (f64::INFINITY, lo);
    for (idx, &a) in order.iter().enumerate().take(hi) {
        let x = cluster[a];
        for &(y, i) in g.neighbors(x) {
            if let Some(&b) = pos.get(&y) {
                let w = g.edge(i).weight;
                if in_prefix[b] {
                    cut -= w;
                } else if b != a {
                    cut += w;
                }
            }
        }
        in_prefix[a] = true;
        let size = idx + 1;
        if size >= lo {
            let ratio = cut / size.min(k - size) as f64;
            if ratio < best.0 {
                best = (ratio, size);
            }
        }
    }
    let mut left: Vec<VertexId> = order[..best.1].iter().map(|&a| cluster[a]).collect();
    let mut right: Vec<VertexId> = order[best.1..].iter().map(|&a| cluster[a]).collect();
    left.sort_unstable();
    right.sort_unstable();
    (left, right)
}

/// Raw hierarchical tree over all vertices of `g`; node degrees unbounded.
pub fn build_cut_tree(g: &GraphView) -> CutTree {
    let n = g.n();
    let mut t = CutTree { parent: Vec::new(), weight: Vec::new(), children: Vec::new(), leaf: vec![usize::MAX; n], vertex: Vec::new() };
    let root = t.push(None, 0.0, None);
    let mut inside = vec![false; n];
    let mut stack: Vec<(usize, Vec<VertexId>)> = vec![(root, (0..n).collect())];
    while let Some((node, cluster)) = stack.pop() {
        cluster.iter().for_each(|&v| inside[v] = true);
        let parts = if cluster.len() <= 1 {
            Vec::new()
        } else {
            let comps = components_within(g, &cluster, &inside);
            if comps.len() > 1 {
                comps
            } else if cluster.len() <= 4 {
                cluster.iter().map(|&v| vec![v]).collect()
            } else {
                let (a, b) = spectral_split(g, &cluster);
                vec![a, b]
            }
        };
        cluster.iter().for_each(|&v| inside[v] = false);
        if cluster.len() == 1 && node == root {
            t.push(Some(root), boundary(g, &inside, &cluster), Some(cluster[0]));
            continue;
        }
        let mut kids = Vec::new();
        for part in parts {
            part.iter().for_each(|&v| inside[v] = true);
            let w = boundary(g, &inside, &part);
            part.iter().for_each(|&v| inside[v] = false);
            let leaf_vertex = (part.len() == 1).then(|| part[0]);
            let id = t.push(Some(node), w, leaf_vertex);
            if part.len() > 1 {
                kids.push((id, part));
            }
        }
        stack.extend(kids.into_iter().rev());
    }
    t
}

/// Degree reduction by repeatedly grouping the two lightest child groups.
/// A new group edge gets min(group weight, remaining weight at the node).
pub fn binarize_tree(raw: &CutTree) -> CutTree {
    let mut t = raw.clone();
    for x in 0..raw.len() {
        if t.children[x].len() <= 2 {
            continue;
        }
        let kids = std::mem::take(&mut t.children[x]);
        let total: f64 = kids.iter().map(|&c| t.weight[c]).sum::<f64>() + if t.parent[x].is_some() { t.weight[x] } else { 0.0 };
        let mut heap: BinaryHeap<Reverse<(OrderedFloat<f64>, usize)>> =
            kids.iter().map(|&c| Reverse((OrderedFloat(t.weight[c]), c))).collect();
        while heap.len() > 2 {
            let Reverse((OrderedFloat(wa), a)) = heap.pop().expect("more than two groups");
            let Reverse((OrderedFloat(wb), b)) = heap.pop().expect("more than two groups");
            let ww = wa + wb;
            let id = t.push(None, (total - ww).min(ww).max(0.0), None);
            t.parent[id] = Some(x);
            t.children[id] = vec![a, b];
            t.parent[a] = Some(id);
            t.parent[b] = Some(id);
            heap.push(Reverse((OrderedFloat(ww), id)));
        }
        let mut rest: Vec<usize> = heap.into_iter().map(|Reverse((_, c))| c).collect();
        rest.sort_unstable();
        t.children[x] = rest;
    }
    t
}

/// Union of root paths of the terminal leaves. Leaves keep their vertex id;
/// other tree nodes are renumbered from `n` upward in order of first use.
pub fn flow_vertex_sparsify(t: &CutTree, terminals: &[VertexId]) -> Result<GraphView, OfflineError> {
    let n = t.leaf.len();
    let mut id: Vec<Option<usize>> = vec![None; t.len()];
    let mut next = n;
    let mut triples = Vec::new();
    let mut ts = terminals.to_vec();
    ts.sort_unstable();
    ts.dedup();
    for &v in &ts {
        if v >= n || t.leaf[v] == usize::MAX {
            return Err(OfflineError::TerminalNotLeaf(v));
        }
        let mut x = t.leaf[v];
        id[x] = Some(v);
        while let Some(p) = t.parent[x] {
            let fresh = id[p].is_none();
            if fresh {
                id[p] = Some(next);
                next += 1;
            }
            if t.weight[x] > 0.0 {
                triples.push((id[x].expect("assigned on the way up"), id[p].expect("assigned above"), t.weight[x]));
            }
            if !fresh {
                break;
            }
            x = p;
        }
    }
    Ok(GraphView::from_triples(next, &triples))
}

/// Congestion of routing every tree edge's capacity in `g`, between
/// representative leaves of its two sides. At least 1.
pub fn tree_congestion(t: &CutTree, g: &GraphView) -> f64 {
    let mut rep = vec![usize::MAX; t.len()];
    let mut order: Vec<usize> = (0..t.len()).collect();
    order.sort_by_key(|&x| Reverse(t.depth(x)));
    for &x in &order {
        rep[x] = match t.vertex[x] {
            Some(v) => v,
            None => t.children[x]
                .iter()
                .copied()
                .max_by(|&a, &b| t.weight[a].total_cmp(&t.weight[b]).then(b.cmp(&a)))
                .map_or(usize::MAX, |c| rep[c]),
        };
    }
    let demands: Vec<(VertexId, VertexId, f64)> = (0..t.len())
        .filter_map(|x| {
            let p = t.parent[x]?;
            (t.weight[x] > 0.0 && rep[x] != rep[p] && rep[p] != usize::MAX).then(|| (rep[x], rep[p], t.weight[x]))
        })
        .collect();
    let flows = par::map(&demands, |&(a, b, c)| {
        let f = oracle::max_flow(g, a, b).expect("distinct representatives");
        let scale = if f.value > 0.0 { c / f.value } else { f64::INFINITY };
        f.flow.into_iter().map(|x| x.abs() * scale).collect::<Vec<f64>>()
    });
    let mut load = vec![0.0; g.m()];
    for f in &flows {
        for (l, x) in load.iter_mut().zip(f) {
            *l += x;
        }
    }
    g.edges()
        .iter()
        .zip(&load)
        .map(|(e, &l)| l / e.weight)
        .fold(1.0, f64::max)
}
