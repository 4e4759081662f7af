//! Tree, core set and tree partition for one j-tree.

use crate::graph::{GraphView, VertexId};
use crate::lsst::{generalized_lsst, RootedForest};

use super::JTreeError;

/// Output of [`compute_tcf`]. Edge-indexed vectors follow the view's order.
#[derive(Debug, Clone)]
pub struct Tcf {
    pub tree: RootedForest,
    pub core: Vec<bool>,
    /// Tree edges removed to split the tree into one component per core vertex.
    pub cut: Vec<bool>,
    /// Relative load `c_G(subtree) / c(e)` of each tree edge, zero elsewhere.
    pub rload: Vec<f64>,
}

impl Tcf {
    pub fn core_vertices(&self) -> Vec<VertexId> {
        (0..self.core.len()).filter(|&v| self.core[v]).collect()
    }
    pub fn cut_edges(&self) -> Vec<usize> {
        (0..self.cut.len()).filter(|&e| self.cut[e]).collect()
    }
}

/// `c_G(subtree(z))` for every vertex, restricted to z's own tree.
pub fn subtree_cuts(g: &GraphView, t: &RootedForest) -> Vec<f64> {
    let n = g.n();
    let mut wdeg = vec![0.0; n];
    let mut inner = vec![0.0; n];
    for e in g.edges() {
        if e.u == e.v {
            continue;
        }
        wdeg[e.u] += e.weight;
        wdeg[e.v] += e.weight;
        if let Some(l) = t.lca(e.u, e.v) {
            inner[l] += e.weight;
        }
    }
    let mut acc: Vec<f64> = (0..n).map(|v| wdeg[v] - 2.0 * inner[v]).collect();
    for &z in t.order.iter().rev() {
        if let Some(p) = t.parent[z] {
            acc[p] += acc[z];
        }
    }
    acc.iter_mut().for_each(|x| *x = x.max(0.0));
    acc
}

/// Vertices of degree at least three in the Steiner forest of `marked`,
/// where every tree root counts as marked.
pub fn branch_vertices(t: &RootedForest, marked: &[bool]) -> Vec<VertexId> {
    let n = t.n();
    let mut has = marked.to_vec();
    let mut hits = vec![0usize; n];
    for &z in t.order.iter().rev() {
        if let Some(p) = t.parent[z] {
            if has[z] {
                hits[p] += 1;
                has[p] = true;
            }
        }
    }
    (0..n).filter(|&v| !marked[v] && hits[v] >= 2).collect()
}

/// Builds (T, C, F): a low-stretch tree under `lengths` with view weights as
/// importance, a core set of size O(j) and a tree partition.
pub fn compute_tcf(g: &GraphView, j: usize, lengths: &[f64], terminals: &[VertexId]) -> Result<Tcf, JTreeError> {
    if j == 0 {
        return Err(JTreeError::InvalidJ);
    }
    let n = g.n();
    let m = g.m();
    let caps: Vec<f64> = g.edges().iter().map(|e| e.weight).collect();
    let tree = generalized_lsst(g, lengths, &caps);
    let sub = subtree_cuts(g, &tree);

    let mut rload = vec![0.0; m];
    for v in 0..n {
        if let Some(e) = tree.parent_edge[v] {
            rload[e] = sub[v] / caps[e];
        }
    }

    // top relative-load buckets, stopping at the first populous bucket
    let log_n = (n.max(2) as f64).log2().ceil() as usize;
    let thr = (j as f64 / (2 * log_n) as f64).ceil().max(1.0) as usize;
    let mut by_load: Vec<usize> = tree.tree_edges.clone();
    by_load.sort_by(|&a, &b| rload[b].total_cmp(&rload[a]).then(a.cmp(&b)));
    let bucket = |e: usize| rload[e].max(1.0).log2().floor() as i64;
    let mut f_edges: Vec<usize> = Vec::new();
    let mut i = 0;
    while i < by_load.len() {
        let b = bucket(by_load[i]);
        let end = by_load[i..].iter().position(|&e| bucket(e) != b).map_or(by_load.len(), |k| i + k);
        if end - i >= thr {
            break;
        }
        f_edges.extend_from_slice(&by_load[i..end]);
        i = end;
    }
    f_edges.truncate(j);

    let mut core = vec![false; n];
    for &t in terminals {
        core[t] = true;
    }
    for v in 0..n {
        if tree.parent[v].is_none() {
            core[v] = true;
        }
    }
    let mut cut = vec![false; m];
    for &e in &f_edges {
        cut[e] = true;
        core[g.edge(e).u] = true;
        core[g.edge(e).v] = true;
    }
    // spacing: the least populated depth residue class modulo ceil(4n/j)
    let span = (4 * n).div_ceil(j).max(1);
    let mut counts = vec![0usize; span];
    for v in 0..n {
        counts[tree.depth[v] % span] += 1;
    }
    let residue = (0..span).min_by_key(|&r| (counts[r], r)).unwrap_or(0);
    for v in 0..n {
        if tree.depth[v] % span == residue {
            core[v] = true;
        }
    }
    for b in branch_vertices(&tree, &core) {
        core[b] = true;
    }

    // one cut per skeleton path: the edge of largest relative load
    for c in 0..n {
        if !core[c] || tree.parent[c].is_none() {
            continue;
        }
        let mut best: Option<usize> = None;
        let mut already = false;
        let mut x = c;
        while let Some(p) = tree.parent[x] {
            let e = tree.parent_edge[x].expect("has parent");
            already |= cut[e];
            if best.is_none_or(|b| rload[e] > rload[b]) {
                best = Some(e);
            }
            x = p;
            if core[x] {
                break;
            }
        }
        if !already {
            cut[best.expect("path has an edge")] = true;
        }
    }
    Ok(Tcf { tree, core, cut, rload })
}

/// Every component of T minus the cut edges holds exactly one core vertex.
pub fn is_tree_partition(g: &GraphView, t: &RootedForest, core: &[bool], cut: &[bool]) -> bool {
    let n = g.n();
    let mut label: Vec<usize> = (0..n).collect();
    for &z in &t.order {
        if let (Some(p), Some(e)) = (t.parent[z], t.parent_edge[z]) {
            if !cut[e] {
                label[z] = label[p];
            }
        }
    }
    let mut count = vec![0usize; n];
    for v in 0..n {
        if core[v] {
            count[label[v]] += 1;
        }
    }
    (0..n).all(|v| count[label[v]] == 1)
}
