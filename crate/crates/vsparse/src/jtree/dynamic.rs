//! A single j-tree kept under terminal additions and edge updates.
//!
//! Every vertex is routed to the core vertex of its envelope component (its
//! representative). Envelope edges carry the cut of their subtree; a graph
//! edge whose endpoints have different representatives adds its weight to
//! the core edge between them. This keeps `c_G(S) <= c_H(S)` for every cut.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use crate::graph::{pair, ChangeEvent, ChangeSet, DynamicGraph, EdgeId, EdgeRecord, GraphView, VertexId};
use crate::lct::LinkCutForest;

use super::tcf::Tcf;
use super::JTreeError;

#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct PairAgg {
    sum: f64,
    count: usize,
}

#[derive(Debug, Clone)]
pub struct JTree {
    n: usize,
    g: DynamicGraph,
    is_core: Vec<bool>,
    label: Vec<usize>,
    label_core: Vec<VertexId>,
    label_size: Vec<usize>,
    env_parent: Vec<Option<(VertexId, EdgeId)>>,
    env_children: Vec<Vec<VertexId>>,
    env_depth: Vec<usize>,
    /// c_H of the envelope edge from a vertex to its parent.
    load: Vec<f64>,
    lct: LinkCutForest,
    slot_of: HashMap<EdgeId, usize>,
    slot_edge: Vec<EdgeId>,
    tree_edges: BTreeSet<EdgeId>,
    cut_edges: BTreeSet<EdgeId>,
    pairs: BTreeMap<(VertexId, VertexId), PairAgg>,
    core: DynamicGraph,
    pair_edge: HashMap<(VertexId, VertexId), EdgeId>,
    pick_max: bool,
    emitted: usize,
}

impl JTree {
    /// Builds the j-tree of `(T, C, F)` on `g`. With `pick_max` the split
    /// edge on a promotion is the heaviest envelope edge instead of the
    /// lightest.
    pub fn route(g: &GraphView, tcf: &Tcf, pick_max: bool) -> JTree {
        let n = g.n();
        let t = &tcf.tree;
        let mut env_adj: Vec<Vec<(VertexId, EdgeId)>> = vec![Vec::new(); n];
        let mut tree_edges = BTreeSet::new();
        let mut cut_edges = BTreeSet::new();
        for &e in &t.tree_edges {
            let r = g.edge(e);
            tree_edges.insert(r.id);
            if tcf.cut[e] {
                cut_edges.insert(r.id);
            } else {
                env_adj[r.u].push((r.v, r.id));
                env_adj[r.v].push((r.u, r.id));
            }
        }
        let mut jt = JTree {
            n,
            g: g.to_dynamic(),
            is_core: tcf.core.clone(),
            label: vec![usize::MAX; n],
            label_core: Vec::new(),
            label_size: Vec::new(),
            env_parent: vec![None; n],
            env_children: vec![Vec::new(); n],
            env_depth: vec![0; n],
            load: vec![0.0; n],
            lct: LinkCutForest::new(2 * n),
            slot_of: HashMap::new(),
            slot_edge: Vec::new(),
            tree_edges,
            cut_edges,
            pairs: BTreeMap::new(),
            core: DynamicGraph::unbounded(n),
            pair_edge: HashMap::new(),
            pick_max,
            emitted: 0,
        };
        for c in 0..n {
            if !jt.is_core[c] {
                continue;
            }
            let lab = jt.label_core.len();
            jt.label_core.push(c);
            jt.label[c] = lab;
            let mut q = VecDeque::from([c]);
            let mut order = Vec::new();
            while let Some(x) = q.pop_front() {
                order.push(x);
                for &(y, e) in &env_adj[x] {
                    if jt.label[y] == usize::MAX {
                        jt.label[y] = lab;
                        jt.env_parent[y] = Some((x, e));
                        jt.env_depth[y] = jt.env_depth[x] + 1;
                        jt.env_children[x].push(y);
                        q.push_back(y);
                    }
                }
            }
            jt.label_size.push(order.len());
            for &y in &order[1..] {
                let (p, e) = jt.env_parent[y].expect("non-root");
                let slot = jt.slot_edge.len();
                jt.slot_edge.push(e);
                jt.slot_of.insert(e, slot);
                jt.lct.link(y, n + slot);
                jt.lct.link(n + slot, p);
            }
            jt.recompute_loads(&order);
        }
        assert!(jt.label.iter().all(|&l| l != usize::MAX), "cut edges must form a tree partition");
        let edges: Vec<EdgeRecord> = jt.g.edges().copied().collect();
        for e in edges {
            let (a, b) = (jt.repr(e.u), jt.repr(e.v));
            if a != b {
                jt.add_contribution(pair(a, b), e.weight);
            }
        }
        let all: Vec<_> = jt.pairs.keys().copied().collect();
        jt.sync_pairs(&all);
        jt.emitted = 0;
        jt
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn base(&self) -> &DynamicGraph {
        &self.g
    }
    pub fn core_graph(&self) -> &DynamicGraph {
        &self.core
    }
    pub fn is_core(&self, v: VertexId) -> bool {
        self.is_core[v]
    }
    pub fn core_vertices(&self) -> Vec<VertexId> {
        (0..self.n).filter(|&v| self.is_core[v]).collect()
    }
    pub fn core_size(&self) -> usize {
        self.is_core.iter().filter(|&&c| c).count()
    }
    /// Core vertex of v's envelope component.
    pub fn repr(&self, v: VertexId) -> VertexId {
        self.label_core[self.label[v]]
    }
    pub fn cut_edges(&self) -> &BTreeSet<EdgeId> {
        &self.cut_edges
    }
    pub fn tree_edges(&self) -> &BTreeSet<EdgeId> {
        &self.tree_edges
    }
    /// Core edge changes emitted since construction.
    pub fn emitted(&self) -> usize {
        self.emitted
    }

    /// Envelope edges as `(child, parent, c_H)`.
    pub fn envelope_edges(&self) -> Vec<(VertexId, VertexId, f64)> {
        (0..self.n).filter_map(|z| self.env_parent[z].map(|(p, _)| (z, p, self.load[z]))).collect()
    }

    /// Whole j-tree as a graph: envelope edges plus core edges.
    pub fn h_view(&self) -> GraphView {
        let mut t: Vec<_> = self.envelope_edges();
        t.extend(self.core.snapshot().edges().iter().map(|e| (e.u, e.v, e.weight)));
        GraphView::from_triples(self.n, &t)
    }

    pub fn h_cut(&self, side: &[bool]) -> f64 {
        let env: f64 = self.envelope_edges().iter().filter(|e| side[e.0] != side[e.1]).map(|e| e.2).sum();
        env + self.core_cut(side)
    }

    pub fn core_cut(&self, side: &[bool]) -> f64 {
        self.core.edges().filter(|e| side[e.u] != side[e.v]).map(|e| e.weight).sum()
    }

    /// Every vertex takes the side of its representative.
    pub fn expand(&self, core_side: &[bool]) -> Vec<bool> {
        (0..self.n).map(|v| core_side[self.repr(v)]).collect()
    }

    /// Each envelope component has exactly one core vertex, its root.
    pub fn check_partition(&self) -> bool {
        let mut cores = vec![0usize; self.label_core.len()];
        for v in 0..self.n {
            if self.is_core[v] {
                cores[self.label[v]] += 1;
                if self.repr(v) != v || self.env_parent[v].is_some() {
                    return false;
                }
            } else if self.env_parent[v].is_none_or(|(p, _)| self.label[p] != self.label[v]) {
                return false;
            }
        }
        (0..self.n).all(|v| cores[self.label[v]] == 1)
    }

    /// Relative load each graph edge of `view` carries when this j-tree is
    /// routed back into the graph.
    pub fn relative_loads(&self, view: &GraphView) -> Vec<f64> {
        let mut acc = vec![0.0; self.n];
        for e in self.g.edges() {
            if e.u != e.v && self.label[e.u] != self.label[e.v] {
                acc[e.u] += e.weight;
                acc[e.v] += e.weight;
            }
        }
        let mut order: Vec<VertexId> = (0..self.n).collect();
        order.sort_by_key(|&v| std::cmp::Reverse(self.env_depth[v]));
        for &z in &order {
            if let Some((p, _)) = self.env_parent[z] {
                acc[p] += acc[z];
            }
        }
        let mut child_of: HashMap<EdgeId, VertexId> = HashMap::new();
        for z in 0..self.n {
            if let Some((_, e)) = self.env_parent[z] {
                child_of.insert(e, z);
            }
        }
        view.edges()
            .iter()
            .map(|e| {
                if let Some(&z) = child_of.get(&e.id) {
                    (self.load[z] + acc[z]) / e.weight
                } else if e.u != e.v && self.label[e.u] != self.label[e.v] {
                    1.0
                } else {
                    0.0
                }
            })
            .collect()
    }

    /// Promotes `u` to the core and returns the core edge changes.
    pub fn add_terminal(&mut self, u: VertexId) -> ChangeSet {
        if self.is_core[u] {
            return Vec::new();
        }
        let n = self.n;
        let x = self.repr(u);
        let found = if self.pick_max { self.lct.path_max(u, x) } else { self.lct.path_min(u, x) };
        let (node, _) = found.expect("a non-core vertex has an envelope path to its core");
        let eid = self.slot_edge[node - n];
        let rec = *self.g.edge(eid).expect("envelope edges are graph edges");
        let c = if self.env_parent[rec.u].is_some_and(|(_, e)| e == eid) { rec.u } else { rec.v };
        let p = rec.other(c);
        self.lct.cut(c, node);
        self.lct.cut(node, p);
        self.lct.set_value(node, None);
        self.env_parent[c] = None;
        self.env_children[p].retain(|&y| y != c);
        self.load[c] = 0.0;
        self.cut_edges.insert(eid);

        let side_a = self.members(c);
        self.reroot(u, &side_a);
        self.is_core[u] = true;
        let old = self.label[u];
        let b_size = self.label_size[old] - side_a.len();
        let fresh = self.label_core.len();
        if side_a.len() <= b_size {
            for &v in &side_a {
                self.label[v] = fresh;
            }
            self.label_core.push(u);
            self.label_size.push(side_a.len());
            self.label_size[old] = b_size;
        } else {
            let side_b = self.members(x);
            for &v in &side_b {
                self.label[v] = fresh;
            }
            self.label_core.push(x);
            self.label_size.push(b_size);
            self.label_core[old] = u;
            self.label_size[old] = side_a.len();
        }
        let order_a = self.members(u);
        let order_b = self.members(x);
        self.recompute_loads(&order_a);
        self.recompute_loads(&order_b);

        // graph edges leaving A now start at u instead of x
        let mut touched = BTreeSet::new();
        for &v in &side_a {
            let inc: Vec<EdgeRecord> = self.g.incident(v).copied().collect();
            for e in inc {
                let b = e.other(v);
                if e.u == e.v || self.label[b] == self.label[u] {
                    continue;
                }
                let rb = self.repr(b);
                if rb != x {
                    self.remove_contribution(pair(x, rb), e.weight);
                    touched.insert(pair(x, rb));
                }
                self.add_contribution(pair(u, rb), e.weight);
                touched.insert(pair(u, rb));
            }
        }
        let touched: Vec<_> = touched.into_iter().collect();
        self.sync_pairs(&touched)
    }

    /// Applies a graph insertion after promoting both endpoints.
    pub fn insert(&mut self, e: EdgeRecord) -> Result<ChangeSet, JTreeError> {
        let mut out = self.add_terminal(e.u);
        out.extend(self.add_terminal(e.v));
        self.g.insert_with_id(e)?;
        if e.u != e.v {
            self.add_contribution(pair(e.u, e.v), e.weight);
            out.extend(self.sync_pairs(&[pair(e.u, e.v)]));
        }
        Ok(out)
    }

    /// Applies a graph deletion after promoting both endpoints.
    pub fn delete(&mut self, id: EdgeId) -> Result<ChangeSet, JTreeError> {
        let e = *self.g.edge(id).ok_or(JTreeError::UnknownEdge(id))?;
        let mut out = self.add_terminal(e.u);
        out.extend(self.add_terminal(e.v));
        self.g.delete_edge(id)?;
        self.tree_edges.remove(&id);
        if e.u != e.v {
            self.remove_contribution(pair(e.u, e.v), e.weight);
            out.extend(self.sync_pairs(&[pair(e.u, e.v)]));
        }
        Ok(out)
    }

    fn members(&self, root: VertexId) -> Vec<VertexId> {
        let mut out = vec![root];
        let mut i = 0;
        while i < out.len() {
            out.extend_from_slice(&self.env_children[out[i]]);
            i += 1;
        }
        out
    }

    fn reroot(&mut self, r: VertexId, side: &[VertexId]) {
        let mut nbrs: HashMap<VertexId, Vec<(VertexId, EdgeId)>> = HashMap::new();
        for &v in side {
            if let Some((p, e)) = self.env_parent[v] {
                nbrs.entry(v).or_default().push((p, e));
                nbrs.entry(p).or_default().push((v, e));
            }
        }
        for &v in side {
            self.env_parent[v] = None;
            self.env_children[v].clear();
        }
        self.env_depth[r] = 0;
        let mut seen: BTreeSet<VertexId> = BTreeSet::from([r]);
        let mut q = VecDeque::from([r]);
        while let Some(x) = q.pop_front() {
            let mut ys = nbrs.get(&x).cloned().unwrap_or_default();
            ys.sort_unstable();
            for (y, e) in ys {
                if seen.insert(y) {
                    self.env_parent[y] = Some((x, e));
                    self.env_children[x].push(y);
                    self.env_depth[y] = self.env_depth[x] + 1;
                    q.push_back(y);
                }
            }
        }
    }

    // `order` lists one envelope component root first, parents before children
    fn recompute_loads(&mut self, order: &[VertexId]) {
        let lab = self.label[order[0]];
        let mut acc: HashMap<VertexId, f64> = order.iter().map(|&v| (v, 0.0)).collect();
        for &a in order {
            for e in self.g.incident(a) {
                if e.u == e.v {
                    continue;
                }
                *acc.get_mut(&a).expect("member") += e.weight;
                let b = e.other(a);
                // count inside edges once, from the smaller endpoint
                if self.label[b] == lab && a < b {
                    let l = self.env_lca(a, b);
                    *acc.get_mut(&l).expect("member") -= 2.0 * e.weight;
                }
            }
        }
        for &z in order.iter().rev() {
            if let Some((p, _)) = self.env_parent[z] {
                let v = acc[&z];
                *acc.get_mut(&p).expect("member") += v;
            }
        }
        for &z in &order[1..] {
            let (_, e) = self.env_parent[z].expect("non-root");
            self.load[z] = acc[&z].max(0.0);
            let slot = self.slot_of[&e];
            self.lct.set_value(self.n + slot, Some(self.load[z]));
        }
        self.load[order[0]] = 0.0;
    }

    fn env_lca(&self, mut a: VertexId, mut b: VertexId) -> VertexId {
        while self.env_depth[a] > self.env_depth[b] {
            a = self.env_parent[a].expect("deeper vertex has a parent").0;
        }
        while self.env_depth[b] > self.env_depth[a] {
            b = self.env_parent[b].expect("deeper vertex has a parent").0;
        }
        while a != b {
            a = self.env_parent[a].expect("not the root").0;
            b = self.env_parent[b].expect("not the root").0;
        }
        a
    }

    fn add_contribution(&mut self, key: (VertexId, VertexId), w: f64) {
        let p = self.pairs.entry(key).or_default();
        p.sum += w;
        p.count += 1;
    }

    fn remove_contribution(&mut self, key: (VertexId, VertexId), w: f64) {
        let p = self.pairs.get_mut(&key).expect("pair was contributed to");
        p.sum -= w;
        p.count -= 1;
        if p.count == 0 {
            self.pairs.remove(&key);
        }
    }

    fn sync_pairs(&mut self, keys: &[(VertexId, VertexId)]) -> ChangeSet {
        let mut out = Vec::new();
        for &key in keys {
            let want = self.pairs.get(&key).map(|p| p.sum).filter(|&s| s > 0.0);
            let have = self.pair_edge.get(&key).map(|&id| *self.core.edge(id).expect("tracked core edge"));
            if want == have.map(|r| r.weight) {
                continue;
            }
            if let Some(r) = have {
                self.core.delete_edge(r.id).expect("tracked core edge");
                self.pair_edge.remove(&key);
                out.push(ChangeEvent::deleted(r));
            }
            if let Some(w) = want {
                let r = self.core.insert_edge(key.0, key.1, w).expect("core pair is valid");
                self.pair_edge.insert(key, r.id);
                out.push(ChangeEvent::inserted(r));
            }
        }
        self.emitted += out.len();
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jtree::tcf::compute_tcf;
    use crate::lsst::RootedForest;

    fn manual(g: &GraphView, tree: &[usize], core: &[VertexId], cut: &[usize]) -> Tcf {
        let t = RootedForest::new(g, tree, &vec![1.0; g.m()]);
        let mut c = vec![false; g.n()];
        core.iter().for_each(|&v| c[v] = true);
        let mut f = vec![false; g.m()];
        cut.iter().for_each(|&e| f[e] = true);
        Tcf { tree: t, core: c, cut: f, rload: vec![0.0; g.m()] }
    }

    #[test]
    fn chord_maps_to_core_edge() {
        let g = GraphView::from_triples(3, &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 3.0)]);
        let jt = JTree::route(&g, &manual(&g, &[0, 1], &[0, 2], &[1]), false);
        assert!(jt.check_partition());
        let core = jt.core_graph().snapshot();
        assert_eq!(core.m(), 1);
        assert_eq!((core.edge(0).u, core.edge(0).v), (0, 2));
        assert!(core.edge(0).weight >= 3.0);
    }

    #[test]
    fn tree_input_gives_identical_weights() {
        let g = GraphView::from_triples(4, &[(0, 1, 2.0), (1, 2, 3.0), (1, 3, 4.0)]);
        let jt = JTree::route(&g, &manual(&g, &[0, 1, 2], &[0], &[]), false);
        let mut env = jt.envelope_edges();
        env.sort_by_key(|e| e.0);
        assert_eq!(env, vec![(1, 0, 2.0), (2, 1, 3.0), (3, 1, 4.0)]);
        assert_eq!(jt.core_graph().m(), 0);
    }

    #[test]
    fn promotion_on_path_splits_at_lightest_edge() {
        let g = GraphView::from_triples(5, &[(0, 1, 5.0), (1, 2, 1.0), (2, 3, 4.0), (3, 4, 2.0)]);
        let mut jt = JTree::route(&g, &manual(&g, &[0, 1, 2, 3], &[0], &[]), false);
        let ch = jt.add_terminal(2);
        assert!(jt.cut_edges().contains(&1));
        assert!(jt.check_partition());
        assert_eq!(jt.repr(3), 2);
        assert_eq!(jt.repr(1), 0);
        assert_eq!(ch.len(), 1);
        assert!(jt.add_terminal(2).is_empty());

        let mut hi = JTree::route(&g, &manual(&g, &[0, 1, 2, 3], &[0], &[]), true);
        hi.add_terminal(2);
        assert!(hi.cut_edges().contains(&0));
        assert!(hi.check_partition());
    }

    #[test]
    fn cuts_dominate_on_random_graph() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let n = 30;
        let mut t = Vec::new();
        for v in 1..n {
            t.push((rng.gen_range(0..v), v, rng.gen_range(1..5) as f64));
        }
        while t.len() < 70 {
            let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
            if a != b {
                t.push((a, b, rng.gen_range(1..5) as f64));
            }
        }
        let g = GraphView::from_triples(n, &t);
        let tcf = compute_tcf(&g, 4, &vec![1.0; g.m()], &[]).unwrap();
        let mut jt = JTree::route(&g, &tcf, false);
        for step in 0..30 {
            let v = rng.gen_range(0..n);
            let other = (v + rng.gen_range(1..n)) % n;
            if step % 3 == 0 {
                let w = rng.gen_range(1..4) as f64;
                jt.insert(EdgeRecord { id: 1000 + step, u: v, v: other, weight: w }).unwrap();
            } else if step % 7 == 0 {
                let id = jt.base().incident(other).next().map(|e| e.id);
                if let Some(id) = id {
                    jt.delete(id).unwrap();
                }
            } else {
                jt.add_terminal(v);
            }
            assert!(jt.check_partition());
            let base = jt.base().snapshot();
            for _ in 0..10 {
                let side: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.5)).collect();
                assert!(base.cut_value(&side) <= jt.h_cut(&side) + 1e-9);
            }
        }
    }
}
