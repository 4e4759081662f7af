//! Distance vertex sparsifier of a tree-plus-extra-edges subgraph, kept
//! under terminal additions and edge updates.
//!
//! The sparsifier graph has one edge per skeleton edge (a tree path between
//! consecutive terminals, with its tree length) and one edge per non-tree
//! graph edge, moved to the first terminals met when walking from each
//! endpoint towards the other along the tree. Every such edge is the length
//! of a real path in G, so distances never drop below G's.

use std::collections::{BTreeSet, HashMap, HashSet};

use crate::graph::{ChangeEvent, ChangeSet, DynamicGraph, EdgeId, EdgeRecord, GraphView, VertexId};
use crate::jtree::branch_vertices;
use crate::lsst::RootedForest;

use super::MetricError;

/// Terminal set closed under pairwise lowest common ancestors, with the
/// nearest terminal ancestor of every terminal.
#[derive(Debug, Clone)]
pub struct SkeletonIndex {
    in_c: Vec<bool>,
    below: Vec<u32>,
    skel_parent: Vec<Option<VertexId>>,
    skel_children: Vec<BTreeSet<VertexId>>,
    tops: BTreeSet<VertexId>,
}

impl SkeletonIndex {
    pub fn new(t: &RootedForest, c: &[bool]) -> Self {
        let n = t.n();
        let mut in_c = c.to_vec();
        for b in branch_vertices(t, c) {
            in_c[b] = true;
        }
        let mut below: Vec<u32> = in_c.iter().map(|&x| u32::from(x)).collect();
        for &z in t.order.iter().rev() {
            if let Some(p) = t.parent[z] {
                below[p] += below[z];
            }
        }
        let mut nca: Vec<Option<VertexId>> = vec![None; n];
        for &z in &t.order {
            if let Some(p) = t.parent[z] {
                nca[z] = if in_c[p] { Some(p) } else { nca[p] };
            }
        }
        let mut s = SkeletonIndex {
            in_c,
            below,
            skel_parent: vec![None; n],
            skel_children: vec![BTreeSet::new(); n],
            tops: BTreeSet::new(),
        };
        for v in 0..n {
            if s.in_c[v] {
                s.link(v, nca[v]);
            }
        }
        s
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.in_c[v]
    }
    pub fn vertices(&self) -> Vec<VertexId> {
        (0..self.in_c.len()).filter(|&v| self.in_c[v]).collect()
    }
    /// Nearest terminal ancestor of terminal `v`.
    pub fn neighbor(&self, v: VertexId) -> Option<VertexId> {
        self.skel_parent[v]
    }

    fn link(&mut self, c: VertexId, a: Option<VertexId>) {
        self.skel_parent[c] = a;
        match a {
            Some(a) => self.skel_children[a].insert(c),
            None => self.tops.insert(c),
        };
    }

    fn unlink(&mut self, c: VertexId) {
        match self.skel_parent[c] {
            Some(a) => self.skel_children[a].remove(&c),
            None => self.tops.remove(&c),
        };
        self.skel_parent[c] = None;
    }

    // z has at most one child branch holding terminals
    fn insert_vertex(&mut self, t: &RootedForest, z: VertexId, relinked: &mut Vec<VertexId>) {
        let mut a = t.parent[z];
        while let Some(x) = a {
            if self.in_c[x] {
                break;
            }
            a = t.parent[x];
        }
        let pool: Vec<VertexId> = match a {
            Some(a) => self.skel_children[a].iter().copied().collect(),
            None => self.tops.iter().copied().collect(),
        };
        if let Some(c) = pool.into_iter().find(|&c| c != z && t.lca(z, c) == Some(z)) {
            self.unlink(c);
            self.link(c, Some(z));
            relinked.push(c);
        }
        self.link(z, a);
        relinked.push(z);
        self.in_c[z] = true;
        let mut x = Some(z);
        while let Some(y) = x {
            self.below[y] += 1;
            x = t.parent[y];
        }
    }

    /// Adds `u` and at most one branching vertex. Returns the new terminals
    /// and the terminals whose skeleton parent changed.
    pub fn add(&mut self, t: &RootedForest, u: VertexId) -> (Vec<VertexId>, Vec<VertexId>) {
        if self.in_c[u] {
            return (Vec::new(), Vec::new());
        }
        let mut added = Vec::new();
        let mut relinked = Vec::new();
        let (mut prev, mut x) = (u, t.parent[u]);
        while let Some(y) = x {
            if self.in_c[y] || self.below[y] > self.below[prev] {
                if !self.in_c[y] {
                    self.insert_vertex(t, y, &mut relinked);
                    added.push(y);
                }
                break;
            }
            prev = y;
            x = t.parent[y];
        }
        self.insert_vertex(t, u, &mut relinked);
        added.push(u);
        (added, relinked)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Key {
    Skel(VertexId),
    Off(EdgeId),
    Ins(EdgeId),
}

#[derive(Debug, Clone)]
struct OffEdge {
    id: EdgeId,
    len: f64,
    // walk from each endpoint toward the other, stopping at the first terminal
    walks: [Vec<VertexId>; 2],
    closed: [bool; 2],
}

#[derive(Debug, Clone)]
pub struct DistanceCoreSparsifier {
    tree: RootedForest,
    skel: SkeletonIndex,
    off: Vec<OffEdge>,
    off_of: HashMap<EdgeId, usize>,
    // walks through each vertex as (off edge, side, position); stale entries are skipped
    ri: Vec<Vec<(u32, u8, u32)>>,
    dead: HashSet<VertexId>,
    // tree edge id -> its child endpoint
    tree_child: HashMap<EdgeId, VertexId>,
    inserted: HashMap<EdgeId, EdgeRecord>,
    hc: DynamicGraph,
    hc_edge: HashMap<Key, EdgeId>,
}

impl DistanceCoreSparsifier {
    /// Builds the sparsifier for tree `tree` and extra edges `f` (view edge
    /// indices) with initial terminals `c0`.
    pub fn new(g: &GraphView, tree: RootedForest, f: &[usize], c0: &[VertexId]) -> Self {
        let n = g.n();
        let mut c = vec![false; n];
        for &v in c0 {
            c[v] = true;
        }
        for &e in f {
            c[g.edge(e).u] = true;
            c[g.edge(e).v] = true;
        }
        let skel = SkeletonIndex::new(&tree, &c);
        let mut s = DistanceCoreSparsifier {
            tree,
            skel,
            off: Vec::new(),
            off_of: HashMap::new(),
            ri: vec![Vec::new(); n],
            dead: HashSet::new(),
            tree_child: HashMap::new(),
            inserted: HashMap::new(),
            hc: DynamicGraph::unbounded(n),
            hc_edge: HashMap::new(),
        };
        for v in 0..n {
            if let Some(e) = s.tree.parent_edge[v] {
                s.tree_child.insert(g.edge(e).id, v);
            }
        }
        for v in s.skel.vertices() {
            s.sync_skel(v);
        }
        for (i, e) in g.edges().iter().enumerate() {
            if s.tree.is_tree_edge(i) {
                continue;
            }
            let path = s.tree.path(e.u, e.v);
            let cut = |p: &[VertexId]| match p.iter().position(|&x| s.skel.contains(x)) {
                Some(k) => (p[..=k].to_vec(), true),
                None => (p.to_vec(), false),
            };
            let (w0, c0) = cut(&path);
            let rev: Vec<VertexId> = path.iter().rev().copied().collect();
            let (w1, c1) = cut(&rev);
            let idx = s.off.len();
            for (side, w) in [&w0, &w1].into_iter().enumerate() {
                for (pos, &x) in w.iter().enumerate() {
                    s.ri[x].push((idx as u32, side as u8, pos as u32));
                }
            }
            s.off.push(OffEdge { id: e.id, len: e.weight, walks: [w0, w1], closed: [c0, c1] });
            s.off_of.insert(e.id, idx);
            s.sync_off(idx);
        }
        s
    }

    pub fn graph(&self) -> &DynamicGraph {
        &self.hc
    }
    pub fn tree(&self) -> &RootedForest {
        &self.tree
    }
    pub fn terminals(&self) -> Vec<VertexId> {
        self.skel.vertices()
    }
    pub fn is_terminal(&self, v: VertexId) -> bool {
        self.skel.contains(v)
    }
    pub fn skeleton(&self) -> &SkeletonIndex {
        &self.skel
    }

    fn set_key(&mut self, key: Key, want: Option<(VertexId, VertexId, f64)>, out: &mut ChangeSet) {
        let have = self.hc_edge.get(&key).map(|&id| *self.hc.edge(id).expect("tracked edge"));
        if let (Some(h), Some((a, b, l))) = (have, want) {
            if (h.u, h.v, h.weight) == (a, b, l) {
                return;
            }
        }
        if let Some(h) = have {
            self.hc.delete_edge(h.id).expect("tracked edge");
            self.hc_edge.remove(&key);
            out.push(ChangeEvent::deleted(h));
        }
        if let Some((a, b, l)) = want {
            let r = self.hc.insert_edge(a, b, l).expect("sparsifier edge is valid");
            self.hc_edge.insert(key, r.id);
            out.push(ChangeEvent::inserted(r));
        }
    }

    fn sync_skel_into(&mut self, c: VertexId, out: &mut ChangeSet) {
        let want = self.skel.neighbor(c).and_then(|a| {
            let single_dead = self.tree.parent[c] == Some(a) && self.dead.contains(&c);
            (!single_dead).then(|| (c, a, self.tree.root_dist[c] - self.tree.root_dist[a]))
        });
        self.set_key(Key::Skel(c), want, out);
    }

    fn sync_skel(&mut self, c: VertexId) -> ChangeSet {
        let mut out = Vec::new();
        self.sync_skel_into(c, &mut out);
        out
    }

    fn sync_off_into(&mut self, i: usize, out: &mut ChangeSet) {
        let o = &self.off[i];
        let want = if o.closed[0] && o.closed[1] {
            let (p, a) = (o.walks[0][0], *o.walks[0].last().expect("nonempty walk"));
            let (q, b) = (o.walks[1][0], *o.walks[1].last().expect("nonempty walk"));
            (a != b).then(|| (a, b, self.tree.dist(p, a) + o.len + self.tree.dist(q, b)))
        } else {
            None
        };
        let key = Key::Off(o.id);
        self.set_key(key, want, out);
    }

    fn sync_off(&mut self, i: usize) -> ChangeSet {
        let mut out = Vec::new();
        self.sync_off_into(i, &mut out);
        out
    }

    /// Makes `u` a terminal; returns the sparsifier edge changes.
    pub fn add_terminal(&mut self, u: VertexId) -> ChangeSet {
        let (added, relinked) = self.skel.add(&self.tree, u);
        let mut out = Vec::new();
        for c in relinked {
            self.sync_skel_into(c, &mut out);
        }
        let mut dirty = BTreeSet::new();
        for z in added {
            for k in 0..self.ri[z].len() {
                let (i, side, pos) = self.ri[z][k];
                let (i, side, pos) = (i as usize, side as usize, pos as usize);
                let o = &mut self.off[i];
                let w = &mut o.walks[side];
                if w.len() > pos && w[pos] == z && (w.len() > pos + 1 || !o.closed[side]) {
                    w.truncate(pos + 1);
                    o.closed[side] = true;
                    dirty.insert(i);
                }
            }
            self.ri[z].clear();
        }
        for i in dirty {
            self.sync_off_into(i, &mut out);
        }
        out
    }

    pub fn insert(&mut self, e: EdgeRecord) -> ChangeSet {
        let mut out = self.add_terminal(e.u);
        out.extend(self.add_terminal(e.v));
        self.inserted.insert(e.id, e);
        self.set_key(Key::Ins(e.id), Some((e.u, e.v, e.weight)), &mut out);
        out
    }

    /// Removes a graph edge given its record.
    pub fn delete(&mut self, e: &EdgeRecord) -> Result<ChangeSet, MetricError> {
        let mut out = self.add_terminal(e.u);
        out.extend(self.add_terminal(e.v));
        if self.inserted.remove(&e.id).is_some() {
            self.set_key(Key::Ins(e.id), None, &mut out);
        } else if let Some(i) = self.off_of.remove(&e.id) {
            self.off[i].closed = [false, false];
            self.set_key(Key::Off(e.id), None, &mut out);
        } else if let Some(child) = self.tree_child.remove(&e.id) {
            self.dead.insert(child);
            self.sync_skel_into(child, &mut out);
        } else {
            return Err(MetricError::UnknownEdge(e.id));
        }
        Ok(out)
    }
}
