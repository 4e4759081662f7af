//! One level of the chain: an approximate Schur complement of a base graph
//! onto a growing terminal set, kept under edge updates.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{pair, ChangeEvent, ChangeKind, ChangeSet, DynamicGraph, EdgeId, EdgeRecord, GraphView, VertexId};
use crate::oracle::schur_complement_restricted;
use crate::par;
use crate::spectral::{sample_count, spectral_sparsify};

use super::walk::{sample_half, WalkGraph, WalkRecord};
use super::SchurError;

type Pair = (VertexId, VertexId);

/// Graph with at most one edge per vertex pair, diffed into change sets.
#[derive(Debug, Clone)]
pub struct PairGraph {
    g: DynamicGraph,
    ids: HashMap<Pair, EdgeId>,
}

impl PairGraph {
    fn new(n: usize) -> Self {
        PairGraph { g: DynamicGraph::unbounded(n), ids: HashMap::new() }
    }

    fn weight(&self, p: Pair) -> f64 {
        self.ids.get(&p).map_or(0.0, |&id| self.g.edge(id).expect("tracked").weight)
    }

    fn set(&mut self, p: Pair, w: f64, out: &mut ChangeSet) {
        let old = self.weight(p);
        if old == w || (old == 0.0 && w <= 0.0) {
            return;
        }
        if let Some(id) = self.ids.remove(&p) {
            out.push(ChangeEvent::deleted(self.g.delete_edge(id).expect("tracked")));
        }
        if w > 0.0 {
            let r = self.g.insert_edge(p.0, p.1, w).expect("positive weight between distinct vertices");
            self.ids.insert(p, r.id);
            out.push(ChangeEvent::inserted(r));
        }
    }

    /// Makes the graph equal to `target`.
    fn replace(&mut self, target: &BTreeMap<Pair, f64>, out: &mut ChangeSet) {
        let gone: Vec<Pair> = self.ids.keys().filter(|p| !target.contains_key(p)).copied().collect();
        for p in gone {
            self.set(p, 0.0, out);
        }
        for (&p, &w) in target {
            self.set(p, w, out);
        }
    }
}

/// Sizes and seed of a sampled level.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelParams {
    pub beta: f64,
    pub epsilon: f64,
    /// Walk pairs per edge.
    pub walks: usize,
    /// Distinct vertices a walk may visit before it is dropped.
    pub cap: usize,
    pub seed: u64,
}

impl LevelParams {
    pub fn new(n: usize, beta: f64, epsilon: f64, seed: u64) -> Self {
        let ln = (n.max(2) as f64).ln();
        LevelParams {
            beta,
            epsilon,
            walks: ((ln / (epsilon * epsilon)).ceil() as usize).max(1),
            cap: ((4.0 * ln / beta).ceil() as usize).max(2),
            seed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Key {
    Walk(usize),
    Ins(EdgeId),
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LevelStats {
    pub emitted: usize,
    pub resparsifications: usize,
    pub truncated_walks: usize,
    /// Occurrence count at the cut of the heavy-vertex promotion.
    pub promotion_threshold: usize,
    pub promoted: usize,
}

/// Walk-sampled Schur complement level.
#[derive(Debug, Clone)]
pub struct SchurLevel {
    base: DynamicGraph,
    params: LevelParams,
    in_c: Vec<bool>,
    walks: Vec<WalkRecord>,
    alive: Vec<bool>,
    walks_of: HashMap<EdgeId, Vec<usize>>,
    // (walk, side, position) per vertex; entries go stale after cuts
    ri: Vec<Vec<(u32, u8, u32)>>,
    contrib: HashMap<Key, (Pair, f64)>,
    h: BTreeMap<Pair, (f64, usize)>,
    tilde: PairGraph,
    dirty: BTreeSet<Pair>,
    pending: usize,
    ops: usize,
    threshold: usize,
    rng: ChaCha8Rng,
    stats: LevelStats,
}

impl SchurLevel {
    /// Samples walks on `base` and builds the level for terminals `t`.
    pub fn build(base: DynamicGraph, t: &[VertexId], params: LevelParams) -> Self {
        let view = base.snapshot();
        let n = view.n();
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
        let mut in_c = vec![false; n];
        t.iter().for_each(|&v| in_c[v] = true);
        for e in view.edges() {
            if rng.gen_bool(params.beta.clamp(0.0, 1.0)) {
                in_c[e.u] = true;
                in_c[e.v] = true;
            }
        }
        let wg = WalkGraph::new(&view);
        let rho = params.walks;
        let (cap, seed) = (params.cap, params.seed);
        let max_steps = 64 * cap;
        let c = &in_c;
        let walks: Vec<WalkRecord> = par::map_range(view.m() * rho, |k| {
            let e = view.edge(k / rho);
            let slot = (k % rho) as u32;
            let mut r = ChaCha8Rng::seed_from_u64(seed);
            r.set_stream(((e.id as u64) << 24) | slot as u64);
            let a = sample_half(&wg, e.u, |x| c[x], cap, max_steps, &mut r);
            let b = sample_half(&wg, e.v, |x| c[x], cap, max_steps, &mut r);
            WalkRecord { origin: e.id, slot, halves: [a, b], edge_res: 1.0 / e.weight }
        });
        let mut ri = vec![Vec::new(); n];
        let mut walks_of: HashMap<EdgeId, Vec<usize>> = HashMap::new();
        for (i, w) in walks.iter().enumerate() {
            walks_of.entry(w.origin).or_default().push(i);
            for (side, h) in w.halves.iter().enumerate() {
                for (pos, &x) in h.verts.iter().enumerate() {
                    ri[x].push((i as u32, side as u8, pos as u32));
                }
            }
        }
        let threshold = ((params.beta * view.m() as f64).ceil() as usize).max(1);
        let mut s = SchurLevel {
            base,
            params,
            in_c,
            alive: vec![true; walks.len()],
            walks,
            walks_of,
            ri,
            contrib: HashMap::new(),
            h: BTreeMap::new(),
            tilde: PairGraph::new(n),
            dirty: BTreeSet::new(),
            pending: 0,
            ops: 0,
            threshold,
            rng,
            stats: LevelStats::default(),
        };
        // heavy vertices join C
        let occ = s.occurrences();
        let mut order: Vec<VertexId> = (0..n).filter(|&v| occ[v] > 0).collect();
        order.sort_by(|&a, &b| occ[b].cmp(&occ[a]).then(a.cmp(&b)));
        let top = ((s.params.beta * view.m() as f64).floor() as usize).min(order.len());
        s.stats.promotion_threshold = order.get(top).map_or(0, |&v| occ[v]);
        s.stats.promoted = top;
        for &v in &order[..top] {
            s.promote(v);
        }
        for i in 0..s.walks.len() {
            s.sync_walk(i);
        }
        s.stats.truncated_walks = s.walks.iter().filter(|w| !(w.halves[0].closed && w.halves[1].closed)).count();
        let mut out = Vec::new();
        s.resparsify(&mut out);
        s.dirty.clear();
        s
    }

    pub fn base(&self) -> &DynamicGraph {
        &self.base
    }
    /// The sparsified complement handed to the next level.
    pub fn graph(&self) -> &DynamicGraph {
        &self.tilde.g
    }
    pub fn params(&self) -> &LevelParams {
        &self.params
    }
    pub fn stats(&self) -> &LevelStats {
        &self.stats
    }
    pub fn walks(&self) -> &[WalkRecord] {
        &self.walks
    }
    pub fn is_terminal(&self, v: VertexId) -> bool {
        self.in_c[v]
    }
    pub fn terminals(&self) -> Vec<VertexId> {
        (0..self.in_c.len()).filter(|&v| self.in_c[v]).collect()
    }
    pub fn ops(&self) -> usize {
        self.ops
    }
    pub fn threshold(&self) -> usize {
        self.threshold
    }

    /// Per-vertex number of positions in live walks, terminals excluded.
    pub fn occurrences(&self) -> Vec<usize> {
        let mut occ = vec![0; self.in_c.len()];
        for (i, w) in self.walks.iter().enumerate() {
            if !self.alive[i] {
                continue;
            }
            for h in &w.halves {
                for &x in &h.verts {
                    if !self.in_c[x] {
                        occ[x] += 1;
                    }
                }
            }
        }
        occ
    }

    fn set_contrib(&mut self, key: Key, want: Option<(Pair, f64)>) {
        if self.contrib.get(&key).copied() == want {
            return;
        }
        if let Some((p, w)) = self.contrib.remove(&key) {
            let e = self.h.get_mut(&p).expect("counted pair");
            e.1 -= 1;
            if e.1 == 0 {
                self.h.remove(&p);
            } else {
                e.0 -= w;
            }
            self.dirty.insert(p);
        }
        if let Some((p, w)) = want {
            let e = self.h.entry(p).or_insert((0.0, 0));
            e.0 += w;
            e.1 += 1;
            self.contrib.insert(key, (p, w));
            self.dirty.insert(p);
        }
    }

    fn sync_walk(&mut self, i: usize) {
        if !self.alive[i] {
            return;
        }
        let scale = 1.0 / self.params.walks as f64;
        let want = self.walks[i].sc_edge().map(|(a, b, r)| (pair(a, b), scale / r));
        self.set_contrib(Key::Walk(i), want);
    }

    /// Marks `u` terminal and cuts walks at their first visit; no flush.
    fn promote(&mut self, u: VertexId) -> Vec<usize> {
        if self.in_c[u] {
            return Vec::new();
        }
        self.in_c[u] = true;
        let mut touched = Vec::new();
        for (i, side, pos) in std::mem::take(&mut self.ri[u]) {
            let (i, side, pos) = (i as usize, side as usize, pos as usize);
            let h = &mut self.walks[i].halves[side];
            if h.verts.len() > pos && h.verts[pos] == u && (h.verts.len() > pos + 1 || !h.closed) {
                h.cut(pos);
                touched.push(i);
            }
        }
        touched
    }

    fn flush(&mut self) -> ChangeSet {
        let mut out = Vec::new();
        self.pending += self.dirty.len();
        let period = self.in_c.iter().filter(|&&x| x).count().div_ceil(4).max(1);
        if self.pending >= period {
            self.resparsify(&mut out);
        } else {
            for p in std::mem::take(&mut self.dirty) {
                let w = self.h.get(&p).map_or(0.0, |e| e.0);
                self.tilde.set(p, w, &mut out);
            }
        }
        self.dirty.clear();
        self.stats.emitted += out.len();
        out
    }

    fn resparsify(&mut self, out: &mut ChangeSet) {
        let edges: Vec<(VertexId, VertexId, f64)> = self.h.iter().map(|(&(a, b), &(w, _))| (a, b, w)).collect();
        let k = self.in_c.iter().filter(|&&x| x).count();
        let target: BTreeMap<Pair, f64> = if edges.len() <= sample_count(k, self.params.epsilon) {
            edges.into_iter().map(|(a, b, w)| ((a, b), w)).collect()
        } else {
            self.stats.resparsifications += 1;
            spectral_sparsify(&edges, self.params.epsilon, &mut self.rng).into_iter().map(|(a, b, w)| ((a, b), w)).collect()
        };
        self.tilde.replace(&target, out);
        self.pending = 0;
    }

    /// Makes `u` a terminal; returns the changes to the output graph.
    pub fn add_terminal(&mut self, u: VertexId) -> ChangeSet {
        for i in self.promote(u) {
            self.sync_walk(i);
        }
        self.flush()
    }

    pub fn insert(&mut self, rec: EdgeRecord) -> Result<ChangeSet, SchurError> {
        self.base.insert_with_id(rec)?;
        self.ops += 1;
        let mut touched = self.promote(rec.u);
        touched.extend(self.promote(rec.v));
        for i in touched {
            self.sync_walk(i);
        }
        self.set_contrib(Key::Ins(rec.id), Some((pair(rec.u, rec.v), rec.weight)));
        Ok(self.flush())
    }

    pub fn delete(&mut self, id: EdgeId) -> Result<ChangeSet, SchurError> {
        let rec = *self.base.edge(id).ok_or(SchurError::UnknownEdge(id))?;
        self.base.delete_edge(id)?;
        self.ops += 1;
        let mut touched = self.promote(rec.u);
        touched.extend(self.promote(rec.v));
        for i in touched {
            self.sync_walk(i);
        }
        if self.contrib.contains_key(&Key::Ins(id)) {
            self.set_contrib(Key::Ins(id), None);
        } else if let Some(ws) = self.walks_of.remove(&id) {
            for i in ws {
                self.set_contrib(Key::Walk(i), None);
                self.alive[i] = false;
            }
        }
        Ok(self.flush())
    }

    pub fn apply(&mut self, ev: &ChangeEvent) -> Result<ChangeSet, SchurError> {
        match ev.kind {
            ChangeKind::Inserted => self.insert(ev.edge),
            ChangeKind::Deleted => self.delete(ev.edge.id),
        }
    }
}

/// Level holding the exact Schur complement, recomputed after every change.
#[derive(Debug, Clone)]
pub struct ExactLevel {
    base: DynamicGraph,
    in_c: Vec<bool>,
    out: PairGraph,
    ops: usize,
    threshold: usize,
}

impl ExactLevel {
    pub fn build(base: DynamicGraph, t: &[VertexId], beta: f64, seed: u64) -> Self {
        let n = base.n();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut in_c = vec![false; n];
        t.iter().for_each(|&v| in_c[v] = true);
        for e in base.snapshot().edges() {
            if rng.gen_bool(beta.clamp(0.0, 1.0)) {
                in_c[e.u] = true;
                in_c[e.v] = true;
            }
        }
        let threshold = ((beta * base.m() as f64).ceil() as usize).max(1);
        let mut s = ExactLevel { base, in_c, out: PairGraph::new(n), ops: 0, threshold };
        s.recompute();
        s
    }

    fn recompute(&mut self) -> ChangeSet {
        let c: Vec<VertexId> = (0..self.in_c.len()).filter(|&v| self.in_c[v]).collect();
        let mut target = BTreeMap::new();
        if !c.is_empty() {
            let sc = schur_complement_restricted(&self.base.snapshot(), &c);
            let scale = sc.matrix.diagonal().amax().max(f64::MIN_POSITIVE);
            for (a, b, w) in sc.to_edges(1e-12 * scale) {
                target.insert(pair(a, b), w);
            }
        }
        let mut out = Vec::new();
        self.out.replace(&target, &mut out);
        out
    }

    pub fn base(&self) -> &DynamicGraph {
        &self.base
    }
    pub fn graph(&self) -> &DynamicGraph {
        &self.out.g
    }
    pub fn terminals(&self) -> Vec<VertexId> {
        (0..self.in_c.len()).filter(|&v| self.in_c[v]).collect()
    }
    pub fn ops(&self) -> usize {
        self.ops
    }
    pub fn threshold(&self) -> usize {
        self.threshold
    }

    pub fn add_terminal(&mut self, u: VertexId) -> ChangeSet {
        if self.in_c[u] {
            return Vec::new();
        }
        self.in_c[u] = true;
        self.recompute()
    }

    pub fn apply(&mut self, ev: &ChangeEvent) -> Result<ChangeSet, SchurError> {
        match ev.kind {
            ChangeKind::Inserted => {
                self.base.insert_with_id(ev.edge)?;
            }
            ChangeKind::Deleted => {
                self.base.delete_edge(ev.edge.id).map_err(|_| SchurError::UnknownEdge(ev.edge.id))?;
            }
        }
        self.ops += 1;
        self.in_c[ev.edge.u] = true;
        self.in_c[ev.edge.v] = true;
        Ok(self.recompute())
    }
}

/// Either kind of level behind one interface.
#[derive(Debug, Clone)]
pub enum Level {
    Sampled(SchurLevel),
    Exact(ExactLevel),
}

impl Level {
    pub fn base(&self) -> &DynamicGraph {
        match self {
            Level::Sampled(l) => l.base(),
            Level::Exact(l) => l.base(),
        }
    }
    pub fn graph(&self) -> &DynamicGraph {
        match self {
            Level::Sampled(l) => l.graph(),
            Level::Exact(l) => l.graph(),
        }
    }
    pub fn terminals(&self) -> Vec<VertexId> {
        match self {
            Level::Sampled(l) => l.terminals(),
            Level::Exact(l) => l.terminals(),
        }
    }
    pub fn ops(&self) -> usize {
        match self {
            Level::Sampled(l) => l.ops(),
            Level::Exact(l) => l.ops(),
        }
    }
    pub fn threshold(&self) -> usize {
        match self {
            Level::Sampled(l) => l.threshold(),
            Level::Exact(l) => l.threshold(),
        }
    }
    pub fn add_terminal(&mut self, u: VertexId) -> ChangeSet {
        match self {
            Level::Sampled(l) => l.add_terminal(u),
            Level::Exact(l) => l.add_terminal(u),
        }
    }
    pub fn apply_all(&mut self, changes: &[ChangeEvent]) -> Result<ChangeSet, SchurError> {
        let mut out = Vec::new();
        for ev in changes {
            out.extend(match self {
                Level::Sampled(l) => l.apply(ev)?,
                Level::Exact(l) => l.apply(ev)?,
            });
        }
        Ok(out)
    }
}

/// Weight spread of a graph's edges, 1 when empty.
pub fn weight_ratio(g: &GraphView) -> f64 {
    let (lo, hi) = g.edges().iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), e| (lo.min(e.weight), hi.max(e.weight)));
    if g.m() == 0 {
        1.0
    } else {
        hi / lo
    }
}
