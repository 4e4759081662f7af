//! Level hierarchy of vertex sparsifiers.
//!
//! Level 0 is the input graph. Level i is a sparsifier of level i-1 that is
//! maintained under terminal additions (and, in fully dynamic mode, edge
//! deletions). Edge changes flow downward; each level counts the operations
//! it has absorbed and is rebuilt, together with everything below it, once
//! the counter reaches its threshold.

use indexmap::IndexMap;
use thiserror::Error;

use crate::graph::{ChangeEvent, ChangeKind, ChangeSet, DynamicGraph, EdgeId, EdgeRecord, GraphError, GraphView, VertexId};
use crate::oracle;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FrameworkError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("unknown edge {0}")]
    UnknownEdge(EdgeId),
    #[error("operation not supported in this mode")]
    WrongMode,
    #[error("level {level} produced {changes} changes for one operation (cap {cap})")]
    CapacityExceeded { level: usize, changes: usize, cap: usize },
    #[error("sparsifier construction failed at level {level}: {msg}")]
    Factory { level: usize, msg: String },
}

/// Which side an estimate errs on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Estimates never undershoot; keep the smallest.
    Min,
    /// Estimates never overshoot; keep the largest.
    Max,
}

/// A pairwise graph quantity with a static solver.
pub trait Property: Send + Sync {
    fn name(&self) -> &'static str;
    fn solve(&self, g: &GraphView, s: VertexId, t: VertexId) -> f64;
    fn direction(&self) -> Direction;
    /// Value reported for `s == t`.
    fn identity_value(&self) -> f64;
    fn better_of(&self, a: f64, b: f64) -> f64 {
        match self.direction() {
            Direction::Min => a.min(b),
            Direction::Max => a.max(b),
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct DistanceProperty;

impl Property for DistanceProperty {
    fn name(&self) -> &'static str {
        "distance"
    }
    fn solve(&self, g: &GraphView, s: VertexId, t: VertexId) -> f64 {
        oracle::exact_distance(g, s, t)
    }
    fn direction(&self) -> Direction {
        Direction::Min
    }
    fn identity_value(&self) -> f64 {
        0.0
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct MinCutProperty;

impl Property for MinCutProperty {
    fn name(&self) -> &'static str {
        "mincut"
    }
    fn solve(&self, g: &GraphView, s: VertexId, t: VertexId) -> f64 {
        if s == t {
            return f64::INFINITY;
        }
        oracle::exact_min_cut(g, s, t).map(|c| c.value).unwrap_or(0.0)
    }
    fn direction(&self) -> Direction {
        Direction::Min
    }
    fn identity_value(&self) -> f64 {
        f64::INFINITY
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ResistanceProperty;

impl Property for ResistanceProperty {
    fn name(&self) -> &'static str {
        "resistance"
    }
    fn solve(&self, g: &GraphView, s: VertexId, t: VertexId) -> f64 {
        oracle::exact_effective_resistance(g, s, t).unwrap_or(f64::INFINITY)
    }
    fn direction(&self) -> Direction {
        Direction::Min
    }
    fn identity_value(&self) -> f64 {
        0.0
    }
}

/// A sparsifier of a base graph maintained under terminal additions.
///
/// Vertex ids are shared with the base graph. `insert` and `delete` receive
/// base-graph edge records; both endpoints become terminals before the edge
/// is applied to the maintained graph.
pub trait VertexSparsifier {
    fn add_terminal(&mut self, u: VertexId) -> ChangeSet;
    fn insert(&mut self, e: EdgeRecord) -> Result<ChangeSet, FrameworkError>;
    fn delete(&mut self, _e: &EdgeRecord) -> Result<ChangeSet, FrameworkError> {
        Err(FrameworkError::WrongMode)
    }
    fn supports_delete(&self) -> bool {
        false
    }
    fn graph(&self) -> &DynamicGraph;
    fn is_terminal(&self, u: VertexId) -> bool;
    /// Approximation factor of this level.
    fn quality(&self) -> f64;
}

pub trait SparsifierFactory {
    type Output: VertexSparsifier;
    fn build(&self, base: &DynamicGraph, terminals: &[VertexId], level: usize) -> Result<Self::Output, FrameworkError>;
}

/// Keeps the base graph itself; quality 1.
#[derive(Debug, Clone)]
pub struct IdentitySparsifier {
    g: DynamicGraph,
    terminal: Vec<bool>,
}

impl IdentitySparsifier {
    pub fn new(base: &DynamicGraph, terminals: &[VertexId]) -> Self {
        let mut g = DynamicGraph::unbounded(base.n());
        let mut edges: Vec<_> = base.edges().copied().collect();
        edges.sort_by_key(|e| e.id);
        for e in edges {
            g.insert_with_id(e).expect("base edges are valid");
        }
        let mut terminal = vec![false; base.n()];
        terminals.iter().for_each(|&t| terminal[t] = true);
        IdentitySparsifier { g, terminal }
    }
}

impl VertexSparsifier for IdentitySparsifier {
    fn add_terminal(&mut self, u: VertexId) -> ChangeSet {
        self.terminal[u] = true;
        Vec::new()
    }
    fn insert(&mut self, e: EdgeRecord) -> Result<ChangeSet, FrameworkError> {
        self.terminal[e.u] = true;
        self.terminal[e.v] = true;
        let rec = self.g.insert_with_id(e)?;
        Ok(vec![ChangeEvent::inserted(rec)])
    }
    fn delete(&mut self, e: &EdgeRecord) -> Result<ChangeSet, FrameworkError> {
        self.terminal[e.u] = true;
        self.terminal[e.v] = true;
        let rec = self.g.delete_edge(e.id).map_err(|_| FrameworkError::UnknownEdge(e.id))?;
        Ok(vec![ChangeEvent::deleted(rec)])
    }
    fn supports_delete(&self) -> bool {
        true
    }
    fn graph(&self) -> &DynamicGraph {
        &self.g
    }
    fn is_terminal(&self, u: VertexId) -> bool {
        self.terminal[u]
    }
    fn quality(&self) -> f64 {
        1.0
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityFactory;

impl SparsifierFactory for IdentityFactory {
    type Output = IdentitySparsifier;
    fn build(&self, base: &DynamicGraph, terminals: &[VertexId], _level: usize) -> Result<Self::Output, FrameworkError> {
        Ok(IdentitySparsifier::new(base, terminals))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Incremental,
    FullyDynamic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SizeProfile {
    /// mu_i = m^(1 - i/(l+1)).
    Incremental,
    /// mu_i = m^(1 - i/(l+t)) with t = e * l.
    FullyDynamic { e: f64 },
}

fn ceil_pow(m: usize, exp: f64) -> usize {
    let x = (m as f64).powf(exp);
    let r = x.round();
    if (x - r).abs() <= 1e-9 * x.max(1.0) {
        r as usize
    } else {
        x.ceil() as usize
    }
}

/// Level sizes mu_0 = m >= mu_1 >= ... >= mu_l.
pub fn choose_level_sizes(m: usize, levels: usize, profile: SizeProfile) -> Vec<usize> {
    let m = m.max(1);
    let denom = match profile {
        SizeProfile::Incremental => (levels + 1) as f64,
        SizeProfile::FullyDynamic { e } => levels as f64 + e * levels as f64,
    };
    (0..=levels).map(|i| ceil_pow(m, 1.0 - i as f64 / denom).max(1)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct HierarchyConfig {
    pub levels: usize,
    pub mode: Mode,
    /// Terminals kept per level on rebuild; index 0 unused.
    pub mu: Vec<usize>,
    /// Operation count that triggers a rebuild per level; index 0 unused.
    pub thresholds: Vec<usize>,
    /// Abort when one operation makes a level emit more changes than this.
    pub hard_cap: Option<usize>,
}

impl HierarchyConfig {
    pub fn new(levels: usize, mode: Mode, mu: Vec<usize>) -> Self {
        assert_eq!(mu.len(), levels + 1, "one size per level plus the input");
        let thresholds = mu.iter().map(|&x| 2 * x.max(1)).collect();
        HierarchyConfig { levels, mode, mu, thresholds, hard_cap: None }
    }

    pub fn incremental(m: usize, levels: usize) -> Self {
        Self::new(levels, Mode::Incremental, choose_level_sizes(m, levels, SizeProfile::Incremental))
    }

    pub fn fully_dynamic(m: usize, levels: usize, e: f64) -> Self {
        Self::new(levels, Mode::FullyDynamic, choose_level_sizes(m, levels, SizeProfile::FullyDynamic { e }))
    }
}

#[derive(Debug, Clone)]
pub struct LevelState<S> {
    pub ds: S,
    pub counter: usize,
    terminals: IndexMap<VertexId, u64>,
}

impl<S> LevelState<S> {
    pub fn terminal_count(&self) -> usize {
        self.terminals.len()
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct HierarchyStats {
    /// Rebuild count per level (index 0 unused).
    pub rebuilds: Vec<usize>,
    /// Total changes emitted by each level's sparsifier.
    pub emitted: Vec<usize>,
    /// Operations absorbed by each level.
    pub absorbed: Vec<usize>,
}

impl HierarchyStats {
    /// Mean changes emitted per absorbed operation, per level.
    pub fn branching(&self) -> Vec<f64> {
        self.emitted
            .iter()
            .zip(&self.absorbed)
            .map(|(&e, &a)| if a == 0 { 0.0 } else { e as f64 / a as f64 })
            .collect()
    }
}

pub struct Hierarchy<F: SparsifierFactory, P: Property> {
    factory: F,
    property: P,
    config: HierarchyConfig,
    g0: DynamicGraph,
    levels: Vec<LevelState<F::Output>>,
    clock: u64,
    stats: HierarchyStats,
}

impl<F: SparsifierFactory, P: Property> Hierarchy<F, P> {
    pub fn build(g: DynamicGraph, config: HierarchyConfig, factory: F, property: P) -> Result<Self, FrameworkError> {
        let l = config.levels;
        let mut h = Hierarchy {
            factory,
            property,
            config,
            g0: g,
            levels: Vec::with_capacity(l),
            clock: 0,
            stats: HierarchyStats { rebuilds: vec![0; l + 1], emitted: vec![0; l + 1], absorbed: vec![0; l + 1] },
        };
        for i in 1..=l {
            let base = if i == 1 { &h.g0 } else { h.levels[i - 2].ds.graph() };
            let ds = h.factory.build(base, &[], i)?;
            h.levels.push(LevelState { ds, counter: 0, terminals: IndexMap::new() });
        }
        Ok(h)
    }

    pub fn config(&self) -> &HierarchyConfig {
        &self.config
    }
    pub fn stats(&self) -> &HierarchyStats {
        &self.stats
    }
    pub fn input(&self) -> &DynamicGraph {
        &self.g0
    }
    pub fn level(&self, i: usize) -> &LevelState<F::Output> {
        &self.levels[i - 1]
    }
    /// G_i; G_0 is the input graph.
    pub fn level_graph(&self, i: usize) -> &DynamicGraph {
        if i == 0 {
            &self.g0
        } else {
            self.levels[i - 1].ds.graph()
        }
    }
    /// Product of per-level qualities.
    pub fn quality(&self) -> f64 {
        self.levels.iter().map(|l| l.ds.quality()).product()
    }

    fn stamp(&mut self, level: usize, u: VertexId) {
        self.clock += 1;
        let c = self.clock;
        self.levels[level - 1].terminals.insert(u, c);
    }

    /// Reinitialise levels `i..=l`, keeping the newest mu_j terminals.
    pub fn rebuild(&mut self, i: usize) -> Result<(), FrameworkError> {
        for j in i..=self.config.levels {
            let keep = self.config.mu[j];
            let st = &mut self.levels[j - 1];
            let mut ts: Vec<(u64, VertexId)> = st.terminals.iter().map(|(&v, &c)| (c, v)).collect();
            ts.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
            ts.truncate(keep);
            ts.reverse();
            st.terminals = ts.iter().map(|&(c, v)| (v, c)).collect();
            let kept: Vec<VertexId> = ts.iter().map(|&(_, v)| v).collect();
            let (head, tail) = self.levels.split_at_mut(j - 1);
            let base = if j == 1 { &self.g0 } else { head[j - 2].ds.graph() };
            tail[0].ds = self.factory.build(base, &kept, j)?;
            tail[0].counter = 0;
            self.stats.rebuilds[j] += 1;
        }
        Ok(())
    }

    fn check_cap(&self, level: usize, changes: usize) -> Result<(), FrameworkError> {
        match self.config.hard_cap {
            Some(cap) if changes > cap => Err(FrameworkError::CapacityExceeded { level, changes, cap }),
            _ => Ok(()),
        }
    }

    // Feed one change of G_{level-1} into D_level. Returns true if a rebuild fired.
    fn absorb(&mut self, level: usize, f: &ChangeEvent, out: &mut ChangeSet) -> Result<bool, FrameworkError> {
        self.stamp(level, f.edge.u);
        self.stamp(level, f.edge.v);
        let st = &mut self.levels[level - 1];
        let ch = match f.kind {
            ChangeKind::Inserted => st.ds.insert(f.edge)?,
            ChangeKind::Deleted => st.ds.delete(&f.edge)?,
        };
        self.stats.emitted[level] += ch.len();
        self.stats.absorbed[level] += 1;
        self.check_cap(level, ch.len())?;
        out.extend(ch);
        self.tick(level)
    }

    fn tick(&mut self, level: usize) -> Result<bool, FrameworkError> {
        let st = &mut self.levels[level - 1];
        st.counter += 1;
        if st.counter >= self.config.thresholds[level] {
            self.rebuild(level)?;
            return Ok(true);
        }
        Ok(false)
    }

    fn propagate(&mut self, mut changes: ChangeSet) -> Result<(), FrameworkError> {
        for level in 1..=self.config.levels {
            let mut next = Vec::new();
            for f in &changes {
                if self.absorb(level, f, &mut next)? {
                    // everything below was rebuilt from the current graphs
                    return Ok(());
                }
            }
            changes = next;
        }
        Ok(())
    }

    pub fn insert(&mut self, u: VertexId, v: VertexId, w: f64) -> Result<EdgeRecord, FrameworkError> {
        let rec = self.g0.insert_edge(u, v, w)?;
        self.propagate(vec![ChangeEvent::inserted(rec)])?;
        Ok(rec)
    }

    pub fn delete(&mut self, id: EdgeId) -> Result<EdgeRecord, FrameworkError> {
        if self.config.mode != Mode::FullyDynamic {
            return Err(FrameworkError::WrongMode);
        }
        let rec = self.g0.delete_edge(id).map_err(|_| FrameworkError::UnknownEdge(id))?;
        self.propagate(vec![ChangeEvent::deleted(rec)])?;
        Ok(rec)
    }

    /// Make `u` a terminal at every level, pushing the resulting changes down.
    pub fn add_terminal(&mut self, u: VertexId) -> Result<(), FrameworkError> {
        let mut changes: ChangeSet = Vec::new();
        for level in 1..=self.config.levels {
            let mut next = Vec::new();
            for f in &changes {
                if self.absorb(level, f, &mut next)? {
                    next.clear();
                    break;
                }
            }
            self.stamp(level, u);
            let ch = self.levels[level - 1].ds.add_terminal(u);
            self.stats.emitted[level] += ch.len();
            self.stats.absorbed[level] += 1;
            self.check_cap(level, ch.len())?;
            next.extend(ch);
            if self.tick(level)? {
                next.clear();
            }
            changes = next;
        }
        Ok(())
    }

    pub fn query(&mut self, s: VertexId, t: VertexId) -> Result<f64, FrameworkError> {
        if s == t {
            return Ok(self.property.identity_value());
        }
        // adding t can fire a rebuild that keeps only the newest terminals
        // and drops s, so repeat until both survive at every level
        for _ in 0..4 {
            self.add_terminal(s)?;
            self.add_terminal(t)?;
            if self.levels.iter().all(|l| l.ds.is_terminal(s) && l.ds.is_terminal(t)) {
                break;
            }
        }
        let g =self.level_graph(self.config.levels).snapshot();
        Ok(self.property.solve(&g, s, t))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes_incremental() {
        assert_eq!(choose_level_sizes(64, 1, SizeProfile::Incremental), vec![64, 8]);
        assert_eq!(choose_level_sizes(1_000_000, 2, SizeProfile::Incremental), vec![1_000_000, 10_000, 100]);
    }

    #[test]
    fn sizes_fully_dynamic_two_thirds() {
        let mu = choose_level_sizes(1000, 1, SizeProfile::FullyDynamic { e: 2.0 });
        assert_eq!(mu, vec![1000, 100]);
        let mu = choose_level_sizes(500, 1, SizeProfile::FullyDynamic { e: 2.0 });
        assert_eq!(mu[1], (500f64).powf(2.0 / 3.0).ceil() as usize);
    }

    fn path(n: usize) -> DynamicGraph {
        let mut g = DynamicGraph::new(n);
        for v in 1..n {
            g.insert_edge(v - 1, v, 1.0).unwrap();
        }
        g
    }

    #[test]
    fn identity_single_level_gains_one_edge() {
        let cfg = HierarchyConfig::new(1, Mode::Incremental, vec![10, 100]);
        let mut h = Hierarchy::build(path(4), cfg, IdentityFactory, DistanceProperty).unwrap();
        let before = h.level_graph(1).m();
        h.insert(0, 3, 1.0).unwrap();
        assert_eq!(h.level_graph(1).m(), before + 1);
        assert_eq!(h.query(0, 3).unwrap(), 1.0);
    }

    #[test]
    fn empty_two_level_build() {
        let cfg = HierarchyConfig::new(2, Mode::Incremental, vec![1, 1, 1]);
        let h = Hierarchy::build(DynamicGraph::new(5), cfg, IdentityFactory, DistanceProperty).unwrap();
        assert_eq!(h.level_graph(1).m(), 0);
        assert_eq!(h.level_graph(2).m(), 0);
    }

    #[test]
    fn rebuild_fires_at_twice_mu() {
        let cfg = HierarchyConfig::new(1, Mode::Incremental, vec![10, 2]);
        let mut h = Hierarchy::build(DynamicGraph::new(6), cfg, IdentityFactory, DistanceProperty).unwrap();
        for i in 0..3 {
            h.insert(i, i + 1, 1.0).unwrap();
        }
        assert_eq!(h.stats().rebuilds[1], 0);
        assert_eq!(h.level(1).counter, 3);
        h.insert(4, 5, 1.0).unwrap();
        assert_eq!(h.stats().rebuilds[1], 1);
        assert_eq!(h.level(1).counter, 0);
        assert_eq!(h.level(1).terminal_count(), 2);
    }

    #[test]
    fn delete_requires_fully_dynamic() {
        let cfg = HierarchyConfig::new(1, Mode::Incremental, vec![10, 5]);
        let mut h = Hierarchy::build(path(3), cfg, IdentityFactory, DistanceProperty).unwrap();
        assert_eq!(h.delete(0), Err(FrameworkError::WrongMode));
        let cfg = HierarchyConfig::new(1, Mode::FullyDynamic, vec![10, 5]);
        let mut h = Hierarchy::build(DynamicGraph::new(3), cfg, IdentityFactory, DistanceProperty).unwrap();
        assert_eq!(h.delete(0), Err(FrameworkError::UnknownEdge(0)));
    }

    #[test]
    fn insert_then_delete_restores_answers() {
        let cfg = HierarchyConfig::new(1, Mode::FullyDynamic, vec![10, 50]);
        let mut h = Hierarchy::build(path(5), cfg, IdentityFactory, DistanceProperty).unwrap();
        let before = h.query(0, 4).unwrap();
        let e = h.insert(0, 4, 1.0).unwrap();
        assert_eq!(h.query(0, 4).unwrap(), 1.0);
        h.delete(e.id).unwrap();
        assert_eq!(h.query(0, 4).unwrap(), before);
    }

    #[test]
    fn hard_cap_trips() {
        let mut cfg = HierarchyConfig::new(1, Mode::Incremental, vec![10, 50]);
        cfg.hard_cap = Some(0);
        let mut h = Hierarchy::build(path(3), cfg, IdentityFactory, DistanceProperty).unwrap();
        assert!(matches!(h.insert(0, 2, 1.0), Err(FrameworkError::CapacityExceeded { .. })));
    }
}
