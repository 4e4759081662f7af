//! Chain of Schur complement levels answering resistance queries on the
//! deepest one.

use crate::graph::{ChangeEvent, ChangeSet, DynamicGraph, EdgeId, EdgeRecord, VertexId};

use super::level::{weight_ratio, ExactLevel, Level, LevelParams, SchurLevel};
use super::solver::{effective_resistance, ErSolver};
use super::SchurError;

#[derive(Debug, Clone, PartialEq)]
pub struct ErConfig {
    /// Number of Schur complement levels.
    pub depth: usize,
    /// Terminal sampling rate; defaults to n^(-1/(3 depth + 3)).
    pub beta: Option<f64>,
    pub epsilon: f64,
    pub seed: u64,
    /// Walk pairs per edge; defaults from epsilon.
    pub walks: Option<usize>,
    /// Use exact complements instead of sampled ones.
    pub exact: bool,
    pub solver: ErSolver,
    /// Solver residual tolerance; defaults to epsilon / 10.
    pub tol: Option<f64>,
}

impl ErConfig {
    pub fn new(depth: usize, epsilon: f64, seed: u64) -> Self {
        ErConfig { depth, beta: None, epsilon, seed, walks: None, exact: false, solver: ErSolver::Pcg, tol: None }
    }

    pub fn default_beta(n: usize, depth: usize) -> f64 {
        (n.max(2) as f64).powf(-1.0 / (3 * depth + 3) as f64)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ErStats {
    /// Rebuilds per level, the initial build included.
    pub rebuilds: Vec<usize>,
    pub queries: usize,
    pub solver_fallbacks: usize,
    pub solver_iterations: usize,
    /// Total output changes per level.
    pub emitted: Vec<usize>,
    /// Largest terminal count seen per level.
    pub max_terminals: Vec<usize>,
    /// Largest weight spread of any level output.
    pub max_weight_ratio: f64,
}

#[derive(Debug, Clone)]
pub struct SchurChain {
    g: DynamicGraph,
    cfg: ErConfig,
    beta: f64,
    levels: Vec<Level>,
    stats: ErStats,
}

impl SchurChain {
    pub fn new(g: DynamicGraph, cfg: ErConfig) -> Result<Self, SchurError> {
        if !(cfg.epsilon > 0.0 && cfg.epsilon < 1.0) {
            return Err(SchurError::InvalidParameter("epsilon must lie in (0, 1)"));
        }
        let beta = cfg.beta.unwrap_or_else(|| ErConfig::default_beta(g.n(), cfg.depth));
        if !(beta > 0.0 && beta < 1.0) {
            return Err(SchurError::InvalidParameter("beta must lie in (0, 1)"));
        }
        let d = cfg.depth;
        let stats = ErStats {
            rebuilds: vec![0; d],
            emitted: vec![0; d],
            max_terminals: vec![0; d],
            max_weight_ratio: 1.0,
            ..Default::default()
        };
        let mut s = SchurChain { g, cfg, beta, levels: Vec::new(), stats };
        s.rebuild_from(0);
        Ok(s)
    }

    pub fn graph(&self) -> &DynamicGraph {
        &self.g
    }
    pub fn stats(&self) -> &ErStats {
        &self.stats
    }
    pub fn beta(&self) -> f64 {
        self.beta
    }
    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    /// Graph the final solve runs on.
    pub fn deepest(&self) -> &DynamicGraph {
        self.levels.last().map_or(&self.g, |l| l.graph())
    }

    fn level_seed(&self, i: usize) -> u64 {
        let k = self.stats.rebuilds[i] as u64;
        self.cfg.seed ^ (i as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ k.wrapping_mul(0xD1B5_4A32_D192_ED03)
    }

    /// Rebuilds level `i` from its current base and every level below it.
    fn rebuild_from(&mut self, i: usize) {
        self.levels.truncate(i);
        for k in i..self.cfg.depth {
            let base = if k == 0 {
                self.g.clone()
            } else {
                self.levels[k - 1].graph().clone()
            };
            let seed = self.level_seed(k);
            let lvl = if self.cfg.exact {
                Level::Exact(ExactLevel::build(base, &[], self.beta, seed))
            } else {
                let mut p = LevelParams::new(base.n(), self.beta, self.cfg.epsilon, seed);
                if let Some(w) = self.cfg.walks {
                    p.walks = w.max(1);
                }
                Level::Sampled(SchurLevel::build(base, &[], p))
            };
            self.stats.rebuilds[k] += 1;
            self.levels.push(lvl);
        }
        self.observe();
    }

    fn observe(&mut self) {
        for (k, l) in self.levels.iter().enumerate() {
            let c = l.terminals().len();
            self.stats.max_terminals[k] = self.stats.max_terminals[k].max(c);
            let r = weight_ratio(&l.graph().snapshot());
            self.stats.max_weight_ratio = self.stats.max_weight_ratio.max(r);
        }
    }

    /// Feeds `changes` into level `from` and below, adding `extra`
    /// terminals at every level on the way.
    fn push(&mut self, mut changes: ChangeSet, extra: &[VertexId]) -> Result<(), SchurError> {
        for (k, l) in self.levels.iter_mut().enumerate() {
            let mut out = l.apply_all(&changes)?;
            for &v in extra {
                out.extend(l.add_terminal(v));
            }
            self.stats.emitted[k] += out.len();
            changes = out;
        }
        Ok(())
    }

    fn maybe_rebuild(&mut self) {
        if let Some(i) = (0..self.levels.len()).find(|&i| self.levels[i].ops() >= self.levels[i].threshold()) {
            self.rebuild_from(i);
        }
    }

    pub fn insert(&mut self, u: VertexId, v: VertexId, w: f64) -> Result<EdgeRecord, SchurError> {
        let rec = self.g.insert_edge(u, v, w)?;
        self.push(vec![ChangeEvent::inserted(rec)], &[])?;
        self.maybe_rebuild();
        self.observe();
        Ok(rec)
    }

    pub fn delete(&mut self, id: EdgeId) -> Result<EdgeRecord, SchurError> {
        let rec = self.g.delete_edge(id).map_err(|_| SchurError::UnknownEdge(id))?;
        self.push(vec![ChangeEvent::deleted(rec)], &[])?;
        self.maybe_rebuild();
        self.observe();
        Ok(rec)
    }

    /// Resistance estimate between `s` and `t`.
    pub fn query(&mut self, s: VertexId, t: VertexId) -> Result<f64, SchurError> {
        if s == t {
            return Ok(0.0);
        }
        let (comp, _) = self.g.snapshot().components();
        if comp[s] != comp[t] {
            return Err(SchurError::DifferentComponents(s, t));
        }
        self.stats.queries += 1;
        self.push(Vec::new(), &[s, t])?;
        self.observe();
        let tol = self.cfg.tol.unwrap_or(self.cfg.epsilon / 10.0);
        let ans = match effective_resistance(&self.deepest().snapshot(), s, t, self.cfg.solver, tol) {
            Ok(sol) => {
                self.stats.solver_fallbacks += usize::from(sol.fallback);
                self.stats.solver_iterations += sol.iterations;
                sol.value
            }
            // every walk between the two sides was dropped
            Err(SchurError::DifferentComponents(..)) => f64::INFINITY,
            Err(e) => return Err(e),
        };
        self.maybe_rebuild();
        Ok(ans)
    }
}
