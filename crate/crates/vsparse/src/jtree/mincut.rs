//! Dynamic s-t min-cut over sampled j-trees.
//!
//! Every answer is the exact value of a cut of G's j-tree image, so it never
//! undershoots the true min cut. The minimum over several trees keeps it
//! close from above.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{DynamicGraph, EdgeId, EdgeRecord, GraphView, VertexId};
use crate::oracle::exact_min_cut;
use crate::par;
use crate::spectral::spectral_sparsify;

use super::{build_decomposition, DecompConfig, JTree, JTreeError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleMode {
    /// Trees drawn once per rebuild.
    Oblivious,
    /// All trees kept, a fresh sample drawn for every query.
    Adaptive,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinCutConfig {
    pub mode: SampleMode,
    /// Rebuild period and core size parameter; defaults from m.
    pub j: Option<usize>,
    /// Trees consulted per query; defaults to ceil(log2 n).
    pub samples: Option<usize>,
    pub seed: u64,
    /// Accuracy of the core sparsifier.
    pub epsilon: f64,
    pub decomp: DecompConfig,
}

impl MinCutConfig {
    pub fn new(mode: SampleMode, seed: u64) -> Self {
        MinCutConfig { mode, j: None, samples: None, seed, epsilon: 0.5, decomp: DecompConfig::default() }
    }

    pub fn default_j(&self, m: usize) -> usize {
        let e = match self.mode {
            SampleMode::Oblivious => 2.0 / 3.0,
            SampleMode::Adaptive => 0.75,
        };
        ((m.max(1) as f64).powf(e).ceil() as usize).max(1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CutAnswer {
    pub value: f64,
    /// Source side of the reported cut.
    pub side: Vec<bool>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct MinCutStats {
    pub rebuilds: usize,
    /// Quality certified by the latest build.
    pub rho: f64,
    /// Members in the latest decomposition.
    pub k: usize,
    pub j: usize,
    pub max_core: usize,
    /// Largest per-tree core change count over finished rebuild windows.
    pub max_window_changes: usize,
    /// Largest `changes * j / (m * n)` over finished windows.
    pub recourse_c0: f64,
}

#[derive(Debug, Clone)]
struct Member {
    tree: JTree,
    // sparsified core and the change count it was built at
    sparse: Option<(GraphView, usize)>,
}

#[derive(Debug, Clone)]
pub struct DynamicMinCut {
    g: DynamicGraph,
    cfg: MinCutConfig,
    members: Vec<Member>,
    lambda: Vec<f64>,
    ops: usize,
    queries: u64,
    rng: ChaCha8Rng,
    stats: MinCutStats,
}

fn draw(lambda: &[f64], count: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let total: f64 = lambda.iter().sum();
    (0..count)
        .map(|_| {
            let mut x = rng.gen::<f64>() * total;
            for (i, &l) in lambda.iter().enumerate() {
                if x < l {
                    return i;
                }
                x -= l;
            }
            lambda.len() - 1
        })
        .collect()
}

impl DynamicMinCut {
    pub fn new(g: DynamicGraph, cfg: MinCutConfig) -> Result<Self, JTreeError> {
        let rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut s = DynamicMinCut {
            g,
            cfg,
            members: Vec::new(),
            lambda: Vec::new(),
            ops: 0,
            queries: 0,
            rng,
            stats: MinCutStats::default(),
        };
        s.rebuild()?;
        Ok(s)
    }

    pub fn graph(&self) -> &DynamicGraph {
        &self.g
    }
    pub fn stats(&self) -> &MinCutStats {
        &self.stats
    }
    pub fn trees(&self) -> impl Iterator<Item = &JTree> {
        self.members.iter().map(|m| &m.tree)
    }
    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    fn sample_count(&self) -> usize {
        let n = self.g.n().max(2) as f64;
        self.cfg.samples.unwrap_or(n.log2().ceil() as usize).max(1)
    }

    pub fn rebuild(&mut self) -> Result<(), JTreeError> {
        let (m, n) = (self.g.m(), self.g.n());
        if self.stats.rebuilds > 0 && m > 0 && n > 0 {
            let worst = self.members.iter().map(|x| x.tree.emitted()).max().unwrap_or(0);
            self.stats.max_window_changes = self.stats.max_window_changes.max(worst);
            let c0 = worst as f64 * self.stats.j as f64 / (m as f64 * n as f64);
            self.stats.recourse_c0 = self.stats.recourse_c0.max(c0);
        }
        let j = self.cfg.j.unwrap_or_else(|| self.cfg.default_j(m));
        let dec = build_decomposition(&self.g.snapshot(), j, &self.cfg.decomp)?;
        self.stats.rebuilds += 1;
        self.stats.rho = dec.rho;
        self.stats.k = dec.trees.len();
        self.stats.j = j;
        match self.cfg.mode {
            SampleMode::Oblivious => {
                let picks = draw(&dec.lambda, self.sample_count(), &mut self.rng);
                self.members = picks.iter().map(|&i| Member { tree: dec.trees[i].clone(), sparse: None }).collect();
                self.lambda = vec![1.0; picks.len()];
            }
            SampleMode::Adaptive => {
                self.members = dec.trees.into_iter().map(|tree| Member { tree, sparse: None }).collect();
                self.lambda = dec.lambda;
            }
        }
        self.ops = 0;
        self.note_core_sizes();
        Ok(())
    }

    fn note_core_sizes(&mut self) {
        let c = self.members.iter().map(|x| x.tree.core_size()).max().unwrap_or(0);
        self.stats.max_core = self.stats.max_core.max(c);
    }

    fn tick(&mut self) -> Result<(), JTreeError> {
        self.ops += 1;
        self.note_core_sizes();
        if self.ops >= self.stats.j {
            self.rebuild()?;
        }
        Ok(())
    }

    pub fn insert(&mut self, u: VertexId, v: VertexId, w: f64) -> Result<EdgeRecord, JTreeError> {
        let rec = self.g.insert_edge(u, v, w)?;
        let res = par::map_mut(&mut self.members, |m| m.tree.insert(rec).map(|_| ()));
        res.into_iter().collect::<Result<Vec<()>, _>>()?;
        self.tick()?;
        Ok(rec)
    }

    pub fn delete(&mut self, id: EdgeId) -> Result<EdgeRecord, JTreeError> {
        if !self.g.contains(id) {
            return Err(JTreeError::UnknownEdge(id));
        }
        let rec = self.g.delete_edge(id)?;
        let res = par::map_mut(&mut self.members, |m| m.tree.delete(id).map(|_| ()));
        res.into_iter().collect::<Result<Vec<()>, _>>()?;
        self.tick()?;
        Ok(rec)
    }

    /// Upper estimate of the s-t min cut with a witnessing cut.
    pub fn query(&mut self, s: VertexId, t: VertexId) -> Result<CutAnswer, JTreeError> {
        if s == t {
            return Err(JTreeError::SameEndpoints(s));
        }
        self.queries += 1;
        par::map_mut(&mut self.members, |m| {
            m.tree.add_terminal(s);
            m.tree.add_terminal(t);
        });
        let n = self.g.n();
        let eps = self.cfg.epsilon;
        let chosen: Vec<usize> = match self.cfg.mode {
            SampleMode::Oblivious => {
                for m in &mut self.members {
                    let budget = m.tree.core_size().div_ceil(4).max(1);
                    let stale = m.sparse.as_ref().is_none_or(|(_, at)| m.tree.emitted() >= at + budget);
                    if stale {
                        let edges: Vec<_> = m.tree.core_graph().edges().map(|e| (e.u, e.v, e.weight)).collect();
                        let sp = spectral_sparsify(&edges, eps, &mut self.rng);
                        m.sparse = Some((GraphView::from_triples(n, &sp), m.tree.emitted()));
                    }
                }
                (0..self.members.len()).collect()
            }
            SampleMode::Adaptive => {
                let mut fresh = ChaCha8Rng::seed_from_u64(self.cfg.seed ^ self.queries.wrapping_mul(0x9e37_79b9_7f4a_7c15));
                let mut picks = draw(&self.lambda, self.sample_count(), &mut fresh);
                picks.sort_unstable();
                picks.dedup();
                for &i in &picks {
                    let m = &mut self.members[i];
                    let edges: Vec<_> = m.tree.core_graph().edges().map(|e| (e.u, e.v, e.weight)).collect();
                    let sp = spectral_sparsify(&edges, eps, &mut fresh);
                    m.sparse = Some((GraphView::from_triples(n, &sp), m.tree.emitted()));
                }
                picks
            }
        };
        let members = &self.members;
        let answers = par::map(&chosen, |&i| {
            let m = &members[i];
            let (sp, _) = m.sparse.as_ref().expect("sparsified above");
            let side = exact_min_cut(sp, s, t).expect("s differs from t").side;
            (m.tree.core_cut(&side), m.tree.expand(&side))
        });
        let (value, side) = answers
            .into_iter()
            .min_by(|a, b| a.0.total_cmp(&b.0))
            .unwrap_or((f64::INFINITY, vec![false; n]));
        Ok(CutAnswer { value, side })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tree_graph_answers_exactly() {
        let g = GraphView::from_triples(6, &[(0, 1, 3.0), (1, 2, 1.0), (2, 3, 4.0), (1, 4, 2.0), (4, 5, 5.0)]);
        for mode in [SampleMode::Oblivious, SampleMode::Adaptive] {
            let mut mc = DynamicMinCut::new(g.to_dynamic(), MinCutConfig::new(mode, 1)).unwrap();
            assert_eq!(mc.query(0, 3).unwrap().value, 1.0);
            assert_eq!(mc.query(5, 0).unwrap().value, 2.0);
            let a = mc.query(3, 5).unwrap();
            assert_eq!(a.value, 1.0);
            assert_eq!(g.cut_value(&a.side), 1.0);
        }
    }

    #[test]
    fn disconnected_pair_gives_zero() {
        let g = GraphView::from_triples(4, &[(0, 1, 1.0), (2, 3, 1.0)]);
        let mut mc = DynamicMinCut::new(g.to_dynamic(), MinCutConfig::new(SampleMode::Oblivious, 2)).unwrap();
        assert_eq!(mc.query(0, 3).unwrap().value, 0.0);
        mc.insert(1, 2, 2.5).unwrap();
        assert_eq!(mc.query(0, 3).unwrap().value, 1.0);
        assert!(matches!(mc.delete(99), Err(JTreeError::UnknownEdge(99))));
    }
}
