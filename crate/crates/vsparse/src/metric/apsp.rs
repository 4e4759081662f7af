//! Fully dynamic all-pairs distance estimates from sampled metric j-trees.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use ordered_float::OrderedFloat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{ChangeKind, ChangeSet, DynamicGraph, EdgeId, EdgeRecord, GraphView, VertexId};
use crate::oracle::dijkstra;
use crate::par;

use super::{k_for_j, measured_alpha, mwu_metric_decomposition, DistanceCoreSparsifier, MetricError};

/// Greedy spanner: keeps an edge only if the kept edges do not already
/// connect its endpoints within `stretch` times its length.
pub fn greedy_spanner(g: &GraphView, stretch: f64) -> Vec<usize> {
    let n = g.n();
    let mut order: Vec<usize> = (0..g.m()).collect();
    order.sort_by(|&a, &b| g.edge(a).weight.total_cmp(&g.edge(b).weight).then(a.cmp(&b)));
    let mut adj: Vec<Vec<(VertexId, f64)>> = vec![Vec::new(); n];
    let mut dist = vec![f64::INFINITY; n];
    let mut touched = Vec::new();
    let mut kept = Vec::new();
    for i in order {
        let e = g.edge(i);
        let bound = stretch * e.weight;
        let mut heap = BinaryHeap::from([Reverse((OrderedFloat(0.0), e.u))]);
        dist[e.u] = 0.0;
        touched.push(e.u);
        let mut reached = false;
        while let Some(Reverse((OrderedFloat(d), x))) = heap.pop() {
            if d > dist[x] {
                continue;
            }
            if x == e.v {
                reached = true;
                break;
            }
            for &(y, l) in &adj[x] {
                let nd = d + l;
                if nd <= bound && nd < dist[y] {
                    if dist[y].is_infinite() {
                        touched.push(y);
                    }
                    dist[y] = nd;
                    heap.push(Reverse((OrderedFloat(nd), y)));
                }
            }
        }
        for x in touched.drain(..) {
            dist[x] = f64::INFINITY;
        }
        if !reached {
            adj[e.u].push((e.v, e.weight));
            adj[e.v].push((e.u, e.weight));
            kept.push(i);
        }
    }
    kept.sort_unstable();
    kept
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApspConfig {
    /// Rebuild period; defaults to m^{2/3}.
    pub j: Option<usize>,
    /// Decomposition size; defaults from j.
    pub k: Option<usize>,
    /// Sampled members; defaults to ceil(3 log2 n).
    pub samples: Option<usize>,
    pub seed: u64,
    /// Stretch of the periodically rebuilt spanner; None queries the full sparsifier.
    pub spanner: Option<f64>,
}

impl ApspConfig {
    pub fn new(seed: u64) -> Self {
        ApspConfig { j: None, k: None, samples: None, seed, spanner: Some(3.0) }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ApspStats {
    pub rebuilds: usize,
    pub rho: f64,
    pub alpha: f64,
    pub lmax: f64,
    pub k: usize,
    pub j: usize,
    pub iterations: usize,
    pub max_terminals: usize,
    pub spanner_rebuilds: usize,
}

#[derive(Debug, Clone)]
struct Member {
    sp: DistanceCoreSparsifier,
    // subgraph of the sparsifier graph with the same edge ids
    spanner: Option<DynamicGraph>,
    spanner_ops: usize,
}

impl Member {
    fn apply(&mut self, ch: &ChangeSet) {
        if let Some(s) = &mut self.spanner {
            for ev in ch {
                match ev.kind {
                    ChangeKind::Deleted => {
                        if s.contains(ev.edge.id) {
                            s.delete_edge(ev.edge.id).expect("present");
                        }
                    }
                    ChangeKind::Inserted => {
                        s.insert_with_id(ev.edge).expect("fresh id");
                    }
                }
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct DynamicApsp {
    g: DynamicGraph,
    cfg: ApspConfig,
    members: Vec<Member>,
    ops: usize,
    rng: ChaCha8Rng,
    stats: ApspStats,
}

impl DynamicApsp {
    pub fn new(g: DynamicGraph, cfg: ApspConfig) -> Result<Self, MetricError> {
        let rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut s = DynamicApsp { g, cfg, members: Vec::new(), ops: 0, rng, stats: ApspStats::default() };
        s.rebuild()?;
        Ok(s)
    }

    pub fn graph(&self) -> &DynamicGraph {
        &self.g
    }
    pub fn stats(&self) -> &ApspStats {
        &self.stats
    }
    pub fn members(&self) -> impl Iterator<Item = &DistanceCoreSparsifier> {
        self.members.iter().map(|m| &m.sp)
    }

    pub fn rebuild(&mut self) -> Result<(), MetricError> {
        let view = self.g.snapshot();
        let m = view.m();
        let j = self.cfg.j.unwrap_or(((m.max(1) as f64).powf(2.0 / 3.0).ceil() as usize).max(1));
        let k = self.cfg.k.unwrap_or_else(|| k_for_j(&view, j, measured_alpha(&view)));
        let dec = mwu_metric_decomposition(&view, k)?;
        let n = view.n().max(2) as f64;
        let t = self.cfg.samples.unwrap_or((3.0 * n.log2()).ceil() as usize).max(1);
        let mut prefix = Vec::with_capacity(dec.lambda.len());
        let mut run = 0.0;
        for l in &dec.lambda {
            run += l;
            prefix.push(run);
        }
        let picks: Vec<usize> = (0..t)
            .map(|_| {
                let x = self.rng.gen::<f64>() * run;
                prefix.partition_point(|&p| p <= x).min(prefix.len() - 1)
            })
            .collect();
        self.members = par::map(&picks, |&i| {
            let mj = &dec.members[i];
            Member { sp: DistanceCoreSparsifier::new(&view, mj.tree.clone(), &mj.f, &[]), spanner: None, spanner_ops: 0 }
        });
        self.stats.rebuilds += 1;
        self.stats.rho = dec.rho;
        self.stats.alpha = dec.alpha;
        self.stats.lmax = dec.lmax;
        self.stats.k = dec.k;
        self.stats.j = j;
        self.stats.iterations = dec.iterations;
        self.ops = 0;
        Ok(())
    }

    fn tick(&mut self) -> Result<(), MetricError> {
        self.ops += 1;
        for m in &mut self.members {
            m.spanner_ops += 1;
        }
        let c = self.members.iter().map(|m| m.sp.terminals().len()).max().unwrap_or(0);
        self.stats.max_terminals = self.stats.max_terminals.max(c);
        if self.ops >= self.stats.j {
            self.rebuild()?;
        }
        Ok(())
    }

    pub fn insert(&mut self, u: VertexId, v: VertexId, len: f64) -> Result<EdgeRecord, MetricError> {
        let rec = self.g.insert_edge(u, v, len)?;
        par::map_mut(&mut self.members, |m| {
            let ch = m.sp.insert(rec);
            m.apply(&ch);
        });
        self.tick()?;
        Ok(rec)
    }

    pub fn delete(&mut self, id: EdgeId) -> Result<EdgeRecord, MetricError> {
        let rec = *self.g.edge(id).ok_or(MetricError::UnknownEdge(id))?;
        self.g.delete_edge(id)?;
        let res = par::map_mut(&mut self.members, |m| {
            m.sp.delete(&rec).map(|ch| m.apply(&ch))
        });
        res.into_iter().collect::<Result<Vec<()>, _>>()?;
        self.tick()?;
        Ok(rec)
    }

    /// Distance estimate; never below the true distance.
    pub fn query(&mut self, s: VertexId, t: VertexId) -> f64 {
        if s == t {
            return 0.0;
        }
        let period = self.stats.j.div_ceil(4).max(1);
        let stretch = self.cfg.spanner;
        let answers = par::map_mut(&mut self.members, |m| {
            let mut ch = m.sp.add_terminal(s);
            ch.extend(m.sp.add_terminal(t));
            m.apply(&ch);
            let hc = m.sp.graph();
            let dense = hc.m() > 4 * m.sp.terminals().len();
            match stretch {
                Some(k) if dense => {
                    let stale = m.spanner.is_none() || m.spanner_ops >= period;
                    if stale {
                        let view = hc.snapshot();
                        let mut sg = DynamicGraph::unbounded(view.n());
                        for i in greedy_spanner(&view, k) {
                            sg.insert_with_id(*view.edge(i)).expect("spanner edge");
                        }
                        m.spanner = Some(sg);
                        m.spanner_ops = 0;
                    }
                    (dijkstra(&m.spanner.as_ref().expect("built above").snapshot(), s)[t], stale)
                }
                _ => {
                    m.spanner = None;
                    (dijkstra(&hc.snapshot(), s)[t], false)
                }
            }
        });
        self.stats.spanner_rebuilds += answers.iter().filter(|a| a.1).count();
        answers.into_iter().map(|a| a.0).fold(f64::INFINITY, f64::min)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spanner_of_triangle_drops_long_edge() {
        let g = GraphView::from_triples(3, &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 2.5)]);
        assert_eq!(greedy_spanner(&g, 3.0), vec![0, 1]);
        assert_eq!(greedy_spanner(&g, 1.0), vec![0, 1]);
        let g = GraphView::from_triples(3, &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.5)]);
        assert_eq!(greedy_spanner(&g, 1.0), vec![0, 1, 2]);
    }

    #[test]
    fn tree_input_is_exact() {
        let g = GraphView::from_triples(5, &[(0, 1, 1.0), (1, 2, 2.0), (2, 3, 1.5), (1, 4, 4.0)]);
        let mut a = DynamicApsp::new(g.to_dynamic(), ApspConfig::new(3)).unwrap();
        assert_eq!(a.query(0, 3), 4.5);
        assert_eq!(a.query(4, 3), 7.5);
        assert_eq!(a.query(2, 2), 0.0);
    }

    #[test]
    fn disconnected_pair_is_infinite() {
        let g = GraphView::from_triples(4, &[(0, 1, 1.0), (2, 3, 1.0)]);
        let mut a = DynamicApsp::new(g.to_dynamic(), ApspConfig::new(3)).unwrap();
        assert!(a.query(0, 2).is_infinite());
        a.insert(1, 2, 2.0).unwrap();
        assert_eq!(a.query(0, 3), 4.0);
    }
}
