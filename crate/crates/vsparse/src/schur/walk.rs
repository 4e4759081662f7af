//! Random walks that stop at the first terminal, with running resistance.

use rand::Rng;

use crate::graph::{EdgeId, GraphView, VertexId};

/// Weighted adjacency with per-vertex cumulative conductances for sampling.
#[derive(Debug, Clone)]
pub struct WalkGraph {
    start: Vec<usize>,
    to: Vec<VertexId>,
    cum: Vec<f64>,
    res: Vec<f64>,
}

impl WalkGraph {
    pub fn new(g: &GraphView) -> Self {
        let mut start = Vec::with_capacity(g.n() + 1);
        let (mut to, mut cum, mut res) = (Vec::new(), Vec::new(), Vec::new());
        for v in 0..g.n() {
            start.push(to.len());
            let mut run = 0.0;
            for &(x, e) in g.neighbors(v) {
                let w = g.edge(e).weight;
                run += w;
                to.push(x);
                cum.push(run);
                res.push(1.0 / w);
            }
        }
        start.push(to.len());
        WalkGraph { start, to, cum, res }
    }

    /// One step with probability proportional to conductance.
    pub fn step<R: Rng>(&self, x: VertexId, rng: &mut R) -> Option<(VertexId, f64)> {
        let (a, b) = (self.start[x], self.start[x + 1]);
        if a == b {
            return None;
        }
        let cum = &self.cum[a..b];
        let r = rng.gen::<f64>() * cum[cum.len() - 1];
        let k = cum.partition_point(|&c| c <= r).min(cum.len() - 1);
        Some((self.to[a + k], self.res[a + k]))
    }
}

/// Walk from an edge endpoint; `prefix[i]` is the resistance walked up to `verts[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfWalk {
    pub verts: Vec<VertexId>,
    pub prefix: Vec<f64>,
    /// Ends at a terminal; false means the walk was truncated.
    pub closed: bool,
}

impl HalfWalk {
    pub fn end(&self) -> VertexId {
        *self.verts.last().expect("walks start somewhere")
    }

    pub fn resistance(&self) -> f64 {
        *self.prefix.last().expect("walks start somewhere")
    }

    /// Stops the walk at position `pos`, which becomes its terminal end.
    pub fn cut(&mut self, pos: usize) {
        self.verts.truncate(pos + 1);
        self.prefix.truncate(pos + 1);
        self.closed = true;
    }
}

/// Walks from `start` until a terminal is hit, `cap` distinct vertices were
/// seen, or `max_steps` steps were taken.
pub fn sample_half<R: Rng>(
    g: &WalkGraph,
    start: VertexId,
    is_terminal: impl Fn(VertexId) -> bool,
    cap: usize,
    max_steps: usize,
    rng: &mut R,
) -> HalfWalk {
    let mut w = HalfWalk { verts: vec![start], prefix: vec![0.0], closed: is_terminal(start) };
    let mut seen = std::collections::HashSet::from([start]);
    let mut x = start;
    let mut r = 0.0;
    while !w.closed && seen.len() < cap && w.verts.len() <= max_steps {
        let Some((y, dr)) = g.step(x, rng) else { break };
        r += dr;
        x = y;
        seen.insert(y);
        w.verts.push(y);
        w.prefix.push(r);
        w.closed = is_terminal(y);
    }
    w
}

/// Pair of walks started from both ends of one edge.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkRecord {
    pub origin: EdgeId,
    pub slot: u32,
    /// Walks from the origin's `u` and `v` ends.
    pub halves: [HalfWalk; 2],
    /// Resistance of the origin edge itself.
    pub edge_res: f64,
}

impl WalkRecord {
    /// Terminal pair and series resistance, when both walks ended at
    /// distinct terminals.
    pub fn sc_edge(&self) -> Option<(VertexId, VertexId, f64)> {
        let [a, b] = &self.halves;
        (a.closed && b.closed && a.end() != b.end())
            .then(|| (a.end(), b.end(), a.resistance() + self.edge_res + b.resistance()))
    }

    /// Whole walk from the `u` side end to the `v` side end with running resistance.
    pub fn path(&self) -> (Vec<VertexId>, Vec<f64>) {
        let [a, b] = &self.halves;
        let ra = a.resistance();
        let mut verts: Vec<VertexId> = a.verts.iter().rev().copied().collect();
        let mut prefix: Vec<f64> = a.prefix.iter().rev().map(|p| ra - p).collect();
        let mid = ra + self.edge_res;
        verts.extend(&b.verts);
        prefix.extend(b.prefix.iter().map(|p| mid + p));
        (verts, prefix)
    }

    /// Resistances of the two pieces when the path is split at index `i`.
    pub fn split_at(&self, i: usize) -> (f64, f64) {
        let (_, prefix) = self.path();
        (prefix[i], prefix[prefix.len() - 1] - prefix[i])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn step_follows_conductance() {
        let g = GraphView::from_triples(3, &[(0, 1, 3.0), (0, 2, 1.0)]);
        let wg = WalkGraph::new(&g);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let hits = (0..4000).filter(|_| wg.step(0, &mut rng).unwrap().0 == 1).count();
        assert!((2800..3200).contains(&hits), "{hits}");
        assert_eq!(WalkGraph::new(&GraphView::from_triples(2, &[])).step(0, &mut rng), None);
    }

    #[test]
    fn walk_stops_at_terminal_and_tracks_resistance() {
        let g = GraphView::from_triples(3, &[(0, 1, 2.0), (1, 2, 4.0)]);
        let wg = WalkGraph::new(&g);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let w = sample_half(&wg, 0, |v| v == 2, 100, 1000, &mut rng);
        assert!(w.closed && w.end() == 2);
        assert_eq!(w.prefix.len(), w.verts.len());
        // all steps but the last cross 0-1
        let expect = 0.5 * (w.verts.len() - 2) as f64 + 0.25;
        assert!((w.resistance() - expect).abs() < 1e-12);
    }

    #[test]
    fn path_and_split() {
        let rec = WalkRecord {
            origin: 0,
            slot: 0,
            halves: [
                HalfWalk { verts: vec![1, 0], prefix: vec![0.0, 1.0], closed: true },
                HalfWalk { verts: vec![2, 3], prefix: vec![0.0, 0.5], closed: true },
            ],
            edge_res: 2.0,
        };
        let (v, p) = rec.path();
        assert_eq!(v, vec![0, 1, 2, 3]);
        assert_eq!(p, vec![0.0, 1.0, 3.0, 3.5]);
        assert_eq!(rec.sc_edge(), Some((0, 3, 3.5)));
        let (a, b) = rec.split_at(2);
        assert_eq!((a, b), (3.0, 0.5));
    }
}
