use std::collections::VecDeque;

use super::OracleError;
use crate::graph::{GraphView, VertexId};

#[derive(Debug, Clone, PartialEq)]
pub struct CutResult {
    pub value: f64,
    /// `side[v]` is true when v is on the source side.
    pub side: Vec<bool>,
}

impl CutResult {
    pub fn source_side(&self) -> Vec<VertexId> {
        (0..self.side.len()).filter(|&v| self.side[v]).collect()
    }
}

struct Residual {
    head: Vec<usize>,
    cap: Vec<f64>,
    adj: Vec<Vec<usize>>,
    // forward arc of each input edge, None for self-loops
    arc_of: Vec<Option<usize>>,
}

impl Residual {
    fn new(g: &GraphView) -> Self {
        let mut r = Residual {
            head: Vec::with_capacity(2 * g.m()),
            cap: Vec::with_capacity(2 * g.m()),
            adj: vec![Vec::new(); g.n()],
            arc_of: Vec::with_capacity(g.m()),
        };
        for e in g.edges() {
            if e.u == e.v {
                r.arc_of.push(None);
                continue;
            }
            r.arc_of.push(Some(r.head.len()));
            // arc 2k goes u->v, arc 2k+1 goes v->u; each is the other's reverse
            let a = r.head.len();
            r.head.push(e.v);
            r.cap.push(e.weight);
            r.adj[e.u].push(a);
            r.head.push(e.u);
            r.cap.push(e.weight);
            r.adj[e.v].push(a + 1);
        }
        r
    }

    fn reachable(&self, s: usize, eps: f64) -> Vec<bool> {
        let mut seen = vec![false; self.adj.len()];
        seen[s] = true;
        let mut stack = vec![s];
        while let Some(x) = stack.pop() {
            for &a in &self.adj[x] {
                let y = self.head[a];
                if !seen[y] && self.cap[a] > eps {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
        seen
    }
}

fn eps_for(g: &GraphView) -> f64 {
    let maxw = g.edges().iter().map(|e| e.weight).fold(0.0, f64::max);
    1e-12 * maxw.max(1e-300)
}

/// Exact s-t min cut by Dinic's algorithm. Disconnected pairs give value 0.
pub fn exact_min_cut(g: &GraphView, s: VertexId, t: VertexId) -> Result<CutResult, OracleError> {
    if s == t {
        return Err(OracleError::SameEndpoints(s));
    }
    let eps = eps_for(g);
    let r = dinic(g, s, t, eps);
    let side = r.reachable(s, eps);
    Ok(CutResult { value: g.cut_value(&side), side })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowResult {
    pub value: f64,
    /// Net flow on each edge, positive in the `u -> v` direction.
    pub flow: Vec<f64>,
}

/// Maximum s-t flow with its per-edge decomposition.
pub fn max_flow(g: &GraphView, s: VertexId, t: VertexId) -> Result<FlowResult, OracleError> {
    if s == t {
        return Err(OracleError::SameEndpoints(s));
    }
    let r = dinic(g, s, t, eps_for(g));
    let flow: Vec<f64> = r
        .arc_of
        .iter()
        .map(|a| a.map_or(0.0, |a| (r.cap[a + 1] - r.cap[a]) / 2.0))
        .collect();
    let value = g
        .edges()
        .iter()
        .zip(&flow)
        .map(|(e, &f)| if e.u == s { f } else if e.v == s { -f } else { 0.0 })
        .sum();
    Ok(FlowResult { value, flow })
}

fn dinic(g: &GraphView, s: VertexId, t: VertexId, eps: f64) -> Residual {
    let n = g.n();
    let mut r = Residual::new(g);
    let mut level = vec![usize::MAX; n];
    let mut it = vec![0usize; n];
    loop {
        level.iter_mut().for_each(|l| *l = usize::MAX);
        level[s] = 0;
        let mut q = VecDeque::from([s]);
        while let Some(x) = q.pop_front() {
            for &a in &r.adj[x] {
                let y = r.head[a];
                if level[y] == usize::MAX && r.cap[a] > eps {
                    level[y] = level[x] + 1;
                    q.push_back(y);
                }
            }
        }
        if level[t] == usize::MAX {
            break;
        }
        it.iter_mut().for_each(|i| *i = 0);
        loop {
            let pushed = blocking_path(&mut r, &level, &mut it, s, t, eps);
            if pushed <= eps {
                break;
            }
        }
    }
    r
}

// One augmenting path in the level graph, iterative DFS with current-arc pointers.
fn blocking_path(
    r: &mut Residual,
    level: &[usize],
    it: &mut [usize],
    s: usize,
    t: usize,
    eps: f64,
) -> f64 {
    let mut path: Vec<usize> = Vec::new();
    let mut x = s;
    loop {
        if x == t {
            let f = path.iter().map(|&a| r.cap[a]).fold(f64::INFINITY, f64::min);
            for &a in &path {
                r.cap[a] -= f;
                r.cap[a ^ 1] += f;
            }
            return f;
        }
        let mut advanced = false;
        while it[x] < r.adj[x].len() {
            let a = r.adj[x][it[x]];
            let y = r.head[a];
            if r.cap[a] > eps && level[y] == level[x] + 1 {
                path.push(a);
                x = y;
                advanced = true;
                break;
            }
            it[x] += 1;
        }
        if !advanced {
            if x == s {
                return 0.0;
            }
            // dead end: retreat and skip the arc that led here
            let a = path.pop().expect("non-source vertex has a parent arc");
            x = r.head[a ^ 1];
            it[x] += 1;
        }
    }
}

/// Max-flow value by shortest augmenting paths; a second, independent solver.
pub fn edmonds_karp_value(g: &GraphView, s: VertexId, t: VertexId) -> f64 {
    let n = g.n();
    let eps = eps_for(g);
    let mut r = Residual::new(g);
    let mut total = 0.0;
    loop {
        let mut parent = vec![usize::MAX; n];
        let mut seen = vec![false; n];
        seen[s] = true;
        let mut q = VecDeque::from([s]);
        while let Some(x) = q.pop_front() {
            if x == t {
                break;
            }
            for &a in &r.adj[x] {
                let y = r.head[a];
                if !seen[y] && r.cap[a] > eps {
                    seen[y] = true;
                    parent[y] = a;
                    q.push_back(y);
                }
            }
        }
        if !seen[t] {
            return total;
        }
        let mut f = f64::INFINITY;
        let mut y = t;
        while y != s {
            let a = parent[y];
            f = f.min(r.cap[a]);
            y = r.head[a ^ 1];
        }
        let mut y = t;
        while y != s {
            let a = parent[y];
            r.cap[a] -= f;
            r.cap[a ^ 1] += f;
            y = r.head[a ^ 1];
        }
        total += f;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn four_cycle_opposite_corners() {
        let g = GraphView::from_triples(4, &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 0, 1.0)]);
        let c = exact_min_cut(&g, 0, 2).unwrap();
        assert_eq!(c.value, 2.0);
        assert!(c.side[0] && !c.side[2]);
    }

    #[test]
    fn path_bottleneck() {
        let g = GraphView::from_triples(3, &[(0, 1, 3.0), (1, 2, 5.0)]);
        assert_eq!(exact_min_cut(&g, 0, 2).unwrap().value, 3.0);
        assert_eq!(edmonds_karp_value(&g, 0, 2), 3.0);
    }

    #[test]
    fn disconnected_is_zero() {
        let g = GraphView::from_triples(4, &[(0, 1, 3.0), (2, 3, 5.0)]);
        let c = exact_min_cut(&g, 0, 3).unwrap();
        assert_eq!(c.value, 0.0);
        assert_eq!(c.source_side(), vec![0, 1]);
    }

    #[test]
    fn flow_decomposition_is_conserved() {
        let g = GraphView::from_triples(4, &[(0, 1, 2.0), (1, 3, 1.0), (0, 2, 1.0), (2, 3, 4.0), (1, 2, 1.0)]);
        let f = max_flow(&g, 0, 3).unwrap();
        assert!((f.value - 3.0).abs() < 1e-12);
        let mut net = [0.0; 4];
        for (e, &x) in g.edges().iter().zip(&f.flow) {
            assert!(x.abs() <= e.weight + 1e-12);
            net[e.u] -= x;
            net[e.v] += x;
        }
        assert!(net[1].abs() < 1e-12 && net[2].abs() < 1e-12);
    }

    #[test]
    fn same_endpoint_rejected() {
        let g = GraphView::from_triples(2, &[(0, 1, 1.0)]);
        assert_eq!(exact_min_cut(&g, 1, 1), Err(OracleError::SameEndpoints(1)));
    }
}
