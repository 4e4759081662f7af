use std::cmp::Reverse;
use std::collections::BinaryHeap;

use ordered_float::OrderedFloat;

use crate::graph::{GraphView, VertexId};

/// Single-source shortest path lengths; unreachable vertices get infinity.
pub fn dijkstra(g: &GraphView, s: VertexId) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; g.n()];
    dist[s] = 0.0;
    let mut heap = BinaryHeap::from([Reverse((OrderedFloat(0.0), s))]);
    while let Some(Reverse((OrderedFloat(d), x))) = heap.pop() {
        if d > dist[x] {
            continue;
        }
        for &(y, i) in g.neighbors(x) {
            let nd = d + g.edge(i).weight;
            if nd < dist[y] {
                dist[y] = nd;
                heap.push(Reverse((OrderedFloat(nd), y)));
            }
        }
    }
    dist
}

pub fn exact_distance(g: &GraphView, s: VertexId, t: VertexId) -> f64 {
    if s == t {
        return 0.0;
    }
    dijkstra(g, s)[t]
}

/// Edge-relaxation shortest paths, kept as an independent cross-check.
pub fn bellman_ford(g: &GraphView, s: VertexId) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; g.n()];
    dist[s] = 0.0;
    for _ in 0..g.n() {
        let mut changed = false;
        for e in g.edges() {
            for (a, b) in [(e.u, e.v), (e.v, e.u)] {
                if dist[a] + e.weight < dist[b] {
                    dist[b] = dist[a] + e.weight;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    dist
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_distance() {
        let g = GraphView::from_triples(3, &[(0, 1, 1.0), (1, 2, 1.0)]);
        assert_eq!(exact_distance(&g, 0, 2), 2.0);
    }

    #[test]
    fn disconnected_is_infinite() {
        let g = GraphView::from_triples(3, &[(0, 1, 1.0)]);
        assert!(exact_distance(&g, 0, 2).is_infinite());
        assert!(bellman_ford(&g, 0)[2].is_infinite());
    }
}
