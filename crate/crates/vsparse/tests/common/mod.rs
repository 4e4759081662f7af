#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vsparse::graph::GraphView;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Connected random graph: a random spanning tree plus extra random edges.
pub fn connected(n: usize, m: usize, seed: u64, wmax: f64, integral: bool) -> GraphView {
    let mut r = rng(seed);
    let mut triples = Vec::new();
    let w = |r: &mut ChaCha8Rng| {
        if integral {
            r.gen_range(1..=wmax as u32) as f64
        } else {
            r.gen_range(1.0..wmax)
        }
    };
    for v in 1..n {
        let u = r.gen_range(0..v);
        let x = w(&mut r);
        triples.push((u, v, x));
    }
    while triples.len() < m {
        let u = r.gen_range(0..n);
        let v = r.gen_range(0..n);
        if u != v {
            let x = w(&mut r);
            triples.push((u, v, x));
        }
    }
    GraphView::from_triples(n, &triples)
}

/// Per-query ground truth by replaying the events on a plain graph.
pub fn replay_answers(
    n: usize,
    events: &[vsparse::trace::Event],
    solve: impl Fn(&GraphView, usize, usize) -> f64,
) -> Vec<f64> {
    use vsparse::trace::Event;
    let mut g = vsparse::graph::DynamicGraph::unbounded(n);
    let mut out = Vec::new();
    for ev in events {
        match *ev {
            Event::Insert(e) => {
                g.insert_with_id(e).unwrap();
            }
            Event::Delete(e) => {
                g.delete_edge(e.id).unwrap();
            }
            Event::Query(a, b) => out.push(solve(&g.snapshot(), a, b)),
        }
    }
    out
}

/// Resolved events of a generated trace.
pub fn gen_events(
    kind: vsparse::trace::GraphKind,
    n: usize,
    m: usize,
    ops: usize,
    query_rate: f64,
    insert_only: bool,
    seed: u64,
) -> Vec<vsparse::trace::Event> {
    let mut cfg = vsparse::trace::GenConfig::new(kind, n, m, ops, seed);
    cfg.query_rate = query_rate;
    cfg.insert_only = insert_only;
    vsparse::trace::resolve(&vsparse::trace::gen_trace(&cfg).unwrap()).unwrap()
}
