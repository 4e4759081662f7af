use proptest::prelude::*;
use vsparse::graph::{ChangeKind, DynamicGraph};

#[derive(Debug, Clone)]
enum Op {
    Ins(usize, usize, f64),
    Del(usize),
}

fn ops() -> impl Strategy<Value = Vec<Op>> {
    prop::collection::vec(
        prop_oneof![
            (0usize..8, 0usize..8, 1.0f64..50.0).prop_map(|(u, v, w)| Op::Ins(u, v, w)),
            (0usize..40).prop_map(Op::Del),
        ],
        0..80,
    )
}

fn run(ops: &[Op]) -> DynamicGraph {
    let mut g = DynamicGraph::new(8).with_event_log();
    for op in ops {
        match *op {
            Op::Ins(u, v, w) => {
                let _ = g.insert_edge(u, v, w);
            }
            Op::Del(i) => {
                let live: Vec<usize> = g.edges().map(|e| e.id).collect();
                if !live.is_empty() {
                    let _ = g.delete_edge(live[i % live.len()]);
                }
            }
        }
    }
    g
}

proptest! {
    #[test]
    fn event_replay_reproduces_graph(ops in ops()) {
        let mut g = run(&ops);
        let events = g.take_events();
        let mut h = DynamicGraph::new(8);
        for ev in &events {
            h.apply(ev).unwrap();
        }
        let a: Vec<_> = g.snapshot().edges().to_vec();
        let b: Vec<_> = h.snapshot().edges().to_vec();
        prop_assert_eq!(a, b);
        prop_assert_eq!(events.iter().filter(|e| e.kind == ChangeKind::Inserted).count() as u64
            + events.iter().filter(|e| e.kind == ChangeKind::Deleted).count() as u64, g.version());
    }

    #[test]
    fn weight_bounds_match_full_scan(ops in ops()) {
        let g = run(&ops);
        let hi = g.edges().map(|e| e.weight).fold(None, |a: Option<f64>, w| Some(a.map_or(w, |x| x.max(w))));
        let lo = g.edges().map(|e| e.weight).fold(None, |a: Option<f64>, w| Some(a.map_or(w, |x| x.min(w))));
        prop_assert_eq!(g.max_weight(), hi);
        prop_assert_eq!(g.min_weight(), lo);
    }

    #[test]
    fn adjacency_matches_edge_scan(ops in ops()) {
        let g = run(&ops);
        for v in 0..8 {
            let scan = g.edges().filter(|e| e.u == v || e.v == v).count();
            prop_assert_eq!(g.degree(v), scan);
        }
    }

    #[test]
    fn snapshot_replays_to_isomorphic_graph(ops in ops()) {
        let g = run(&ops);
        let view = g.snapshot();
        let copy = view.to_dynamic();
        prop_assert_eq!(copy.snapshot().edges().to_vec(), view.edges().to_vec());
    }
}
