mod common;

use proptest::prelude::*;
use vsparse::framework::{DistanceProperty, MinCutProperty};
use vsparse::graph::GraphView;
use vsparse::offline::*;
use vsparse::oracle::{exact_distance, exact_min_cut};
use vsparse::trace::{Event, GraphKind};

fn mincut(g: &GraphView, s: usize, t: usize) -> f64 {
    exact_min_cut(g, s, t).unwrap().value
}

#[test]
fn identity_plugin_is_exact() {
    for (levels, seed) in [(1, 1), (2, 2), (2, 3)] {
        let ev = common::gen_events(GraphKind::RandomGnm, 30, 60, 1000, 0.2, false, seed);
        let betas = default_betas(ev.len(), levels, None);
        let got = solve_offline(30, &ev, &betas, &IdentityPlugin, &DistanceProperty).unwrap();
        let want = common::replay_answers(30, &ev, exact_distance);
        assert_eq!(got.answers, want);
    }
}

#[test]
fn identity_plugin_exact_for_cuts() {
    let ev = common::gen_events(GraphKind::CycleChords, 20, 30, 400, 0.2, false, 9);
    let betas = default_betas(ev.len(), 2, None);
    let got = solve_offline(20, &ev, &betas, &IdentityPlugin, &MinCutProperty).unwrap();
    assert_eq!(got.answers, common::replay_answers(20, &ev, mincut));
}

#[test]
fn distance_plugin_sandwich() {
    for (r, seed) in [(1, 4), (2, 5)] {
        let ev = common::gen_events(GraphKind::RandomGnm, 40, 80, 1000, 0.15, false, seed);
        let betas = default_betas(ev.len(), 1, None);
        let got = solve_offline(40, &ev, &betas, &DistancePlugin { r }, &DistanceProperty).unwrap();
        let want = common::replay_answers(40, &ev, exact_distance);
        let a = ((2 * r - 1) * (2 * r - 1)) as f64;
        for (x, d) in got.answers.iter().zip(&want) {
            assert!(*x >= d * (1.0 - 1e-9) && *x <= a * d * (1.0 + 1e-9), "{x} vs {d}");
        }
    }
}

#[test]
fn two_level_r1_distance_is_exact() {
    let ev = common::gen_events(GraphKind::RandomGnm, 25, 50, 300, 0.2, false, 8);
    let betas = default_betas(ev.len(), 2, None);
    let got = solve_offline(25, &ev, &betas, &DistancePlugin { r: 1 }, &DistanceProperty).unwrap();
    let want = common::replay_answers(25, &ev, exact_distance);
    for (x, d) in got.answers.iter().zip(&want) {
        assert!((x - d).abs() <= 1e-9 * d.max(1.0));
    }
}

#[test]
fn flow_plugin_lower_bounds() {
    let ev = common::gen_events(GraphKind::RandomGnm, 30, 60, 500, 0.15, false, 6);
    let betas = default_betas(ev.len(), 1, None);
    let got = solve_offline(30, &ev, &betas, &FlowPlugin, &MinCutProperty).unwrap();
    let want = common::replay_answers(30, &ev, mincut);
    let q = got.quality;
    for (x, opt) in got.answers.iter().zip(&want) {
        assert!(*x <= opt * (1.0 + 1e-9) + 1e-9, "{x} > {opt}");
        assert!(*x >= opt / (q * q) * (1.0 - 1e-9) - 1e-9);
    }
}

#[test]
fn queries_on_static_graph_are_constant() {
    let mut ev: Vec<Event> = common::gen_events(GraphKind::Path, 6, 0, 0, 0.0, false, 0);
    ev.extend((0..20).map(|_| Event::Query(0, 5)));
    let got = solve_offline(6, &ev, &[5], &DistancePlugin { r: 2 }, &DistanceProperty).unwrap();
    assert!(got.answers.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn leaf_intervals_partition_time() {
    let ev = common::gen_events(GraphKind::RandomGnm, 20, 40, 200, 0.2, false, 1);
    let seq = EventSequence::new(20, &ev).unwrap();
    let t = build_decomposition_tree(&seq, &default_betas(ev.len(), 2, None)).unwrap();
    let mut next = 1;
    for id in t.leaves() {
        assert_eq!(t.nodes[id].start, next);
        next = t.nodes[id].end + 1;
    }
    assert_eq!(next, t.betas[0] + 1);
    for node in &t.nodes {
        if let Some(p) = node.parent {
            assert!(node.new_perm.len() <= t.nodes[p].non_perm.len());
        }
    }
}

fn random_star(leaves: usize, seed: u64) -> CutTree {
    use rand::Rng;
    let mut rng = common::rng(seed);
    let triples: Vec<_> = (1..=leaves).map(|v| (0, v, rng.gen_range(1.0..10.0))).collect();
    // a star graph: its cut tree is a root with one leaf per vertex
    let g = GraphView::from_triples(leaves + 1, &triples);
    build_cut_tree(&g)
}

#[test]
fn binarized_star_keeps_leaf_root_cuts() {
    use rand::Rng;
    let mut rng = common::rng(3);
    let weights: Vec<f64> = (0..20).map(|_| rng.gen_range(1.0..10.0)).collect();
    // raw star with one root and twenty leaves
    let mut raw = random_star(1, 0);
    raw.parent.truncate(1);
    raw.weight.truncate(1);
    raw.children = vec![Vec::new()];
    raw.vertex = vec![None];
    raw.leaf = vec![usize::MAX; 20];
    for (v, &w) in weights.iter().enumerate() {
        raw.parent.push(Some(0));
        raw.weight.push(w);
        raw.children.push(Vec::new());
        raw.vertex.push(Some(v));
        raw.children[0].push(v + 1);
        raw.leaf[v] = v + 1;
    }
    let b = binarize_tree(&raw);
    assert!(b.max_degree() <= 3);
    let before = raw.as_graph();
    let after = b.as_graph();
    for v in 0..20 {
        let x = mincut(&before, raw.leaf[v], 0);
        let y = mincut(&after, b.leaf[v], 0);
        assert!((x - y).abs() < 1e-9);
    }
}

#[test]
fn tree_cuts_dominate_graph_cuts() {
    let g = common::connected(24, 60, 12, 5.0, true);
    let t = binarize_tree(&build_cut_tree(&g));
    let tg = t.as_graph();
    assert!(t.max_degree() <= 3);
    for s in 0..6 {
        for u in 18..24 {
            assert!(mincut(&tg, t.leaf[s], t.leaf[u]) >= mincut(&g, s, u) - 1e-9);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn root_path_union_keeps_pair_cuts(seed in 0u64..500, k in 2usize..6) {
        let g = common::connected(12, 24, seed, 6.0, true);
        let t = binarize_tree(&build_cut_tree(&g));
        let terminals: Vec<usize> = (0..k).map(|i| i * 2).collect();
        let h = flow_vertex_sparsify(&t, &terminals).unwrap();
        let full = t.as_graph();
        for &a in &terminals {
            for &b in &terminals {
                if a < b {
                    let x = mincut(&h, a, b);
                    let y = mincut(&full, t.leaf[a], t.leaf[b]);
                    prop_assert!((x - y).abs() < 1e-9);
                }
            }
        }
    }
}
