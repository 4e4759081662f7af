mod common;

use common::{connected, gen_events, rng};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;
use vsparse::graph::{DynamicGraph, GraphView};
use vsparse::lsst::{generalized_lsst, lsst, weighted_stretch};
use vsparse::metric::{
    compute_good_j1, measured_alpha, metric_jtree, mwu_metric_decomposition, route1_sparsifier, ApspConfig,
    DistanceCoreSparsifier, DynamicApsp, MetricJTree,
};
use vsparse::oracle::dijkstra;
use vsparse::trace::{Event, GraphKind};

fn lengths(g: &GraphView) -> Vec<f64> {
    g.edges().iter().map(|e| e.weight).collect()
}

/// The subgraph T + F as a plain graph.
fn j_view(g: &GraphView, j: &MetricJTree) -> GraphView {
    let mut keep: Vec<usize> = j.tree.tree_edges.clone();
    keep.extend(&j.f);
    GraphView::new(g.n(), keep.iter().map(|&i| *g.edge(i)).collect())
}

fn check_terminal_bounds(g: &GraphView, j: Option<&GraphView>, sp: &DistanceCoreSparsifier) {
    let h = sp.graph().snapshot();
    let c = sp.terminals();
    for &s in &c {
        let dg = dijkstra(g, s);
        let dh = dijkstra(&h, s);
        let dj = j.map(|j| dijkstra(j, s));
        for &t in &c {
            assert!(dg[t] <= dh[t] + 1e-9, "d_G({s},{t}) = {} > d_H = {}", dg[t], dh[t]);
            if let Some(dj) = &dj {
                assert!(dh[t] <= dj[t] + 1e-9, "d_H({s},{t}) = {} > d_J = {}", dh[t], dj[t]);
            }
        }
    }
}

#[test]
fn generalized_tree_on_tree_input_is_the_tree() {
    let g = connected(25, 24, 4, 6.0, false);
    let mut r = rng(5);
    let w: Vec<f64> = (0..24).map(|_| r.gen_range(0.1..3.0)).collect();
    let t = generalized_lsst(&g, &lengths(&g), &w);
    assert_eq!(t.tree_edges, (0..24).collect::<Vec<_>>());
    let l = lengths(&g);
    assert!((weighted_stretch(&g, &l, &w, &t) - 1.0).abs() < 1e-12);
}

#[test]
fn uniform_importance_matches_plain_tree() {
    // replication is uniform only when lengths are too
    let g = connected(50, 140, 6, 1.0, true);
    let l = lengths(&g);
    let a = generalized_lsst(&g, &l, &vec![2.5; g.m()]);
    let b = lsst(&g, &l);
    assert_eq!(a.tree_edges, b.tree_edges);
}

#[test]
fn heavy_importance_keeps_the_edge_on_a_cycle() {
    let t: Vec<_> = (0..20).map(|v| (v, (v + 1) % 20, 1.0)).collect();
    let g = GraphView::from_triples(20, &t);
    for heavy in [0, 7, 19] {
        let mut w = vec![0.01; 20];
        w[heavy] = 100.0;
        let tree = generalized_lsst(&g, &lengths(&g), &w);
        assert!(tree.is_tree_edge(heavy), "edge {heavy} dropped");
    }
}

#[test]
fn good_j1_certificates_on_random_graphs() {
    for seed in 0..5 {
        let g = connected(60, 150, seed, 10.0, false);
        let alpha = measured_alpha(&g);
        let mut r = rng(seed + 100);
        let w: Vec<f64> = (0..g.m()).map(|_| r.gen_range(0.01..1.0)).collect();
        let k = 8;
        let good = compute_good_j1(&g, k, &w, alpha).unwrap();
        let jt = &good.jtree;
        // subgraph: every edge has stretch at least one
        assert!(jt.stretch.iter().all(|&s| s >= 1.0 - 1e-12));
        assert!(jt.f.iter().all(|&e| !jt.tree.is_tree_edge(e)));
        // volume within twice the measured constant
        assert!(good.volume_ratio <= 2.0 * alpha, "ratio {} alpha {alpha}", good.volume_ratio);
        // enough edges near the top stretch, unless F absorbed everything
        let need = 4.0 * alpha * g.m() as f64 / k as f64;
        let all_kept = jt.f.len() + jt.tree.tree_edges.len() == g.m();
        assert!(all_kept || jt.psi().len() as f64 >= need.min(g.m() as f64) || good.cutoff_failed);
    }
}

#[test]
fn good_j1_on_a_tree_keeps_nothing_extra() {
    let g = connected(20, 19, 2, 4.0, true);
    let good = compute_good_j1(&g, 3, &[1.0; 19], 2.0).unwrap();
    assert!(good.jtree.f.is_empty());
    assert_eq!(good.jtree.psi().len(), 19);
}

#[test]
fn mwu_postconditions_recomputed() {
    for seed in 0..3 {
        let g = connected(60, 150, seed, 10.0, false);
        let k = 10;
        let d = mwu_metric_decomposition(&g, k).unwrap();
        assert!((d.lambda.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        assert!(d.iterations as f64 <= 1.5 * k as f64, "{} iterations", d.iterations);
        let mut x = vec![0.0; g.m()];
        for (l, jt) in d.lambda.iter().zip(&d.members) {
            assert!(jt.stretch.iter().all(|&s| s >= 1.0 - 1e-12));
            for (xe, s) in x.iter_mut().zip(&jt.stretch) {
                *xe += l * s;
            }
        }
        let mx = x.iter().copied().fold(0.0, f64::max);
        let lmax = mx + x.iter().map(|v| (v - mx).exp()).sum::<f64>().ln();
        assert!((lmax - d.lmax).abs() < 1e-9);
        assert!(lmax <= 3.0 * d.alpha, "lmax {lmax} alpha {}", d.alpha);
        assert!(x.iter().sum::<f64>() <= 3.0 * d.alpha * g.m() as f64);
        assert!((mx - d.rho).abs() < 1e-9);
    }
}

#[test]
fn route1_path_and_triangle() {
    let g = GraphView::from_triples(5, &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 4, 1.0)]);
    let j = metric_jtree(&g, lsst(&g, &lengths(&g)), vec![]);
    let sp = route1_sparsifier(&g, &j, &[0, 4]);
    let e: Vec<_> = sp.graph().edges().map(|e| (e.u.min(e.v), e.u.max(e.v), e.weight)).collect();
    assert_eq!(e, vec![(0, 4, 4.0)]);

    let g = GraphView::from_triples(3, &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 5.0)]);
    let tree = lsst(&g, &lengths(&g));
    let off = (0..3).find(|&i| !tree.is_tree_edge(i)).unwrap();
    let j = metric_jtree(&g, tree, vec![off]);
    let sp = route1_sparsifier(&g, &j, &[]);
    let want = g.edge(off);
    assert!(sp.graph().edges().any(|e| e.key() == want.key() && e.weight == want.weight));
}

#[test]
fn route1_bounds_on_random_terminals() {
    for seed in 0..4 {
        let g = connected(50, 130, seed, 9.0, false);
        let d = mwu_metric_decomposition(&g, 12).unwrap();
        let mut r = rng(seed);
        let mut vs: Vec<usize> = (0..50).collect();
        vs.shuffle(&mut r);
        for jt in &d.members {
            let sp = route1_sparsifier(&g, jt, &vs[..8]);
            for &v in &vs[..8] {
                assert!(sp.is_terminal(v));
            }
            check_terminal_bounds(&g, Some(&j_view(&g, jt)), &sp);
        }
    }
}

#[test]
fn add_terminal_grows_skeleton_by_at_most_two() {
    let g = connected(80, 200, 7, 5.0, false);
    let d = mwu_metric_decomposition(&g, 20).unwrap();
    let mut r = rng(8);
    for jt in &d.members {
        let mut sp = route1_sparsifier(&g, jt, &[]);
        for _ in 0..30 {
            let u = r.gen_range(0..80);
            let before = sp.terminals().len();
            let was = sp.is_terminal(u);
            let ch = sp.add_terminal(u);
            let after = sp.terminals().len();
            if was {
                assert!(ch.is_empty());
                assert_eq!(before, after);
            } else {
                assert!(after - before <= 2, "{} new vertices", after - before);
            }
        }
    }
}

#[test]
fn random_updates_keep_the_lower_bound() {
    let g = connected(60, 150, 31, 6.0, false);
    let d = mwu_metric_decomposition(&g, 15).unwrap();
    for (mi, jt) in d.members.iter().enumerate().take(4) {
        let mut live = g.to_dynamic();
        let mut sp = route1_sparsifier(&g, jt, &[0, 59]);
        let mut r = rng(40 + mi as u64);
        for _ in 0..50 {
            match r.gen_range(0..3) {
                0 => {
                    sp.add_terminal(r.gen_range(0..60));
                }
                1 => {
                    let (u, v) = (r.gen_range(0..60), r.gen_range(0..60));
                    if u != v {
                        let rec = live.insert_edge(u, v, r.gen_range(0.5..6.0)).unwrap();
                        sp.insert(rec);
                    }
                }
                _ => {
                    let ids: Vec<_> = live.edges().map(|e| e.id).collect();
                    let id = *ids.choose(&mut r).unwrap();
                    let rec = live.delete_edge(id).unwrap();
                    sp.delete(&rec).unwrap();
                    assert!(sp.delete(&rec).is_err() || sp.is_terminal(rec.u));
                }
            }
            check_terminal_bounds(&live.snapshot(), None, &sp);
        }
    }
}

#[test]
fn apsp_trace_bounds() {
    let events = gen_events(GraphKind::RandomGnm, 60, 150, 200, 0.0, false, 77);
    let mut g0 = DynamicGraph::new(60);
    let mut it = events.iter();
    let mut rest = Vec::new();
    // seed the structure with the initial inserts, then replay the rest
    for ev in it.by_ref() {
        match *ev {
            Event::Insert(e) if g0.m() < 150 => {
                g0.insert_with_id(e).unwrap();
            }
            _ => {
                rest.push(*ev);
                break;
            }
        }
    }
    rest.extend(it.copied());
    let mut a = DynamicApsp::new(g0, ApspConfig::new(5)).unwrap();
    let rho = a.stats().rho;
    let mut r = rng(78);
    let (mut total, mut good) = (0, 0);
    for (i, ev) in rest.iter().enumerate() {
        match *ev {
            Event::Insert(e) => {
                a.insert(e.u, e.v, e.weight).unwrap();
            }
            Event::Delete(e) => {
                let id = a.graph().edges().find(|x| x.key() == e.key() && x.weight == e.weight).unwrap().id;
                a.delete(id).unwrap();
            }
            Event::Query(..) => {}
        }
        if i % 10 == 9 {
            let s = r.gen_range(0..60);
            let t = (s + r.gen_range(1..60)) % 60;
            let truth = dijkstra(&a.graph().snapshot(), s)[t];
            let est = a.query(s, t);
            assert!(est >= truth - 1e-9, "estimate {est} below {truth}");
            total += 1;
            if est <= 4.0 * rho.max(a.stats().rho) * truth + 1e-9 || truth.is_infinite() {
                good += 1;
            }
        }
    }
    assert!(total >= 15);
    assert!(good * 100 >= 95 * total, "{good} of {total} within 4 rho");
}

#[test]
fn apsp_is_deterministic_for_a_seed() {
    let g = connected(40, 100, 12, 5.0, false);
    let run = || {
        let mut a = DynamicApsp::new(g.to_dynamic(), ApspConfig::new(99)).unwrap();
        let mut out = Vec::new();
        for s in 0..10 {
            a.insert(s, 39 - s, 1.5).unwrap();
            out.push(a.query(s, (s * 7 + 3) % 40));
        }
        let trees: Vec<Vec<usize>> = a.members().map(|m| m.tree().tree_edges.clone()).collect();
        (out, trees)
    };
    assert_eq!(run(), run());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn sparsifier_never_shortcuts(seed in 0u64..500, c0 in proptest::collection::vec(0usize..20, 0..6)) {
        let g = connected(20, 40, seed, 5.0, false);
        let tree = lsst(&g, &lengths(&g));
        let f: Vec<usize> = (0..g.m()).filter(|&e| !tree.is_tree_edge(e) && e % 5 == 0).collect();
        let jt = metric_jtree(&g, tree, f);
        let sp = route1_sparsifier(&g, &jt, &c0);
        check_terminal_bounds(&g, Some(&j_view(&g, &jt)), &sp);
    }
}
