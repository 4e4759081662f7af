mod common;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use vsparse::framework::VertexSparsifier;
use vsparse::graph::GraphView;
use vsparse::oracle::{dijkstra, exact_distance};
use vsparse::tz::*;

fn check_stretch(g: &GraphView, r: usize, terminals: &[usize]) -> usize {
    let mut ivs = TzIvs::preprocess(g, r);
    for &t in terminals {
        ivs.add_terminal(t);
    }
    let h = ivs.graph().snapshot();
    let alpha = (2 * r - 1) as f64;
    let mut bad = 0;
    for &a in terminals {
        let dg = dijkstra(g, a);
        let dh = dijkstra(&h, a);
        for &b in terminals {
            let ok = dh[b] >= dg[b] * (1.0 - 1e-9) && dh[b] <= alpha * dg[b] * (1.0 + 1e-9);
            bad += usize::from(!ok);
        }
    }
    bad
}

#[test]
fn stretch_on_random_graphs() {
    for (i, &(n, r)) in [(60, 2), (100, 3), (80, 1)].iter().enumerate() {
        let g = common::connected(n, 3 * n, i as u64, 20.0, false);
        let mut ts: Vec<usize> = (0..n).collect();
        ts.shuffle(&mut common::rng(i as u64 + 100));
        assert_eq!(check_stretch(&g, r, &ts[..10]), 0);
    }
}

#[test]
fn bunches_on_trees_use_tree_paths() {
    let g = common::connected(40, 39, 7, 5.0, false);
    let ivs = TzIvs::preprocess(&g, 2);
    for v in 0..40 {
        let d = dijkstra(&g, v);
        for (&w, &x) in ivs.bunch(v) {
            assert!((x - d[w]).abs() < 1e-9);
        }
    }
}

#[test]
fn hierarchy_sizes_and_bunch_bound() {
    for (n, r) in [(100, 3), (60, 2), (150, 2)] {
        let g = common::connected(n, 4 * n, n as u64, 10.0, false);
        let ivs = TzIvs::preprocess(&g, r);
        let h = ivs.hierarchy();
        for (i, a) in h.sets.iter().enumerate() {
            let cap = (n as f64).powf(1.0 - i as f64 / r as f64);
            assert!(a.len() as f64 <= cap + 1e-9, "|A_{i}| = {} > {cap}", a.len());
        }
        let nf = n as f64;
        let bound = 2.0 * r as f64 * nf.powf(1.0 / r as f64) * (1.0 + nf.ln());
        assert!(ivs.max_bunch() as f64 <= bound);
    }
}

#[test]
fn containment_in_nearest_sources() {
    let g = common::connected(80, 240, 3, 10.0, false);
    let h = det_hierarchy(&g, 3);
    let b = compute_bunches(&g, &h);
    for i in 0..h.r() {
        if h.sets[i].is_empty() {
            continue;
        }
        let q = h.q.min(h.sets[i].len());
        let near = source_detection(&g, &h.sets[i], q).unwrap();
        for v in 0..80 {
            for (w, &d) in &b[v] {
                let in_level = h.sets[i].contains(w) && !h.sets[i + 1].contains(w);
                if in_level && d < h.dist[i + 1][v] {
                    assert!(near[v].iter().any(|&(_, s)| s == *w));
                }
            }
        }
    }
}

#[test]
fn deterministic_rebuilds() {
    let g = common::connected(70, 200, 11, 10.0, false);
    let a = TzIvs::preprocess(&g, 2);
    let b = TzIvs::preprocess(&g, 2);
    assert_eq!(a.hierarchy(), b.hierarchy());
    for v in 0..70 {
        assert_eq!(a.bunch(v), b.bunch(v));
    }
}

#[test]
fn recourse_is_bunch_size() {
    let g = common::connected(50, 150, 5, 10.0, false);
    let mut ivs = TzIvs::preprocess(&g, 2);
    for v in 0..50 {
        let added = ivs.add_terminal(v).len();
        assert!(added <= ivs.bunch(v).len());
    }
}

#[test]
fn source_detection_matches_dijkstra() {
    let g = common::connected(40, 100, 2, 10.0, false);
    let sources = [3, 9, 17, 22, 31];
    let lists = source_detection(&g, &sources, 5).unwrap();
    let dists: Vec<Vec<f64>> = sources.iter().map(|&s| dijkstra(&g, s)).collect();
    for v in 0..40 {
        for &(d, s) in &lists[v] {
            let k = sources.iter().position(|&x| x == s).unwrap();
            assert!((d - dists[k][v]).abs() < 1e-9);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn stretch_holds_for_any_terminals(seed in 0u64..1000, r in 1usize..4, k in 2usize..12) {
        let g = common::connected(30, 70, seed, 8.0, false);
        let mut ts: Vec<usize> = (0..30).collect();
        ts.shuffle(&mut common::rng(seed ^ 0xabc));
        prop_assert_eq!(check_stretch(&g, r, &ts[..k]), 0);
    }

    #[test]
    fn hitting_set_hits_everything(seed in 0u64..1000, sets in 1usize..20) {
        use rand::Rng;
        let mut rng = common::rng(seed);
        let u: Vec<usize> = (0..30).collect();
        let s = 4;
        let family: Vec<Vec<usize>> = (0..sets)
            .map(|_| {
                let mut x = u.clone();
                x.shuffle(&mut rng);
                x.truncate(s + rng.gen_range(0..3));
                x
            })
            .collect();
        let t = greedy_hitting_set(&u, &family, s).unwrap();
        for set in &family {
            prop_assert!(set.iter().any(|x| t.contains(x)));
        }
        let bound = (u.len() as f64 / s as f64) * (1.0 + (family.len() as f64).ln());
        prop_assert!(t.len() as f64 <= bound + 1.0);
    }
}

#[test]
fn exact_distance_for_r1() {
    let g = common::connected(30, 60, 1, 10.0, false);
    let mut ivs = TzIvs::preprocess(&g, 1);
    ivs.add_terminal(0);
    ivs.add_terminal(29);
    assert!((exact_distance(&ivs.graph().snapshot(), 0, 29) - exact_distance(&g, 0, 29)).abs() < 1e-9);
}

#[test]
fn hierarchy_keeps_query_endpoints_through_rebuilds() {
    use vsparse::framework::{DistanceProperty, Hierarchy, HierarchyConfig};
    use vsparse::graph::DynamicGraph;
    use vsparse::trace::{Event, GraphKind};

    let ev = common::gen_events(GraphKind::RandomGnm, 100, 150, 200, 0.2, true, 200);
    let split = ev.iter().position(|e| !matches!(e, Event::Insert(_))).unwrap();
    let mut g0 = DynamicGraph::new(100);
    for e in &ev[..split] {
        if let Event::Insert(r) = e {
            g0.insert_with_id(*r).unwrap();
        }
    }
    let cfg = HierarchyConfig::incremental(ev.len(), 2);
    let mut h = Hierarchy::build(g0, cfg, TzFactory { r: 2 }, DistanceProperty).unwrap();
    for e in &ev[split..] {
        match *e {
            Event::Insert(r) => {
                h.insert(r.u, r.v, r.weight).unwrap();
            }
            Event::Query(s, t) => {
                let d = exact_distance(&h.input().snapshot(), s, t);
                let a = h.query(s, t).unwrap();
                assert!(a >= d * (1.0 - 1e-9) && a <= 9.0 * d * (1.0 + 1e-9), "{a} vs {d}");
                for l in 1..=2 {
                    assert!(h.level(l).ds.is_terminal(s) && h.level(l).ds.is_terminal(t));
                }
            }
            Event::Delete(_) => unreachable!(),
        }
    }
    assert!(h.stats().rebuilds[2] > 1);
}
