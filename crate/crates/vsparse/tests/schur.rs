mod common;

use common::{connected, gen_events, rng};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;
use vsparse::graph::GraphView;
use vsparse::oracle::{exact_effective_resistance, ResistanceOracle};
use vsparse::schur::{ErConfig, LevelParams, SchurChain, SchurLevel};
use vsparse::trace::{Event, GraphKind};

fn within(est: f64, exact: f64, factor: f64) -> bool {
    est <= factor * exact && est >= exact / factor
}

#[test]
fn level_queries_after_added_terminals() {
    let eps = 0.5;
    let g = connected(80, 240, 3, 4.0, false);
    let oracle = ResistanceOracle::new(&g);
    let mut lvl = SchurLevel::build(g.to_dynamic(), &[], LevelParams::new(80, 0.03, eps, 9));
    let mut r = rng(4);
    let mut vs: Vec<usize> = (0..80).collect();
    vs.shuffle(&mut r);
    for &v in &vs[..10] {
        lvl.add_terminal(v);
    }
    let c = lvl.terminals();
    assert!(c.len() < 80, "level kept every vertex");
    let h = lvl.graph().snapshot();
    let ho = ResistanceOracle::new(&h);
    let mut good = 0;
    for _ in 0..30 {
        let a = *c.choose(&mut r).unwrap();
        let b = *c.iter().filter(|&&x| x != a).collect::<Vec<_>>().choose(&mut r).unwrap();
        let est = ho.query(a, *b).unwrap_or(f64::INFINITY);
        if within(est, oracle.query(a, *b).unwrap(), 1.0 + 2.0 * eps) {
            good += 1;
        }
    }
    assert!(good >= 27, "{good} of 30");
}

#[test]
fn occurrence_cap_after_promotion() {
    for seed in 0..3 {
        let g = connected(60, 180, seed, 3.0, false);
        let lvl = SchurLevel::build(g.to_dynamic(), &[], LevelParams::new(60, 0.05, 0.5, seed));
        let occ = lvl.occurrences();
        let cap = lvl.stats().promotion_threshold;
        for v in 0..60 {
            if !lvl.is_terminal(v) {
                assert!(occ[v] <= cap, "vertex {v}: {} > {cap}", occ[v]);
            }
        }
    }
}

#[test]
fn series_law_on_sampled_walks() {
    let g = connected(40, 100, 2, 5.0, false);
    let lvl = SchurLevel::build(g.to_dynamic(), &[0, 1], LevelParams::new(40, 0.05, 0.5, 2));
    for w in lvl.walks().iter().take(500) {
        let (verts, prefix) = w.path();
        assert_eq!(verts.len(), prefix.len());
        let total = prefix[prefix.len() - 1];
        for i in 0..verts.len() {
            let (a, b) = w.split_at(i);
            assert!((a + b - total).abs() <= 1e-12 * total.max(1.0));
        }
    }
}

#[test]
fn path_weight_is_unbiased_over_seeds() {
    let g = GraphView::from_triples(3, &[(0, 1, 1.0), (1, 2, 1.0)]);
    let samples: Vec<f64> = (0..64)
        .map(|seed| {
            let mut p = LevelParams::new(3, 1e-9, 0.5, seed);
            p.walks = 4;
            let lvl = SchurLevel::build(g.to_dynamic(), &[0, 2], p);
            lvl.graph().edges().map(|e| e.weight).sum::<f64>()
        })
        .collect();
    let mean = samples.iter().sum::<f64>() / 64.0;
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 63.0;
    let se = (var / 64.0).sqrt();
    assert!((mean - 0.5).abs() <= 3.0 * se, "mean {mean} se {se}");
}

#[test]
fn sampled_level_is_deterministic() {
    let g = connected(50, 150, 8, 3.0, false);
    let build = || {
        let l = SchurLevel::build(g.to_dynamic(), &[3], LevelParams::new(50, 0.1, 0.5, 77));
        l.graph().edges().map(|e| (e.u, e.v, e.weight.to_bits())).collect::<Vec<_>>()
    };
    assert_eq!(build(), build());
}

#[test]
fn chain_depth_one_accuracy() {
    let eps = 0.25;
    for seed in 0..2 {
        let g = connected(100, 300, seed, 10.0, false);
        let oracle = ResistanceOracle::new(&g);
        let mut cfg = ErConfig::new(1, eps, seed);
        cfg.beta = Some(0.05);
        let mut c = SchurChain::new(g.to_dynamic(), cfg).unwrap();
        let mut r = rng(seed + 50);
        let mut good = 0;
        for _ in 0..50 {
            let s = r.gen_range(0..100);
            let t = (s + r.gen_range(1..100)) % 100;
            let est = c.query(s, t).unwrap();
            if within(est, oracle.query(s, t).unwrap(), (1.0 + 2.0 * eps) * (1.0 + eps / 10.0)) {
                good += 1;
            }
        }
        assert!(good >= 45, "seed {seed}: {good} of 50");
    }
}

#[test]
fn exact_levels_match_the_oracle() {
    let g = connected(60, 150, 5, 6.0, false);
    let mut cfg = ErConfig::new(2, 0.5, 1);
    cfg.exact = true;
    cfg.beta = Some(0.1);
    cfg.tol = Some(1e-12);
    let mut c = SchurChain::new(g.to_dynamic(), cfg).unwrap();
    let mut r = rng(6);
    for _ in 0..20 {
        let s = r.gen_range(0..60);
        let t = (s + r.gen_range(1..60)) % 60;
        let exact = exact_effective_resistance(&c.graph().snapshot(), s, t).unwrap();
        let est = c.query(s, t).unwrap();
        assert!((est - exact).abs() <= 1e-6 * exact, "{est} vs {exact}");
    }
}

#[test]
fn chain_trace_replay() {
    let eps = 0.5;
    let events = gen_events(GraphKind::RandomGnm, 80, 200, 300, 0.15, false, 14);
    let mut g0 = vsparse::graph::DynamicGraph::unbounded(80);
    let mut split = 0;
    for (i, ev) in events.iter().enumerate() {
        match *ev {
            Event::Insert(e) if g0.m() < 200 => {
                g0.insert_with_id(e).unwrap();
            }
            _ => {
                split = i;
                break;
            }
        }
    }
    let mut cfg = ErConfig::new(1, eps, 3);
    cfg.beta = Some(0.03);
    let mut c = SchurChain::new(g0, cfg).unwrap();
    let (mut total, mut good) = (0, 0);
    for ev in &events[split..] {
        match *ev {
            Event::Insert(e) => {
                let got = c.insert(e.u, e.v, e.weight).unwrap();
                assert_eq!(got.id, e.id);
            }
            Event::Delete(e) => {
                c.delete(e.id).unwrap();
            }
            Event::Query(s, t) if s != t => {
                let Ok(exact) = exact_effective_resistance(&c.graph().snapshot(), s, t) else {
                    assert!(c.query(s, t).is_err());
                    continue;
                };
                total += 1;
                if within(c.query(s, t).unwrap(), exact, 1.0 + 2.0 * eps) {
                    good += 1;
                }
            }
            Event::Query(..) => {}
        }
    }
    assert!(total >= 20, "{total} queries");
    assert!(good * 10 >= 9 * total, "{good} of {total}");
    assert!(c.stats().rebuilds[0] > 1);
}

#[test]
fn rebuild_keeps_answers_sound() {
    let g = connected(60, 150, 21, 4.0, false);
    let mut cfg = ErConfig::new(1, 0.5, 8);
    cfg.beta = Some(0.02);
    let mut c = SchurChain::new(g.to_dynamic(), cfg).unwrap();
    let threshold = c.levels()[0].threshold();
    let mut r = rng(22);
    for _ in 0..threshold {
        let (u, v) = (r.gen_range(0..60), r.gen_range(0..60));
        if u != v {
            c.insert(u, v, 1.0).unwrap();
        } else {
            c.insert(u, (u + 1) % 60, 1.0).unwrap();
        }
    }
    assert_eq!(c.stats().rebuilds[0], 2);
    let mut good = 0;
    for _ in 0..20 {
        let s = r.gen_range(0..60);
        let t = (s + 1 + r.gen_range(0..59)) % 60;
        let exact = exact_effective_resistance(&c.graph().snapshot(), s, t).unwrap();
        if within(c.query(s, t).unwrap(), exact, 2.0) {
            good += 1;
        }
    }
    assert!(good >= 18, "{good} of 20");
}

#[test]
fn depth_two_cascade() {
    let g = connected(60, 150, 4, 4.0, false);
    let mut cfg = ErConfig::new(2, 0.5, 2);
    cfg.beta = Some(0.2);
    let mut c = SchurChain::new(g.to_dynamic(), cfg).unwrap();
    assert_eq!(c.stats().rebuilds, vec![1, 1]);
    let t0 = c.levels()[0].threshold();
    for i in 0..t0 {
        c.insert(i % 60, (i + 7) % 60, 1.0).unwrap();
    }
    let st = c.stats();
    assert!(st.rebuilds[0] >= 2);
    assert!(st.rebuilds[1] >= st.rebuilds[0]);
    // nesting: deeper terminals are terminals above
    let c1 = c.levels()[0].terminals();
    for v in c.levels()[1].terminals() {
        assert!(c1.binary_search(&v).is_ok());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn all_terminal_levels_are_exact(seed in 0u64..1000) {
        let g = connected(12, 25, seed, 5.0, false);
        let all: Vec<usize> = (0..12).collect();
        let lvl = SchurLevel::build(g.to_dynamic(), &all, LevelParams::new(12, 0.5, 0.5, seed));
        let h = lvl.graph().snapshot();
        let (a, b) = ((seed % 12) as usize, ((seed / 12) % 11 + 1) as usize);
        let b = (a + b) % 12;
        let x = exact_effective_resistance(&g, a, b).unwrap();
        let y = exact_effective_resistance(&h, a, b).unwrap();
        prop_assert!((x - y).abs() <= 1e-9 * x);
    }
}
