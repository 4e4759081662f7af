//! Trace replay against any of the dynamic structures, with optional
//! oracle checking, CSV and text reports, and a timing sweep.

use std::fmt::Write as _;
use std::str::FromStr;
use std::time::Instant;

use thiserror::Error;

use crate::framework::{DistanceProperty, Hierarchy, HierarchyConfig, MinCutProperty, Property, ResistanceProperty};
use crate::graph::{DynamicGraph, EdgeRecord, GraphView, VertexId};
use crate::jtree::{DynamicMinCut, MinCutConfig, SampleMode};
use crate::metric::{ApspConfig, DynamicApsp};
use crate::offline::{default_betas, solve_offline, DistancePlugin, FlowPlugin, IdentityPlugin};
use crate::oracle::exact_effective_resistance;
use crate::schur::{ErConfig, SchurChain, SchurError};
use crate::trace::{gen_trace, resolve, Event, GenConfig, GraphKind, Trace, TraceError, WeightMode};
use crate::tz::TzFactory;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunMode {
    Incremental,
    Offline,
    MincutOblivious,
    MincutAdaptive,
    Apsp,
    Er,
}

impl RunMode {
    pub const ALL: [RunMode; 6] =
        [RunMode::Incremental, RunMode::Offline, RunMode::MincutOblivious, RunMode::MincutAdaptive, RunMode::Apsp, RunMode::Er];

    pub fn as_str(self) -> &'static str {
        match self {
            RunMode::Incremental => "incremental",
            RunMode::Offline => "offline",
            RunMode::MincutOblivious => "mincut-oblivious",
            RunMode::MincutAdaptive => "mincut-adaptive",
            RunMode::Apsp => "apsp",
            RunMode::Er => "er",
        }
    }

    /// Weight interpretation the mode expects, if it is fixed.
    pub fn weight_mode(self, plugin: PluginKind) -> Option<WeightMode> {
        match self {
            RunMode::Incremental | RunMode::Apsp => Some(WeightMode::Length),
            RunMode::MincutOblivious | RunMode::MincutAdaptive => Some(WeightMode::Capacity),
            RunMode::Er => Some(WeightMode::Conductance),
            RunMode::Offline => match plugin {
                PluginKind::Identity => None,
                PluginKind::Distance => Some(WeightMode::Length),
                PluginKind::Flow => Some(WeightMode::Capacity),
            },
        }
    }
}

impl FromStr for RunMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        RunMode::ALL.into_iter().find(|m| m.as_str() == s).ok_or_else(|| format!("unknown mode `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PluginKind {
    #[default]
    Identity,
    Distance,
    Flow,
}

impl FromStr for PluginKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "identity" => Ok(PluginKind::Identity),
            "distance" => Ok(PluginKind::Distance),
            "flow" => Ok(PluginKind::Flow),
            _ => Err(format!("unknown plugin `{s}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mode: RunMode,
    pub seed: u64,
    /// Hierarchy or decomposition-tree depth.
    pub levels: usize,
    pub r: usize,
    pub j: Option<usize>,
    pub k: Option<usize>,
    pub epsilon: f64,
    pub depth: usize,
    pub beta: Option<f64>,
    pub plugin: PluginKind,
    pub oracle_check: bool,
    pub emit_cut: bool,
}

impl RunConfig {
    pub fn new(mode: RunMode) -> Self {
        RunConfig {
            mode,
            seed: 0,
            levels: 2,
            r: 2,
            j: None,
            k: None,
            epsilon: 0.5,
            depth: 1,
            beta: None,
            plugin: PluginKind::Identity,
            oracle_check: false,
            emit_cut: false,
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: &str| Err(HarnessError::Config(m.to_string()));
        if self.r == 0 {
            return bad("r must be at least 1");
        }
        if self.levels == 0 && matches!(self.mode, RunMode::Incremental | RunMode::Offline) {
            return bad("levels must be at least 1");
        }
        if self.j == Some(0) || self.k == Some(0) {
            return bad("j and k must be at least 1");
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return bad("epsilon must lie in (0, 1)");
        }
        if let Some(b) = self.beta {
            if !(b > 0.0 && b < 1.0) {
                return bad("beta must lie in (0, 1)");
            }
        }
        if self.emit_cut && !matches!(self.mode, RunMode::MincutOblivious | RunMode::MincutAdaptive) {
            return bad("cuts are only reported in the min-cut modes");
        }
        Ok(())
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HarnessError {
    #[error(transparent)]
    Trace(#[from] TraceError),
    #[error("mode mismatch: {0}")]
    ModeMismatch(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("query {index}: estimate {estimate} is on the wrong side of the exact value {oracle}")]
    Violation { index: usize, estimate: f64, oracle: f64 },
    #[error("structure failure: {0}")]
    Structure(String),
}

impl HarnessError {
    /// 2 for input and configuration problems, 3 for broken invariants.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Trace(_) | HarnessError::ModeMismatch(_) | HarnessError::Config(_) => 2,
            HarnessError::Violation { .. } | HarnessError::Structure(_) => 3,
        }
    }
}

fn structure(e: impl std::fmt::Display) -> HarnessError {
    HarnessError::Structure(e.to_string())
}

#[derive(Debug, Clone, PartialEq)]
pub struct QueryRecord {
    pub s: VertexId,
    pub t: VertexId,
    pub estimate: f64,
    pub oracle: Option<f64>,
    pub ratio: Option<f64>,
    /// Source side of the witnessing cut.
    pub cut: Option<Vec<VertexId>>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Timing {
    pub build_us: f64,
    pub updates: usize,
    pub update_us: f64,
    pub queries: usize,
    pub query_us: f64,
}

impl Timing {
    pub fn mean_update_us(&self) -> f64 {
        self.update_us / self.updates.max(1) as f64
    }
    /// Update cost with the initial build spread over the updates.
    pub fn amortized_update_us(&self) -> f64 {
        (self.build_us + self.update_us) / self.updates.max(1) as f64
    }
    pub fn mean_query_us(&self) -> f64 {
        self.query_us / self.queries.max(1) as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub mode: RunMode,
    pub queries: Vec<QueryRecord>,
    pub max_ratio: f64,
    pub p95_ratio: f64,
    pub violations: usize,
    pub timing: Timing,
    /// Named counters and certificates reported by the structure.
    pub certificates: Vec<(String, f64)>,
}

fn fmt_value(x: f64) -> String {
    if x.is_infinite() {
        "inf".to_string()
    } else {
        format!("{x:.9}")
    }
}

impl RunReport {
    fn empty(mode: RunMode) -> Self {
        RunReport {
            mode,
            queries: Vec::new(),
            max_ratio: 1.0,
            p95_ratio: 1.0,
            violations: 0,
            timing: Timing::default(),
            certificates: Vec::new(),
        }
    }

    pub fn answers(&self) -> Vec<f64> {
        self.queries.iter().map(|q| q.estimate).collect()
    }

    /// `A <index> <value>` per query, plus `CUT` lines when cuts were kept.
    pub fn answer_lines(&self) -> String {
        let mut out = String::new();
        for (i, q) in self.queries.iter().enumerate() {
            let _ = writeln!(out, "A {i} {}", fmt_value(q.estimate));
            if let Some(c) = &q.cut {
                let _ = write!(out, "CUT {i}");
                for v in c {
                    let _ = write!(out, " {v}");
                }
                out.push('\n');
            }
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,s,t,estimate,oracle,ratio\n");
        let opt = |x: Option<f64>| x.map(fmt_value).unwrap_or_default();
        for (i, q) in self.queries.iter().enumerate() {
            let _ = writeln!(out, "{i},{},{},{},{},{}", q.s, q.t, fmt_value(q.estimate), opt(q.oracle), opt(q.ratio));
        }
        out
    }

    pub fn summary(&self) -> String {
        let t = &self.timing;
        let mut out = String::new();
        let _ = writeln!(out, "mode {}", self.mode.as_str());
        let _ = writeln!(out, "queries {}", self.queries.len());
        let _ = writeln!(out, "checked {}", self.queries.iter().filter(|q| q.oracle.is_some()).count());
        let _ = writeln!(out, "max_ratio {}", fmt_value(self.max_ratio));
        let _ = writeln!(out, "p95_ratio {}", fmt_value(self.p95_ratio));
        let _ = writeln!(out, "violations {}", self.violations);
        let _ = writeln!(out, "build_us {:.1}", t.build_us);
        let _ = writeln!(out, "updates {} mean_update_us {:.3}", t.updates, t.mean_update_us());
        let _ = writeln!(out, "queries_timed {} mean_query_us {:.3}", t.queries, t.mean_query_us());
        for (k, v) in &self.certificates {
            let _ = writeln!(out, "{k} {v}");
        }
        out
    }

    fn cert(&mut self, key: &str, v: impl Into<f64>) {
        self.certificates.push((key.to_string(), v.into()));
    }
}

/// Which way an estimate may err, and how far it is from the truth.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    Above,
    Below,
    Either,
    Exact,
}

fn ratio(est: f64, exact: f64, side: Side) -> f64 {
    if est == exact {
        return 1.0;
    }
    let (hi, lo) = match side {
        Side::Above | Side::Exact => (est, exact),
        Side::Below => (exact, est),
        Side::Either => (est.max(exact), est.min(exact)),
    };
    if lo <= 0.0 {
        f64::INFINITY
    } else {
        hi / lo
    }
}

fn violates(est: f64, exact: f64, side: Side) -> bool {
    let tol = 1e-9 * exact.abs().max(1e-12);
    match side {
        Side::Above => est < exact - tol,
        Side::Below => est > exact + tol,
        Side::Exact => !(est == exact || (est - exact).abs() <= tol),
        Side::Either => false,
    }
}

fn oracle_value(mode: WeightMode, g: &GraphView, s: VertexId, t: VertexId) -> f64 {
    match mode {
        WeightMode::Length => DistanceProperty.solve(g, s, t),
        WeightMode::Capacity => MinCutProperty.solve(g, s, t),
        WeightMode::Conductance if s == t => 0.0,
        WeightMode::Conductance => exact_effective_resistance(g, s, t).unwrap_or(f64::INFINITY),
    }
}

/// Per-mode structure behind one replay.
enum Engine {
    Incremental(Box<Hierarchy<TzFactory, DistanceProperty>>),
    MinCut(Box<DynamicMinCut>),
    Apsp(Box<DynamicApsp>),
    Er(Box<SchurChain>),
}

impl Engine {
    fn build(cfg: &RunConfig, g: DynamicGraph, inserts: usize) -> Result<Self, HarnessError> {
        Ok(match cfg.mode {
            RunMode::Incremental => {
                let hc = HierarchyConfig::incremental(inserts.max(1), cfg.levels);
                Engine::Incremental(Box::new(Hierarchy::build(g, hc, TzFactory { r: cfg.r }, DistanceProperty).map_err(structure)?))
            }
            RunMode::MincutOblivious | RunMode::MincutAdaptive => {
                let sm = if cfg.mode == RunMode::MincutOblivious { SampleMode::Oblivious } else { SampleMode::Adaptive };
                let mut mc = MinCutConfig::new(sm, cfg.seed);
                mc.j = cfg.j;
                mc.epsilon = cfg.epsilon;
                Engine::MinCut(Box::new(DynamicMinCut::new(g, mc).map_err(structure)?))
            }
            RunMode::Apsp => {
                let mut ac = ApspConfig::new(cfg.seed);
                ac.j = cfg.j;
                ac.k = cfg.k;
                Engine::Apsp(Box::new(DynamicApsp::new(g, ac).map_err(structure)?))
            }
            RunMode::Er => {
                let mut ec = ErConfig::new(cfg.depth, cfg.epsilon, cfg.seed);
                ec.beta = cfg.beta;
                Engine::Er(Box::new(SchurChain::new(g, ec).map_err(structure)?))
            }
            RunMode::Offline => unreachable!("offline runs do not replay online"),
        })
    }

    fn insert(&mut self, e: EdgeRecord) -> Result<(), HarnessError> {
        let got = match self {
            Engine::Incremental(h) => h.insert(e.u, e.v, e.weight).map_err(structure)?,
            Engine::MinCut(m) => m.insert(e.u, e.v, e.weight).map_err(structure)?,
            Engine::Apsp(a) => a.insert(e.u, e.v, e.weight).map_err(structure)?,
            Engine::Er(c) => c.insert(e.u, e.v, e.weight).map_err(structure)?,
        };
        if got.id != e.id {
            return Err(HarnessError::Structure(format!("edge id drift: expected {}, got {}", e.id, got.id)));
        }
        Ok(())
    }

    fn delete(&mut self, e: EdgeRecord) -> Result<(), HarnessError> {
        match self {
            Engine::Incremental(h) => h.delete(e.id).map(|_| ()).map_err(structure),
            Engine::MinCut(m) => m.delete(e.id).map(|_| ()).map_err(structure),
            Engine::Apsp(a) => a.delete(e.id).map(|_| ()).map_err(structure),
            Engine::Er(c) => c.delete(e.id).map(|_| ()).map_err(structure),
        }
    }

    fn query(&mut self, s: VertexId, t: VertexId, keep_cut: bool) -> Result<(f64, Option<Vec<VertexId>>), HarnessError> {
        Ok(match self {
            Engine::Incremental(h) => (h.query(s, t).map_err(structure)?, None),
            Engine::MinCut(_) if s == t => (f64::INFINITY, keep_cut.then(Vec::new)),
            Engine::MinCut(m) => {
                let a = m.query(s, t).map_err(structure)?;
                let cut = keep_cut.then(|| a.side.iter().enumerate().filter(|x| *x.1).map(|x| x.0).collect());
                (a.value, cut)
            }
            Engine::Apsp(a) => (a.query(s, t), None),
            Engine::Er(c) => match c.query(s, t) {
                Ok(x) => (x, None),
                Err(SchurError::DifferentComponents(..)) => (f64::INFINITY, None),
                Err(e) => return Err(structure(e)),
            },
        })
    }

    fn certificates(&self, rep: &mut RunReport) {
        match self {
            Engine::Incremental(h) => {
                rep.cert("quality", h.quality());
                let st = h.stats();
                rep.cert("rebuilds", st.rebuilds.iter().sum::<usize>() as f64);
                rep.cert("recourse_total", st.emitted.iter().sum::<usize>() as f64);
            }
            Engine::MinCut(m) => {
                let st = m.stats();
                rep.cert("rho_emp", st.rho);
                rep.cert("k", st.k as f64);
                rep.cert("j", st.j as f64);
                rep.cert("rebuilds", st.rebuilds as f64);
                rep.cert("max_core", st.max_core as f64);
                rep.cert("max_window_changes", st.max_window_changes as f64);
                rep.cert("recourse_c0", st.recourse_c0);
            }
            Engine::Apsp(a) => {
                let st = a.stats();
                rep.cert("rho_emp", st.rho);
                rep.cert("alpha_emp", st.alpha);
                rep.cert("lmax", st.lmax);
                rep.cert("k", st.k as f64);
                rep.cert("j", st.j as f64);
                rep.cert("rebuilds", st.rebuilds as f64);
                rep.cert("mwu_iterations", st.iterations as f64);
                rep.cert("max_terminals", st.max_terminals as f64);
                rep.cert("spanner_rebuilds", st.spanner_rebuilds as f64);
            }
            Engine::Er(c) => {
                let st = c.stats();
                rep.cert("beta", c.beta());
                rep.cert("rebuilds", st.rebuilds.iter().sum::<usize>() as f64);
                rep.cert("recourse_total", st.emitted.iter().sum::<usize>() as f64);
                rep.cert("max_terminals", st.max_terminals.iter().copied().max().unwrap_or(0) as f64);
                rep.cert("solver_fallbacks", st.solver_fallbacks as f64);
                rep.cert("max_weight_ratio", st.max_weight_ratio);
            }
        }
    }
}

fn side_for(cfg: &RunConfig) -> Side {
    match cfg.mode {
        RunMode::Er => Side::Either,
        RunMode::Offline => match cfg.plugin {
            PluginKind::Identity => Side::Exact,
            PluginKind::Distance => Side::Above,
            PluginKind::Flow => Side::Below,
        },
        _ => Side::Above,
    }
}

fn check_modes(cfg: &RunConfig, trace: &Trace, events: &[Event]) -> Result<(), HarnessError> {
    if let Some(want) = cfg.mode.weight_mode(cfg.plugin) {
        if want != trace.mode {
            return Err(HarnessError::ModeMismatch(format!(
                "{} expects {} weights, the trace declares {}",
                cfg.mode.as_str(),
                want.as_str(),
                trace.mode.as_str()
            )));
        }
    }
    if cfg.mode == RunMode::Incremental {
        if let Some(i) = events.iter().position(|e| matches!(e, Event::Delete(_))) {
            return Err(HarnessError::ModeMismatch(format!("op {i} deletes an edge in incremental mode")));
        }
    }
    Ok(())
}

fn finish(rep: &mut RunReport) {
    let mut rs: Vec<f64> = rep.queries.iter().filter_map(|q| q.ratio).collect();
    if rs.is_empty() {
        return;
    }
    rs.sort_by(f64::total_cmp);
    rep.max_ratio = *rs.last().expect("non-empty");
    let idx = ((0.95 * rs.len() as f64).ceil() as usize).clamp(1, rs.len()) - 1;
    rep.p95_ratio = rs[idx];
}

/// Replays `trace` under `cfg`. With the oracle check on, the first answer
/// on the wrong side of its exact value aborts the run.
pub fn run_trace(cfg: &RunConfig, trace: &Trace) -> Result<RunReport, HarnessError> {
    cfg.validate()?;
    let events = resolve(trace)?;
    check_modes(cfg, trace, &events)?;
    let mut rep = RunReport::empty(cfg.mode);
    if events.is_empty() {
        return Ok(rep);
    }
    let side = side_for(cfg);
    let mut truth = cfg.oracle_check.then(|| DynamicGraph::new(trace.n));

    let check = |rep: &mut RunReport, truth: &Option<DynamicGraph>, s, t, est: f64| -> Result<(), HarnessError> {
        let index = rep.queries.len();
        let (oracle, r) = match truth {
            Some(g) => {
                let exact = oracle_value(trace.mode, &g.snapshot(), s, t);
                if violates(est, exact, side) {
                    rep.violations += 1;
                    return Err(HarnessError::Violation { index, estimate: est, oracle: exact });
                }
                (Some(exact), Some(ratio(est, exact, side)))
            }
            None => (None, None),
        };
        rep.queries.push(QueryRecord { s, t, estimate: est, oracle, ratio: r, cut: None });
        Ok(())
    };
    let track = |truth: &mut Option<DynamicGraph>, ev: &Event| {
        if let Some(g) = truth {
            match *ev {
                Event::Insert(e) => {
                    g.insert_with_id(e).expect("resolved trace replays");
                }
                Event::Delete(e) => {
                    g.delete_edge(e.id).expect("resolved trace replays");
                }
                Event::Query(..) => {}
            }
        }
    };

    if cfg.mode == RunMode::Offline {
        let betas = default_betas(events.len(), cfg.levels, None);
        let clock = Instant::now();
        let out = match cfg.plugin {
            PluginKind::Identity => match trace.mode {
                WeightMode::Length => solve_offline(trace.n, &events, &betas, &IdentityPlugin, &DistanceProperty),
                WeightMode::Capacity => solve_offline(trace.n, &events, &betas, &IdentityPlugin, &MinCutProperty),
                WeightMode::Conductance => solve_offline(trace.n, &events, &betas, &IdentityPlugin, &ResistanceProperty),
            },
            PluginKind::Distance => solve_offline(trace.n, &events, &betas, &DistancePlugin { r: cfg.r }, &DistanceProperty),
            PluginKind::Flow => solve_offline(trace.n, &events, &betas, &FlowPlugin, &MinCutProperty),
        }
        .map_err(structure)?;
        rep.timing.build_us = clock.elapsed().as_secs_f64() * 1e6;
        let mut answers = out.answers.iter();
        for ev in &events {
            track(&mut truth, ev);
            if let Event::Query(s, t) = *ev {
                let est = *answers.next().ok_or_else(|| structure("offline run dropped an answer"))?;
                check(&mut rep, &truth, s, t, est)?;
            }
        }
        rep.timing.updates = events.iter().filter(|e| e.is_update()).count();
        rep.timing.queries = rep.queries.len();
        rep.cert("quality", out.quality);
        rep.cert("nodes", out.nodes as f64);
        rep.cert("leaf_len", out.leaf_len as f64);
        finish(&mut rep);
        return Ok(rep);
    }

    // the leading run of inserts is loaded as the initial graph
    let split = events.iter().position(|e| !matches!(e, Event::Insert(_))).unwrap_or(events.len());
    let mut g0 = DynamicGraph::new(trace.n);
    for ev in &events[..split] {
        if let Event::Insert(e) = *ev {
            g0.insert_with_id(e).map_err(structure)?;
        }
        track(&mut truth, ev);
    }
    let inserts = events.iter().filter(|e| matches!(e, Event::Insert(_))).count();
    let clock = Instant::now();
    let mut engine = Engine::build(cfg, g0, inserts)?;
    rep.timing.build_us = clock.elapsed().as_secs_f64() * 1e6;

    for ev in &events[split..] {
        let clock = Instant::now();
        match *ev {
            Event::Insert(e) => engine.insert(e)?,
            Event::Delete(e) => engine.delete(e)?,
            Event::Query(s, t) => {
                let (est, cut) = engine.query(s, t, cfg.emit_cut)?;
                rep.timing.query_us += clock.elapsed().as_secs_f64() * 1e6;
                rep.timing.queries += 1;
                check(&mut rep, &truth, s, t, est)?;
                rep.queries.last_mut().expect("just pushed").cut = cut;
                continue;
            }
        }
        rep.timing.update_us += clock.elapsed().as_secs_f64() * 1e6;
        rep.timing.updates += 1;
        track(&mut truth, ev);
    }
    engine.certificates(&mut rep);
    finish(&mut rep);
    Ok(rep)
}

/// Parses `text` and replays it.
pub fn run_trace_text(cfg: &RunConfig, text: &str) -> Result<RunReport, HarnessError> {
    run_trace(cfg, &crate::trace::parse(text)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub size: usize,
    pub mode: RunMode,
    pub update_us: f64,
    pub query_us: f64,
    /// Least-squares log-log slope of update time over this and all smaller sizes.
    pub slope: Option<f64>,
}

/// Slope of the least-squares line through `(ln x, ln y)`.
pub fn loglog_slope(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points.iter().filter(|p| p.0 > 0.0 && p.1 > 0.0).map(|p| (p.0.ln(), p.1.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Workload for one sweep point: `size` edges on `size / 4` vertices and one
/// rebuild window of random operations.
pub fn sweep_trace(mode: RunMode, size: usize, seed: u64) -> Result<Trace, HarnessError> {
    let n = (size / 4).max(16);
    let m = size.max(n);
    let ops = ((m as f64).powf(2.0 / 3.0).ceil() as usize).max(20);
    let mut g = GenConfig::new(GraphKind::RandomGnm, n, m, ops, seed);
    g.insert_only = mode == RunMode::Incremental;
    g.mode = mode.weight_mode(PluginKind::Identity).unwrap_or(WeightMode::Length);
    Ok(gen_trace(&g)?)
}

/// Mean amortized update and query time per size; sizes must ascend.
pub fn scaling_sweep(mode: RunMode, sizes: &[usize], reps: usize, seed: u64) -> Result<Vec<SweepRow>, HarnessError> {
    if sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(HarnessError::Config("sweep sizes must be strictly ascending".into()));
    }
    let reps = reps.max(1);
    let mut rows: Vec<SweepRow> = Vec::with_capacity(sizes.len());
    for &size in sizes {
        let (mut up, mut q) = (0.0, 0.0);
        for rep in 0..reps {
            let trace = sweep_trace(mode, size, seed.wrapping_add(rep as u64))?;
            let mut cfg = RunConfig::new(mode);
            cfg.seed = seed.wrapping_add(rep as u64);
            cfg.levels = if mode == RunMode::Offline { 1 } else { 2 };
            let report = run_trace(&cfg, &trace)?;
            up += report.timing.amortized_update_us();
            q += report.timing.mean_query_us();
        }
        let (update_us, query_us) = (up / reps as f64, q / reps as f64);
        let mut pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.size as f64, r.update_us)).collect();
        pts.push((size as f64, update_us));
        rows.push(SweepRow { size, mode, update_us, query_us, slope: loglog_slope(&pts) });
    }
    Ok(rows)
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("size,mode,update_us,query_us,slope\n");
    for r in rows {
        let slope = r.slope.map(|s| format!("{s:.4}")).unwrap_or_default();
        let _ = writeln!(out, "{},{},{:.3},{:.3},{}", r.size, r.mode.as_str(), r.update_us, r.query_us, slope);
    }
    out
}
