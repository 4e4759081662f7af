//! Plain-text event traces.
//!
//! ```text
//! n 5 mode length
//! I 0 1 2.5
//! Q 0 1
//! D 0          # by edge id (insertion order)
//! DUV 0 1      # smallest live id between 0 and 1
//! ```

use std::fmt::Write as _;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::{DynamicGraph, EdgeId, EdgeRecord, GraphError, VertexId};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightMode {
    Capacity,
    Length,
    Conductance,
}

impl WeightMode {
    pub fn as_str(self) -> &'static str {
        match self {
            WeightMode::Capacity => "capacity",
            WeightMode::Length => "length",
            WeightMode::Conductance => "conductance",
        }
    }
}

impl std::str::FromStr for WeightMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "capacity" => Ok(WeightMode::Capacity),
            "length" => Ok(WeightMode::Length),
            "conductance" => Ok(WeightMode::Conductance),
            _ => Err(format!("unknown weight mode `{s}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TraceOp {
    Insert { u: VertexId, v: VertexId, w: f64 },
    Delete(EdgeId),
    DeleteUv(VertexId, VertexId),
    Query(VertexId, VertexId),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub n: usize,
    pub mode: WeightMode,
    pub ops: Vec<TraceOp>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TraceError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("op {index}: {source}")]
    Replay { index: usize, source: GraphError },
    #[error("op {index}: no live edge between {u} and {v}")]
    NoSuchPair { index: usize, u: VertexId, v: VertexId },
    #[error("infeasible parameters: {0}")]
    InfeasibleParameters(String),
}

fn field<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T, TraceError> {
    let t = tok.ok_or_else(|| TraceError::Parse { line, msg: format!("missing {what}") })?;
    t.parse().map_err(|_| TraceError::Parse { line, msg: format!("bad {what} `{t}`") })
}

pub fn parse(text: &str) -> Result<Trace, TraceError> {
    let mut header: Option<(usize, WeightMode)> = None;
    let mut ops = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let mut tok = body.split_whitespace();
        let head = tok.next().expect("non-empty line");
        let Some((n, _)) = header else {
            if head != "n" {
                return Err(TraceError::Parse { line, msg: "expected header `n <N> mode <kind>`".into() });
            }
            let n: usize = field(tok.next(), line, "vertex count")?;
            if tok.next() != Some("mode") {
                return Err(TraceError::Parse { line, msg: "expected `mode` after vertex count".into() });
            }
            let mode = tok
                .next()
                .ok_or_else(|| TraceError::Parse { line, msg: "missing weight mode".into() })?
                .parse()
                .map_err(|msg| TraceError::Parse { line, msg })?;
            header = Some((n, mode));
            continue;
        };
        let vertex = |t: Option<&str>, what: &str| -> Result<VertexId, TraceError> {
            let v: VertexId = field(t, line, what)?;
            if v >= n {
                return Err(TraceError::Parse { line, msg: format!("vertex {v} out of range for n = {n}") });
            }
            Ok(v)
        };
        let op = match head {
            "I" => {
                let u = vertex(tok.next(), "endpoint")?;
                let v = vertex(tok.next(), "endpoint")?;
                let w: f64 = field(tok.next(), line, "weight")?;
                if !(w > 0.0 && w.is_finite()) {
                    return Err(TraceError::Parse { line, msg: format!("weight must be positive, got {w}") });
                }
                TraceOp::Insert { u, v, w }
            }
            "D" => match (tok.next(), tok.next()) {
                (Some(a), None) => TraceOp::Delete(field(Some(a), line, "edge id")?),
                (a, Some(b)) => TraceOp::DeleteUv(vertex(a, "endpoint")?, vertex(Some(b), "endpoint")?),
                (None, None) => return Err(TraceError::Parse { line, msg: "missing edge id".into() }),
            },
            "DUV" => TraceOp::DeleteUv(vertex(tok.next(), "endpoint")?, vertex(tok.next(), "endpoint")?),
            "Q" => TraceOp::Query(vertex(tok.next(), "endpoint")?, vertex(tok.next(), "endpoint")?),
            other => return Err(TraceError::Parse { line, msg: format!("unknown event `{other}`") }),
        };
        if tok.next().is_some() {
            return Err(TraceError::Parse { line, msg: "trailing tokens".into() });
        }
        ops.push(op);
    }
    let (n, mode) = header.ok_or(TraceError::Parse { line: 0, msg: "empty trace has no header".into() })?;
    Ok(Trace { n, mode, ops })
}

pub fn write(t: &Trace) -> String {
    let mut s = format!("n {} mode {}\n", t.n, t.mode.as_str());
    for op in &t.ops {
        match *op {
            TraceOp::Insert { u, v, w } => writeln!(s, "I {u} {v} {w:.6}"),
            TraceOp::Delete(id) => writeln!(s, "D {id}"),
            TraceOp::DeleteUv(u, v) => writeln!(s, "DUV {u} {v}"),
            TraceOp::Query(a, b) => writeln!(s, "Q {a} {b}"),
        }
        .expect("writing to a String cannot fail");
    }
    s
}

/// A trace event with edge identity made explicit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Event {
    Insert(EdgeRecord),
    Delete(EdgeRecord),
    Query(VertexId, VertexId),
}

impl Event {
    pub fn is_update(&self) -> bool {
        !matches!(self, Event::Query(..))
    }
}

/// Replay the trace once to assign edge ids and resolve `DUV` lines.
pub fn resolve(t: &Trace) -> Result<Vec<Event>, TraceError> {
    let mut g = DynamicGraph::new(t.n);
    let mut out = Vec::with_capacity(t.ops.len());
    for (index, op) in t.ops.iter().enumerate() {
        let ev = match *op {
            TraceOp::Insert { u, v, w } => Event::Insert(g.insert_edge(u, v, w).map_err(|source| TraceError::Replay { index, source })?),
            TraceOp::Delete(id) => Event::Delete(g.delete_edge(id).map_err(|source| TraceError::Replay { index, source })?),
            TraceOp::DeleteUv(u, v) => {
                let id = g.find_edge(u, v).ok_or(TraceError::NoSuchPair { index, u, v })?;
                Event::Delete(g.delete_edge(id).map_err(|source| TraceError::Replay { index, source })?)
            }
            TraceOp::Query(a, b) => Event::Query(a, b),
        };
        out.push(ev);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphKind {
    RandomGnm,
    Path,
    Grid,
    CycleChords,
}

impl std::str::FromStr for GraphKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "random-gnm" | "gnm" => Ok(GraphKind::RandomGnm),
            "path" => Ok(GraphKind::Path),
            "grid" => Ok(GraphKind::Grid),
            "cycle-chords" => Ok(GraphKind::CycleChords),
            _ => Err(format!("unknown graph kind `{s}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenConfig {
    pub kind: GraphKind,
    pub n: usize,
    /// Edge count of the initial graph; ignored for path and grid.
    pub m: usize,
    pub ops: usize,
    pub query_rate: f64,
    pub insert_only: bool,
    pub mode: WeightMode,
    pub seed: u64,
}

impl GenConfig {
    pub fn new(kind: GraphKind, n: usize, m: usize, ops: usize, seed: u64) -> Self {
        GenConfig { kind, n, m, ops, query_rate: 0.1, insert_only: false, mode: WeightMode::Length, seed }
    }
}

fn log_uniform(rng: &mut ChaCha8Rng, n: usize) -> f64 {
    let hi = ((n * n).max(2) as f64).ln();
    let w = rng.gen_range(0.0..hi).exp();
    // round to the printed precision so parsing reproduces the same value
    ((w * 1e6).round() / 1e6).max(1.0)
}

fn distinct_pair(rng: &mut ChaCha8Rng, n: usize) -> (VertexId, VertexId) {
    let a = rng.gen_range(0..n);
    let mut b = rng.gen_range(0..n - 1);
    if b >= a {
        b += 1;
    }
    (a, b)
}

fn initial_edges(cfg: &GenConfig, rng: &mut ChaCha8Rng) -> Result<Vec<(VertexId, VertexId)>, TraceError> {
    let n = cfg.n;
    let bad = |msg: String| Err(TraceError::InfeasibleParameters(msg));
    match cfg.kind {
        GraphKind::Path => Ok((1..n).map(|v| (v - 1, v)).collect()),
        GraphKind::Grid => {
            let side = (n as f64).sqrt().round() as usize;
            if side * side != n {
                return bad(format!("grid needs a square vertex count, got {n}"));
            }
            let mut e = Vec::new();
            for r in 0..side {
                for c in 0..side {
                    let v = r * side + c;
                    if c + 1 < side {
                        e.push((v, v + 1));
                    }
                    if r + 1 < side {
                        e.push((v, v + side));
                    }
                }
            }
            Ok(e)
        }
        GraphKind::CycleChords => {
            if n < 3 || cfg.m < n {
                return bad(format!("cycle with chords needs n >= 3 and m >= n, got n = {n}, m = {}", cfg.m));
            }
            let mut e: Vec<_> = (0..n).map(|v| (v, (v + 1) % n)).collect();
            while e.len() < cfg.m {
                e.push(distinct_pair(rng, n));
            }
            Ok(e)
        }
        GraphKind::RandomGnm => {
            if n < 2 || cfg.m + 1 < n {
                return bad(format!("a connected graph on {n} vertices needs m >= n - 1, got {}", cfg.m));
            }
            // random spanning tree first so the graph is connected
            let mut e: Vec<_> = (1..n).map(|v| (rng.gen_range(0..v), v)).collect();
            while e.len() < cfg.m {
                e.push(distinct_pair(rng, n));
            }
            Ok(e)
        }
    }
}

/// Synthetic workload: the initial graph as inserts, then random operations.
pub fn gen_trace(cfg: &GenConfig) -> Result<Trace, TraceError> {
    if cfg.n < 2 {
        return Err(TraceError::InfeasibleParameters(format!("need at least two vertices, got {}", cfg.n)));
    }
    if !(0.0..=1.0).contains(&cfg.query_rate) {
        return Err(TraceError::InfeasibleParameters(format!("query rate {} outside [0, 1]", cfg.query_rate)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let n = cfg.n;
    let mut ops = Vec::new();
    let mut live: Vec<EdgeId> = Vec::new();
    let mut next_id = 0;
    for (u, v) in initial_edges(cfg, &mut rng)? {
        ops.push(TraceOp::Insert { u, v, w: log_uniform(&mut rng, n) });
        live.push(next_id);
        next_id += 1;
    }
    for _ in 0..cfg.ops {
        if rng.gen_bool(cfg.query_rate) {
            let (a, b) = distinct_pair(&mut rng, n);
            ops.push(TraceOp::Query(a, b));
        } else if cfg.insert_only || live.is_empty() || rng.gen_bool(0.5) {
            let (u, v) = distinct_pair(&mut rng, n);
            ops.push(TraceOp::Insert { u, v, w: log_uniform(&mut rng, n) });
            live.push(next_id);
            next_id += 1;
        } else {
            let id = live.swap_remove(rng.gen_range(0..live.len()));
            ops.push(TraceOp::Delete(id));
        }
    }
    Ok(Trace { n, mode: cfg.mode, ops })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_roundtrip() {
        let text = "# demo\nn 4 mode capacity\n\nI 0 1 2.5\nI 1 2 1\nQ 0 2\nD 0\nDUV 1 2\n";
        let t = parse(text).unwrap();
        assert_eq!(t.n, 4);
        assert_eq!(t.ops.len(), 5);
        assert_eq!(parse(&write(&t)).unwrap(), t);
    }

    #[test]
    fn d_with_two_endpoints_is_duv() {
        let t = parse("n 3 mode length\nI 0 1 1\nD 1 0\n").unwrap();
        assert_eq!(t.ops[1], TraceOp::DeleteUv(1, 0));
    }

    #[test]
    fn parse_errors_carry_line() {
        let e = parse("n 3 mode length\nI 0 5 1\n").unwrap_err();
        assert!(matches!(e, TraceError::Parse { line: 2, .. }));
        assert!(matches!(parse("I 0 1 1\n"), Err(TraceError::Parse { line: 1, .. })));
        assert!(matches!(parse("n 3 mode x\n"), Err(TraceError::Parse { line: 1, .. })));
    }

    #[test]
    fn resolve_picks_smallest_live_id() {
        let t = parse("n 3 mode length\nI 0 1 1\nI 1 0 2\nDUV 0 1\nD 0\n").unwrap();
        let err = resolve(&t).unwrap_err();
        assert!(matches!(err, TraceError::Replay { index: 3, .. }));
        let ev = resolve(&parse("n 3 mode length\nI 0 1 1\nI 1 0 2\nDUV 0 1\n").unwrap()).unwrap();
        assert!(matches!(ev[2], Event::Delete(e) if e.id == 0));
    }

    #[test]
    fn gen_path_and_determinism() {
        let cfg = GenConfig::new(GraphKind::Path, 5, 0, 0, 1);
        let t = gen_trace(&cfg).unwrap();
        assert_eq!(t.ops.len(), 4);
        let g = GenConfig::new(GraphKind::RandomGnm, 40, 120, 300, 9);
        assert_eq!(write(&gen_trace(&g).unwrap()), write(&gen_trace(&g).unwrap()));
        assert!(gen_trace(&GenConfig::new(GraphKind::Grid, 10, 0, 0, 1)).is_err());
    }
}
