//! Spectral sparsification by effective-resistance sampling.

use std::collections::BTreeMap;

use rand::Rng;

use crate::graph::{pair, GraphView, VertexId};
use crate::oracle::ResistanceOracle;

/// Sums parallel edges and drops self-loops and zero weights.
pub fn aggregate(edges: &[(VertexId, VertexId, f64)]) -> Vec<(VertexId, VertexId, f64)> {
    let mut acc: BTreeMap<(VertexId, VertexId), f64> = BTreeMap::new();
    for &(u, v, w) in edges {
        if u != v && w > 0.0 {
            *acc.entry(pair(u, v)).or_insert(0.0) += w;
        }
    }
    acc.into_iter().map(|((u, v), w)| (u, v, w)).collect()
}

/// Number of samples needed for a `(1 +- eps)` sparsifier on `k` vertices.
pub fn sample_count(k: usize, eps: f64) -> usize {
    let k = k.max(2) as f64;
    (9.0 * k * k.ln() / (eps * eps)).ceil() as usize
}

/// Returns aggregated edges unchanged when sampling would not shrink them,
/// otherwise an importance sample with weights rescaled to stay unbiased.
pub fn spectral_sparsify<R: Rng>(
    edges: &[(VertexId, VertexId, f64)],
    eps: f64,
    rng: &mut R,
) -> Vec<(VertexId, VertexId, f64)> {
    let agg = aggregate(edges);
    let mut ids: Vec<VertexId> = agg.iter().flat_map(|&(u, v, _)| [u, v]).collect();
    ids.sort_unstable();
    ids.dedup();
    let q = sample_count(ids.len(), eps);
    if agg.len() <= q {
        return agg;
    }
    let local = |v: VertexId| ids.binary_search(&v).expect("listed vertex");
    let compact: Vec<_> = agg.iter().map(|&(u, v, w)| (local(u), local(v), w)).collect();
    let view = GraphView::from_triples(ids.len(), &compact);
    let ro = ResistanceOracle::new(&view);
    let scores: Vec<f64> = compact
        .iter()
        .map(|&(u, v, w)| w * ro.query(u, v).expect("edge endpoints are connected"))
        .collect();
    let total: f64 = scores.iter().sum();
    let mut cdf = Vec::with_capacity(scores.len());
    let mut run = 0.0;
    for s in &scores {
        run += s;
        cdf.push(run);
    }
    let mut out: BTreeMap<usize, f64> = BTreeMap::new();
    for _ in 0..q {
        let x = rng.gen::<f64>() * total;
        let i = cdf.partition_point(|&c| c <= x).min(cdf.len() - 1);
        let p = scores[i] / total;
        *out.entry(i).or_insert(0.0) += agg[i].2 / (q as f64 * p);
    }
    out.into_iter().map(|(i, w)| (agg[i].0, agg[i].1, w)).collect()
}
