//! Metric decomposition into tree-plus-few-edges subgraphs.
//!
//! Each candidate keeps a low-stretch tree T and the edges F of highest
//! stretch; the rest of G is routed along T. Candidates are combined by
//! multiplicative weights over per-edge stretch, with exponent accumulator
//! `x = M lambda` and weights `softmax(x)_e / l_e`.

use crate::graph::GraphView;
use crate::lsst::{generalized_lsst, lsst, average_stretch, RootedForest};

use super::MetricError;

/// Subgraph made of a spanning forest plus extra edges `f`.
#[derive(Debug, Clone)]
pub struct MetricJTree {
    pub tree: RootedForest,
    /// View edge indices kept besides the tree; never tree edges.
    pub f: Vec<usize>,
    /// Per-edge stretch of routing G into this subgraph.
    pub stretch: Vec<f64>,
}

impl MetricJTree {
    /// Largest per-edge stretch.
    pub fn eta(&self) -> f64 {
        self.stretch.iter().copied().fold(0.0, f64::max)
    }

    /// Edges whose stretch is at least half the largest.
    pub fn psi(&self) -> Vec<usize> {
        let half = 0.5 * self.eta();
        (0..self.stretch.len()).filter(|&e| self.stretch[e] >= half).collect()
    }

    /// `sum_e w_e l_J(e)` for importance `w`.
    pub fn volume(&self, g: &GraphView, w: &[f64]) -> f64 {
        g.edges().iter().zip(&self.stretch).zip(w).map(|((e, s), w)| w * s * e.weight).sum()
    }
}

/// Builds the subgraph for tree `t` and extra edges `f`.
pub fn metric_jtree(g: &GraphView, tree: RootedForest, mut f: Vec<usize>) -> MetricJTree {
    f.retain(|&e| !tree.is_tree_edge(e));
    f.sort_unstable();
    f.dedup();
    let stretch = g
        .edges()
        .iter()
        .enumerate()
        .map(|(i, e)| {
            if tree.is_tree_edge(i) || f.binary_search(&i).is_ok() {
                1.0
            } else {
                tree.dist(e.u, e.v) / e.weight
            }
        })
        .collect();
    MetricJTree { tree, f, stretch }
}

/// `ceil(log2(m U))`, at least 1, where U is the length spread.
pub fn log_mu(g: &GraphView) -> usize {
    let (lo, hi) = g
        .edges()
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), e| (lo.min(e.weight), hi.max(e.weight)));
    let u = if g.m() == 0 { 1.0 } else { hi / lo };
    ((g.m().max(1) as f64 * u).log2().ceil() as usize).max(1)
}

/// Stretch bucket: 1 for stretch below 2, then `floor(log2 s) + 1`.
fn bucket(s: f64) -> usize {
    if s < 2.0 {
        1
    } else {
        s.log2().floor() as usize + 1
    }
}

#[derive(Debug, Clone)]
pub struct GoodJ1 {
    pub jtree: MetricJTree,
    /// Volume of the subgraph over the volume of G under the same weights.
    pub volume_ratio: f64,
    /// True when no bucket cutoff existed and F was left empty.
    pub cutoff_failed: bool,
}

/// Tree under weights `w` and the high-stretch edges to keep.
pub fn compute_good_j1(g: &GraphView, k: usize, w: &[f64], alpha: f64) -> Result<GoodJ1, MetricError> {
    if k == 0 {
        return Err(MetricError::InvalidK);
    }
    let m = g.m();
    let lengths: Vec<f64> = g.edges().iter().map(|e| e.weight).collect();
    let tree = generalized_lsst(g, &lengths, w);
    let eta: Vec<f64> = g.edges().iter().map(|e| tree.dist(e.u, e.v) / e.weight).collect();
    let levels = log_mu(g).max(eta.iter().map(|&s| bucket(s)).max().unwrap_or(1));
    let mut size = vec![0usize; levels + 2];
    for &s in &eta {
        size[bucket(s)] += 1;
    }
    // suffix counts: at_least[i] = |F_{>= i}|, with F_{>= 0} = E
    let mut at_least = vec![0usize; levels + 2];
    for i in (1..=levels).rev() {
        at_least[i] = at_least[i + 1] + size[i];
    }
    at_least[0] = m;
    let thr = 4.0 * (2.0 * alpha + 1.0) * m as f64 * levels as f64 / k as f64;
    let per_bucket = 4.0 * (2.0 * alpha + 1.0) * m as f64 / k as f64;
    let j_star = (1..=levels).find(|&j| at_least[j] as f64 <= thr && at_least[j - 1] as f64 > thr);
    let (f, cutoff_failed) = match j_star {
        None if m as f64 <= thr => ((0..m).collect(), false),
        None => (Vec::new(), true),
        Some(js) => {
            let j_bar = (js.max(2)..=levels + 1)
                .find(|&jb| size[jb - 1] as f64 >= per_bucket)
                .unwrap_or(js);
            ((0..m).filter(|&e| bucket(eta[e]) >= j_bar).collect(), false)
        }
    };
    let jtree = metric_jtree(g, tree, f);
    let base: f64 = g.edges().iter().zip(w).map(|(e, w)| w * e.weight).sum();
    let volume_ratio = if base > 0.0 { jtree.volume(g, w) / base } else { 1.0 };
    Ok(GoodJ1 { jtree, volume_ratio, cutoff_failed })
}

#[derive(Debug, Clone)]
pub struct MetricDecomposition {
    pub members: Vec<MetricJTree>,
    pub lambda: Vec<f64>,
    /// Largest combined stretch `max_e (M lambda)_e`.
    pub rho: f64,
    /// Stretch constant used for thresholds, raised to every volume ratio seen.
    pub alpha: f64,
    /// `lmax(M lambda)` at exit.
    pub lmax: f64,
    /// `sum_e (M lambda)_e` at exit.
    pub phi: f64,
    pub iterations: usize,
    pub k: usize,
}

fn lmax(x: &[f64]) -> f64 {
    let mx = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !mx.is_finite() {
        return 0.0;
    }
    mx + x.iter().map(|&v| (v - mx).exp()).sum::<f64>().ln()
}

/// Measured stretch constant: `max(ln m, 2 * average stretch of a plain tree)`.
pub fn measured_alpha(g: &GraphView) -> f64 {
    let l: Vec<f64> = g.edges().iter().map(|e| e.weight).collect();
    let avg = average_stretch(g, &l, &lsst(g, &l));
    (g.m().max(2) as f64).ln().max(2.0 * avg)
}

/// Member count for core-size parameter `j`.
pub fn k_for_j(g: &GraphView, j: usize, alpha: f64) -> usize {
    let k = 4.0 * (2.0 * alpha + 1.0) * g.m().max(1) as f64 * log_mu(g) as f64 / j.max(1) as f64;
    (k.ceil() as usize).max(1)
}

pub fn mwu_metric_decomposition(g: &GraphView, k: usize) -> Result<MetricDecomposition, MetricError> {
    if k == 0 {
        return Err(MetricError::InvalidK);
    }
    let m = g.m();
    let alpha0 = measured_alpha(g);
    let mut alpha = alpha0;
    let mut x = vec![0.0; m];
    let mut members = Vec::new();
    let mut lambda = Vec::new();
    let mut mass: f64 = 0.0;
    let mut iterations = 0;
    while mass < 1.0 - 1e-12 {
        iterations += 1;
        if iterations > 2 * k {
            return Err(MetricError::NonTermination { iterations, k });
        }
        let mx = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let ex: Vec<f64> = x.iter().map(|&v| (v - mx).exp()).collect();
        let s: f64 = ex.iter().sum();
        let w: Vec<f64> = g.edges().iter().zip(&ex).map(|(e, p)| p / s / e.weight).collect();
        let good = compute_good_j1(g, k, &w, alpha0)?;
        alpha = alpha.max(good.volume_ratio);
        let jt = good.jtree;
        let eta = jt.eta();
        let step = if eta > 0.0 { (1.0 / eta).min(1.0 - mass) } else { 1.0 - mass };
        for (xe, se) in x.iter_mut().zip(&jt.stretch) {
            *xe += step * se;
        }
        mass += step;
        members.push(jt);
        lambda.push(step);
    }
    let rho = x.iter().copied().fold(0.0, f64::max);
    Ok(MetricDecomposition { members, lambda, rho, alpha, lmax: lmax(&x), phi: x.iter().sum(), iterations, k })
}
