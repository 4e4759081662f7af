//! Convex combination of j-trees via multiplicative weights.
//!
//! Each round builds a j-tree under lengths `softmax(x)_e / c_e`, where `x`
//! is the accumulated relative load, and adds it with step
//! `min(1 / max load, remaining mass)`. The certified quality is the largest
//! accumulated relative load.

use crate::graph::GraphView;

use super::{compute_tcf, JTree, JTreeError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecompConfig {
    /// Rounds before the remaining mass is put on the last tree.
    pub max_iters: usize,
    /// Split at the heaviest envelope edge on promotion.
    pub pick_max: bool,
}

impl Default for DecompConfig {
    fn default() -> Self {
        DecompConfig { max_iters: 64, pick_max: false }
    }
}

#[derive(Debug, Clone)]
pub struct CutDecomposition {
    pub trees: Vec<JTree>,
    pub lambda: Vec<f64>,
    /// Largest relative load of the weighted combination routed into G.
    pub rho: f64,
    pub iterations: usize,
    /// True when the round cap forced a step longer than the rule allows.
    pub truncated: bool,
}

fn softmax(x: &[f64]) -> Vec<f64> {
    let mx = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = x.iter().map(|&v| (v - mx).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}

pub fn build_decomposition(g: &GraphView, j: usize, cfg: &DecompConfig) -> Result<CutDecomposition, JTreeError> {
    if j == 0 {
        return Err(JTreeError::InvalidJ);
    }
    let m = g.m();
    let mut x = vec![0.0; m];
    let mut dec = CutDecomposition { trees: Vec::new(), lambda: Vec::new(), rho: 0.0, iterations: 0, truncated: false };
    let mut mass: f64 = 0.0;
    while mass < 1.0 - 1e-12 {
        let p = softmax(&x);
        let lengths: Vec<f64> = g.edges().iter().zip(&p).map(|(e, &pe)| (pe / e.weight).max(f64::MIN_POSITIVE)).collect();
        let tcf = compute_tcf(g, j, &lengths, &[])?;
        let jt = JTree::route(g, &tcf, cfg.pick_max);
        let loads = jt.relative_loads(g);
        let worst = loads.iter().copied().fold(0.0, f64::max);
        let rest = 1.0 - mass;
        let mut step = if worst > 0.0 { rest.min(1.0 / worst) } else { rest };
        dec.iterations += 1;
        if dec.iterations >= cfg.max_iters.max(1) && step < rest {
            step = rest;
            dec.truncated = true;
        }
        for (xe, le) in x.iter_mut().zip(&loads) {
            *xe += step * le;
        }
        mass += step;
        dec.trees.push(jt);
        dec.lambda.push(step);
    }
    dec.rho = x.iter().copied().fold(0.0, f64::max).max(1.0);
    Ok(dec)
}
