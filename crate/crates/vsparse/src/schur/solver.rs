//! Effective resistance on one graph by a grounded Laplacian solve.

use crate::graph::{GraphView, VertexId};
use crate::oracle::exact_effective_resistance;

use super::SchurError;

/// Largest component the dense fallback is allowed on.
pub const DENSE_LIMIT: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ErSolver {
    /// Conjugate gradient with a diagonal preconditioner, dense fallback.
    #[default]
    Pcg,
    Dense,
}

/// Resistance and whether the dense fallback ran.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Solve {
    pub value: f64,
    pub fallback: bool,
    pub iterations: usize,
}

pub fn effective_resistance(
    g: &GraphView,
    s: VertexId,
    t: VertexId,
    solver: ErSolver,
    tol: f64,
) -> Result<Solve, SchurError> {
    if s == t {
        return Ok(Solve { value: 0.0, fallback: false, iterations: 0 });
    }
    let (comp, _) = g.components();
    if comp[s] != comp[t] {
        return Err(SchurError::DifferentComponents(s, t));
    }
    let dense = |iterations| {
        let value = exact_effective_resistance(g, s, t).expect("same component");
        Solve { value, fallback: solver == ErSolver::Pcg, iterations }
    };
    if solver == ErSolver::Dense {
        return Ok(dense(0));
    }
    // ground t; local indices over the rest of the component
    let mut idx = vec![usize::MAX; g.n()];
    let verts: Vec<VertexId> = (0..g.n()).filter(|&v| comp[v] == comp[s] && v != t).collect();
    for (i, &v) in verts.iter().enumerate() {
        idx[v] = i;
    }
    let k = verts.len();
    let diag: Vec<f64> = verts.iter().map(|&v| g.weighted_degree(v)).collect();
    let apply = |x: &[f64], y: &mut [f64]| {
        for (i, &v) in verts.iter().enumerate() {
            let mut acc = diag[i] * x[i];
            for &(w, e) in g.neighbors(v) {
                if idx[w] != usize::MAX {
                    acc -= g.edge(e).weight * x[idx[w]];
                }
            }
            y[i] = acc;
        }
    };
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let mut x = vec![0.0; k];
    let mut r = vec![0.0; k];
    r[idx[s]] = 1.0;
    let mut z: Vec<f64> = r.iter().zip(&diag).map(|(r, d)| r / d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; k];
    let max_iter = 10 * k + 100;
    for it in 1..=max_iter {
        apply(&p, &mut ap);
        let alpha = rz / dot(&p, &ap);
        for i in 0..k {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        if dot(&r, &r).sqrt() <= tol {
            return Ok(Solve { value: x[idx[s]], fallback: false, iterations: it });
        }
        for i in 0..k {
            z[i] = r[i] / diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..k {
            p[i] = z[i] + beta * p[i];
        }
    }
    if k < DENSE_LIMIT {
        Ok(dense(max_iter))
    } else {
        Ok(Solve { value: x[idx[s]], fallback: false, iterations: max_iter })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangle_two_thirds() {
        let g = GraphView::from_triples(3, &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]);
        for solver in [ErSolver::Pcg, ErSolver::Dense] {
            let r = effective_resistance(&g, 0, 2, solver, 1e-10).unwrap().value;
            assert!((r - 2.0 / 3.0).abs() < 1e-9);
        }
        assert_eq!(effective_resistance(&g, 1, 1, ErSolver::Pcg, 1e-10).unwrap().value, 0.0);
    }

    #[test]
    fn pcg_matches_dense_on_a_grid() {
        let mut t = Vec::new();
        for r in 0..6 {
            for c in 0..6 {
                let v = r * 6 + c;
                if c < 5 {
                    t.push((v, v + 1, 1.0 + (v % 3) as f64));
                }
                if r < 5 {
                    t.push((v, v + 6, 0.5 + (v % 4) as f64));
                }
            }
        }
        let g = GraphView::from_triples(37, &t);
        let a = effective_resistance(&g, 0, 35, ErSolver::Pcg, 1e-12).unwrap();
        let b = effective_resistance(&g, 0, 35, ErSolver::Dense, 0.0).unwrap();
        assert!(!a.fallback);
        assert!((a.value - b.value).abs() < 1e-9 * b.value);
        assert!(matches!(effective_resistance(&g, 0, 36, ErSolver::Pcg, 1e-9), Err(SchurError::DifferentComponents(0, 36))));
    }
}
