use nalgebra::{Cholesky, DMatrix, DVector};

use super::OracleError;
use crate::graph::{GraphView, VertexId};

/// Dense Laplacian over an explicit list of vertex labels.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLaplacian {
    pub vertices: Vec<VertexId>,
    pub matrix: DMatrix<f64>,
}

impl DenseLaplacian {
    pub fn index_of(&self, v: VertexId) -> Option<usize> {
        self.vertices.iter().position(|&x| x == v)
    }

    /// Edge list `(u, v, conductance)` read off the negative off-diagonals.
    pub fn to_edges(&self, tol: f64) -> Vec<(VertexId, VertexId, f64)> {
        let k = self.vertices.len();
        let mut out = Vec::new();
        for i in 0..k {
            for j in i + 1..k {
                let w = -self.matrix[(i, j)];
                if w > tol {
                    out.push((self.vertices[i], self.vertices[j], w));
                }
            }
        }
        out
    }

    pub fn max_abs_diff(&self, other: &DenseLaplacian) -> f64 {
        (&self.matrix - &other.matrix).abs().max()
    }

    /// Graph on `0..n` with the same labels as this Laplacian.
    pub fn to_view(&self, n: usize, tol: f64) -> GraphView {
        GraphView::from_triples(n, &self.to_edges(tol))
    }
}

pub fn laplacian(g: &GraphView) -> DenseLaplacian {
    let n = g.n();
    let mut m = DMatrix::zeros(n, n);
    for e in g.edges() {
        if e.u == e.v {
            continue;
        }
        m[(e.u, e.u)] += e.weight;
        m[(e.v, e.v)] += e.weight;
        m[(e.u, e.v)] -= e.weight;
        m[(e.v, e.u)] -= e.weight;
    }
    DenseLaplacian { vertices: (0..n).collect(), matrix: m }
}

/// Effective resistance by a grounded Cholesky solve on the component of `s`.
pub fn exact_effective_resistance(g: &GraphView, s: VertexId, t: VertexId) -> Result<f64, OracleError> {
    if s == t {
        return Ok(0.0);
    }
    let (comp, _) = g.components();
    if comp[s] != comp[t] {
        return Err(OracleError::DifferentComponents(s, t));
    }
    let verts: Vec<VertexId> = (0..g.n()).filter(|&v| comp[v] == comp[s] && v != t).collect();
    let l = laplacian(g);
    let k = verts.len();
    let sub = DMatrix::from_fn(k, k, |i, j| l.matrix[(verts[i], verts[j])]);
    let chol = Cholesky::new(sub).expect("grounded Laplacian of a connected component is PD");
    let si = verts.iter().position(|&v| v == s).expect("s is in its own component");
    let mut b = DVector::zeros(k);
    b[si] = 1.0;
    let x = chol.solve(&b);
    Ok(x[si])
}

/// Pseudo-inverse blocks per component for repeated resistance queries.
#[derive(Debug, Clone)]
pub struct ResistanceOracle {
    comp: Vec<usize>,
    pos: Vec<usize>,
    blocks: Vec<DMatrix<f64>>,
}

impl ResistanceOracle {
    pub fn new(g: &GraphView) -> Self {
        let (comp, count) = g.components();
        let l = laplacian(g);
        let mut members = vec![Vec::new(); count];
        let mut pos = vec![0; g.n()];
        for v in 0..g.n() {
            pos[v] = members[comp[v]].len();
            members[comp[v]].push(v);
        }
        let blocks = members
            .iter()
            .map(|vs| {
                let k = vs.len();
                // ground the first vertex; its row and column stay zero
                let mut inv = DMatrix::zeros(k, k);
                if k > 1 {
                    let sub = DMatrix::from_fn(k - 1, k - 1, |i, j| l.matrix[(vs[i + 1], vs[j + 1])]);
                    let sub_inv = Cholesky::new(sub).expect("grounded block is PD").inverse();
                    inv.view_mut((1, 1), (k - 1, k - 1)).copy_from(&sub_inv);
                }
                inv
            })
            .collect();
        ResistanceOracle { comp, pos, blocks }
    }

    pub fn query(&self, a: VertexId, b: VertexId) -> Result<f64, OracleError> {
        if a == b {
            return Ok(0.0);
        }
        if self.comp[a] != self.comp[b] {
            return Err(OracleError::DifferentComponents(a, b));
        }
        let m = &self.blocks[self.comp[a]];
        let (i, j) = (self.pos[a], self.pos[b]);
        Ok(m[(i, i)] + m[(j, j)] - 2.0 * m[(i, j)])
    }
}

fn schur_on(l: &DMatrix<f64>, keep: &[VertexId], elim: &[VertexId]) -> Result<DMatrix<f64>, OracleError> {
    let kc = keep.len();
    let kd = elim.len();
    let lcc = DMatrix::from_fn(kc, kc, |i, j| l[(keep[i], keep[j])]);
    if kd == 0 {
        return Ok(lcc);
    }
    let lcd = DMatrix::from_fn(kc, kd, |i, j| l[(keep[i], elim[j])]);
    let ldd = DMatrix::from_fn(kd, kd, |i, j| l[(elim[i], elim[j])]);
    let chol = Cholesky::new(ldd).ok_or(OracleError::SingularBlock)?;
    let x = chol.solve(&lcd.transpose());
    Ok(lcc - lcd * x)
}

/// L_CC - L_CD L_DD^-1 L_DC. Fails when a component has no vertex of `c`.
pub fn exact_schur_complement(g: &GraphView, c: &[VertexId]) -> Result<DenseLaplacian, OracleError> {
    if c.is_empty() {
        return Err(OracleError::EmptySet);
    }
    let mut keep = c.to_vec();
    keep.sort_unstable();
    keep.dedup();
    let (comp, count) = g.components();
    let mut hit = vec![false; count];
    for &v in &keep {
        hit[comp[v]] = true;
    }
    if hit.iter().any(|h| !h) {
        return Err(OracleError::SingularBlock);
    }
    let mut in_c = vec![false; g.n()];
    keep.iter().for_each(|&v| in_c[v] = true);
    let elim: Vec<VertexId> = (0..g.n()).filter(|&v| !in_c[v]).collect();
    let m = schur_on(&laplacian(g).matrix, &keep, &elim)?;
    Ok(DenseLaplacian { vertices: keep, matrix: m })
}

/// Schur complement that silently drops components missing `c`.
pub fn schur_complement_restricted(g: &GraphView, c: &[VertexId]) -> DenseLaplacian {
    let mut keep = c.to_vec();
    keep.sort_unstable();
    keep.dedup();
    let (comp, count) = g.components();
    let mut hit = vec![false; count];
    for &v in &keep {
        hit[comp[v]] = true;
    }
    let mut in_c = vec![false; g.n()];
    keep.iter().for_each(|&v| in_c[v] = true);
    let elim: Vec<VertexId> = (0..g.n()).filter(|&v| !in_c[v] && hit[comp[v]]).collect();
    let m = schur_on(&laplacian(g).matrix, &keep, &elim).expect("every eliminated component touches c");
    DenseLaplacian { vertices: keep, matrix: m }
}
