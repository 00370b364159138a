//! The graph Laplacian `Δf(x) = (1/m(x)) Σ_y b(x,y) (f(x) − f(y))`, on the
//! whole graph or restricted to a vertex set with Dirichlet conditions.

use alloc::vec::Vec;

use libm::sqrt;
use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::graph::{Graph, VertexId, VertexSet};

/// Sparse Laplacian on an active vertex set `U`.
///
/// Rows and columns outside `U` are dropped while the diagonal keeps the full
/// degree, so mass leaving `U` is killed.
#[derive(Clone, Debug)]
pub struct LaplacianOperator {
    vertices: Vec<VertexId>,
    /// Host vertex → active position.
    position: Vec<u32>,
    measure: Vec<f64>,
    /// `Deg(x) = deg(x)/m(x)` with the host degree.
    diag: Vec<f64>,
    offsets: Vec<usize>,
    /// `(y, b(x,y)/m(x))` for active neighbors.
    entries: Vec<(u32, f64)>,
    dirichlet: bool,
}

const INACTIVE: u32 = u32::MAX;

impl LaplacianOperator {
    pub fn full(graph: &Graph) -> Self {
        Self::build(graph, graph.vertices().collect(), false)
    }

    pub fn dirichlet(graph: &Graph, set: &VertexSet) -> Result<Self> {
        if set.is_empty() {
            return Err(Error::EmptySet);
        }
        let proper = set.len() < graph.len();
        Ok(Self::build(graph, set.members().to_vec(), proper))
    }

    fn build(graph: &Graph, vertices: Vec<VertexId>, dirichlet: bool) -> Self {
        let mut position = alloc::vec![INACTIVE; graph.len()];
        for (i, v) in vertices.iter().enumerate() {
            position[v.index()] = i as u32;
        }
        let mut offsets = Vec::with_capacity(vertices.len() + 1);
        offsets.push(0);
        let mut entries = Vec::new();
        let mut measure = Vec::with_capacity(vertices.len());
        let mut diag = Vec::with_capacity(vertices.len());
        for &x in &vertices {
            let m = graph.measure(x);
            measure.push(m);
            diag.push(graph.degree(x) / m);
            for &(y, b) in graph.neighbors(x) {
                let p = position[y.index()];
                if p != INACTIVE {
                    entries.push((p, b / m));
                }
            }
            offsets.push(entries.len());
        }
        Self {
            vertices,
            position,
            measure,
            diag,
            offsets,
            entries,
            dirichlet,
        }
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Whether the operator kills mass at the boundary of a proper subset.
    pub fn is_dirichlet(&self) -> bool {
        self.dirichlet
    }

    /// Host vertices in active order.
    pub fn vertices(&self) -> &[VertexId] {
        &self.vertices
    }

    /// Active position of a host vertex.
    pub fn position(&self, x: VertexId) -> Option<usize> {
        match self.position.get(x.index()) {
            Some(&p) if p != INACTIVE => Some(p as usize),
            _ => None,
        }
    }

    pub fn measure(&self) -> &[f64] {
        &self.measure
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diag
    }

    /// `(y, b(x,y)/m(x))` over active neighbours of active position `i`.
    #[inline]
    pub fn row(&self, i: usize) -> &[(u32, f64)] {
        &self.entries[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn max_weighted_degree(&self) -> f64 {
        self.diag.iter().copied().fold(0.0, f64::max)
    }

    /// `out = Δf`.
    pub fn apply(&self, f: &[f64], out: &mut [f64]) {
        for i in 0..self.len() {
            let mut s = self.diag[i] * f[i];
            for &(j, w) in self.row(i) {
                s -= w * f[j as usize];
            }
            out[i] = s;
        }
    }

    /// `⟨f, g⟩_m = Σ m f g`.
    pub fn inner(&self, f: &[f64], g: &[f64]) -> f64 {
        self.measure
            .iter()
            .zip(f.iter().zip(g))
            .map(|(m, (a, b))| m * a * b)
            .sum()
    }

    /// `ℰ(f) = Σ m f Δf` for `f` supported in the active set.
    pub fn energy(&self, f: &[f64]) -> f64 {
        let mut lf = alloc::vec![0.0; self.len()];
        self.apply(f, &mut lf);
        self.inner(f, &lf)
    }

    /// `M^{1/2} Δ M^{−1/2}` as a dense symmetric matrix.
    pub fn symmetric_dense(&self) -> DMatrix<f64> {
        let n = self.len();
        let mut a = DMatrix::zeros(n, n);
        for i in 0..n {
            a[(i, i)] = self.diag[i];
            for &(j, w) in self.row(i) {
                // w = b/m_i; symmetric entry −b/√(m_i m_j)
                a[(i, j as usize)] = -w * sqrt(self.measure[i] / self.measure[j as usize]);
            }
        }
        a
    }

    /// `y = M^{1/2} Δ M^{−1/2} x`.
    pub fn apply_symmetric(&self, x: &[f64], out: &mut [f64]) {
        for i in 0..self.len() {
            let mi = self.measure[i];
            let mut s = self.diag[i] * x[i];
            for &(j, w) in self.row(i) {
                s -= w * sqrt(mi / self.measure[j as usize]) * x[j as usize];
            }
            out[i] = s;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_lattice_box, ConductanceRule, MeasureRule};

    #[test]
    fn line_laplacian() {
        let g = build_lattice_box(1, 2, ConductanceRule::Constant(1.0), MeasureRule::Constant(1.0)).unwrap();
        let op = LaplacianOperator::full(&g);
        let f: Vec<f64> = (0..5).map(|i| (i * i) as f64).collect();
        let mut out = alloc::vec![0.0; 5];
        op.apply(&f, &mut out);
        // second difference of i² is −2 in the interior
        assert_eq!(&out[1..4], &[-2.0, -2.0, -2.0]);
        assert_eq!(out[0], -1.0);
        let ones = alloc::vec![1.0; 5];
        op.apply(&ones, &mut out);
        assert!(out.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn dirichlet_keeps_full_degree() {
        let g = build_lattice_box(1, 3, ConductanceRule::Constant(1.0), MeasureRule::Constant(1.0)).unwrap();
        let u = VertexSet::new(&g, [g.require("0").unwrap(), g.require("1").unwrap()]).unwrap();
        let op = LaplacianOperator::dirichlet(&g, &u).unwrap();
        assert!(op.is_dirichlet());
        let a = op.symmetric_dense();
        assert_eq!(a[(0, 0)], 2.0);
        assert_eq!(a[(0, 1)], -1.0);
        assert_eq!(op.position(g.require("2").unwrap()), None);
    }
}
