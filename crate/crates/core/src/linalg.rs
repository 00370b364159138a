//! Dense symmetric eigensolver wrapper and a Lanczos iteration with full
//! reorthogonalization for the bottom of a Laplacian spectrum.

use alloc::format;
use alloc::vec::Vec;

use libm::{fabs, sqrt};
use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::graph::{Graph, VertexSet};
use crate::laplacian::LaplacianOperator;

/// Eigenpairs of a symmetric matrix, eigenvalues ascending; column `k` of
/// `vectors` belongs to `values[k]`.
#[derive(Clone, Debug)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

pub fn symmetric_eigen(a: DMatrix<f64>) -> Eigen {
    let n = a.nrows();
    let eig = SymmetricEigen::new(a);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    Eigen { values, vectors }
}

/// Smallest eigenvalue of the (symmetrized) operator by Lanczos with full
/// reorthogonalization. Converged when the Ritz residual is below
/// `tol · max(1, ‖A‖)`.
pub fn lanczos_smallest(op: &LaplacianOperator, max_steps: usize, tol: f64) -> Result<f64> {
    let n = op.len();
    if n == 0 {
        return Err(Error::EmptySet);
    }
    let steps = max_steps.min(n).max(1);
    let norm_bound = 2.0 * op.max_weighted_degree();
    let scale = norm_bound.max(1.0);
    // positive start vector overlaps the positive ground state
    let mut q: Vec<f64> = op.measure().iter().map(|m| sqrt(*m)).collect();
    normalize(&mut q);
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(steps);
    let mut alpha = Vec::with_capacity(steps);
    let mut beta: Vec<f64> = Vec::with_capacity(steps);
    let mut w = alloc::vec![0.0; n];
    let mut last = f64::NAN;
    for j in 0..steps {
        op.apply_symmetric(&q, &mut w);
        let a = dot(&q, &w);
        alpha.push(a);
        basis.push(q.clone());
        for (wi, qi) in w.iter_mut().zip(&q) {
            *wi -= a * qi;
        }
        if j > 0 {
            let b = beta[j - 1];
            for (wi, pi) in w.iter_mut().zip(&basis[j - 1]) {
                *wi -= b * pi;
            }
        }
        for _ in 0..2 {
            for v in &basis {
                let c = dot(v, &w);
                for (wi, vi) in w.iter_mut().zip(v) {
                    *wi -= c * vi;
                }
            }
        }
        let b = sqrt(dot(&w, &w));
        let exhausted = b <= 1e-13 * scale || j + 1 == steps;
        if exhausted || (j + 1) % 8 == 0 {
            let k = alpha.len();
            let t = DMatrix::from_fn(k, k, |r, c| {
                if r == c {
                    alpha[r]
                } else if r + 1 == c {
                    beta[r]
                } else if c + 1 == r {
                    beta[c]
                } else {
                    0.0
                }
            });
            let eig = symmetric_eigen(t);
            let theta = eig.values[0];
            let residual = fabs(b * eig.vectors[(k - 1, 0)]);
            last = theta;
            // an invariant subspace (breakdown or full dimension) is exact
            if residual <= tol * scale || b <= 1e-13 * scale || k == n {
                return Ok(theta.max(0.0));
            }
            if exhausted {
                return Err(Error::NoConvergence(format!(
                    "Lanczos residual {residual:e} after {k} steps (last Ritz value {theta})"
                )));
            }
        }
        beta.push(b);
        q = w.iter().map(|v| v / b).collect();
    }
    Err(Error::NoConvergence(format!(
        "Lanczos did not converge in {steps} steps (last Ritz value {last})"
    )))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(v: &mut [f64]) {
    let s = sqrt(dot(v, v));
    v.iter_mut().for_each(|x| *x /= s);
}

/// Size limit of the dense route of [`dirichlet_lambda`].
pub const DENSE_EIGEN_LIMIT: usize = 2000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EigenMethod {
    /// Dense up to [`DENSE_EIGEN_LIMIT`], Lanczos beyond.
    Auto,
    Dense,
    Lanczos,
}

/// `λ(U) = inf{ℰ(f)/‖f‖²_m : supp f ⊆ U}`.
pub fn dirichlet_lambda(graph: &Graph, set: &VertexSet) -> Result<f64> {
    dirichlet_lambda_with(graph, set, EigenMethod::Auto)
}

pub fn dirichlet_lambda_with(graph: &Graph, set: &VertexSet, method: EigenMethod) -> Result<f64> {
    let op = LaplacianOperator::dirichlet(graph, set)?;
    let dense = match method {
        EigenMethod::Auto => op.len() <= DENSE_EIGEN_LIMIT,
        EigenMethod::Dense => {
            if op.len() > DENSE_EIGEN_LIMIT {
                return Err(Error::TooLarge {
                    what: "dense eigensolver",
                    n: op.len(),
                    max: DENSE_EIGEN_LIMIT,
                });
            }
            true
        }
        EigenMethod::Lanczos => false,
    };
    if dense {
        let eig = symmetric_eigen(op.symmetric_dense());
        Ok(eig.values[0].max(0.0))
    } else {
        lanczos_smallest(&op, 4000, 1e-12)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_lattice_box, ConductanceRule, MeasureRule};

    #[test]
    fn small_dirichlet_sets_on_the_line() {
        let g = build_lattice_box(1, 4, ConductanceRule::Constant(1.0), MeasureRule::Constant(1.0)).unwrap();
        let o = g.require("0").unwrap();
        let one = g.require("1").unwrap();
        let single = VertexSet::new(&g, [o]).unwrap();
        assert!((dirichlet_lambda(&g, &single).unwrap() - 2.0).abs() < 1e-14);
        let pair = VertexSet::new(&g, [o, one]).unwrap();
        assert!((dirichlet_lambda(&g, &pair).unwrap() - 1.0).abs() < 1e-14);
        assert!(dirichlet_lambda(&g, &VertexSet::all(&g)).unwrap() < 1e-12);
        assert!(VertexSet::new(&g, []).map(|u| dirichlet_lambda(&g, &u)).unwrap().is_err());
    }

    #[test]
    fn lanczos_agrees_with_dense() {
        let g = build_lattice_box(
            2,
            6,
            ConductanceRule::IidUniform { lo: 0.5, hi: 2.0, seed: 5 },
            MeasureRule::Constant(1.0),
        )
        .unwrap();
        let members = g.vertices().filter(|v| v.index() % 3 != 0 || v.index() < 60);
        let u = VertexSet::new(&g, members).unwrap();
        let d = dirichlet_lambda_with(&g, &u, EigenMethod::Dense).unwrap();
        let l = dirichlet_lambda_with(&g, &u, EigenMethod::Lanczos).unwrap();
        assert!((d - l).abs() < 1e-8, "{d} vs {l}");
    }
}
