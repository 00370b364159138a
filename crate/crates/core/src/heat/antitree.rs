//! Radial reduction of the anti-tree heat kernel.
//!
//! Radial functions evolve like a birth–death chain on levels with measure
//! `M_k = s_k` and conductance `s_k s_{k+1}`; functions with zero mean on a
//! single sphere `S_j` are eigenfunctions with eigenvalue
//! `deg_j = s_{j−1} + s_{j+1}`. Splitting `δ_y / m(y)` into its sphere
//! average and the zero-mean remainder gives, for `x ∈ S_i`, `y ∈ S_j`,
//!
//! `p_t(x,y) = q_t(i,j) + [i = j] e^{−t deg_j} ([x = y] − 1/s_j)`,
//!
//! where `q` is the chain kernel. The truncation keeps levels `0..=K` with
//! Dirichlet killing towards `S_{K+1}`, which is the exhaustion domain of
//! radius `K`, so the cost is one `(K+1)`-dimensional eigenproblem instead
//! of one of size `Σ s_k`.

use alloc::format;
use alloc::vec::Vec;

use libm::{exp, log, sqrt};
use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::graph::SphereFunction;
use crate::linalg::{symmetric_eigen, Eigen, DENSE_EIGEN_LIMIT};

#[derive(Clone, Debug)]
pub struct AntiTreeRadialKernel {
    spheres: SphereFunction,
    levels: usize,
    sizes: Vec<f64>,
    eigen: Eigen,
}

impl AntiTreeRadialKernel {
    /// Dirichlet kernel of levels `0..=levels` inside the anti-tree with
    /// sphere sizes `⌊k^γ⌋`.
    pub fn new(gamma: f64, levels: usize) -> Result<Self> {
        let spheres = SphereFunction::new(gamma)?;
        if levels + 1 > DENSE_EIGEN_LIMIT {
            return Err(Error::TooLarge {
                what: "radial anti-tree chain",
                n: levels + 1,
                max: DENSE_EIGEN_LIMIT,
            });
        }
        let s = |k: i64| spheres.size(k) as f64;
        let sizes: Vec<f64> = (0..=levels as i64 + 1).map(s).collect();
        let n = levels + 1;
        // M^{1/2} L M^{−1/2}: diagonal s_{k−1} + s_{k+1}, off-diagonal −√(s_k s_{k+1})
        let matrix = DMatrix::from_fn(n, n, |i, j| {
            let (ki, kj) = (i as i64, j as i64);
            if i == j {
                s(ki - 1) + s(ki + 1)
            } else if ki.abs_diff(kj) == 1 {
                -sqrt(s(ki) * s(kj))
            } else {
                0.0
            }
        });
        Ok(Self {
            spheres,
            levels,
            sizes,
            eigen: symmetric_eigen(matrix),
        })
    }

    pub fn spheres(&self) -> SphereFunction {
        self.spheres
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    /// Bottom of the Dirichlet spectrum of the truncation.
    pub fn lambda(&self) -> f64 {
        self.eigen.values[0]
    }

    fn check(&self, t: f64, i: usize, j: usize) -> Result<()> {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::InvalidParameter(format!("time {t} must be finite and >= 0")));
        }
        if i > self.levels || j > self.levels {
            return Err(Error::Domain(format!(
                "level {} outside the truncation 0..={}",
                i.max(j),
                self.levels
            )));
        }
        Ok(())
    }

    /// Chain kernel `q_t(i,j)`, the sphere average of `p_t(x, ·)` over `S_j`.
    pub fn radial_value(&self, t: f64, i: usize, j: usize) -> Result<f64> {
        self.check(t, i, j)?;
        let v = &self.eigen.vectors;
        let mut s = 0.0;
        for (k, &l) in self.eigen.values.iter().enumerate() {
            s += exp(-t * l) * v[(i, k)] * v[(j, k)];
        }
        Ok(s / sqrt(self.sizes[i] * self.sizes[j]))
    }

    /// `p_t(x,y)` for `x` on level `i`, `y` on level `j`; `same_vertex`
    /// distinguishes `x = y` from distinct vertices of one sphere.
    pub fn value(&self, t: f64, i: usize, j: usize, same_vertex: bool) -> Result<f64> {
        if same_vertex && i != j {
            return Err(Error::InvalidParameter(
                "a vertex cannot lie on two levels".into(),
            ));
        }
        let mut p = self.radial_value(t, i, j)?;
        if i == j {
            let deg = self.sizes[j + 1] + if j == 0 { 0.0 } else { self.sizes[j - 1] };
            let indicator = if same_vertex { 1.0 } else { 0.0 };
            p += exp(-t * deg) * (indicator - 1.0 / self.sizes[j]);
        }
        Ok(p)
    }

    /// `ln p_t(x,y)`; values lost to cancellation come back as `−∞`.
    pub fn log_value(&self, t: f64, i: usize, j: usize, same_vertex: bool) -> Result<f64> {
        let p = self.value(t, i, j, same_vertex)?;
        Ok(if p > 0.0 { log(p) } else { f64::NEG_INFINITY })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::Sequential;
    use crate::graph::{anti_tree_level, build_anti_tree, VertexSet};
    use crate::heat::{heat_kernel_dirichlet, Backend};

    #[test]
    fn matches_the_full_truncated_graph() {
        let (gamma, k) = (1.3, 7);
        let radial = AntiTreeRadialKernel::new(gamma, k).unwrap();
        let g = build_anti_tree(gamma, k + 1).unwrap();
        let inner = VertexSet::new(
            &g,
            g.vertices().filter(|&v| anti_tree_level(g.label(v)).unwrap() <= k),
        )
        .unwrap();
        let labels = ["o", "1:0", "4:0", "4:1", "7:2"];
        let ids: Vec<_> = labels.iter().map(|l| g.require(l).unwrap()).collect();
        let times = [0.0, 0.3, 2.0, 9.0];
        let full = heat_kernel_dirichlet(&g, &inner, &times, &ids, &ids, Backend::DenseEig, &Sequential).unwrap();
        for (ti, &t) in times.iter().enumerate() {
            for (xi, x) in labels.iter().enumerate() {
                for (yi, y) in labels.iter().enumerate() {
                    let (i, j) = (anti_tree_level(x).unwrap(), anti_tree_level(y).unwrap());
                    let r = radial.value(t, i, j, x == y).unwrap();
                    let f = full.value(ti, xi, yi);
                    assert!((r - f).abs() < 1e-12, "t={t} {x} {y}: {r} vs {f}");
                }
            }
        }
    }

    #[test]
    fn rejects_levels_outside_the_truncation() {
        let radial = AntiTreeRadialKernel::new(0.5, 10).unwrap();
        assert!(radial.value(1.0, 11, 0, false).is_err());
        assert!(radial.value(1.0, 2, 3, true).is_err());
        assert!(radial.lambda() > 0.0);
    }
}
