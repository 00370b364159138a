//! Heat kernels `p_t(x,y) = e^{−tΔ}(δ_y/m(y))(x)`.
//!
//! Two independent finite-graph backends (dense spectral decomposition and
//! uniformization), Dirichlet exhaustion for infinite families, the explicit
//! kernel of the integer line, and a radial reduction for anti-trees.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use libm::{exp, log, sqrt};

use crate::error::{Error, Result};
use crate::exec::{run_all, Executor};
use crate::graph::{Graph, VertexId, VertexSet};
use crate::laplacian::LaplacianOperator;
use crate::linalg::{symmetric_eigen, DENSE_EIGEN_LIMIT};

pub mod antitree;
pub mod exact;
pub mod exhaustion;
pub mod uniformization;

pub use antitree::AntiTreeRadialKernel;
pub use exact::{exact_integer_line_kernel, ln_exact_integer_line_kernel};
pub use exhaustion::{heat_kernel_exhaustion, exhaustion_value, ExhaustionFamily, ExhaustionOptions};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Backend {
    /// Full eigendecomposition. Accurate to about `n·ε` times the largest
    /// entry, so far-off-diagonal tails are not resolved.
    DenseEig,
    /// Uniformization: sums of nonnegative terms, accurate entrywise.
    ExpmAction,
}

impl Backend {
    pub fn as_str(self) -> &'static str {
        match self {
            Backend::DenseEig => "dense-eig",
            Backend::ExpmAction => "expm-action",
        }
    }
}

/// How an infinite-family kernel was approximated.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncationRecord {
    pub family: String,
    /// Radius of the reported truncation.
    pub radius: usize,
    /// Radius of the previous truncation in the schedule, if any.
    pub previous_radius: Option<usize>,
    /// `max |p^{B_R} − p^{B_{R/2}}|` over the slice.
    pub max_change: f64,
    pub tol: f64,
    pub converged: bool,
}

/// Kernel values on a `(t, x, y)` grid, stored in log-domain.
#[derive(Clone, Debug, PartialEq)]
pub struct HeatKernelSlice {
    pub times: Vec<f64>,
    pub sources: Vec<String>,
    pub targets: Vec<String>,
    /// `ln p_t(x,y)` laid out `[t][x][y]`.
    log_values: Vec<f64>,
    pub backend: Backend,
    pub truncation: Option<TruncationRecord>,
}

impl HeatKernelSlice {
    pub fn new(
        times: Vec<f64>,
        sources: Vec<String>,
        targets: Vec<String>,
        log_values: Vec<f64>,
        backend: Backend,
        truncation: Option<TruncationRecord>,
    ) -> Result<Self> {
        if log_values.len() != times.len() * sources.len() * targets.len() {
            return Err(Error::InvalidParameter("kernel slice shape mismatch".into()));
        }
        Ok(Self {
            times,
            sources,
            targets,
            log_values,
            backend,
            truncation,
        })
    }

    #[inline]
    fn index(&self, ti: usize, xi: usize, yi: usize) -> usize {
        (ti * self.sources.len() + xi) * self.targets.len() + yi
    }

    pub fn log_value(&self, ti: usize, xi: usize, yi: usize) -> f64 {
        self.log_values[self.index(ti, xi, yi)]
    }

    pub fn value(&self, ti: usize, xi: usize, yi: usize) -> f64 {
        exp(self.log_value(ti, xi, yi))
    }

    pub fn log_values(&self) -> &[f64] {
        &self.log_values
    }

    /// `(t, x, y, ln p)` in grid order.
    pub fn iter(&self) -> impl Iterator<Item = (f64, &str, &str, f64)> + '_ {
        let (ns, nt) = (self.sources.len(), self.targets.len());
        self.log_values.iter().enumerate().map(move |(k, &lv)| {
            let ti = k / (ns * nt);
            let xi = (k / nt) % ns;
            let yi = k % nt;
            (self.times[ti], self.sources[xi].as_str(), self.targets[yi].as_str(), lv)
        })
    }

    pub fn source_index(&self, label: &str) -> Option<usize> {
        self.sources.iter().position(|s| s == label)
    }

    pub fn target_index(&self, label: &str) -> Option<usize> {
        self.targets.iter().position(|s| s == label)
    }
}

/// `p_t(x, y)` for `t ∈ times`, `x ∈ sources`, `y ∈ targets` on a finite graph.
pub fn heat_kernel_finite(
    graph: &Graph,
    times: &[f64],
    sources: &[VertexId],
    targets: &[VertexId],
    backend: Backend,
    exec: &dyn Executor,
) -> Result<HeatKernelSlice> {
    let op = LaplacianOperator::full(graph);
    heat_kernel_operator(graph, &op, times, sources, targets, backend, exec)
}

/// Dirichlet kernel `p^U_t` of the restriction to `set`.
pub fn heat_kernel_dirichlet(
    graph: &Graph,
    set: &VertexSet,
    times: &[f64],
    sources: &[VertexId],
    targets: &[VertexId],
    backend: Backend,
    exec: &dyn Executor,
) -> Result<HeatKernelSlice> {
    let op = LaplacianOperator::dirichlet(graph, set)?;
    heat_kernel_operator(graph, &op, times, sources, targets, backend, exec)
}

/// Kernel of an arbitrary (possibly Dirichlet) operator on `graph`.
pub fn heat_kernel_operator(
    graph: &Graph,
    op: &LaplacianOperator,
    times: &[f64],
    sources: &[VertexId],
    targets: &[VertexId],
    backend: Backend,
    exec: &dyn Executor,
) -> Result<HeatKernelSlice> {
    for &t in times {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::InvalidParameter(format!("time {t} must be finite and >= 0")));
        }
    }
    let pos = |v: &VertexId| {
        op.position(*v)
            .ok_or_else(|| Error::UnknownVertex(String::from(graph.label(*v))))
    };
    let rows: Vec<usize> = sources.iter().map(pos).collect::<Result<_>>()?;
    let cols: Vec<usize> = targets.iter().map(pos).collect::<Result<_>>()?;
    let (nt, ns, ny) = (times.len(), rows.len(), cols.len());
    let mut log_values = alloc::vec![f64::NEG_INFINITY; nt * ns * ny];
    match backend {
        Backend::ExpmAction => {
            let columns = run_all(exec, ny, &|j| uniformization::log_column(op, cols[j], &rows, times))?;
            for (j, col) in columns.iter().enumerate() {
                for ti in 0..nt {
                    for xi in 0..ns {
                        log_values[(ti * ns + xi) * ny + j] = col[ti * ns + xi];
                    }
                }
            }
        }
        Backend::DenseEig => {
            if op.len() > DENSE_EIGEN_LIMIT {
                return Err(Error::TooLarge {
                    what: "dense-eig backend",
                    n: op.len(),
                    max: DENSE_EIGEN_LIMIT,
                });
            }
            let eig = symmetric_eigen(op.symmetric_dense());
            let m = op.measure();
            let n = op.len();
            for (ti, &t) in times.iter().enumerate() {
                let decay: Vec<f64> = eig.values.iter().map(|&l| exp(-t * l)).collect();
                for (xi, &x) in rows.iter().enumerate() {
                    for (yi, &y) in cols.iter().enumerate() {
                        let mut s = 0.0;
                        for k in 0..n {
                            s += decay[k] * eig.vectors[(x, k)] * eig.vectors[(y, k)];
                        }
                        let v = s / sqrt(m[x] * m[y]);
                        log_values[(ti * ns + xi) * ny + yi] =
                            if v > 0.0 { log(v) } else { f64::NEG_INFINITY };
                    }
                }
            }
        }
    }
    let label = |v: &VertexId| String::from(graph.label(*v));
    HeatKernelSlice::new(
        times.to_vec(),
        sources.iter().map(label).collect(),
        targets.iter().map(label).collect(),
        log_values,
        backend,
        None,
    )
}

/// `n` log-spaced points on `[lo, hi]` (both included).
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n <= 1 || lo == hi {
        return alloc::vec![lo];
    }
    let (a, b) = (log(lo), log(hi));
    (0..n)
        .map(|i| {
            if i == 0 {
                lo
            } else if i == n - 1 {
                hi
            } else {
                exp(a + (b - a) * i as f64 / (n - 1) as f64)
            }
        })
        .collect()
}

/// Log-spaced grid on `[lo, hi]` with `per_decade` intervals per factor 10.
pub fn decade_grid(lo: f64, hi: f64, per_decade: usize) -> Vec<f64> {
    let decades = libm::log10(hi / lo);
    let n = libm::ceil(decades * per_decade as f64 - 1e-9) as usize + 1;
    log_grid(lo, hi, n.max(2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::Sequential;
    use crate::graph::{build_lattice_box, ConductanceRule, MeasureRule};

    #[test]
    fn line_kernel_matches_bessel_values() {
        let g = build_lattice_box(1, 40, ConductanceRule::Constant(1.0), MeasureRule::Constant(1.0)).unwrap();
        let o = g.require("0").unwrap();
        let one = g.require("1").unwrap();
        for backend in [Backend::ExpmAction, Backend::DenseEig] {
            let s = heat_kernel_finite(&g, &[0.0, 1.0], &[o, one], &[o], backend, &Sequential).unwrap();
            assert_eq!(s.value(0, 0, 0), 1.0);
            assert_eq!(s.value(0, 1, 0), 0.0);
            assert!((s.value(1, 0, 0) - 0.308_508_322_553_671).abs() < 1e-12);
            assert!((s.value(1, 1, 0) - 0.215_269_289_248_937_7).abs() < 1e-12);
        }
    }

    #[test]
    fn grids() {
        let g = decade_grid(0.1, 100.0, 40);
        assert_eq!(g.len(), 121);
        assert_eq!(g[0], 0.1);
        assert_eq!(g[120], 100.0);
        assert!((g[40] - 1.0).abs() < 1e-12);
    }
}
