//! Structural properties every heat kernel must have. Failures here are
//! engine bugs, not findings.

use alloc::string::String;
use alloc::vec::Vec;

use libm::{exp, fabs};

use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::graph::{Graph, VertexId, VertexSet};
use crate::heat::{heat_kernel_dirichlet, heat_kernel_finite, Backend, HeatKernelSlice};
use crate::linalg::{dirichlet_lambda_with, EigenMethod, DENSE_EIGEN_LIMIT};
use crate::metric::combinatorial_distance;

/// Largest `|U|` on which the Lanczos and dense eigenvalues are compared.
pub const LAMBDA_COMPARE_LIMIT: usize = 200;

#[derive(Clone, Debug, PartialEq)]
pub struct SemigroupCheck {
    pub name: String,
    /// Largest normalized discrepancy found.
    pub worst: f64,
    pub tol: f64,
    /// Number of comparisons; zero means the check did not apply.
    pub points: usize,
    pub pass: bool,
}

impl SemigroupCheck {
    fn new(name: &str, worst: f64, tol: f64, points: usize) -> Self {
        Self {
            name: String::from(name),
            worst,
            tol,
            points,
            pass: worst <= tol,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SemigroupReport {
    pub checks: Vec<SemigroupCheck>,
}

impl SemigroupReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn check(&self, name: &str) -> Option<&SemigroupCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Relative tolerance of the symmetry, Chapman–Kolmogorov and monotonicity checks.
const TOL: f64 = 1e-9;
const AGREEMENT_TOL: f64 = 1e-10;

/// `|a - b|` relative to the larger of `|a|`, `|b|` and `floor`.
fn rel(a: f64, b: f64, floor: f64) -> f64 {
    let scale = a.abs().max(b.abs()).max(floor);
    if scale == 0.0 {
        0.0
    } else {
        fabs(a - b) / scale
    }
}

/// Nested domains `U₁ ⊂ U₂ ⊂ X` by combinatorial distance from `center`,
/// at one and two thirds of its eccentricity.
fn default_domains(graph: &Graph, center: VertexId) -> Result<Vec<VertexSet>> {
    let d = combinatorial_distance(graph, center);
    let ecc = d.iter().copied().max().unwrap_or(0);
    let mut sets = Vec::new();
    for k in 1..=2u32 {
        let r = (ecc * k) / 3;
        let members = graph.vertices().filter(|v| d[v.index()] <= r);
        let set = VertexSet::new(graph, members)?;
        if set.len() < graph.len() && sets.last().is_none_or(|s: &VertexSet| s.len() < set.len()) {
            sets.push(set);
        }
    }
    sets.push(VertexSet::all(graph));
    Ok(sets)
}

/// Runs symmetry, Chapman–Kolmogorov, sub-stochasticity, `t = 0` identity,
/// Dirichlet domain monotonicity, Lanczos-vs-dense `λ(U)` and backend
/// agreement on `graph` at `probes × probes` pairs.
///
/// Chapman–Kolmogorov pairs consecutive grid times `(s, t)` and compares
/// `p_{s+t}(x,y)` with `Σ_z p_s(x,z) p_t(z,y) m(z)`. Domains for the
/// monotonicity check default to balls around the first probe.
pub fn semigroup_suite(
    graph: &Graph,
    times: &[f64],
    probes: &[VertexId],
    domains: Option<&[VertexSet]>,
    backend: Backend,
    exec: &dyn Executor,
) -> Result<SemigroupReport> {
    if probes.is_empty() || times.is_empty() {
        return Err(Error::EmptySet);
    }
    let np = probes.len();
    let all: Vec<VertexId> = graph.vertices().collect();
    let mut grid: Vec<f64> = times.to_vec();
    grid.push(0.0);
    for w in times.windows(2) {
        grid.push(w[0] + w[1]);
    }
    let at = |t: f64| grid.iter().position(|&g| g == t).expect("time on grid");
    // columns p(·, y) for y in probes; rows cover the whole graph
    let full = heat_kernel_finite(graph, &grid, &all, probes, backend, exec)?;
    let p = |s: &HeatKernelSlice, ti: usize, z: VertexId, yi: usize| s.value(ti, z.index(), yi);
    // Dense eigen-sums carry an absolute error of order n·ε times the largest
    // entry; below that scale the relative checks compare absolutely.
    let dense_floor = |s: &HeatKernelSlice, ti: usize, tol: f64| {
        let n = s.sources.len() * s.targets.len();
        let top = s.log_values()[ti * n..(ti + 1) * n].iter().fold(0.0, |m: f64, &l| m.max(exp(l)));
        10.0 * graph.len() as f64 * f64::EPSILON / tol * top
    };
    let floor = |s: &HeatKernelSlice, ti: usize| match backend {
        Backend::ExpmAction => f64::MIN_POSITIVE,
        Backend::DenseEig => dense_floor(s, ti, TOL),
    };
    let mut checks = Vec::new();

    let mut worst = 0.0f64;
    let mut n = 0;
    for ti in 0..grid.len() {
        let f = floor(&full, ti);
        for (xi, &x) in probes.iter().enumerate() {
            for yi in 0..np {
                worst = worst.max(rel(p(&full, ti, x, yi), p(&full, ti, probes[yi], xi), f));
                n += 1;
            }
        }
    }
    checks.push(SemigroupCheck::new("symmetry", worst, TOL, n));

    let (mut worst, mut n) = (0.0f64, 0);
    for w in times.windows(2) {
        let (si, ti, sti) = (at(w[0]), at(w[1]), at(w[0] + w[1]));
        let f = floor(&full, sti);
        for (xi, &x) in probes.iter().enumerate() {
            for yi in 0..np {
                let conv: f64 = all
                    .iter()
                    .map(|&z| p(&full, si, z, xi) * p(&full, ti, z, yi) * graph.measure(z))
                    .sum();
                worst = worst.max(rel(conv, p(&full, sti, x, yi), f));
                n += 1;
            }
        }
    }
    checks.push(SemigroupCheck::new("chapman-kolmogorov", worst, TOL, n));

    let (mut worst, mut n) = (0.0f64, 0);
    for ti in 0..grid.len() {
        for yi in 0..np {
            let mass: f64 = all.iter().map(|&z| p(&full, ti, z, yi) * graph.measure(z)).sum();
            let negative = all.iter().map(|&z| -p(&full, ti, z, yi)).fold(0.0, f64::max);
            worst = worst.max(mass - 1.0).max(negative);
            n += 1;
        }
    }
    checks.push(SemigroupCheck::new("sub-stochastic", worst, 1e-12, n));

    let (mut worst, mut n) = (0.0f64, 0);
    let t0 = at(0.0);
    for &x in probes {
        for (yi, &y) in probes.iter().enumerate() {
            let want = if x == y { 1.0 / graph.measure(x) } else { 0.0 };
            worst = worst.max(fabs(p(&full, t0, x, yi) - want) * graph.measure(x));
            n += 1;
        }
    }
    checks.push(SemigroupCheck::new("identity-at-zero", worst, 1e-12, n));

    let owned;
    let domains = match domains {
        Some(d) => d,
        None => {
            owned = default_domains(graph, probes[0])?;
            &owned[..]
        }
    };
    let (mut worst, mut n) = (0.0f64, 0);
    let mut previous: Option<(&VertexSet, HeatKernelSlice, Vec<usize>)> = None;
    for u in domains {
        let inside: Vec<usize> = (0..np).filter(|&i| u.contains(probes[i])).collect();
        let ids: Vec<VertexId> = inside.iter().map(|&i| probes[i]).collect();
        let s = if ids.is_empty() {
            None
        } else {
            Some(heat_kernel_dirichlet(graph, u, &grid, &ids, &ids, backend, exec)?)
        };
        if let (Some((pu, ps, pin)), Some(s)) = (&previous, &s) {
            if !pu.is_subset_of(u) {
                return Err(Error::InvalidParameter("domains must be nested".into()));
            }
            for ti in 0..grid.len() {
                let f = floor(s, ti);
                for (a, &i) in pin.iter().enumerate() {
                    for (b, &j) in pin.iter().enumerate() {
                        let (ia, jb) = (
                            inside.iter().position(|&k| k == i).expect("nested"),
                            inside.iter().position(|&k| k == j).expect("nested"),
                        );
                        let small = ps.value(ti, a, b);
                        let big = s.value(ti, ia, jb);
                        worst = worst.max((small - big) / big.max(f));
                        n += 1;
                    }
                }
            }
        }
        if let Some(s) = s {
            previous = Some((u, s, inside));
        }
    }
    checks.push(SemigroupCheck::new("dirichlet-monotone", worst, TOL, n));

    let (mut worst, mut n) = (0.0f64, 0);
    for u in domains.iter().filter(|u| u.len() <= LAMBDA_COMPARE_LIMIT) {
        let dense = dirichlet_lambda_with(graph, u, EigenMethod::Dense)?;
        let lanczos = dirichlet_lambda_with(graph, u, EigenMethod::Lanczos)?;
        // λ(X) = 0 on a finite graph: compare on the scale of the spectrum there
        worst = worst.max(fabs(dense - lanczos) / dense.abs().max(1e-6 * graph.max_weighted_degree()));
        n += 1;
    }
    checks.push(SemigroupCheck::new("lambda-lanczos-dense", worst, 1e-8, n));

    let (mut worst, mut n) = (0.0f64, 0);
    if graph.len() <= DENSE_EIGEN_LIMIT {
        let other = match backend {
            Backend::DenseEig => Backend::ExpmAction,
            Backend::ExpmAction => Backend::DenseEig,
        };
        let alt = heat_kernel_finite(graph, &grid, probes, probes, other, exec)?;
        for ti in 0..grid.len() {
            let floor = match backend {
                Backend::DenseEig => dense_floor(&full, ti, AGREEMENT_TOL),
                Backend::ExpmAction => dense_floor(&alt, ti, AGREEMENT_TOL),
            };
            for (xi, &x) in probes.iter().enumerate() {
                for yi in 0..np {
                    let (a, b) = (p(&full, ti, x, yi), alt.value(ti, xi, yi));
                    worst = worst.max(fabs(a - b) / a.max(b).max(floor));
                    n += 1;
                }
            }
        }
    }
    checks.push(SemigroupCheck::new("backend-agreement", worst, AGREEMENT_TOL, n));

    Ok(SemigroupReport { checks })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::Sequential;
    use crate::graph::{build_anti_tree, build_lattice_box, ConductanceRule, MeasureRule};

    fn probes(g: &Graph, labels: &[&str]) -> Vec<VertexId> {
        labels.iter().map(|l| g.require(l).unwrap()).collect()
    }

    #[test]
    fn suite_passes_on_small_graphs() {
        let times = [0.1, 0.5, 1.0, 3.0];
        let z = build_lattice_box(1, 12, ConductanceRule::Constant(1.0), MeasureRule::Constant(1.0)).unwrap();
        let r = semigroup_suite(&z, &times, &probes(&z, &["0", "3", "-5"]), None, Backend::ExpmAction, &Sequential).unwrap();
        assert!(r.pass(), "{r:?}");
        assert!(r.checks.iter().all(|c| c.points > 0));

        let z2 = build_lattice_box(2, 4, ConductanceRule::IidUniform { lo: 1.0, hi: 2.0, seed: 7 }, MeasureRule::Constant(2.0)).unwrap();
        let r = semigroup_suite(&z2, &times, &probes(&z2, &["0,0", "1,-2"]), None, Backend::DenseEig, &Sequential).unwrap();
        assert!(r.pass(), "{r:?}");

        let at = build_anti_tree(1.0, 6).unwrap();
        let r = semigroup_suite(&at, &times, &probes(&at, &["o", "3:1"]), None, Backend::ExpmAction, &Sequential).unwrap();
        assert!(r.pass(), "{r:?}");
    }
}
