//! The form metric `ρ_ℇ(x,y) = sup{ψ(x) − ψ(y) : ‖Γ(ψ)‖_∞ ≤ 1}` and the
//! maximal intrinsic metric `ρ_S`, both as convex programs.

use alloc::format;
use alloc::vec::Vec;

use libm::sqrt;

use super::{metric_closure, MetricKind, PseudoMetric};
use crate::error::{Error, Result};
use crate::graph::{Graph, VertexId};
use crate::solver::{BarrierOptions, Constraint, ConvexProgram, SolverCertificate};

/// Largest graph accepted by the form-metric program.
pub const DAVIES_MAX_VERTICES: usize = 20_000;
/// Largest graph accepted by the `ρ_S` program (its Newton systems are dense).
pub const MAX_INTRINSIC_MAX_VERTICES: usize = 200;

fn check_pair(graph: &Graph, x: VertexId, y: VertexId, tol: f64) -> Result<()> {
    for v in [x, y] {
        if v.index() >= graph.len() {
            return Err(Error::UnknownVertex(format!("#{}", v.0)));
        }
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("solver tolerance {tol}")));
    }
    Ok(())
}

fn trivial(tol: f64) -> SolverCertificate {
    SolverCertificate {
        objective: 0.0,
        residual: 0.0,
        iterations: 0,
        gap: 0.0,
        tolerance: tol,
    }
}

/// `ρ_ℇ(x, y)` with `ψ` pinned to zero at the first vertex.
pub fn davies_metric(graph: &Graph, x: VertexId, y: VertexId, tol: f64) -> Result<(f64, SolverCertificate)> {
    davies_metric_anchored(graph, x, y, tol, VertexId(0))
}

/// `ρ_ℇ(x, y)` with `ψ(anchor) = 0`. The objective is invariant under adding
/// constants to `ψ`, so the anchor only removes the flat direction.
pub fn davies_metric_anchored(
    graph: &Graph,
    x: VertexId,
    y: VertexId,
    tol: f64,
    anchor: VertexId,
) -> Result<(f64, SolverCertificate)> {
    check_pair(graph, x, y, tol)?;
    check_pair(graph, anchor, anchor, tol)?;
    if graph.len() > DAVIES_MAX_VERTICES {
        return Err(Error::TooLarge {
            what: "form metric program",
            n: graph.len(),
            max: DAVIES_MAX_VERTICES,
        });
    }
    if x == y {
        return Ok((0.0, trivial(tol)));
    }
    let a = anchor.index();
    let var = |v: VertexId| -> Option<usize> {
        match v.index() {
            i if i == a => None,
            i if i > a => Some(i - 1),
            i => Some(i),
        }
    };
    let mut constraints = Vec::with_capacity(graph.len());
    for z in graph.vertices() {
        let scale = 0.5 / graph.measure(z);
        let squares = graph
            .neighbors(z)
            .iter()
            .map(|&(w, b)| {
                let mut terms = Vec::with_capacity(2);
                if let Some(i) = var(z) {
                    terms.push((i, 1.0));
                }
                if let Some(j) = var(w) {
                    terms.push((j, -1.0));
                }
                (b * scale, terms)
            })
            .collect();
        constraints.push(Constraint::new(squares, Vec::new(), 1.0));
    }
    let mut objective = Vec::new();
    if let Some(i) = var(x) {
        objective.push((i, 1.0));
    }
    if let Some(j) = var(y) {
        objective.push((j, -1.0));
    }
    let program = ConvexProgram::new(graph.len() - 1, objective, constraints);
    let opts = BarrierOptions {
        tol,
        ..BarrierOptions::default()
    };
    let (_, cert) = program.solve(alloc::vec![0.0; graph.len() - 1], opts)?;
    Ok((cert.objective, cert))
}

/// `ρ_S(x, y)`: the largest value of `ρ(x, y)` over pseudo-metrics that are
/// intrinsic and have jump size at most `S`.
///
/// Such a `ρ` is dominated by the path metric of its own edge values, which
/// is again intrinsic with jump size at most `S`. So `ρ_S(x, y)` is the
/// largest shortest-path distance over edge lengths `ℓ` with `ℓ ≤ S` and
/// `Σ_w b(u,w) ℓ(u,w)² ≤ m(u)`, written with potentials `φ`, `φ(x) = 0`,
/// `|φ(u) − φ(w)| ≤ ℓ(u,w)`, maximizing `φ(y)`.
pub fn max_intrinsic_metric(
    graph: &Graph,
    x: VertexId,
    y: VertexId,
    jump: f64,
    tol: f64,
) -> Result<(f64, SolverCertificate)> {
    check_pair(graph, x, y, tol)?;
    if !(jump > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "jump size must be positive, got {jump}"
        )));
    }
    let n = graph.len();
    if n > MAX_INTRINSIC_MAX_VERTICES {
        return Err(Error::TooLarge {
            what: "maximal intrinsic metric program",
            n,
            max: MAX_INTRINSIC_MAX_VERTICES,
        });
    }
    if x == y {
        return Ok((0.0, trivial(tol)));
    }
    let a = x.index();
    let phi = |v: VertexId| -> Option<usize> {
        match v.index() {
            i if i == a => None,
            i if i > a => Some(i - 1),
            i => Some(i),
        }
    };
    let edges = graph.edges();
    let len = |k: usize| n - 1 + k;
    let mut constraints = Vec::with_capacity(3 * edges.len() + n);
    for (k, e) in edges.iter().enumerate() {
        for sign in [1.0, -1.0] {
            let mut terms = alloc::vec![(len(k), -1.0)];
            if let Some(i) = phi(e.u) {
                terms.push((i, sign));
            }
            if let Some(j) = phi(e.v) {
                terms.push((j, -sign));
            }
            constraints.push(Constraint::linear(terms, 0.0));
        }
        constraints.push(Constraint::linear(alloc::vec![(len(k), 1.0)], jump));
    }
    let mut incident: Vec<Vec<(f64, Vec<(usize, f64)>)>> = alloc::vec![Vec::new(); n];
    for (k, e) in edges.iter().enumerate() {
        incident[e.u.index()].push((e.weight, alloc::vec![(len(k), 1.0)]));
        incident[e.v.index()].push((e.weight, alloc::vec![(len(k), 1.0)]));
    }
    for (u, squares) in incident.into_iter().enumerate() {
        constraints.push(Constraint::new(squares, Vec::new(), graph.measure(VertexId::from(u))));
    }
    let eps = 0.5
        * graph
            .vertices()
            .map(|u| sqrt(1.0 / graph.weighted_degree(u)))
            .fold(jump, f64::min);
    let dim = n - 1 + edges.len();
    let mut x0 = alloc::vec![0.0; dim];
    x0[n - 1..].iter_mut().for_each(|l| *l = eps);
    let objective = alloc::vec![(phi(y).expect("y differs from x"), 1.0)];
    let program = ConvexProgram::new(dim, objective, constraints);
    let opts = BarrierOptions {
        tol,
        ..BarrierOptions::default()
    };
    let (_, cert) = program.solve(x0, opts)?;
    Ok((cert.objective, cert))
}

/// All-pairs table of an optimized metric with per-entry certificates folded in.
#[derive(Clone, Debug)]
pub struct MetricTable {
    pub n: usize,
    /// Row-major values.
    pub values: Vec<f64>,
    /// Largest certified gap over all entries.
    pub max_gap: f64,
    pub iterations: usize,
    pub tolerance: f64,
}

impl MetricTable {
    pub fn get(&self, x: VertexId, y: VertexId) -> f64 {
        self.values[x.index() * self.n + y.index()]
    }

    pub fn to_metric(&self, kind: MetricKind, jump_bound: Option<f64>) -> Result<PseudoMetric> {
        PseudoMetric::from_table(self.n, self.values.clone(), kind, jump_bound)
    }
}

fn all_pairs(
    n: usize,
    tol: f64,
    mut solve: impl FnMut(usize, usize) -> Result<(f64, SolverCertificate)>,
) -> Result<MetricTable> {
    let mut values = alloc::vec![0.0; n * n];
    let mut max_gap = 0.0f64;
    let mut iterations = 0;
    for i in 0..n {
        for j in i + 1..n {
            let (v, cert) = solve(i, j)?;
            values[i * n + j] = v;
            values[j * n + i] = v;
            max_gap = max_gap.max(cert.gap);
            iterations += cert.iterations;
        }
    }
    Ok(MetricTable {
        n,
        values,
        max_gap,
        iterations,
        tolerance: tol,
    })
}

/// `ρ_ℇ` on all pairs. Entries are solved independently; the table is a
/// pseudo-metric up to the solver tolerance.
pub fn davies_table(graph: &Graph, tol: f64) -> Result<MetricTable> {
    all_pairs(graph.len(), tol, |i, j| {
        davies_metric(graph, VertexId::from(i), VertexId::from(j), tol)
    })
}

/// `ρ_S` on all pairs, followed by a metric closure so that every triangle
/// inequality holds to rounding. The closure moves entries by at most the
/// solver gap.
pub fn max_intrinsic_table(graph: &Graph, jump: f64, tol: f64) -> Result<MetricTable> {
    let mut table = all_pairs(graph.len(), tol, |i, j| {
        max_intrinsic_metric(graph, VertexId::from(i), VertexId::from(j), jump, tol)
    })?;
    metric_closure(table.n, &mut table.values);
    Ok(table)
}

/// `S_reg = max over edges (u,v) of ρ_ℇ(u,v)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Regularity {
    pub value: f64,
    /// Certified upper bound `value + gap`.
    pub upper: f64,
    pub worst_edge: (VertexId, VertexId),
}

pub fn regularity_constant(graph: &Graph, tol: f64) -> Result<Regularity> {
    let mut best = Regularity {
        value: 0.0,
        upper: 0.0,
        worst_edge: (VertexId(0), VertexId(0)),
    };
    for e in graph.edges() {
        let (v, cert) = davies_metric(graph, e.u, e.v, tol)?;
        if v > best.value {
            best.value = v;
            best.worst_edge = (e.u, e.v);
        }
        best.upper = best.upper.max(cert.upper());
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_graph, build_lattice_box, ConductanceRule, EdgeSpec, MeasureRule, VertexSpec};
    use core::f64::consts::SQRT_2;

    fn path(n: usize, b: f64) -> Graph {
        let vs: Vec<_> = (0..n).map(|i| VertexSpec::new(format!("{i}"), 1.0)).collect();
        let es: Vec<_> = (1..n)
            .map(|i| EdgeSpec::new(format!("{}", i - 1), format!("{i}"), b))
            .collect();
        build_graph(&vs, &es).unwrap()
    }

    #[test]
    fn davies_closed_forms() {
        let tol = 1e-9;
        let (v, cert) = davies_metric(&path(2, 1.0), VertexId(0), VertexId(1), tol).unwrap();
        assert!((v - SQRT_2).abs() < 1e-7, "{v}");
        assert!(cert.gap <= tol);
        let g = path(3, 1.0);
        let (v, _) = davies_metric(&g, VertexId(0), VertexId(2), tol).unwrap();
        assert!((v - 2.0).abs() < 1e-7, "{v}");
        let (w, _) = davies_metric_anchored(&g, VertexId(0), VertexId(2), tol, VertexId(2)).unwrap();
        assert!((v - w).abs() < 1e-7);
        assert_eq!(davies_metric(&g, VertexId(1), VertexId(1), tol).unwrap().0, 0.0);
    }

    #[test]
    fn max_intrinsic_closed_forms() {
        let tol = 1e-9;
        let g = path(2, 1.0);
        let (v, _) = max_intrinsic_metric(&g, VertexId(0), VertexId(1), 1.0, tol).unwrap();
        assert!((v - 1.0).abs() < 1e-7);
        let (v, _) = max_intrinsic_metric(&g, VertexId(0), VertexId(1), 0.5, tol).unwrap();
        assert!((v - 0.5).abs() < 1e-7);
        let (v, _) = max_intrinsic_metric(&path(3, 1.0), VertexId(0), VertexId(2), 10.0, tol).unwrap();
        assert!((v - SQRT_2).abs() < 1e-7, "{v}");
    }

    #[test]
    fn regularity_on_paths() {
        let tol = 1e-9;
        let r = regularity_constant(&path(2, 1.0), tol).unwrap();
        assert!((r.value - SQRT_2).abs() < 1e-7);
        let g = build_lattice_box(1, 6, ConductanceRule::Constant(1.0), MeasureRule::Constant(1.0)).unwrap();
        let r = regularity_constant(&g, tol).unwrap();
        assert!((r.value - SQRT_2).abs() < 1e-6, "{}", r.value);
        let r = regularity_constant(&path(6, 2.0), tol).unwrap();
        assert!((r.value - 1.0).abs() < 1e-6, "{}", r.value);
    }

    #[test]
    fn max_intrinsic_table_is_a_metric() {
        let g = path(4, 1.0);
        let t = max_intrinsic_table(&g, 1.0, 1e-9).unwrap();
        let m = t.to_metric(MetricKind::MaxIntrinsic, Some(1.0)).unwrap();
        assert!(m.triangle_defect().unwrap() <= 1e-9);
    }
}
