//! Gaussian-type bounds: universal, Davies, Pang, and the (G)/(VD) forms.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use libm::{log, sqrt};

use super::{require_vertices, BallProfile, BoundReport, Provenance, ReportBuilder, LOG_TOL};
use crate::bounds::{davies_rhs, g_rhs, pang_envelope, universal_rhs, vd_rhs, ErrorParams};
use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::graph::{Graph, VertexId, VertexSet};
use crate::heat::{heat_kernel_finite, ln_exact_integer_line_kernel, Backend, HeatKernelSlice};
use crate::metric::{check_intrinsic, regularity_constant, davies_metric, MetricKind, PseudoMetric};

fn provenance(graph: &Graph, metric: Option<&PseudoMetric>, backend: Backend) -> Provenance {
    Provenance {
        graph_hash: Some(graph.content_hash()),
        metric: metric.map(|m| String::from(m.kind().as_str())),
        backend: Some(String::from(backend.as_str())),
        ..Provenance::default()
    }
}

/// Universal Gaussian bound for an intrinsic metric with jump size `≤ S`.
///
/// Refuses metrics that are not intrinsic or have larger jumps. The
/// maximal intrinsic metric `ρ_S` is generally not intrinsic itself but is
/// a supremum of intrinsic metrics with jump `≤ S`, so for it only the jump
/// size is checked.
#[allow(clippy::too_many_arguments)]
pub fn verify_universal(
    graph: &Graph,
    metric: &PseudoMetric,
    jump: f64,
    times: &[f64],
    sources: &[VertexId],
    targets: &[VertexId],
    backend: Backend,
    exec: &dyn Executor,
) -> Result<BoundReport> {
    require_vertices(graph, sources)?;
    require_vertices(graph, targets)?;
    let report = check_intrinsic(graph, metric)?;
    if metric.kind() != MetricKind::MaxIntrinsic && !report.is_intrinsic {
        return Err(Error::Precondition(format!(
            "metric is not intrinsic: Σ b ρ² / m reaches {} at {}",
            report.max_ratio,
            graph.label(report.worst_vertex)
        )));
    }
    if report.jump > jump * (1.0 + 1e-12) {
        return Err(Error::Precondition(format!(
            "metric jump size {} exceeds S = {jump}",
            report.jump
        )));
    }
    let slice = heat_kernel_finite(graph, times, sources, targets, backend, exec)?;
    let mut b = ReportBuilder::new("universal", format!("universal(S={jump})"));
    b.param("S", jump).provenance(provenance(graph, Some(metric), backend));
    let mut allowance = LOG_TOL;
    if metric.kind() == MetricKind::MaxIntrinsic {
        b.note("metric is the maximal intrinsic metric; only its jump size was checked");
    }
    if let Some(tol) = metric_solver_tol(metric) {
        allowance += tol;
    }
    for (xi, &x) in sources.iter().enumerate() {
        let d = metric.distances_to(x, targets);
        for (yi, &y) in targets.iter().enumerate() {
            for (ti, &t) in times.iter().enumerate() {
                let rhs = universal_rhs(graph.measure(x), graph.measure(y), d[yi], t, jump)?;
                b.point(0, t, graph.label(x), graph.label(y), slice.log_value(ti, xi, yi), rhs);
            }
        }
    }
    Ok(b.finish(allowance, None))
}

fn metric_solver_tol(metric: &PseudoMetric) -> Option<f64> {
    matches!(metric.kind(), MetricKind::MaxIntrinsic | MetricKind::Davies).then_some(1e-6)
}

/// Davies' bound with `S = S_reg` (certified upper value) and `ρ_ℇ` from the
/// form-metric program. PASS iff every ratio is at most `1 + 10·tol`.
#[allow(clippy::too_many_arguments)]
pub fn verify_davies(
    graph: &Graph,
    times: &[f64],
    sources: &[VertexId],
    targets: &[VertexId],
    tol: f64,
    backend: Backend,
    exec: &dyn Executor,
) -> Result<BoundReport> {
    require_vertices(graph, sources)?;
    require_vertices(graph, targets)?;
    let reg = regularity_constant(graph, tol)?;
    let jump = reg.upper;
    let slice = heat_kernel_finite(graph, times, sources, targets, backend, exec)?;
    let mut b = ReportBuilder::new("davies", format!("davies(S={jump})"));
    b.param("S", jump).param("solver_tol", tol);
    let mut prov = provenance(graph, None, backend);
    prov.metric = Some(String::from(MetricKind::Davies.as_str()));
    prov.solver_tol = Some(tol);
    b.provenance(prov);
    let mut cache: alloc::collections::BTreeMap<(u32, u32), f64> = Default::default();
    for (xi, &x) in sources.iter().enumerate() {
        for (yi, &y) in targets.iter().enumerate() {
            let rho = if x == y {
                0.0
            } else {
                let key = (x.0.min(y.0), x.0.max(y.0));
                match cache.get(&key) {
                    Some(&v) => v,
                    None => {
                        let v = davies_metric(graph, x, y, tol)?.0;
                        cache.insert(key, v);
                        v
                    }
                }
            };
            for (ti, &t) in times.iter().enumerate() {
                let rhs = davies_rhs(graph.measure(x), graph.measure(y), rho, t, jump)?;
                b.point(0, t, graph.label(x), graph.label(y), slice.log_value(ti, xi, yi), rhs);
            }
        }
    }
    Ok(b.finish(log(1.0 + 10.0 * tol), None))
}

/// Smallest `c ≥ 1` such that the Pang sandwich holds for the explicit
/// integer-line kernel on `d ≤ d_max`, `t ∈ times`. Series `upper` compares
/// the kernel to the upper envelope, series `lower` the lower envelope to
/// the kernel; the fitted constant is `max(1, worst ratio)` and the worst
/// point is the binding one.
pub fn fit_pang_constant(d_max: u32, times: &[f64]) -> Result<BoundReport> {
    let mut b = ReportBuilder::new("pang", "pang sandwich");
    let ids = b.set_series(&["upper", "lower"]);
    b.param("d_max", d_max as f64);
    b.provenance(Provenance {
        backend: Some(String::from("exact-line")),
        ..Provenance::default()
    });
    for &t in times {
        for d in 0..=d_max {
            let p = ln_exact_integer_line_kernel(d, t)?;
            let (lo, hi) = pang_envelope(d as f64, t, 1.0)?;
            let y = format!("{d}");
            b.point(ids[0], t, "0", &y, p, hi);
            b.point(ids[1], t, "0", &y, lo, p);
        }
    }
    let (worst, _) = b.worst();
    let c = libm::exp(worst.max(0.0));
    let allowance = log(c) + 1e-12;
    Ok(b.finish(allowance, Some(c)))
}

/// Volumes `m(B_x(√t))` for the (G) form.
fn volumes_for(
    graph: &Graph,
    metric: &PseudoMetric,
    labels: &[String],
    boundary: Option<&VertexSet>,
) -> Result<(Vec<VertexId>, Vec<BallProfile>)> {
    let ids: Vec<VertexId> = labels.iter().map(|l| graph.require(l)).collect::<Result<_>>()?;
    let balls = ids.iter().map(|&v| BallProfile::new(graph, metric, v, boundary)).collect();
    Ok((ids, balls))
}

/// (G) bound `p_t ≤ C Ψ (1 ∨ (t/S²)arsinh²(ρS/t))^{N/2} / √(m(B_x(√t))m(B_y(√t))) e^{−(t/S²)ζ(ρS/t)}`
/// on a precomputed kernel slice. `graph` and `metric` provide distances
/// and volumes and may be larger than the kernel's domain; `boundary`
/// marks where `graph` stops representing the infinite graph. With
/// `params = None`, `Ψ ≡ 1`. The fitted constant is the smallest `C`.
#[allow(clippy::too_many_arguments)]
pub fn verify_g(
    graph: &Graph,
    slice: &HeatKernelSlice,
    metric: &PseudoMetric,
    jump: f64,
    params: Option<&ErrorParams>,
    big_n: f64,
    c_max: f64,
    boundary: Option<&VertexSet>,
) -> Result<BoundReport> {
    let (xs, bx) = volumes_for(graph, metric, &slice.sources, boundary)?;
    let (ys, by) = volumes_for(graph, metric, &slice.targets, boundary)?;
    let form = if params.is_some() { "psi" } else { "constant" };
    let mut b = ReportBuilder::new("g-form", format!("G({form}, N={big_n}, S={jump})"));
    b.param("S", jump).param("N", big_n).param("C_max", c_max);
    if let Some(p) = params {
        b.param("n", p.n).param("r", p.r);
    }
    let mut prov = provenance(graph, Some(metric), slice.backend);
    prov.truncation = slice.truncation.as_ref().map(|r| {
        format!(
            "{}: radius {} (previous {:?}), max change {:e}, converged {}",
            r.family, r.radius, r.previous_radius, r.max_change, r.converged
        )
    });
    b.provenance(prov);
    for (xi, &x) in xs.iter().enumerate() {
        let d = metric.distances_to(x, &ys);
        for (yi, &y) in ys.iter().enumerate() {
            for (ti, &t) in slice.times.iter().enumerate() {
                if t == 0.0 {
                    continue;
                }
                let r = sqrt(t);
                let (vx, vy) = (bx[xi].volume(r)?, by[yi].volume(r)?);
                let log_psi = match params {
                    Some(p) => p.log_psi(t, d[yi], graph.weighted_degree(x), graph.weighted_degree(y))?,
                    None => 0.0,
                };
                let rhs = g_rhs(vx, vy, d[yi], t, jump, log_psi, big_n)?.total();
                b.point(0, t, graph.label(x), graph.label(y), slice.log_value(ti, xi, yi), rhs);
            }
        }
    }
    Ok(b.finish_fitted(c_max, LOG_TOL))
}

/// (VD) bound `m(B_x(R))/m(B_x(r)) ≤ C Φ_x(r) (R/r)^N` over `centers` and
/// `(r, R)` pairs. With `params = None`, `Φ ≡ 1`. The `t` column of the
/// report holds `R`, the labels are the center and `r`.
#[allow(clippy::too_many_arguments)]
pub fn verify_vd(
    graph: &Graph,
    metric: &PseudoMetric,
    centers: &[VertexId],
    radii: &[(f64, f64)],
    params: Option<&ErrorParams>,
    big_n: f64,
    c_max: f64,
    boundary: Option<&VertexSet>,
) -> Result<BoundReport> {
    require_vertices(graph, centers)?;
    let form = if params.is_some() { "phi" } else { "constant" };
    let mut b = ReportBuilder::new("vd-form", format!("VD({form}, N={big_n})"));
    b.param("N", big_n).param("C_max", c_max);
    b.provenance(Provenance {
        graph_hash: Some(graph.content_hash()),
        metric: Some(String::from(metric.kind().as_str())),
        ..Provenance::default()
    });
    for &x in centers {
        let balls = BallProfile::new(graph, metric, x, boundary);
        for &(r, big_r) in radii {
            let lhs = log(balls.volume(big_r)?) - log(balls.volume(r)?);
            let log_phi = match params {
                Some(p) => p.log_phi(graph.weighted_degree(x), r)?,
                None => 0.0,
            };
            let rhs = vd_rhs(log_phi, big_n, r, big_r)?;
            b.point(0, big_r, graph.label(x), &format!("r={r}"), lhs, rhs);
        }
    }
    Ok(b.finish_fitted(c_max, LOG_TOL))
}

/// Inputs of the forward direction (FK ⇒ G & VD): a kernel slice of the
/// infinite graph (typically from exhaustion) and a large finite piece of
/// the graph for distances and volumes.
#[derive(Clone, Copy, Debug)]
pub struct ForwardSetup<'a> {
    pub graph: &'a Graph,
    pub metric: &'a PseudoMetric,
    pub boundary: Option<&'a VertexSet>,
    pub kernel: &'a HeatKernelSlice,
    pub params: ErrorParams,
    pub vd_centers: &'a [VertexId],
    pub vd_radii: &'a [(f64, f64)],
    /// Largest acceptable fitted constant.
    pub c_max: f64,
}

#[derive(Clone, Debug)]
pub struct ForwardReport {
    pub g: BoundReport,
    pub vd: BoundReport,
    /// `max` of both fitted constants: one `C` serving both properties.
    pub common_constant: f64,
    /// `r < 1000 S`: the hypothesis on the Faber–Krahn radius was relaxed.
    pub hypothesis_relaxed: bool,
    pub pass: bool,
}

/// Checks `G(CΨ, n)` and `VD(CΦ, n)` with the error functions of `params`
/// and reports the fitted `C` of each.
pub fn theorem_main_forward(setup: &ForwardSetup<'_>) -> Result<ForwardReport> {
    let p = &setup.params;
    let relaxed = p.r < 1000.0 * p.s;
    let mut g = verify_g(
        setup.graph,
        setup.kernel,
        setup.metric,
        p.s,
        Some(p),
        p.n,
        setup.c_max,
        setup.boundary,
    )?;
    let mut vd = verify_vd(
        setup.graph,
        setup.metric,
        setup.vd_centers,
        setup.vd_radii,
        Some(p),
        p.n,
        setup.c_max,
        setup.boundary,
    )?;
    if relaxed {
        for r in [&mut g, &mut vd] {
            r.notes.push(format!("hypothesis relaxed: r = {} < 1000 S = {}", p.r, 1000.0 * p.s));
        }
    }
    let common = g.fitted_constant.unwrap_or(0.0).max(vd.fitted_constant.unwrap_or(0.0));
    Ok(ForwardReport {
        pass: g.pass && vd.pass,
        g,
        vd,
        common_constant: common,
        hypothesis_relaxed: relaxed,
    })
}
