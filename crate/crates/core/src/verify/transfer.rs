//! Two-point transfer: off-diagonal bounds from on-diagonal ones.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use libm::{exp, log};

use super::{require_vertices, BoundReport, Provenance, ReportBuilder, LOG_TOL};
use crate::bounds::{regular_function_check, RegularityCheck};
use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::graph::{Graph, VertexId};
use crate::heat::{heat_kernel_finite, Backend};
use crate::metric::{check_intrinsic, PseudoMetric};

/// Largest `κ` with `p_t(z,z) ≤ 1/(m(z) κ shape(t))` on the grid, so that
/// `f_z = κ·shape` satisfies the on-diagonal hypothesis.
pub fn calibrate_on_diagonal(
    graph: &Graph,
    z: VertexId,
    times: &[f64],
    shape: &dyn Fn(f64) -> f64,
    backend: Backend,
    exec: &dyn Executor,
) -> Result<f64> {
    let s = heat_kernel_finite(graph, times, &[z], &[z], backend, exec)?;
    let ln_m = log(graph.measure(z));
    let ln_kappa = times
        .iter()
        .enumerate()
        .map(|(ti, &t)| -(s.log_value(ti, 0, 0) + ln_m + log(shape(t))))
        .fold(f64::INFINITY, f64::min);
    Ok(exp(ln_kappa))
}

#[derive(Clone, Debug)]
pub struct TransferReport {
    pub report: BoundReport,
    pub regularity: [RegularityCheck; 2],
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
}

/// Regularity parameters and exponential growth rate of the on-diagonal
/// functions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransferHypothesis {
    pub a: f64,
    pub gamma: f64,
    pub delta: f64,
}

/// Checks the hypotheses of the two-point transfer on the grid (regularity
/// of `f_x`, `f_y`; `sup f/e^{δt} < ∞`; `p_t(z,z) ≤ 1/(m(z) f_z(t))`) and
/// fits constants in
/// `p_t(x,y) ≤ c₁ / (√(m(x)m(y)) √(f_x(c₂t) f_y(c₂t))) exp(−c₃ ρ²/t)`
/// for grid `t ≥ ρ(x,y)`.
///
/// The fit fixes `c₂ = 1`, takes `c₁(0)` as the constant needed without
/// Gaussian factor, and chooses the largest `c₃` for which
/// `c₁(c₃) ≤ 2 c₁(0)`; `c₁` is then `c₁(c₃)`.
#[allow(clippy::too_many_arguments)]
pub fn two_point_transfer_check(
    graph: &Graph,
    metric: &PseudoMetric,
    x: VertexId,
    y: VertexId,
    times: &[f64],
    f_x: &dyn Fn(f64) -> f64,
    f_y: &dyn Fn(f64) -> f64,
    hyp: TransferHypothesis,
    backend: Backend,
    exec: &dyn Executor,
) -> Result<TransferReport> {
    require_vertices(graph, &[x, y])?;
    let intrinsic = check_intrinsic(graph, metric)?;
    if !intrinsic.is_intrinsic || intrinsic.jump > 1.0 + 1e-12 {
        return Err(Error::Precondition(format!(
            "transfer needs an intrinsic metric with jump size <= 1 (ratio {}, jump {})",
            intrinsic.max_ratio, intrinsic.jump
        )));
    }
    let rx = regular_function_check(f_x, times, hyp.a, hyp.gamma)?;
    let ry = regular_function_check(f_y, times, hyp.a, hyp.gamma)?;
    if !rx.regular || !ry.regular {
        return Err(Error::Precondition(format!(
            "on-diagonal functions are not ({}, {})-regular on the grid (worst ratios {}, {})",
            hyp.a, hyp.gamma, rx.worst_ratio, ry.worst_ratio
        )));
    }
    for (name, f) in [("f_x", f_x), ("f_y", f_y)] {
        for &t in times {
            let v = f(t);
            if !(v > 0.0) || !(v * exp(-hyp.delta * t)).is_finite() {
                return Err(Error::Precondition(format!("{name}({t}) = {v} is not positive with finite e^(-δt) growth")));
            }
        }
    }
    let s = heat_kernel_finite(graph, times, &[x, y], &[x, y], backend, exec)?;
    for (zi, (z, f)) in [(x, f_x), (y, f_y)].into_iter().enumerate() {
        for (ti, &t) in times.iter().enumerate() {
            let bound = -log(graph.measure(z)) - log(f(t));
            if s.log_value(ti, zi, zi) > bound + LOG_TOL {
                return Err(Error::Precondition(format!(
                    "on-diagonal hypothesis fails at {} for t = {t}",
                    graph.label(z)
                )));
            }
        }
    }
    let rho = metric.distance(x, y);
    let half_ln_m = 0.5 * (log(graph.measure(x)) + log(graph.measure(y)));
    // requirement per grid point: a + c₃ q ≤ ln c₁
    let mut terms = Vec::new();
    for (ti, &t) in times.iter().enumerate() {
        if t < rho || t == 0.0 {
            continue;
        }
        let a = s.log_value(ti, 0, 1) + half_ln_m + 0.5 * (log(f_x(t)) + log(f_y(t)));
        terms.push((ti, t, a, rho * rho / t));
    }
    if terms.is_empty() {
        return Err(Error::Precondition(format!("no grid time t >= ρ(x,y) = {rho}")));
    }
    let ln_c1 = |c3: f64| terms.iter().map(|&(_, _, a, q)| a + c3 * q).fold(f64::NEG_INFINITY, f64::max);
    let base = ln_c1(0.0);
    let target = base + core::f64::consts::LN_2;
    let c3 = if rho == 0.0 {
        0.0
    } else {
        let mut hi = 1.0;
        while ln_c1(hi) <= target && hi < 1e12 {
            hi *= 2.0;
        }
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if ln_c1(mid) <= target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    };
    let c1 = exp(ln_c1(c3));
    let mut b = ReportBuilder::new("transfer", "two-point transfer");
    b.param("c1", c1).param("c2", 1.0).param("c3", c3).param("rho", rho);
    b.provenance(Provenance {
        graph_hash: Some(graph.content_hash()),
        metric: Some(String::from(metric.kind().as_str())),
        backend: Some(String::from(backend.as_str())),
        ..Provenance::default()
    });
    for &(ti, t, _, _) in &terms {
        let rhs = log(c1) - half_ln_m - 0.5 * (log(f_x(t)) + log(f_y(t))) - c3 * rho * rho / t;
        b.point(0, t, graph.label(x), graph.label(y), s.log_value(ti, 0, 1), rhs);
    }
    let report = b.finish(LOG_TOL, Some(c1));
    Ok(TransferReport {
        report,
        regularity: [rx, ry],
        c1,
        c2: 1.0,
        c3,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::Sequential;
    use crate::graph::{build_lattice_box, ConductanceRule, MeasureRule};
    use crate::heat::decade_grid;
    use crate::metric::path_degree_metric;

    #[test]
    fn line_transfer_fits() {
        let g = build_lattice_box(1, 60, ConductanceRule::Constant(1.0), MeasureRule::Constant(1.0)).unwrap();
        let metric = path_degree_metric(&g, 1.0).unwrap();
        let x = g.require("0").unwrap();
        let y = g.require("6").unwrap();
        let times = decade_grid(0.1, 200.0, 10);
        let shape = |t: f64| libm::sqrt(t).max(1.0);
        let kx = calibrate_on_diagonal(&g, x, &times, &shape, Backend::ExpmAction, &Sequential).unwrap();
        let ky = calibrate_on_diagonal(&g, y, &times, &shape, Backend::ExpmAction, &Sequential).unwrap();
        let fx = move |t: f64| kx * shape(t);
        let fy = move |t: f64| ky * shape(t);
        let hyp = TransferHypothesis { a: libm::sqrt(2.0), gamma: 2.0, delta: 1.0 };
        let r = two_point_transfer_check(&g, &metric, x, y, &times, &fx, &fy, hyp, Backend::ExpmAction, &Sequential).unwrap();
        assert!(r.report.pass);
        assert!(r.c3 > 0.0 && r.c1.is_finite());
        // diagonal case: the conclusion is the hypothesis itself
        let d = two_point_transfer_check(&g, &metric, x, x, &times, &fx, &fx, hyp, Backend::ExpmAction, &Sequential).unwrap();
        assert!(d.c1 <= 1.0 + 1e-9);
        // a spiky f is not regular
        let spiky = |t: f64| if (libm::log10(t) * 3.0) as i64 % 2 == 0 { 1e-3 } else { 1e-6 };
        let e = two_point_transfer_check(&g, &metric, x, y, &times, &spiky, &fy, hyp, Backend::ExpmAction, &Sequential);
        assert!(matches!(e, Err(Error::Precondition(_))));
    }
}
