//! Verification campaigns: computed kernels and geometry against the bounds.
//!
//! Every campaign produces a [`BoundReport`]: the grid of `(t, x, y)` points
//! with `ln LHS` and `ln RHS`, the worst log-ratio, the violations, and, for
//! bounds with a free multiplicative constant, the smallest constant that
//! makes the bound hold on the grid. Reports depend only on their inputs;
//! points are stored in grid order and all reductions are ordered folds.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use libm::{exp, log};

use crate::error::{Error, Result};
use crate::graph::{Graph, VertexId, VertexSet};
use crate::metric::PseudoMetric;

pub mod antitree;
pub mod gaussian;
pub mod geometry;
pub mod lattice;
pub mod metrics;
pub mod semigroup;
pub mod transfer;

pub use antitree::{verify_antitree, AntiTreeReport};
pub use gaussian::{
    fit_pang_constant, theorem_main_forward, verify_davies, verify_g, verify_universal, verify_vd,
    ForwardReport, ForwardSetup,
};
pub use geometry::{nash_probe, verify_fk, FkReport, NashMember, NashReport, SubsetFamily, SubsetGenerator};
pub use lattice::{verify_ads_form, verify_bella_form, AdsReport, BellaReport};
pub use metrics::{davies_z2_trend, lemma_metric_comparison, LemmaReport, TrendReport, TrendRow};
pub use semigroup::{semigroup_suite, SemigroupCheck, SemigroupReport};
pub use transfer::{two_point_transfer_check, TransferReport};

/// Log-domain slack used for bounds that hold exactly in theory.
pub const LOG_TOL: f64 = 1e-10;

/// Where the numbers of a report came from.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Provenance {
    pub graph_hash: Option<u64>,
    pub metric: Option<String>,
    pub backend: Option<String>,
    pub solver_tol: Option<f64>,
    pub truncation: Option<String>,
}

/// One comparison `LHS ≤ RHS`. Labels are indices into
/// [`BoundReport::labels`], series into [`BoundReport::series`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundPoint {
    pub series: u16,
    pub t: f64,
    pub x: u32,
    pub y: u32,
    pub lhs_log: f64,
    pub rhs_log: f64,
}

impl BoundPoint {
    /// `ln(LHS/RHS)`; a vanishing LHS or an infinite RHS give `−∞`.
    pub fn ratio_log(&self) -> f64 {
        if self.lhs_log == f64::NEG_INFINITY || self.rhs_log == f64::INFINITY {
            f64::NEG_INFINITY
        } else {
            self.lhs_log - self.rhs_log
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundReport {
    pub campaign: String,
    pub bound: String,
    pub parameters: Vec<(String, f64)>,
    pub series: Vec<String>,
    pub labels: Vec<String>,
    pub points: Vec<BoundPoint>,
    /// PASS iff `worst_log_ratio ≤ allowance_log`.
    pub allowance_log: f64,
    pub worst_log_ratio: f64,
    pub worst_point: Option<usize>,
    /// Indices of points with ratio above the allowance.
    pub violations: Vec<usize>,
    /// Smallest multiplicative constant (or other fitted parameter) for
    /// which the bound holds on the grid, when the kind admits one.
    pub fitted_constant: Option<f64>,
    pub pass: bool,
    pub provenance: Provenance,
    pub notes: Vec<String>,
}

impl BoundReport {
    pub fn label(&self, i: u32) -> &str {
        &self.labels[i as usize]
    }

    pub fn series_name(&self, p: &BoundPoint) -> &str {
        &self.series[p.series as usize]
    }

    pub fn parameter(&self, name: &str) -> Option<f64> {
        self.parameters.iter().find(|(n, _)| n == name).map(|&(_, v)| v)
    }

    /// The point attaining the worst ratio.
    pub fn worst(&self) -> Option<&BoundPoint> {
        self.worst_point.map(|i| &self.points[i])
    }
}

/// Incremental construction of a [`BoundReport`] with interned labels.
#[derive(Clone, Debug)]
pub struct ReportBuilder {
    campaign: String,
    bound: String,
    parameters: Vec<(String, f64)>,
    series: Vec<String>,
    labels: Vec<String>,
    index: BTreeMap<String, u32>,
    points: Vec<BoundPoint>,
    provenance: Provenance,
    notes: Vec<String>,
}

impl ReportBuilder {
    pub fn new(campaign: &str, bound: impl Into<String>) -> Self {
        Self {
            campaign: campaign.to_string(),
            bound: bound.into(),
            parameters: Vec::new(),
            series: alloc::vec![String::from("main")],
            labels: Vec::new(),
            index: BTreeMap::new(),
            points: Vec::new(),
            provenance: Provenance::default(),
            notes: Vec::new(),
        }
    }

    pub fn param(&mut self, name: &str, value: f64) -> &mut Self {
        self.parameters.push((name.to_string(), value));
        self
    }

    pub fn note(&mut self, note: impl Into<String>) -> &mut Self {
        self.notes.push(note.into());
        self
    }

    pub fn provenance(&mut self, p: Provenance) -> &mut Self {
        self.provenance = p;
        self
    }

    /// Replaces the default series with named ones; returns their ids.
    pub fn set_series(&mut self, names: &[&str]) -> Vec<u16> {
        self.series = names.iter().map(|s| s.to_string()).collect();
        (0..names.len() as u16).collect()
    }

    fn intern(&mut self, label: &str) -> u32 {
        if let Some(&i) = self.index.get(label) {
            return i;
        }
        let i = self.labels.len() as u32;
        self.labels.push(label.to_string());
        self.index.insert(label.to_string(), i);
        i
    }

    pub fn point(&mut self, series: u16, t: f64, x: &str, y: &str, lhs_log: f64, rhs_log: f64) -> &mut Self {
        let (x, y) = (self.intern(x), self.intern(y));
        self.points.push(BoundPoint {
            series,
            t,
            x,
            y,
            lhs_log,
            rhs_log,
        });
        self
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Largest `ln(LHS/RHS)` and where it occurs (first index on ties).
    pub fn worst(&self) -> (f64, Option<usize>) {
        worst_of(&self.points)
    }

    /// Finalize with a pass threshold on the log-ratio. `fitted` is the
    /// fitted constant to record, if any.
    pub fn finish(self, allowance_log: f64, fitted: Option<f64>) -> BoundReport {
        let (worst, worst_point) = worst_of(&self.points);
        let violations = self
            .points
            .iter()
            .enumerate()
            .filter(|(_, p)| p.ratio_log() > allowance_log)
            .map(|(i, _)| i)
            .collect::<Vec<_>>();
        BoundReport {
            campaign: self.campaign,
            bound: self.bound,
            parameters: self.parameters,
            series: self.series,
            labels: self.labels,
            pass: violations.is_empty(),
            points: self.points,
            allowance_log,
            worst_log_ratio: worst,
            worst_point,
            violations,
            fitted_constant: fitted,
            provenance: self.provenance,
            notes: self.notes,
        }
    }

    /// Finalize a report whose bound has a free multiplicative constant:
    /// the fitted constant is `exp(worst)` and PASS means it is at most
    /// `c_max` (up to `tol` in log).
    pub fn finish_fitted(self, c_max: f64, tol: f64) -> BoundReport {
        let (worst, _) = self.worst();
        let fitted = if worst.is_finite() { exp(worst) } else { 0.0 };
        self.finish(log(c_max) + tol, Some(fitted))
    }
}

fn worst_of(points: &[BoundPoint]) -> (f64, Option<usize>) {
    let mut worst = f64::NEG_INFINITY;
    let mut at = None;
    for (i, p) in points.iter().enumerate() {
        let r = p.ratio_log();
        if r > worst || (at.is_none() && r == worst) {
            worst = r;
            at = Some(i);
        }
    }
    (worst, at)
}

/// Balls around one center: distances sorted with cumulative measure, so
/// `m(B_x(r))` is a binary search.
#[derive(Clone, Debug)]
pub struct BallProfile {
    distances: Vec<f64>,
    cumulative: Vec<f64>,
    /// Radii below this are guaranteed not to touch the truncation boundary.
    safe_radius: f64,
}

impl BallProfile {
    /// `boundary` lists vertices where the finite graph differs from the
    /// infinite one; balls reaching them are refused.
    pub fn new(graph: &Graph, metric: &PseudoMetric, x: VertexId, boundary: Option<&VertexSet>) -> Self {
        let row = metric.row(x);
        let mut order: Vec<usize> = (0..row.len()).collect();
        order.sort_by(|&a, &b| row[a].total_cmp(&row[b]).then(a.cmp(&b)));
        let mut cumulative = Vec::with_capacity(order.len());
        let mut acc = 0.0;
        for &i in &order {
            acc += graph.measure(VertexId::from(i));
            cumulative.push(acc);
        }
        let safe_radius = boundary.map_or(f64::INFINITY, |b| {
            b.members().iter().map(|&v| row[v.index()]).fold(f64::INFINITY, f64::min)
        });
        Self {
            distances: order.iter().map(|&i| row[i]).collect(),
            cumulative,
            safe_radius,
        }
    }

    pub fn safe_radius(&self) -> f64 {
        self.safe_radius
    }

    /// `m(B_x(r))`; errors when the ball would reach the boundary.
    pub fn volume(&self, r: f64) -> Result<f64> {
        if !(r >= 0.0) {
            return Err(Error::InvalidParameter(alloc::format!("ball radius {r}")));
        }
        if r >= self.safe_radius {
            return Err(Error::Domain(alloc::format!(
                "ball of radius {r} reaches the truncation boundary at distance {}",
                self.safe_radius
            )));
        }
        let k = self.distances.partition_point(|&d| d <= r);
        Ok(self.cumulative[k - 1])
    }
}

/// Smallest `c > 0` with `a_i + q_i / c ≤ ln c` for all `(a_i, q_i)`, `q_i ≥ 0`:
/// the constant of bounds of the form `p ≤ c·F·exp(−q/c)`. The left side
/// decreases and the right side increases in `c`, so bisection on `ln c`
/// finds it.
pub fn fit_gaussian_constant(terms: &[(f64, f64)]) -> Option<f64> {
    let excess = |ln_c: f64| {
        let c = exp(ln_c);
        terms.iter().map(|&(a, q)| a + q / c).fold(f64::NEG_INFINITY, f64::max) - ln_c
    };
    let top = terms.iter().map(|&(a, _)| a).fold(f64::NEG_INFINITY, f64::max);
    if !top.is_finite() {
        return if terms.iter().all(|&(a, _)| a == f64::NEG_INFINITY) { Some(0.0) } else { None };
    }
    // at ln c = top the requirement fails only through the Gaussian term
    let mut lo = top.min(0.0) - 1.0;
    let mut hi = top.max(0.0) + 1.0;
    while excess(hi) > 0.0 {
        hi = 2.0 * hi + 1.0;
        if hi > 700.0 {
            return None;
        }
    }
    if excess(lo) <= 0.0 {
        // every requirement is met by ever smaller c; only possible when all q vanish
        while excess(lo) <= 0.0 && lo > -700.0 {
            lo = 2.0 * lo - 1.0;
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if excess(mid) <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(exp(hi))
}

/// Checks that `x` and `y` are vertices of `graph`.
pub(crate) fn require_vertices(graph: &Graph, vs: &[VertexId]) -> Result<()> {
    for v in vs {
        if v.index() >= graph.len() {
            return Err(Error::UnknownVertex(alloc::format!("#{}", v.0)));
        }
    }
    Ok(())
}
