//! Comparisons between the form metric `ρ_ℇ` and the maximal intrinsic
//! metric `ρ_S`, and the ℤ² trend of `ρ_ℇ`.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::graph::{build_lattice_box, lattice_label, ConductanceRule, Graph, MeasureRule, VertexId};
use crate::metric::{davies_metric, davies_table, max_intrinsic_table, path_degree_metric, regularity_constant, Regularity};

/// Per-pair result of the metric comparison.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LemmaPair {
    pub x: VertexId,
    pub y: VertexId,
    pub rho_s: f64,
    pub rho_e: f64,
    /// `√2 ρ_S − ρ_ℇ`; must not exceed the tolerance.
    pub lower_gap: f64,
    /// `ρ_ℇ − √2 ρ_S`; checked only when the graph is `√2 S`-regular.
    pub upper_gap: f64,
}

#[derive(Clone, Debug)]
pub struct LemmaReport {
    pub jump: f64,
    pub tol: f64,
    pub regularity: Regularity,
    /// `S_reg ≤ √2 S + tol`, so the reverse inequality applies.
    pub reverse_applies: bool,
    pub pairs: Vec<LemmaPair>,
    pub lower_violations: usize,
    pub upper_violations: usize,
}

impl LemmaReport {
    pub fn pass(&self) -> bool {
        self.lower_violations == 0 && self.upper_violations == 0
    }
}

/// On a finite graph `sup Deg < ∞`, so `√2 ρ_S ≤ ρ_ℇ` for all pairs; if the
/// graph is `√2 S`-regular also `ρ_ℇ ≤ √2 ρ_S`. Both are checked up to
/// `tol`; the optimization problems are solved to `tol / 100`.
pub fn lemma_metric_comparison(graph: &Graph, jump: f64, tol: f64) -> Result<LemmaReport> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance {tol}")));
    }
    let solver_tol = tol / 100.0;
    let rho_s = max_intrinsic_table(graph, jump, solver_tol)?;
    let rho_e = davies_table(graph, solver_tol)?;
    let regularity = regularity_constant(graph, solver_tol)?;
    let reverse_applies = regularity.value <= core::f64::consts::SQRT_2 * jump + tol;
    let mut pairs = Vec::new();
    let (mut lower_violations, mut upper_violations) = (0, 0);
    for i in 0..graph.len() {
        for j in i + 1..graph.len() {
            let (x, y) = (VertexId::from(i), VertexId::from(j));
            let (s, e) = (rho_s.get(x, y), rho_e.get(x, y));
            let lower_gap = core::f64::consts::SQRT_2 * s - e;
            let upper_gap = e - core::f64::consts::SQRT_2 * s;
            if lower_gap > tol {
                lower_violations += 1;
            }
            if reverse_applies && upper_gap > tol {
                upper_violations += 1;
            }
            pairs.push(LemmaPair {
                x,
                y,
                rho_s: s,
                rho_e: e,
                lower_gap,
                upper_gap,
            });
        }
    }
    Ok(LemmaReport {
        jump,
        tol,
        regularity,
        reverse_applies,
        pairs,
        lower_violations,
        upper_violations,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrendRow {
    pub k: u32,
    pub box_radius: usize,
    pub rho_e: f64,
    /// `ρ_ℇ(0, (k,k)) / (√2 k)`.
    pub ratio: f64,
    /// `√2 ×` path-degree distance with `S = 1`, a lower bound for `ρ_ℇ`.
    pub lower_bound: f64,
    pub gap: f64,
}

#[derive(Clone, Debug)]
pub struct TrendReport {
    pub rows: Vec<TrendRow>,
    pub range: (f64, f64),
    pub in_range: bool,
    pub nonincreasing: bool,
    pub above_lower_bound: bool,
}

impl TrendReport {
    pub fn pass(&self) -> bool {
        self.in_range && self.nonincreasing && self.above_lower_bound
    }
}

/// `ρ_ℇ(0, (k,k)) / (√2 k)` on boxes of radius `2k` in `(ℤ², 1, 1)`.
pub fn davies_z2_trend(ks: &[u32], tol: f64) -> Result<TrendReport> {
    let mut rows = Vec::with_capacity(ks.len());
    for &k in ks {
        if k == 0 {
            return Err(Error::InvalidParameter("k must be positive".into()));
        }
        let radius = 2 * k as usize;
        let g = build_lattice_box(2, radius, ConductanceRule::Constant(1.0), MeasureRule::Constant(1.0))?;
        let o = g.require(&lattice_label(&[0, 0]))?;
        let y = g.require(&lattice_label(&[k as i64, k as i64]))?;
        let (rho_e, cert) = davies_metric(&g, o, y, tol)?;
        let pd = path_degree_metric(&g, 1.0)?.distance(o, y);
        rows.push(TrendRow {
            k,
            box_radius: radius,
            rho_e,
            ratio: rho_e / (core::f64::consts::SQRT_2 * k as f64),
            lower_bound: core::f64::consts::SQRT_2 * pd,
            gap: cert.gap,
        });
    }
    let range = (0.9, 1.5);
    let in_range = rows.iter().all(|r| r.ratio >= range.0 && r.ratio <= range.1);
    let nonincreasing = rows.windows(2).all(|w| w[1].ratio <= w[0].ratio + tol);
    let above_lower_bound = rows.iter().all(|r| r.rho_e >= r.lower_bound - 10.0 * tol - r.gap);
    Ok(TrendReport {
        rows,
        range,
        in_range,
        nonincreasing,
        above_lower_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_graph, EdgeSpec, VertexSpec};

    fn path(n: usize) -> Graph {
        let vs: Vec<_> = (0..n).map(|i| VertexSpec::new(format!("{i}"), 1.0)).collect();
        let es: Vec<_> = (1..n).map(|i| EdgeSpec::new(format!("{}", i - 1), format!("{i}"), 1.0)).collect();
        build_graph(&vs, &es).unwrap()
    }

    #[test]
    fn two_vertex_equality() {
        let r = lemma_metric_comparison(&path(2), 1.0, 1e-6).unwrap();
        assert!(r.pass());
        assert!(r.reverse_applies);
        assert!(r.pairs[0].lower_gap.abs() < 1e-6);
    }

    #[test]
    fn three_path_with_large_jump() {
        let r = lemma_metric_comparison(&path(3), 10.0, 1e-6).unwrap();
        assert!(r.pass());
        let ends = r.pairs.iter().find(|p| p.x.0 == 0 && p.y.0 == 2).unwrap();
        assert!((ends.rho_e - 2.0).abs() < 1e-6);
        assert!(core::f64::consts::SQRT_2 * ends.rho_s <= 2.0 + 1e-6);
    }

    #[test]
    fn z2_first_ratio() {
        let r = davies_z2_trend(&[1, 2], 1e-7).unwrap();
        assert!((r.rows[0].ratio - core::f64::consts::SQRT_2).abs() < 1e-5);
        assert!(r.pass());
        assert!(r.rows[1].rho_e >= r.rows[1].lower_bound - 1e-6);
    }
}
