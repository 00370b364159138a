//! Runs one configured verification and packages the result for output.

use heatlab_core::bounds::ErrorParams;
use heatlab_core::exec::Executor;
use heatlab_core::graph::{anti_tree_level, lattice_boundary, Graph, VertexId, VertexSet};
use heatlab_core::heat::{decade_grid, heat_kernel_finite, Backend};
use heatlab_core::metric::{
    chemical_distance, combinatorial_metric, davies_table, max_intrinsic_table, path_degree_metric, MetricKind,
    PseudoMetric,
};
use heatlab_core::verify::antitree::{sample_level_pairs, verify_antitree};
use heatlab_core::verify::lattice::ADS_GAMMAS;
use heatlab_core::verify::{
    davies_z2_trend, fit_pang_constant, lemma_metric_comparison, nash_probe, semigroup_suite, verify_ads_form,
    verify_bella_form, verify_davies, verify_fk, verify_g, verify_universal, verify_vd, BoundReport, NashMember,
    SubsetFamily, SubsetGenerator,
};
use serde_json::{json, Value};

use crate::config::{BoundKind, CampaignConfig, GraphSource, MetricChoice};
use crate::error::{Error, Result};
use crate::formats::{num, report_json};

/// A table for the CSV side of non-grid results.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    fn row(&mut self, cells: Vec<String>) {
        self.rows.push(cells);
    }
}

#[derive(Clone, Debug)]
pub struct Outcome {
    pub kind: BoundKind,
    pub pass: bool,
    /// Machine summary; bound reports appear under `reports`.
    pub summary: Value,
    pub reports: Vec<BoundReport>,
    pub table: Option<Table>,
}

impl Outcome {
    fn from_reports(kind: BoundKind, reports: Vec<BoundReport>, extra: Value) -> Self {
        let pass = reports.iter().all(|r| r.pass);
        let summary = json!({
            "pass": pass,
            "reports": reports.iter().map(report_json).collect::<Vec<_>>(),
            "extra": extra,
        });
        Self {
            kind,
            pass,
            summary,
            reports,
            table: None,
        }
    }
}

pub fn build_metric(graph: &Graph, cfg: &CampaignConfig) -> Result<PseudoMetric> {
    let m = &cfg.metric;
    Ok(match m.kind {
        MetricChoice::Combinatorial => combinatorial_metric(graph),
        MetricChoice::PathDegree => path_degree_metric(graph, m.jump)?,
        MetricChoice::Chemical => chemical_distance(graph),
        MetricChoice::Davies => davies_table(graph, m.tol)?.to_metric(MetricKind::Davies, None)?,
        MetricChoice::MaxIntrinsic => {
            max_intrinsic_table(graph, m.jump, m.tol)?.to_metric(MetricKind::MaxIntrinsic, Some(m.jump))?
        }
    })
}

/// Explicit labels, or up to `max_vertices` vertices evenly spaced in index order.
pub fn select_vertices(graph: &Graph, labels: Option<&[String]>, max_vertices: usize) -> Result<Vec<VertexId>> {
    match labels {
        Some(ls) => ls.iter().map(|l| Ok(graph.require(l)?)).collect(),
        None => {
            let n = graph.len();
            let k = max_vertices.clamp(1, n);
            let mut out: Vec<VertexId> = (0..k).map(|i| VertexId((i * n / k) as u32)).collect();
            out.dedup();
            Ok(out)
        }
    }
}

/// Vertices where a generated graph stops matching its infinite family.
fn boundary_of(graph: &Graph, source: Option<&GraphSource>) -> Result<Option<VertexSet>> {
    let members: Vec<VertexId> = match source {
        Some(GraphSource::Lattice { dim, .. }) => lattice_boundary(graph, *dim),
        Some(GraphSource::AntiTree { levels, .. }) => graph
            .vertices()
            .filter(|&v| anti_tree_level(graph.label(v)) == Some(*levels))
            .collect(),
        _ => return Ok(None),
    };
    Ok(Some(VertexSet::new(graph, members)?))
}

fn need(v: Option<f64>, what: &str) -> Result<f64> {
    v.ok_or_else(|| Error::Config(format!("bound.{what} is required for this campaign")))
}

pub fn run(cfg: &CampaignConfig, exec: &dyn Executor) -> Result<Outcome> {
    let kind = cfg.kind()?;
    let times = || cfg.grid.times();
    let backend: Backend = cfg.kernel.backend.into();
    let b = &cfg.bound;
    let endpoints = |g: &Graph| -> Result<(Vec<VertexId>, Vec<VertexId>)> {
        let xs = select_vertices(g, cfg.grid.sources.as_deref(), cfg.grid.max_vertices)?;
        let ys = select_vertices(g, cfg.grid.targets.as_deref(), cfg.grid.max_vertices)?;
        Ok((xs, ys))
    };
    Ok(match kind {
        BoundKind::Universal => {
            let g = cfg.graph()?;
            let metric = build_metric(&g, cfg)?;
            let (xs, ys) = endpoints(&g)?;
            let r = verify_universal(&g, &metric, cfg.metric.jump, &times()?, &xs, &ys, backend, exec)?;
            Outcome::from_reports(kind, vec![r], Value::Null)
        }
        BoundKind::Davies => {
            let g = cfg.graph()?;
            let (xs, ys) = endpoints(&g)?;
            let r = verify_davies(&g, &times()?, &xs, &ys, cfg.metric.tol, backend, exec)?;
            Outcome::from_reports(kind, vec![r], Value::Null)
        }
        BoundKind::Pang => {
            let r = fit_pang_constant(b.d_max.unwrap_or(30), &times()?)?;
            Outcome::from_reports(kind, vec![r], Value::Null)
        }
        BoundKind::Bella => {
            let g = cfg.graph()?;
            let (xs, ys) = endpoints(&g)?;
            let slice = heat_kernel_finite(&g, &times()?, &xs, &ys, backend, exec)?;
            let metric = path_degree_metric(&g, 1.0)?;
            let r = verify_bella_form(&g, &slice, &metric, need(b.n, "n")?)?;
            Outcome::from_reports(kind, vec![r.report], json!({ "c": num(r.c) }))
        }
        BoundKind::Ads => {
            let g = cfg.graph()?;
            let (xs, ys) = endpoints(&g)?;
            let slice = heat_kernel_finite(&g, &times()?, &xs, &ys, backend, exec)?;
            let r = verify_ads_form(&g, &slice, &chemical_distance(&g), need(b.n, "n")?, b.t_min.unwrap_or(1.0), &ADS_GAMMAS)?;
            let rows: Vec<Value> = r.rows.iter().map(|&(gm, c)| json!({ "gamma": gm, "C": num(c) })).collect();
            Outcome::from_reports(kind, vec![r.report], json!({ "table": rows, "best": { "gamma": r.best.0, "C": num(r.best.1) } }))
        }
        BoundKind::Antitree => {
            let gamma = need(b.gamma, "gamma")?;
            let levels = b.levels.ok_or_else(|| Error::Config("bound.levels is required".into()))?;
            let pairs = sample_level_pairs(levels, b.samples.unwrap_or(50), cfg.seed);
            let r = verify_antitree(gamma, levels, &times()?, &pairs, b.c_max.unwrap_or(f64::INFINITY))?;
            let mut reports = vec![r.first];
            reports.extend(r.second);
            Outcome::from_reports(kind, reports, json!({ "n": r.n, "levels": r.levels, "skipped": r.skipped }))
        }
        BoundKind::G => {
            let g = cfg.graph()?;
            let metric = build_metric(&g, cfg)?;
            let boundary = boundary_of(&g, cfg.graph.as_ref())?;
            let (xs, ys) = endpoints(&g)?;
            let slice = heat_kernel_finite(&g, &times()?, &xs, &ys, backend, exec)?;
            let n = need(b.n, "n")?;
            let params = b.r.map(|r| ErrorParams::new(n, r, cfg.metric.jump)).transpose()?;
            let r = verify_g(&g, &slice, &metric, cfg.metric.jump, params.as_ref(), n, b.c_max.unwrap_or(1e3), boundary.as_ref())?;
            Outcome::from_reports(kind, vec![r], Value::Null)
        }
        BoundKind::Vd => {
            let g = cfg.graph()?;
            let metric = build_metric(&g, cfg)?;
            let boundary = boundary_of(&g, cfg.graph.as_ref())?;
            let (xs, _) = endpoints(&g)?;
            let outer = need(b.radius, "radius")?;
            let grid = decade_grid(1.0, outer, cfg.grid.per_decade);
            let radii: Vec<(f64, f64)> =
                grid.iter().flat_map(|&r| grid.iter().filter(move |&&s| s >= r).map(move |&s| (r, s))).collect();
            let n = need(b.n, "n")?;
            let params = b.r.map(|r| ErrorParams::new(n, r, cfg.metric.jump)).transpose()?;
            let r = verify_vd(&g, &metric, &xs, &radii, params.as_ref(), n, b.c_max.unwrap_or(1e3), boundary.as_ref())?;
            Outcome::from_reports(kind, vec![r], Value::Null)
        }
        BoundKind::Fk => {
            let g = cfg.graph()?;
            let metric = build_metric(&g, cfg)?;
            let (xs, _) = endpoints(&g)?;
            let radius = need(b.radius, "radius")?;
            let gens = [
                SubsetGenerator::AllBalls,
                SubsetGenerator::RandomSubsets {
                    count: b.samples.unwrap_or(64),
                    seed: cfg.seed,
                },
                SubsetGenerator::HeatSublevel {
                    time: radius * radius,
                    thresholds: vec![0.9, 0.5, 0.1, 0.01],
                },
            ];
            let fam = SubsetFamily::realize(&g, &metric, xs[0], radius, &gens, exec)?;
            let r = verify_fk(&g, xs[0], radius, need(b.n, "n")?, &fam)?;
            Outcome::from_reports(
                kind,
                vec![r.report],
                json!({ "a_est": num(r.a_est), "minimizer": r.minimizer, "family_size": fam.len() }),
            )
        }
        BoundKind::Lemma => {
            let g = cfg.graph()?;
            let r = lemma_metric_comparison(&g, cfg.metric.jump, cfg.metric.tol)?;
            let mut table = Table::new(&["x_id", "y_id", "rho_s", "rho_e", "lower_gap", "upper_gap"]);
            for p in &r.pairs {
                table.row(vec![
                    g.label(p.x).to_string(),
                    g.label(p.y).to_string(),
                    p.rho_s.to_string(),
                    p.rho_e.to_string(),
                    p.lower_gap.to_string(),
                    p.upper_gap.to_string(),
                ]);
            }
            let summary = json!({
                "pass": r.pass(),
                "jump": r.jump,
                "tol": r.tol,
                "regularity": { "value": num(r.regularity.value), "upper": num(r.regularity.upper) },
                "reverse_applies": r.reverse_applies,
                "pairs": r.pairs.len(),
                "lower_violations": r.lower_violations,
                "upper_violations": r.upper_violations,
            });
            Outcome {
                kind,
                pass: r.pass(),
                summary,
                reports: Vec::new(),
                table: Some(table),
            }
        }
        BoundKind::Trend => {
            let ks = b.ks.clone().unwrap_or_else(|| vec![2, 4, 6, 8]);
            let r = davies_z2_trend(&ks, cfg.metric.tol)?;
            let mut table = Table::new(&["k", "box_radius", "rho_e", "ratio", "lower_bound", "gap"]);
            for row in &r.rows {
                table.row(vec![
                    row.k.to_string(),
                    row.box_radius.to_string(),
                    row.rho_e.to_string(),
                    row.ratio.to_string(),
                    row.lower_bound.to_string(),
                    row.gap.to_string(),
                ]);
            }
            let summary = json!({
                "pass": r.pass(),
                "range": [r.range.0, r.range.1],
                "in_range": r.in_range,
                "nonincreasing": r.nonincreasing,
                "above_lower_bound": r.above_lower_bound,
            });
            Outcome {
                kind,
                pass: r.pass(),
                summary,
                reports: Vec::new(),
                table: Some(table),
            }
        }
        BoundKind::Nash => {
            let g = cfg.graph()?;
            let metric = build_metric(&g, cfg)?;
            let (xs, _) = endpoints(&g)?;
            let mut family: Vec<NashMember> = xs.iter().map(|&x| NashMember::Delta(x)).collect();
            if let Some(r) = b.radius {
                family.extend(decade_grid(1.0, r, cfg.grid.per_decade).into_iter().map(|radius| NashMember::BallIndicator {
                    center: xs[0],
                    radius,
                }));
            }
            for &t in &times()? {
                family.push(NashMember::HeatColumn { target: xs[0], time: t });
            }
            let r = nash_probe(&g, Some(&metric), need(b.n, "n")?, &family, exec)?;
            let mut table = Table::new(&["member", "contribution"]);
            for (tag, c) in &r.contributions {
                table.row(vec![tag.clone(), c.to_string()]);
            }
            let summary = json!({ "pass": true, "c_min": num(r.c_min), "skipped": r.skipped });
            Outcome {
                kind,
                pass: true,
                summary,
                reports: Vec::new(),
                table: Some(table),
            }
        }
        BoundKind::Semigroup => {
            let g = cfg.graph()?;
            let (xs, _) = endpoints(&g)?;
            let r = semigroup_suite(&g, &times()?, &xs, None, backend, exec)?;
            let mut table = Table::new(&["check", "worst", "tol", "points", "pass"]);
            for c in &r.checks {
                table.row(vec![c.name.clone(), c.worst.to_string(), c.tol.to_string(), c.points.to_string(), c.pass.to_string()]);
            }
            Outcome {
                kind,
                pass: r.pass(),
                summary: json!({ "pass": r.pass() }),
                reports: Vec::new(),
                table: Some(table),
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Conductance;
    use heatlab_core::exec::Sequential;

    fn line(radius: usize) -> GraphSource {
        GraphSource::Lattice {
            dim: 1,
            radius,
            conductance: Conductance::Constant { b: 1.0 },
            m: Some(1.0),
        }
    }

    #[test]
    fn universal_on_a_line() {
        let mut c = CampaignConfig::new(BoundKind::Universal);
        c.graph = Some(line(20));
        c.grid.max_vertices = 8;
        let o = run(&c, &Sequential).unwrap();
        assert!(o.pass);
        assert_eq!(o.reports[0].points.len(), 8 * 8 * c.grid.times().unwrap().len());
    }

    #[test]
    fn semigroup_and_nash_tables() {
        let mut c = CampaignConfig::new(BoundKind::Semigroup);
        c.graph = Some(line(10));
        c.grid.times = Some(vec![0.5, 1.0]);
        c.grid.max_vertices = 3;
        let o = run(&c, &Sequential).unwrap();
        assert!(o.pass);
        assert_eq!(o.table.unwrap().rows.len(), 7);

        c.bound.kind = Some(BoundKind::Nash);
        c.bound.n = Some(1.0);
        c.grid.sources = Some(vec!["0".into()]);
        let o = run(&c, &Sequential).unwrap();
        assert_eq!(o.summary["c_min"], json!(0.5));
    }

    #[test]
    fn missing_parameters_are_config_errors() {
        let mut c = CampaignConfig::new(BoundKind::Bella);
        c.graph = Some(line(5));
        assert!(matches!(run(&c, &Sequential), Err(Error::Config(_))));
        let c = CampaignConfig::new(BoundKind::Universal);
        assert!(matches!(run(&c, &Sequential), Err(Error::Config(_))));
    }

    #[test]
    fn even_vertex_sample() {
        let g = line(10).build().unwrap();
        let v = select_vertices(&g, None, 4).unwrap();
        assert_eq!(v.len(), 4);
        assert_eq!(select_vertices(&g, None, 100).unwrap().len(), 21);
    }
}
