//! On-disk formats: graph JSON, kernel/metric/report CSV, report JSON.
//!
//! Every file carries a stamp (tool version, config hash, seed); CSV files
//! put it on a leading `#` line, JSON documents in a `meta` object. Floats
//! are written in shortest round-trip form, so reruns are byte-identical.

use std::fs;
use std::io::Write;
use std::path::Path;

use heatlab_core::graph::{build_graph, EdgeSpec, Graph, VertexId, VertexSpec};
use heatlab_core::heat::HeatKernelSlice;
use heatlab_core::metric::PseudoMetric;
use heatlab_core::verify::BoundReport;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};

/// Provenance stamped into every output.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stamp {
    pub tool: String,
    pub version: String,
    pub config_hash: String,
    pub seed: u64,
}

impl Stamp {
    pub fn new(config_hash: impl Into<String>, seed: u64) -> Self {
        Self {
            tool: String::from("heatlab"),
            version: String::from(crate::VERSION),
            config_hash: config_hash.into(),
            seed,
        }
    }

    /// `# heatlab <version> config=<hash> seed=<seed>`
    pub fn comment(&self) -> String {
        format!("# {} {} config={} seed={}", self.tool, self.version, self.config_hash, self.seed)
    }
}

/// JSON numbers cannot hold infinities or NaN; those become strings.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else if x.is_nan() {
        json!("nan")
    } else if x > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VertexRecord {
    pub id: String,
    pub m: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeRecord {
    pub u: String,
    pub v: String,
    pub b: f64,
}

/// `{"vertices":[{"id","m"}],"edges":[{"u","v","b"}]}` plus an optional stamp.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<Stamp>,
    pub vertices: Vec<VertexRecord>,
    pub edges: Vec<EdgeRecord>,
}

impl GraphFile {
    pub fn from_graph(graph: &Graph, meta: Option<Stamp>) -> Self {
        let vertices = graph
            .vertices()
            .map(|x| VertexRecord {
                id: graph.label(x).to_string(),
                m: graph.measure(x),
            })
            .collect();
        let edges = graph
            .edges()
            .iter()
            .map(|e| EdgeRecord {
                u: graph.label(e.u).to_string(),
                v: graph.label(e.v).to_string(),
                b: e.weight,
            })
            .collect();
        Self { meta, vertices, edges }
    }

    pub fn to_graph(&self) -> Result<Graph> {
        let vs: Vec<_> = self.vertices.iter().map(|v| VertexSpec::new(v.id.clone(), v.m)).collect();
        let es: Vec<_> = self.edges.iter().map(|e| EdgeSpec::new(e.u.clone(), e.v.clone(), e.b)).collect();
        Ok(build_graph(&vs, &es)?)
    }
}

pub fn read_graph(path: &Path) -> Result<Graph> {
    let text = fs::read_to_string(path).map_err(Error::io(path))?;
    let file: GraphFile = serde_json::from_str(&text)?;
    file.to_graph()
}

pub fn write_graph(path: &Path, graph: &Graph, meta: Option<Stamp>) -> Result<()> {
    write_json(path, &serde_json::to_value(GraphFile::from_graph(graph, meta))?)
}

pub fn write_json(path: &Path, value: &Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(Error::io(path))
}

/// A CSV document: stamp line, header row, rows.
pub fn csv_bytes(stamp_line: &str, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    writeln!(out, "{stamp_line}").expect("write to vec");
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.into_inner().map_err(|e| Error::Config(e.to_string()))
}

pub const KERNEL_COLUMNS: [&str; 7] = ["t", "x_id", "y_id", "value", "log_value", "backend", "radius"];

pub fn kernel_csv(slice: &HeatKernelSlice, stamp: &Stamp) -> Result<Vec<u8>> {
    let radius = slice.truncation.as_ref().map(|r| r.radius.to_string()).unwrap_or_default();
    let rows = slice.iter().map(|(t, x, y, lv)| {
        vec![
            t.to_string(),
            x.to_string(),
            y.to_string(),
            lv.exp().to_string(),
            lv.to_string(),
            slice.backend.as_str().to_string(),
            radius.clone(),
        ]
    });
    let mut line = stamp.comment();
    if let Some(tr) = &slice.truncation {
        line.push_str(&format!(
            " family={} converged={} max_change={} tol={}",
            tr.family, tr.converged, tr.max_change, tr.tol
        ));
    }
    csv_bytes(&line, &KERNEL_COLUMNS, rows)
}

pub const METRIC_COLUMNS: [&str; 3] = ["x_id", "y_id", "value"];

pub fn metric_csv(graph: &Graph, metric: &PseudoMetric, xs: &[VertexId], ys: &[VertexId], stamp: &Stamp) -> Result<Vec<u8>> {
    let mut line = format!("{} metric={}", stamp.comment(), metric.kind().as_str());
    if let Some(s) = metric.jump_bound() {
        line.push_str(&format!(" jump={s}"));
    }
    let mut rows = Vec::with_capacity(xs.len() * ys.len());
    for &x in xs {
        let d = metric.distances_to(x, ys);
        for (&y, v) in ys.iter().zip(d) {
            rows.push(vec![graph.label(x).to_string(), graph.label(y).to_string(), v.to_string()]);
        }
    }
    csv_bytes(&line, &METRIC_COLUMNS, rows)
}

pub const REPORT_COLUMNS: [&str; 7] = ["campaign", "t", "x", "y", "lhs_log", "rhs_log", "ratio_log"];

/// Grid points of a report; series other than the default are appended to
/// the campaign name as `campaign:series`.
pub fn report_csv(report: &BoundReport, stamp: &Stamp) -> Result<Vec<u8>> {
    reports_csv(std::slice::from_ref(report), stamp)
}

/// Several reports in one table, in order.
pub fn reports_csv(reports: &[BoundReport], stamp: &Stamp) -> Result<Vec<u8>> {
    let bounds: Vec<&str> = reports.iter().map(|r| r.bound.as_str()).collect();
    let rows = reports.iter().flat_map(|report| {
        let named = report.series.len() > 1;
        report.points.iter().map(move |p| {
            let campaign = if named {
                format!("{}:{}", report.campaign, report.series_name(p))
            } else {
                report.campaign.clone()
            };
            vec![
                campaign,
                p.t.to_string(),
                report.label(p.x).to_string(),
                report.label(p.y).to_string(),
                p.lhs_log.to_string(),
                p.rhs_log.to_string(),
                p.ratio_log().to_string(),
            ]
        })
    });
    csv_bytes(&format!("{} bound={}", stamp.comment(), bounds.join(";")), &REPORT_COLUMNS, rows)
}

/// Violations listed in report JSON; the CSV holds every point.
const MAX_LISTED_VIOLATIONS: usize = 50;

pub fn report_json(report: &BoundReport) -> Value {
    let point = |i: usize| {
        let p = &report.points[i];
        json!({
            "series": report.series_name(p),
            "t": num(p.t),
            "x": report.label(p.x),
            "y": report.label(p.y),
            "lhs_log": num(p.lhs_log),
            "rhs_log": num(p.rhs_log),
            "ratio_log": num(p.ratio_log()),
        })
    };
    let params: serde_json::Map<String, Value> = report.parameters.iter().map(|(k, v)| (k.clone(), num(*v))).collect();
    let pr = &report.provenance;
    json!({
        "campaign": report.campaign,
        "bound": report.bound,
        "parameters": params,
        "series": report.series,
        "points": report.points.len(),
        "pass": report.pass,
        "allowance_log": num(report.allowance_log),
        "worst_log_ratio": num(report.worst_log_ratio),
        "worst_point": report.worst_point.map(point),
        "fitted_constant": report.fitted_constant.map(num),
        "violation_count": report.violations.len(),
        "violations": report.violations.iter().take(MAX_LISTED_VIOLATIONS).map(|&i| point(i)).collect::<Vec<_>>(),
        "provenance": {
            "graph_hash": pr.graph_hash.map(|h| format!("{h:016x}")),
            "metric": pr.metric,
            "backend": pr.backend,
            "solver_tol": pr.solver_tol.map(num),
            "truncation": pr.truncation,
        },
        "notes": report.notes,
    })
}
