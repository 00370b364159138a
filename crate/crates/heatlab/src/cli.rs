//! `heatlab build | kernel | metric | verify | report`.
//!
//! Exit codes: 0 when everything holds, 2 when a verified bound is
//! violated, 1 for any error (bad arguments, bad input, failed
//! preconditions).

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use heatlab_core::graph::{build_graph, EdgeSpec, Graph, VertexSpec};
use heatlab_core::heat::{decade_grid, heat_kernel_finite};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::campaign::{self, build_metric, select_vertices, Outcome};
use crate::config::{hash_of, BackendChoice, BoundKind, CampaignConfig, Conductance, GraphSource, MetricChoice};
use crate::error::{Error, Result};
use crate::exec::RayonExecutor;
use crate::formats::{csv_bytes, kernel_csv, metric_csv, read_graph, reports_csv, write_graph, write_json, Stamp};

pub const EXIT_OK: u8 = 0;
pub const EXIT_ERROR: u8 = 1;
pub const EXIT_VIOLATION: u8 = 2;

#[derive(Parser, Debug)]
#[command(name = "heatlab", version, about = "Heat kernel bounds on weighted graphs: compute, verify, report")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a graph and write it as JSON.
    Build {
        #[command(subcommand)]
        builder: Builder,
    },
    /// Heat kernel values on a finite graph, as CSV.
    Kernel(KernelArgs),
    /// Pairwise distances of an intrinsic (or combinatorial) metric, as CSV.
    Metric(MetricArgs),
    /// Run a verification campaign; writes `<prefix>.json` and `<prefix>.csv`.
    Verify(Box<VerifyArgs>),
    /// Summarize a report JSON written by `verify`.
    Report {
        file: PathBuf,
    },
}

#[derive(Subcommand, Debug)]
enum Builder {
    /// Box `[-R, R]^d` of the integer lattice.
    Lattice(LatticeArgs),
    /// Radial anti-tree truncated after a number of levels.
    AntiTree(AntiTreeArgs),
    /// Graph from an edge CSV (`u,v,b`) and an optional measure CSV (`id,m`).
    Custom(CustomArgs),
}

#[derive(Args, Debug, Serialize)]
struct LatticeArgs {
    #[arg(long)]
    dim: usize,
    #[arg(long)]
    radius: usize,
    /// Constant conductance.
    #[arg(long, default_value_t = 1.0, conflicts_with = "iid")]
    b: f64,
    /// I.i.d. conductances uniform on `[LO, HI]`.
    #[arg(long, num_args = 2, value_names = ["LO", "HI"])]
    iid: Option<Vec<f64>>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Constant vertex measure.
    #[arg(long, default_value_t = 1.0, conflicts_with = "m_deg")]
    m: f64,
    /// Use `m = deg` instead of a constant measure.
    #[arg(long)]
    m_deg: bool,
    #[arg(short, long)]
    #[serde(skip)]
    output: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct AntiTreeArgs {
    #[arg(long)]
    gamma: f64,
    #[arg(long)]
    levels: usize,
    #[arg(short, long)]
    #[serde(skip)]
    output: PathBuf,
}

#[derive(Args, Debug)]
struct CustomArgs {
    #[arg(long)]
    edges: PathBuf,
    /// Without it every vertex gets measure 1.
    #[arg(long)]
    measures: Option<PathBuf>,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct TimeArgs {
    /// Explicit times (repeat or separate with commas).
    #[arg(long = "t", value_delimiter = ',')]
    times: Vec<f64>,
    #[arg(long)]
    tmin: Option<f64>,
    #[arg(long)]
    tmax: Option<f64>,
    #[arg(long)]
    per_decade: Option<usize>,
}

impl TimeArgs {
    fn grid(&self) -> Result<Vec<f64>> {
        if !self.times.is_empty() {
            return Ok(self.times.clone());
        }
        match (self.tmin, self.tmax) {
            (Some(lo), Some(hi)) if lo > 0.0 && hi >= lo => Ok(decade_grid(lo, hi, self.per_decade.unwrap_or(10))),
            (None, None) => Err(Error::Config("give --t or --tmin and --tmax".into())),
            (lo, hi) => Err(Error::Config(format!("bad time range {lo:?}..{hi:?}"))),
        }
    }
}

#[derive(Args, Debug, Serialize)]
struct WindowArgs {
    /// Source vertex ids; default is an evenly spaced sample.
    #[arg(long, value_delimiter = ',')]
    x: Vec<String>,
    /// Target vertex ids; default is an evenly spaced sample.
    #[arg(long, value_delimiter = ',')]
    y: Vec<String>,
    /// Size of the default samples.
    #[arg(long, default_value_t = 32)]
    max_vertices: usize,
}

fn labels(v: &[String]) -> Option<&[String]> {
    (!v.is_empty()).then_some(v)
}

#[derive(Args, Debug, Serialize)]
struct KernelArgs {
    #[serde(skip)]
    graph: PathBuf,
    #[command(flatten)]
    time: TimeArgs,
    #[command(flatten)]
    window: WindowArgs,
    #[arg(long, value_enum, default_value_t = BackendChoice::Expm)]
    backend: BackendChoice,
    /// Output file; standard output when absent.
    #[arg(short, long)]
    #[serde(skip)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct MetricArgs {
    #[serde(skip)]
    graph: PathBuf,
    #[arg(long, value_enum, default_value_t = MetricChoice::PathDegree)]
    kind: MetricChoice,
    /// Jump size.
    #[arg(long = "S", default_value_t = 1.0)]
    jump: f64,
    /// Solver tolerance for the optimized metrics.
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[command(flatten)]
    window: WindowArgs,
    #[arg(short, long)]
    #[serde(skip)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(value_enum)]
    kind: BoundKind,
    /// Campaign configuration JSON; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    graph: Option<PathBuf>,
    #[arg(long, value_enum)]
    metric: Option<MetricChoice>,
    #[arg(long = "S")]
    jump: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, value_enum)]
    backend: Option<BackendChoice>,
    #[arg(long = "t", value_delimiter = ',')]
    times: Vec<f64>,
    #[arg(long)]
    tmin: Option<f64>,
    #[arg(long)]
    tmax: Option<f64>,
    #[arg(long)]
    per_decade: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    x: Vec<String>,
    #[arg(long, value_delimiter = ',')]
    y: Vec<String>,
    #[arg(long)]
    max_vertices: Option<usize>,
    /// Dimension parameter `n` (or `N`).
    #[arg(long)]
    n: Option<f64>,
    #[arg(long)]
    c_max: Option<f64>,
    /// Error-function radius; switches G and VD to their corrected forms.
    #[arg(long)]
    r: Option<f64>,
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long)]
    d_max: Option<u32>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    levels: Option<usize>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    ks: Vec<u32>,
    #[arg(long)]
    t_min: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (default: current directory).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    prefix: Option<String>,
}

impl VerifyArgs {
    fn config(&self) -> Result<CampaignConfig> {
        let mut c = match &self.config {
            Some(path) => CampaignConfig::load(path)?,
            None => CampaignConfig::new(self.kind),
        };
        match c.bound.kind {
            Some(k) if k != self.kind => {
                return Err(Error::Config(format!("config is for {k:?}, command asks for {:?}", self.kind)))
            }
            _ => c.bound.kind = Some(self.kind),
        }
        if let Some(p) = &self.graph {
            c.graph = Some(GraphSource::File { path: p.clone() });
        }
        set(&mut c.metric.kind, self.metric);
        set(&mut c.metric.jump, self.jump);
        set(&mut c.metric.tol, self.tol);
        set(&mut c.kernel.backend, self.backend);
        if !self.times.is_empty() {
            c.grid.times = Some(self.times.clone());
        }
        if self.tmin.is_some() || self.tmax.is_some() {
            c.grid.times = None;
        }
        set(&mut c.grid.tmin, self.tmin);
        set(&mut c.grid.tmax, self.tmax);
        set(&mut c.grid.per_decade, self.per_decade);
        set(&mut c.grid.max_vertices, self.max_vertices);
        if !self.x.is_empty() {
            c.grid.sources = Some(self.x.clone());
        }
        if !self.y.is_empty() {
            c.grid.targets = Some(self.y.clone());
        }
        let b = &mut c.bound;
        for (slot, v) in [
            (&mut b.n, self.n),
            (&mut b.c_max, self.c_max),
            (&mut b.r, self.r),
            (&mut b.radius, self.radius),
            (&mut b.gamma, self.gamma),
            (&mut b.t_min, self.t_min),
        ] {
            if v.is_some() {
                *slot = v;
            }
        }
        if self.d_max.is_some() {
            b.d_max = self.d_max;
        }
        if self.levels.is_some() {
            b.levels = self.levels;
        }
        if self.samples.is_some() {
            b.samples = self.samples;
        }
        if !self.ks.is_empty() {
            b.ks = Some(self.ks.clone());
        }
        set(&mut c.seed, self.seed);
        if self.out.is_some() {
            c.output.dir = self.out.clone();
        }
        if self.prefix.is_some() {
            c.output.prefix = self.prefix.clone();
        }
        Ok(c)
    }
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

/// Parses `args` (including the program name), runs, and returns the exit code.
pub fn main<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
        }
    };
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}

fn run(command: Command) -> Result<u8> {
    match command {
        Command::Build { builder } => build(builder).map(|_| EXIT_OK),
        Command::Kernel(a) => kernel(&a).map(|_| EXIT_OK),
        Command::Metric(a) => metric(&a).map(|_| EXIT_OK),
        Command::Verify(a) => verify(&a),
        Command::Report { file } => report(&file),
    }
}

fn build(builder: Builder) -> Result<()> {
    let (graph, stamp, output) = match builder {
        Builder::Lattice(a) => {
            let conductance = match a.iid.as_deref() {
                Some(&[lo, hi]) => Conductance::Iid { lo, hi, seed: a.seed },
                Some(_) => return Err(Error::Config("--iid takes LO HI".into())),
                None => Conductance::Constant { b: a.b },
            };
            let source = GraphSource::Lattice {
                dim: a.dim,
                radius: a.radius,
                conductance,
                m: (!a.m_deg).then_some(a.m),
            };
            (source.build()?, Stamp::new(hash_of(&source), a.seed), a.output)
        }
        Builder::AntiTree(a) => {
            let source = GraphSource::AntiTree {
                gamma: a.gamma,
                levels: a.levels,
            };
            (source.build()?, Stamp::new(hash_of(&source), 0), a.output)
        }
        Builder::Custom(a) => {
            let (graph, hash) = custom_graph(&a.edges, a.measures.as_deref())?;
            (graph, Stamp::new(hash, 0), a.output)
        }
    };
    write_graph(&output, &graph, Some(stamp))?;
    println!("{} vertices, {} edges -> {}", graph.len(), graph.edges().len(), output.display());
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
struct EdgeRow {
    u: String,
    v: String,
    b: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct MeasureRow {
    id: String,
    m: f64,
}

fn read_rows<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let text = fs::read(path).map_err(Error::io(path))?;
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(text.as_slice());
    Ok(r.deserialize().collect::<std::result::Result<Vec<T>, _>>()?)
}

fn custom_graph(edges: &Path, measures: Option<&Path>) -> Result<(Graph, String)> {
    let es: Vec<EdgeRow> = read_rows(edges)?;
    let ms: Vec<MeasureRow> = match measures {
        Some(p) => read_rows(p)?,
        None => {
            let mut seen = std::collections::BTreeSet::new();
            let mut ids = Vec::new();
            for e in &es {
                for id in [&e.u, &e.v] {
                    if seen.insert(id.clone()) {
                        ids.push(MeasureRow { id: id.clone(), m: 1.0 });
                    }
                }
            }
            ids
        }
    };
    let vs: Vec<_> = ms.iter().map(|r| VertexSpec::new(r.id.clone(), r.m)).collect();
    let specs: Vec<_> = es.iter().map(|r| EdgeSpec::new(r.u.clone(), r.v.clone(), r.b)).collect();
    let hash = hash_of(&(&ms, &es));
    Ok((build_graph(&vs, &specs)?, hash))
}

fn emit(output: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match output {
        Some(p) => fs::write(p, bytes).map_err(Error::io(p)),
        None => std::io::stdout().write_all(bytes).map_err(Error::io("<stdout>")),
    }
}

fn kernel(a: &KernelArgs) -> Result<()> {
    let graph = read_graph(&a.graph)?;
    let times = a.time.grid()?;
    let xs = select_vertices(&graph, labels(&a.window.x), a.window.max_vertices)?;
    let ys = select_vertices(&graph, labels(&a.window.y), a.window.max_vertices)?;
    let exec = RayonExecutor::from_env();
    let slice = heat_kernel_finite(&graph, &times, &xs, &ys, a.backend.into(), &exec)?;
    let stamp = Stamp::new(hash_of(&(a, graph.content_hash())), 0);
    emit(a.output.as_deref(), &kernel_csv(&slice, &stamp)?)
}

fn metric(a: &MetricArgs) -> Result<()> {
    let graph = read_graph(&a.graph)?;
    let mut cfg = CampaignConfig::new(BoundKind::Universal);
    cfg.metric.kind = a.kind;
    cfg.metric.jump = a.jump;
    cfg.metric.tol = a.tol;
    let m = build_metric(&graph, &cfg)?;
    let xs = select_vertices(&graph, labels(&a.window.x), a.window.max_vertices)?;
    let ys = select_vertices(&graph, labels(&a.window.y), a.window.max_vertices)?;
    let stamp = Stamp::new(hash_of(&(a, graph.content_hash())), 0);
    emit(a.output.as_deref(), &metric_csv(&graph, &m, &xs, &ys, &stamp)?)
}

fn kind_name(kind: BoundKind) -> String {
    serde_json::to_value(kind).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default()
}

fn verify(a: &VerifyArgs) -> Result<u8> {
    let cfg = a.config()?;
    let exec = RayonExecutor::from_env();
    let outcome = campaign::run(&cfg, &exec)?;
    let stamp = Stamp::new(cfg.hash(), cfg.seed);
    let dir = cfg.output.dir.clone().unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir).map_err(Error::io(&dir))?;
    let prefix = cfg.output.prefix.clone().unwrap_or_else(|| kind_name(outcome.kind));

    let json_path = dir.join(format!("{prefix}.json"));
    write_json(&json_path, &outcome_json(&outcome, &cfg, &stamp)?)?;
    let csv_path = dir.join(format!("{prefix}.csv"));
    let bytes = match &outcome.table {
        Some(t) => {
            let header: Vec<&str> = t.header.iter().map(String::as_str).collect();
            csv_bytes(&stamp.comment(), &header, t.rows.iter().cloned())?
        }
        None => reports_csv(&outcome.reports, &stamp)?,
    };
    fs::write(&csv_path, bytes).map_err(Error::io(&csv_path))?;

    print_summary(&outcome.summary, &kind_name(outcome.kind));
    println!("wrote {} and {}", json_path.display(), csv_path.display());
    Ok(if outcome.pass { EXIT_OK } else { EXIT_VIOLATION })
}

fn outcome_json(o: &Outcome, cfg: &CampaignConfig, stamp: &Stamp) -> Result<Value> {
    let mut v = json!({
        "meta": stamp,
        "kind": kind_name(o.kind),
        "config": cfg,
    });
    if let (Value::Object(dst), Value::Object(src)) = (&mut v, &o.summary) {
        dst.extend(src.clone());
    }
    Ok(v)
}

fn print_summary(v: &Value, kind: &str) {
    let pass = v["pass"].as_bool().unwrap_or(false);
    println!("{kind}: {}", if pass { "PASS" } else { "VIOLATION" });
    if let Some(reports) = v["reports"].as_array() {
        for r in reports {
            println!(
                "  {} [{}]: {} points, worst log-ratio {}, fitted C {}, {} violations",
                r["campaign"].as_str().unwrap_or("?"),
                r["bound"].as_str().unwrap_or("?"),
                r["points"],
                r["worst_log_ratio"],
                r["fitted_constant"],
                r["violation_count"],
            );
        }
    }
    if let Some(extra) = v.get("extra").filter(|e| !e.is_null()) {
        println!("  {extra}");
    }
}

fn report(path: &Path) -> Result<u8> {
    let text = fs::read_to_string(path).map_err(Error::io(path))?;
    let v: Value = serde_json::from_str(&text)?;
    let kind = v["kind"].as_str().ok_or_else(|| Error::Config(format!("{}: not a heatlab report", path.display())))?;
    if let Some(meta) = v.get("meta") {
        println!("heatlab {} config={} seed={}", meta["version"].as_str().unwrap_or("?"), meta["config_hash"].as_str().unwrap_or("?"), meta["seed"]);
    }
    print_summary(&v, kind);
    Ok(if v["pass"].as_bool() == Some(true) { EXIT_OK } else { EXIT_VIOLATION })
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn command_line_is_well_formed() {
        Cli::command().debug_assert();
    }

    #[test]
    fn flags_override_config() {
        let cli = Cli::try_parse_from(["heatlab", "verify", "g", "--graph", "z.json", "--S", "0.5", "--t", "1,2", "--n", "1"]).unwrap();
        let Command::Verify(a) = cli.command else { panic!() };
        let c = a.config().unwrap();
        assert_eq!(c.metric.jump, 0.5);
        assert_eq!(c.grid.times, Some(vec![1.0, 2.0]));
        assert_eq!(c.bound.n, Some(1.0));
        assert_eq!(c.graph, Some(GraphSource::File { path: "z.json".into() }));
    }

    #[test]
    fn usage_errors_exit_one_and_help_zero() {
        assert_eq!(main(["heatlab", "build", "anti-tree", "--levels", "4", "-o", "x.json"]), EXIT_ERROR);
        assert_eq!(main(["heatlab", "--help"]), EXIT_OK);
        assert_eq!(main(["heatlab", "--version"]), EXIT_OK);
    }
}
