//! Campaign configuration: everything needed to rerun a verification.

use std::fs;
use std::path::{Path, PathBuf};

use heatlab_core::graph::{build_anti_tree, build_lattice_box, ConductanceRule, Graph, MeasureRule};
use heatlab_core::heat::{decade_grid, Backend};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::formats::read_graph;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "builder", rename_all = "kebab-case", deny_unknown_fields)]
pub enum GraphSource {
    File {
        path: PathBuf,
    },
    Lattice {
        dim: usize,
        radius: usize,
        #[serde(default)]
        conductance: Conductance,
        /// Constant vertex measure; `None` means `m = deg`.
        #[serde(default = "one")]
        m: Option<f64>,
    },
    AntiTree {
        gamma: f64,
        levels: usize,
    },
}

fn one() -> Option<f64> {
    Some(1.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Conductance {
    Constant { b: f64 },
    Iid { lo: f64, hi: f64, seed: u64 },
}

impl Default for Conductance {
    fn default() -> Self {
        Conductance::Constant { b: 1.0 }
    }
}

impl GraphSource {
    pub fn build(&self) -> Result<Graph> {
        Ok(match self {
            GraphSource::File { path } => read_graph(path)?,
            GraphSource::Lattice { dim, radius, conductance, m } => {
                let rule = match *conductance {
                    Conductance::Constant { b } => ConductanceRule::Constant(b),
                    Conductance::Iid { lo, hi, seed } => ConductanceRule::IidUniform { lo, hi, seed },
                };
                let measure = m.map_or(MeasureRule::Normalizing, MeasureRule::Constant);
                build_lattice_box(*dim, *radius, rule, measure)?
            }
            GraphSource::AntiTree { gamma, levels } => build_anti_tree(*gamma, *levels)?,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum MetricChoice {
    Combinatorial,
    PathDegree,
    Chemical,
    Davies,
    MaxIntrinsic,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricConfig {
    pub kind: MetricChoice,
    /// Jump size `S` for the path-degree and maximal intrinsic metrics.
    pub jump: f64,
    /// Solver tolerance for optimized metrics.
    pub tol: f64,
}

impl Default for MetricConfig {
    fn default() -> Self {
        Self {
            kind: MetricChoice::PathDegree,
            jump: 1.0,
            tol: 1e-6,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum BackendChoice {
    Dense,
    Expm,
}

impl From<BackendChoice> for Backend {
    fn from(b: BackendChoice) -> Self {
        match b {
            BackendChoice::Dense => Backend::DenseEig,
            BackendChoice::Expm => Backend::ExpmAction,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelConfig {
    pub backend: BackendChoice,
}

impl Default for KernelConfig {
    fn default() -> Self {
        Self {
            backend: BackendChoice::Expm,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum BoundKind {
    Universal,
    Davies,
    Pang,
    Lemma,
    Trend,
    Bella,
    Ads,
    Antitree,
    G,
    Vd,
    Fk,
    Nash,
    Semigroup,
}

/// Bound parameters; each kind reads the fields it needs and falls back
/// to documented defaults.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundConfig {
    pub kind: Option<BoundKind>,
    /// Dimension parameter (`n` or `N`).
    pub n: Option<f64>,
    /// Largest acceptable fitted constant.
    pub c_max: Option<f64>,
    /// Error-function radius `r`.
    pub r: Option<f64>,
    /// Ball radius `R` for FK and the VD outer radius.
    pub radius: Option<f64>,
    /// Largest distance for the Pang sandwich.
    pub d_max: Option<u32>,
    /// Anti-tree exponent and truncation for the anti-tree campaign.
    pub gamma: Option<f64>,
    pub levels: Option<usize>,
    /// Number of sampled pairs or subsets.
    pub samples: Option<usize>,
    /// `k` values of the lattice trend.
    pub ks: Option<Vec<u32>>,
    /// Smallest time admitted by fitted-form checks.
    pub t_min: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    /// Explicit times; overrides the log grid.
    pub times: Option<Vec<f64>>,
    pub tmin: f64,
    pub tmax: f64,
    pub per_decade: usize,
    pub sources: Option<Vec<String>>,
    pub targets: Option<Vec<String>>,
    /// Vertex cap when sources/targets default to an evenly spaced sample.
    pub max_vertices: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            times: None,
            tmin: 0.1,
            tmax: 50.0,
            per_decade: 10,
            sources: None,
            targets: None,
            max_vertices: 32,
        }
    }
}

impl GridConfig {
    pub fn times(&self) -> Result<Vec<f64>> {
        match &self.times {
            Some(t) if !t.is_empty() => Ok(t.clone()),
            Some(_) => Err(Error::Config("empty time list".into())),
            None => {
                if !(self.tmin > 0.0 && self.tmax >= self.tmin && self.per_decade > 0) {
                    return Err(Error::Config(format!(
                        "bad time grid tmin={} tmax={} per_decade={}",
                        self.tmin, self.tmax, self.per_decade
                    )));
                }
                Ok(decade_grid(self.tmin, self.tmax, self.per_decade))
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: Option<PathBuf>,
    pub prefix: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CampaignConfig {
    pub graph: Option<GraphSource>,
    #[serde(default)]
    pub metric: MetricConfig,
    #[serde(default)]
    pub kernel: KernelConfig,
    #[serde(default)]
    pub bound: BoundConfig,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub seed: u64,
    /// Not part of the hash: where results go does not change them.
    #[serde(default)]
    pub output: OutputConfig,
}

impl CampaignConfig {
    pub fn new(kind: BoundKind) -> Self {
        Self {
            graph: None,
            metric: MetricConfig::default(),
            kernel: KernelConfig::default(),
            bound: BoundConfig {
                kind: Some(kind),
                ..BoundConfig::default()
            },
            grid: GridConfig::default(),
            seed: 0,
            output: OutputConfig::default(),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(Error::io(path))?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn kind(&self) -> Result<BoundKind> {
        self.bound.kind.ok_or_else(|| Error::Config("bound.kind is required".into()))
    }

    pub fn graph(&self) -> Result<Graph> {
        self.graph
            .as_ref()
            .ok_or_else(|| Error::Config("this campaign needs a graph".into()))?
            .build()
    }

    /// First 16 hex digits of SHA-256 over the canonical JSON of the
    /// configuration without its output section.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.output = OutputConfig::default();
        hash_of(&c)
    }
}

/// First 16 hex digits of SHA-256 over the compact JSON of `value`.
pub fn hash_of<T: Serialize>(value: &T) -> String {
    let bytes = serde_json::to_vec(value).expect("value serializes");
    Sha256::digest(&bytes).iter().take(8).map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_hashes_stably() {
        let text = r#"{
            "graph": {"builder": "lattice", "dim": 2, "radius": 3, "conductance": {"rule": "iid", "lo": 1, "hi": 2, "seed": 7}},
            "bound": {"kind": "universal"},
            "grid": {"tmin": 0.1, "tmax": 10, "per_decade": 4, "sources": ["0,0"], "targets": null, "max_vertices": 10},
            "seed": 7,
            "output": {"dir": "/tmp/x"}
        }"#;
        let c: CampaignConfig = serde_json::from_str(text).unwrap();
        assert_eq!(c.kind().unwrap(), BoundKind::Universal);
        assert_eq!(c.graph().unwrap().len(), 49);
        let mut d = c.clone();
        d.output.dir = Some("/elsewhere".into());
        assert_eq!(c.hash(), d.hash());
        assert_eq!(c.hash().len(), 16);
        d.seed = 8;
        assert_ne!(c.hash(), d.hash());
        assert_eq!(c.grid.times().unwrap().len(), 9);
    }

    #[test]
    fn rejects_unknown_fields() {
        let text = r#"{"bound": {"kind": "universal", "colour": 3}}"#;
        assert!(serde_json::from_str::<CampaignConfig>(text).is_err());
        let text = r#"{"bound": {"kind": "nonsense"}}"#;
        assert!(serde_json::from_str::<CampaignConfig>(text).is_err());
    }
}
