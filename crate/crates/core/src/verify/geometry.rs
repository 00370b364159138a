//! Faber–Krahn sampling and Nash probes.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use libm::{log, pow};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{require_vertices, BoundReport, Provenance, ReportBuilder};
use crate::bounds::fk_rhs;
use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::graph::{ball, Graph, VertexId, VertexSet};
use crate::heat::{heat_kernel_finite, Backend};
use crate::laplacian::LaplacianOperator;
use crate::linalg::dirichlet_lambda;
use crate::metric::PseudoMetric;

/// How test sets `U ⊆ B_x(R)` are generated.
#[derive(Clone, Debug, PartialEq)]
pub enum SubsetGenerator {
    /// Every ball `B_z(s) ∩ B_x(R)` with `z ∈ B_x(R)`.
    AllBalls,
    /// Uniformly sized random subsets.
    RandomSubsets { count: usize, seed: u64 },
    /// `{y ∈ B : p_t(x,y) ≥ θ max_y p_t(x,y)}` for each threshold `θ`.
    HeatSublevel { time: f64, thresholds: Vec<f64> },
}

/// Realized test sets, deduplicated, each inside the host ball.
#[derive(Clone, Debug)]
pub struct SubsetFamily {
    pub host: VertexSet,
    pub tags: Vec<String>,
    pub subsets: Vec<VertexSet>,
}

impl SubsetFamily {
    pub fn realize(
        graph: &Graph,
        metric: &PseudoMetric,
        center: VertexId,
        radius: f64,
        generators: &[SubsetGenerator],
        exec: &dyn Executor,
    ) -> Result<Self> {
        let host = ball(graph, metric, center, radius)?;
        let mut fam = Self {
            host: host.clone(),
            tags: Vec::new(),
            subsets: Vec::new(),
        };
        let mut seen: BTreeSet<Vec<u32>> = BTreeSet::new();
        let members = host.members().to_vec();
        for generator in generators {
            match generator {
                SubsetGenerator::AllBalls => {
                    for &z in &members {
                        let row = metric.distances_to(z, &members);
                        let mut radii = row.clone();
                        radii.sort_by(f64::total_cmp);
                        radii.dedup();
                        for s in radii {
                            let set: Vec<VertexId> =
                                members.iter().zip(&row).filter(|(_, &d)| d <= s).map(|(&v, _)| v).collect();
                            fam.push(graph, &mut seen, format!("ball({},{s})", graph.label(z)), set)?;
                        }
                    }
                }
                SubsetGenerator::RandomSubsets { count, seed } => {
                    let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                    let mut pool = members.clone();
                    for i in 0..*count {
                        let size = rng.random_range(1..=pool.len());
                        let (chosen, _) = pool.partial_shuffle(&mut rng, size);
                        let set = chosen.to_vec();
                        fam.push(graph, &mut seen, format!("random({seed},{i})"), set)?;
                    }
                }
                SubsetGenerator::HeatSublevel { time, thresholds } => {
                    let slice = heat_kernel_finite(graph, &[*time], &[center], &members, Backend::ExpmAction, exec)?;
                    let values: Vec<f64> = (0..members.len()).map(|j| slice.log_value(0, 0, j)).collect();
                    let top = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                    for &theta in thresholds {
                        if !(theta > 0.0 && theta <= 1.0) {
                            return Err(Error::InvalidParameter(format!("sublevel threshold {theta}")));
                        }
                        let cut = top + log(theta);
                        let set: Vec<VertexId> =
                            members.iter().zip(&values).filter(|(_, &v)| v >= cut).map(|(&v, _)| v).collect();
                        fam.push(graph, &mut seen, format!("heat({time},{theta})"), set)?;
                    }
                }
            }
        }
        Ok(fam)
    }

    /// A family from explicit sets; each must lie in `host`.
    pub fn from_sets(host: VertexSet, tags: Vec<String>, subsets: Vec<VertexSet>) -> Result<Self> {
        if tags.len() != subsets.len() {
            return Err(Error::InvalidParameter("one tag per subset".into()));
        }
        if let Some(i) = subsets.iter().position(|u| !u.is_subset_of(&host)) {
            return Err(Error::InvalidParameter(format!("subset {} leaves the host ball", tags[i])));
        }
        Ok(Self { host, tags, subsets })
    }

    fn push(&mut self, graph: &Graph, seen: &mut BTreeSet<Vec<u32>>, tag: String, set: Vec<VertexId>) -> Result<()> {
        if set.is_empty() {
            return Ok(());
        }
        let u = VertexSet::new(graph, set)?;
        let key: Vec<u32> = u.members().iter().map(|v| v.0).collect();
        if seen.insert(key) {
            self.tags.push(tag);
            self.subsets.push(u);
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.subsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subsets.is_empty()
    }
}

#[derive(Clone, Debug)]
pub struct FkReport {
    pub report: BoundReport,
    /// `min_U λ(U) R² (m(U)/m(B))^{2/n}`: an upper bound on the best
    /// Faber–Krahn constant, since only sampled sets are tried.
    pub a_est: f64,
    pub minimizer: String,
}

/// Best Faber–Krahn constant `a` consistent with the sampled sets.
/// The report's `t` column holds `R`, `lhs = ln λ(U)`, `rhs` is the (FK)
/// right-hand side with `a = 1`.
pub fn verify_fk(graph: &Graph, center: VertexId, radius: f64, n: f64, family: &SubsetFamily) -> Result<FkReport> {
    require_vertices(graph, &[center])?;
    if family.is_empty() {
        return Err(Error::EmptySet);
    }
    let m_ball = family.host.measure();
    let mut b = ReportBuilder::new("fk", format!("FK(R={radius}, n={n})"));
    b.param("R", radius).param("n", n);
    b.provenance(Provenance {
        graph_hash: Some(graph.content_hash()),
        ..Provenance::default()
    });
    b.note("sampled sets only: a_est is an upper bound on the true Faber-Krahn constant");
    let mut best = (f64::INFINITY, 0usize);
    for (i, u) in family.subsets.iter().enumerate() {
        let lambda = dirichlet_lambda(graph, u)?;
        let rhs = fk_rhs(1.0, n, radius, m_ball, u.measure())?;
        let lhs = log(lambda);
        b.point(0, radius, graph.label(center), &family.tags[i], lhs, rhs);
        if lhs - rhs < best.0 {
            best = (lhs - rhs, i);
        }
    }
    let a_est = libm::exp(best.0);
    let report = b.finish(f64::INFINITY, Some(a_est));
    Ok(FkReport {
        report,
        a_est,
        minimizer: family.tags[best.1].clone(),
    })
}

/// Test functions for the Nash inequality.
#[derive(Clone, Debug, PartialEq)]
pub enum NashMember {
    Delta(VertexId),
    /// Indicator of `B_x(r)`.
    BallIndicator { center: VertexId, radius: f64 },
    /// `p_t(·, y)`.
    HeatColumn { target: VertexId, time: f64 },
    Custom { tag: String, values: Vec<f64> },
}

#[derive(Clone, Debug)]
pub struct NashReport {
    /// `max` over the family of `‖f‖₂^{2+4/n} / (ℰ(f) ‖f‖₁^{4/n})`; any
    /// valid Nash constant is at least this.
    pub c_min: f64,
    pub contributions: Vec<(String, f64)>,
    /// Members with `ℰ(f) = 0`.
    pub skipped: Vec<String>,
}

/// Empirical lower bound on the Nash constant in
/// `‖f‖₂^{2+4/n} ≤ c ℰ(f) ‖f‖₁^{4/n}`.
pub fn nash_probe(
    graph: &Graph,
    metric: Option<&PseudoMetric>,
    n: f64,
    family: &[NashMember],
    exec: &dyn Executor,
) -> Result<NashReport> {
    if !(n > 0.0) {
        return Err(Error::InvalidParameter(format!("Nash dimension {n}")));
    }
    let op = LaplacianOperator::full(graph);
    let mut contributions = Vec::new();
    let mut skipped = Vec::new();
    let mut c_min = 0.0f64;
    for member in family {
        let (tag, f) = match member {
            NashMember::Delta(x) => {
                require_vertices(graph, &[*x])?;
                let mut f = alloc::vec![0.0; graph.len()];
                f[x.index()] = 1.0;
                (format!("delta({})", graph.label(*x)), f)
            }
            NashMember::BallIndicator { center, radius } => {
                let metric = metric.ok_or_else(|| {
                    Error::InvalidParameter("ball indicators need a metric".into())
                })?;
                let b = ball(graph, metric, *center, *radius)?;
                let mut f = alloc::vec![0.0; graph.len()];
                for v in b.members() {
                    f[v.index()] = 1.0;
                }
                (format!("ball({},{radius})", graph.label(*center)), f)
            }
            NashMember::HeatColumn { target, time } => {
                let all: Vec<VertexId> = graph.vertices().collect();
                let s = heat_kernel_finite(graph, &[*time], &all, &[*target], Backend::ExpmAction, exec)?;
                let f = (0..all.len()).map(|i| s.value(0, i, 0)).collect();
                (format!("heat({},{time})", graph.label(*target)), f)
            }
            NashMember::Custom { tag, values } => {
                if values.len() != graph.len() {
                    return Err(Error::InvalidParameter(format!("function {tag} has the wrong length")));
                }
                (tag.clone(), values.clone())
            }
        };
        let energy = op.energy(&f);
        if !(energy > 0.0) {
            skipped.push(tag);
            continue;
        }
        let l2 = op.inner(&f, &f);
        let l1: f64 = f.iter().zip(graph.measures()).map(|(v, m)| v.abs() * m).sum();
        let c = pow(l2, 1.0 + 2.0 / n) / (energy * pow(l1, 4.0 / n));
        c_min = c_min.max(c);
        contributions.push((tag, c));
    }
    if contributions.is_empty() {
        return Err(Error::EmptySet);
    }
    Ok(NashReport {
        c_min,
        contributions,
        skipped,
    })
}
