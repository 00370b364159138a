//! Pseudo-metrics on finite graphs: path metrics via deterministic Dijkstra,
//! the intrinsic-property check, and (in [`optimize`]) the form metric `ρ_ℇ`
//! and the maximal intrinsic metric `ρ_S`.

use alloc::borrow::Cow;
use alloc::collections::{BinaryHeap, VecDeque};
use alloc::format;
use alloc::vec::Vec;
use core::cmp::Ordering;

use libm::sqrt;

use crate::error::{Error, Result};
use crate::graph::{Edge, Graph, VertexId};

pub mod optimize;

pub use optimize::{
    davies_metric, davies_metric_anchored, davies_table, max_intrinsic_metric,
    max_intrinsic_table, regularity_constant, MetricTable, Regularity,
};

/// Graphs up to this size get a dense distance table.
pub const DENSE_METRIC_LIMIT: usize = 5000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MetricKind {
    Combinatorial,
    PathDegree,
    Chemical,
    Davies,
    MaxIntrinsic,
    Custom,
}

impl MetricKind {
    pub fn as_str(self) -> &'static str {
        match self {
            MetricKind::Combinatorial => "combinatorial",
            MetricKind::PathDegree => "path-degree",
            MetricKind::Chemical => "chemical",
            MetricKind::Davies => "davies",
            MetricKind::MaxIntrinsic => "max-intrinsic",
            MetricKind::Custom => "custom",
        }
    }
}

#[derive(Clone, Debug)]
enum Storage {
    Dense(Vec<f64>),
    /// Edge lengths in CSR form; rows are produced by Dijkstra on demand.
    Lazy {
        offsets: Vec<usize>,
        adjacency: Vec<(u32, f64)>,
    },
}

/// Symmetric, nonnegative distance function on the vertices of one graph.
#[derive(Clone, Debug)]
pub struct PseudoMetric {
    n: usize,
    kind: MetricKind,
    jump_bound: Option<f64>,
    storage: Storage,
}

impl PseudoMetric {
    /// Wrap a dense row-major table. Checks shape, symmetry, zero diagonal and
    /// nonnegativity; the triangle inequality is the caller's contract (see
    /// [`PseudoMetric::triangle_defect`]).
    pub fn from_table(
        n: usize,
        table: Vec<f64>,
        kind: MetricKind,
        jump_bound: Option<f64>,
    ) -> Result<Self> {
        if table.len() != n * n {
            return Err(Error::InvalidParameter(format!(
                "metric table has {} entries, expected {}",
                table.len(),
                n * n
            )));
        }
        for i in 0..n {
            if table[i * n + i] != 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "metric diagonal at #{i} is {}",
                    table[i * n + i]
                )));
            }
            for j in 0..i {
                let (a, b) = (table[i * n + j], table[j * n + i]);
                if !(a >= 0.0) || a != b || !a.is_finite() {
                    return Err(Error::InvalidParameter(format!(
                        "metric entry ({i}, {j}) = {a} vs ({j}, {i}) = {b}"
                    )));
                }
            }
        }
        Ok(Self {
            n,
            kind,
            jump_bound,
            storage: Storage::Dense(table),
        })
    }

    /// Shortest-path metric for per-edge lengths.
    pub fn from_edge_lengths(
        graph: &Graph,
        kind: MetricKind,
        jump_bound: Option<f64>,
        length: impl Fn(&Edge) -> f64,
    ) -> Self {
        let n = graph.len();
        let (offsets, adjacency) = csr(graph, length);
        let storage = if n <= DENSE_METRIC_LIMIT {
            let mut table = Vec::with_capacity(n * n);
            for x in 0..n {
                table.extend(dijkstra(&offsets, &adjacency, x, None));
            }
            // Dijkstra sums in path order; symmetrize so ρ(x,y) = ρ(y,x) bitwise.
            for i in 0..n {
                for j in 0..i {
                    let v = table[i * n + j].min(table[j * n + i]);
                    table[i * n + j] = v;
                    table[j * n + i] = v;
                }
            }
            Storage::Dense(table)
        } else {
            Storage::Lazy { offsets, adjacency }
        };
        Self {
            n,
            kind,
            jump_bound,
            storage,
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn kind(&self) -> MetricKind {
        self.kind
    }

    /// Declared jump-size bound `S`, if any.
    pub fn jump_bound(&self) -> Option<f64> {
        self.jump_bound
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.storage, Storage::Dense(_))
    }

    /// `ρ(x, ·)`.
    pub fn row(&self, x: VertexId) -> Cow<'_, [f64]> {
        match &self.storage {
            Storage::Dense(t) => Cow::Borrowed(&t[x.index() * self.n..(x.index() + 1) * self.n]),
            Storage::Lazy { offsets, adjacency } => {
                Cow::Owned(dijkstra(offsets, adjacency, x.index(), None))
            }
        }
    }

    pub fn distance(&self, x: VertexId, y: VertexId) -> f64 {
        match &self.storage {
            Storage::Dense(t) => t[x.index() * self.n + y.index()],
            Storage::Lazy { offsets, adjacency } => {
                if x == y {
                    return 0.0;
                }
                let (a, b) = (x.index().min(y.index()), x.index().max(y.index()));
                dijkstra(offsets, adjacency, a, Some(&[b]))[b]
            }
        }
    }

    /// Distances from `x` to each of `targets`, stopping once all are settled.
    pub fn distances_to(&self, x: VertexId, targets: &[VertexId]) -> Vec<f64> {
        match &self.storage {
            Storage::Dense(_) => targets.iter().map(|&y| self.distance(x, y)).collect(),
            Storage::Lazy { offsets, adjacency } => {
                let idx: Vec<usize> = targets.iter().map(|y| y.index()).collect();
                let row = dijkstra(offsets, adjacency, x.index(), Some(&idx));
                idx.iter().map(|&i| row[i]).collect()
            }
        }
    }

    /// `c · ρ`, keeping the kind and scaling the declared jump bound.
    pub fn scaled(&self, c: f64) -> Self {
        let storage = match &self.storage {
            Storage::Dense(t) => Storage::Dense(t.iter().map(|v| v * c).collect()),
            Storage::Lazy { offsets, adjacency } => Storage::Lazy {
                offsets: offsets.clone(),
                adjacency: adjacency.iter().map(|&(y, w)| (y, w * c)).collect(),
            },
        };
        Self {
            n: self.n,
            kind: if c == 1.0 { self.kind } else { MetricKind::Custom },
            jump_bound: self.jump_bound.map(|s| s * c),
            storage,
        }
    }

    /// Largest `ρ(x,z) − ρ(x,y) − ρ(y,z)` over all triples (dense tables only).
    pub fn triangle_defect(&self) -> Option<f64> {
        let Storage::Dense(t) = &self.storage else {
            return None;
        };
        let n = self.n;
        let mut worst = 0.0f64;
        for x in 0..n {
            for y in 0..n {
                let dxy = t[x * n + y];
                for z in 0..n {
                    worst = worst.max(t[x * n + z] - dxy - t[y * n + z]);
                }
            }
        }
        Some(worst)
    }

    /// `sup{ρ(x,y) : b(x,y) > 0}`.
    pub fn measured_jump(&self, graph: &Graph) -> f64 {
        graph
            .edges()
            .iter()
            .map(|e| self.distance(e.u, e.v))
            .fold(0.0, f64::max)
    }
}

fn csr(graph: &Graph, length: impl Fn(&Edge) -> f64) -> (Vec<usize>, Vec<(u32, f64)>) {
    let n = graph.len();
    let mut offsets = Vec::with_capacity(n + 1);
    offsets.push(0);
    let mut adjacency = Vec::with_capacity(2 * graph.edges().len());
    for x in graph.vertices() {
        for &(y, w) in graph.neighbors(x) {
            let e = Edge {
                u: x.min(y),
                v: x.max(y),
                weight: w,
            };
            adjacency.push((y.0, length(&e)));
        }
        offsets.push(adjacency.len());
    }
    (offsets, adjacency)
}

#[derive(Clone, Copy, PartialEq)]
struct Entry {
    dist: f64,
    vertex: u32,
}

impl Eq for Entry {}

impl Ord for Entry {
    // BinaryHeap is a max-heap: smaller distance first, then smaller id.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.vertex.cmp(&self.vertex))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Single-source Dijkstra; ties on tentative distance are settled in
/// increasing vertex id. With `targets`, stops once every target is settled
/// (unsettled entries are then upper bounds).
fn dijkstra(
    offsets: &[usize],
    adjacency: &[(u32, f64)],
    source: usize,
    targets: Option<&[usize]>,
) -> Vec<f64> {
    let n = offsets.len() - 1;
    let mut dist = alloc::vec![f64::INFINITY; n];
    let mut done = alloc::vec![false; n];
    let mut remaining = targets.map(|t| t.len());
    let mut heap = BinaryHeap::new();
    dist[source] = 0.0;
    heap.push(Entry {
        dist: 0.0,
        vertex: source as u32,
    });
    while let Some(Entry { dist: d, vertex }) = heap.pop() {
        let x = vertex as usize;
        if done[x] {
            continue;
        }
        done[x] = true;
        if let (Some(left), Some(t)) = (remaining.as_mut(), targets) {
            if t.contains(&x) {
                *left -= t.iter().filter(|&&y| y == x).count();
                if *left == 0 {
                    break;
                }
            }
        }
        for &(y, w) in &adjacency[offsets[x]..offsets[x + 1]] {
            let nd = d + w;
            if nd < dist[y as usize] {
                dist[y as usize] = nd;
                heap.push(Entry { dist: nd, vertex: y });
            }
        }
    }
    dist
}

/// Breadth-first hop counts from `x`.
pub fn combinatorial_distance(graph: &Graph, x: VertexId) -> Vec<u32> {
    let mut dist = alloc::vec![u32::MAX; graph.len()];
    let mut queue = VecDeque::new();
    dist[x.index()] = 0;
    queue.push_back(x);
    while let Some(u) = queue.pop_front() {
        for &(v, _) in graph.neighbors(u) {
            if dist[v.index()] == u32::MAX {
                dist[v.index()] = dist[u.index()] + 1;
                queue.push_back(v);
            }
        }
    }
    dist
}

/// Combinatorial graph distance as a [`PseudoMetric`].
pub fn combinatorial_metric(graph: &Graph) -> PseudoMetric {
    PseudoMetric::from_edge_lengths(graph, MetricKind::Combinatorial, Some(1.0), |_| 1.0)
}

/// Path metric with edge length `S ∧ √(m(x)/deg(x)) ∧ √(m(y)/deg(y))`.
pub fn path_degree_metric(graph: &Graph, jump: f64) -> Result<PseudoMetric> {
    if !(jump > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "jump size must be positive, got {jump}"
        )));
    }
    Ok(PseudoMetric::from_edge_lengths(
        graph,
        MetricKind::PathDegree,
        Some(jump),
        |e| path_degree_length(graph, e.u, e.v, jump),
    ))
}

/// Edge length used by [`path_degree_metric`].
pub fn path_degree_length(graph: &Graph, u: VertexId, v: VertexId, jump: f64) -> f64 {
    jump.min(sqrt(1.0 / graph.weighted_degree(u)))
        .min(sqrt(1.0 / graph.weighted_degree(v)))
}

/// Path metric with edge length `√((m(x) ∧ m(y)) / b(x,y))`.
pub fn chemical_distance(graph: &Graph) -> PseudoMetric {
    PseudoMetric::from_edge_lengths(graph, MetricKind::Chemical, None, |e| {
        sqrt(graph.measure(e.u).min(graph.measure(e.v)) / e.weight)
    })
}

/// Outcome of the intrinsic check `Σ_y b(x,y) ρ(x,y)² ≤ m(x)`.
#[derive(Clone, Debug, PartialEq)]
pub struct IntrinsicReport {
    /// `max_x Σ_y b(x,y) ρ(x,y)² / m(x)`.
    pub max_ratio: f64,
    /// Measured `sup{ρ(x,y) : b(x,y) > 0}`.
    pub jump: f64,
    pub worst_vertex: VertexId,
    pub is_intrinsic: bool,
}

/// Tolerance applied to the intrinsic ratio.
pub const INTRINSIC_TOL: f64 = 1e-12;

pub fn check_intrinsic(graph: &Graph, metric: &PseudoMetric) -> Result<IntrinsicReport> {
    if metric.len() != graph.len() {
        return Err(Error::InvalidParameter(
            "metric and graph sizes differ".into(),
        ));
    }
    let mut max_ratio = f64::NEG_INFINITY;
    let mut worst_vertex = VertexId(0);
    let mut jump = 0.0f64;
    let mut targets = Vec::new();
    for x in graph.vertices() {
        targets.clear();
        targets.extend(graph.neighbors(x).iter().map(|&(y, _)| y));
        let d = metric.distances_to(x, &targets);
        let mut sum = 0.0;
        for (&(_, b), &r) in graph.neighbors(x).iter().zip(&d) {
            sum += b * r * r;
            jump = jump.max(r);
        }
        let ratio = sum / graph.measure(x);
        if ratio > max_ratio {
            max_ratio = ratio;
            worst_vertex = x;
        }
    }
    Ok(IntrinsicReport {
        max_ratio,
        jump,
        worst_vertex,
        is_intrinsic: max_ratio <= 1.0 + INTRINSIC_TOL,
    })
}

/// Floyd–Warshall closure of a symmetric table: afterwards every triangle
/// inequality holds exactly up to rounding, and no entry has increased.
pub fn metric_closure(n: usize, table: &mut [f64]) {
    for k in 0..n {
        for i in 0..n {
            let dik = table[i * n + k];
            for j in 0..n {
                let via = dik + table[k * n + j];
                if via < table[i * n + j] {
                    table[i * n + j] = via;
                }
            }
        }
    }
    for i in 0..n {
        for j in 0..i {
            let v = table[i * n + j].min(table[j * n + i]);
            table[i * n + j] = v;
            table[j * n + i] = v;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_graph, build_lattice_box, ConductanceRule, EdgeSpec, MeasureRule, VertexSpec};
    use core::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

    fn line(radius: usize, b: f64) -> Graph {
        build_lattice_box(1, radius, ConductanceRule::Constant(b), MeasureRule::Constant(1.0)).unwrap()
    }

    #[test]
    fn bfs_distances() {
        let g = build_lattice_box(2, 2, ConductanceRule::Constant(1.0), MeasureRule::Constant(1.0)).unwrap();
        let o = g.require("0,0").unwrap();
        let d = combinatorial_distance(&g, o);
        assert_eq!(d[o.index()], 0);
        assert_eq!(d[g.require("1,1").unwrap().index()], 2);
        assert_eq!(d[g.require("-2,2").unwrap().index()], 4);
    }

    #[test]
    fn path_degree_on_the_line() {
        let g = line(10, 1.0);
        let o = g.require("0").unwrap();
        let rho = path_degree_metric(&g, 1.0).unwrap();
        for k in 1..=9i64 {
            let y = g.require(&format!("{k}")).unwrap();
            assert!((rho.distance(o, y) - k as f64 * FRAC_1_SQRT_2).abs() < 1e-12);
        }
        let rho = path_degree_metric(&g, 0.1).unwrap();
        let y = g.require("7").unwrap();
        assert!((rho.distance(o, y) - 0.7).abs() < 1e-12);
        let report = check_intrinsic(&g, &rho).unwrap();
        assert!(report.is_intrinsic);
        assert!(report.jump <= 0.1 + 1e-15);
    }

    #[test]
    fn two_vertex_path_degree() {
        let g = build_graph(
            &[VertexSpec::new("a", 1.0), VertexSpec::new("b", 1.0)],
            &[EdgeSpec::new("a", "b", 1.0)],
        )
        .unwrap();
        for s in [0.3, 1.0, 4.0] {
            let rho = path_degree_metric(&g, s).unwrap();
            assert_eq!(rho.distance(VertexId(0), VertexId(1)), s.min(1.0));
        }
    }

    #[test]
    fn chemical_examples() {
        let g = line(5, 4.0);
        let d = chemical_distance(&g);
        let o = g.require("0").unwrap();
        assert!((d.distance(o, g.require("4").unwrap()) - 2.0).abs() < 1e-15);
        let g = build_graph(
            &[VertexSpec::new("x", 4.0), VertexSpec::new("y", 1.0)],
            &[EdgeSpec::new("x", "y", 1.0)],
        )
        .unwrap();
        assert_eq!(chemical_distance(&g).distance(VertexId(0), VertexId(1)), 1.0);
        let g = line(5, 1.0);
        let c = chemical_distance(&g);
        let h = combinatorial_metric(&g);
        for x in g.vertices() {
            assert_eq!(c.row(x), h.row(x));
        }
    }

    #[test]
    fn intrinsic_check_examples() {
        let g = line(5, 1.0);
        let d = combinatorial_metric(&g);
        let r = check_intrinsic(&g, &d).unwrap();
        assert_eq!(r.max_ratio, 2.0);
        assert!(!r.is_intrinsic);
        let r = check_intrinsic(&g, &d.scaled(FRAC_1_SQRT_2)).unwrap();
        assert!((r.max_ratio - 1.0).abs() < 1e-15);
        assert!(r.is_intrinsic);
    }

    #[test]
    fn lazy_matches_dense() {
        let g = build_lattice_box(
            2,
            4,
            ConductanceRule::IidUniform { lo: 1.0, hi: 2.0, seed: 3 },
            MeasureRule::Constant(1.0),
        )
        .unwrap();
        let dense = path_degree_metric(&g, 1.0).unwrap();
        let (offsets, adjacency) = csr(&g, |e| path_degree_length(&g, e.u, e.v, 1.0));
        let lazy = PseudoMetric {
            n: g.len(),
            kind: MetricKind::PathDegree,
            jump_bound: Some(1.0),
            storage: Storage::Lazy { offsets, adjacency },
        };
        for x in g.vertices().step_by(7) {
            let a = dense.row(x);
            let b = lazy.row(x);
            for (p, q) in a.iter().zip(b.iter()) {
                assert!((p - q).abs() < 1e-12);
            }
            for y in g.vertices().step_by(5) {
                assert!((lazy.distance(x, y) - dense.distance(x, y)).abs() < 1e-12);
            }
        }
        let r1 = check_intrinsic(&g, &dense).unwrap();
        let r2 = check_intrinsic(&g, &lazy).unwrap();
        assert!((r1.max_ratio - r2.max_ratio).abs() < 1e-12);
    }

    #[test]
    fn closure_repairs_triangles() {
        let mut t = alloc::vec![0.0, 1.0, 3.0, 1.0, 0.0, 1.0, 3.0, 1.0, 0.0];
        metric_closure(3, &mut t);
        assert_eq!(t[2], 2.0);
        let m = PseudoMetric::from_table(3, t, MetricKind::Custom, None).unwrap();
        assert!(m.triangle_defect().unwrap() <= 0.0);
        assert!(PseudoMetric::from_table(2, alloc::vec![0.0, 1.0, SQRT_2, 0.0], MetricKind::Custom, None).is_err());
    }
}
