//! Finite weighted graphs `(X, b, m)` and the standard families used by the lab.
//!
//! A [`Graph`] is immutable once built. Edges are stored once under the
//! canonical `(min, max)` key and the adjacency index is materialized in both
//! directions, so symmetry of `b` holds by construction.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::metric::PseudoMetric;

pub mod antitree;
pub mod lattice;

pub use antitree::{anti_tree_level, build_anti_tree, AntiTreeProfile, SphereFunction};
pub use lattice::{
    build_lattice_box, lattice_boundary, lattice_label, ConductanceRule, MeasureRule,
};

/// Dense vertex index into a [`Graph`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexId(pub u32);

impl VertexId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl From<usize> for VertexId {
    fn from(i: usize) -> Self {
        VertexId(i as u32)
    }
}

/// An undirected edge under its canonical key `u < v`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Edge {
    pub u: VertexId,
    pub v: VertexId,
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VertexSpec {
    pub id: String,
    pub measure: f64,
}

impl VertexSpec {
    pub fn new(id: impl Into<String>, measure: f64) -> Self {
        Self {
            id: id.into(),
            measure,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EdgeSpec {
    pub u: String,
    pub v: String,
    pub weight: f64,
}

impl EdgeSpec {
    pub fn new(u: impl Into<String>, v: impl Into<String>, weight: f64) -> Self {
        Self {
            u: u.into(),
            v: v.into(),
            weight,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Graph {
    labels: Vec<String>,
    lookup: BTreeMap<String, VertexId>,
    measure: Vec<f64>,
    degree: Vec<f64>,
    edges: Vec<Edge>,
    offsets: Vec<usize>,
    adjacency: Vec<(VertexId, f64)>,
}

/// Build a graph from labelled vertex and edge lists.
///
/// Duplicate entries for the same unordered pair are merged when their weights
/// agree exactly and rejected otherwise.
pub fn build_graph(vertices: &[VertexSpec], edges: &[EdgeSpec]) -> Result<Graph> {
    if vertices.is_empty() {
        return Err(Error::EmptySpec);
    }
    let mut lookup = BTreeMap::new();
    let mut labels = Vec::with_capacity(vertices.len());
    let mut measure = Vec::with_capacity(vertices.len());
    for (i, v) in vertices.iter().enumerate() {
        if lookup.insert(v.id.clone(), VertexId::from(i)).is_some() {
            return Err(Error::DuplicateVertex(v.id.clone()));
        }
        labels.push(v.id.clone());
        measure.push(v.measure);
    }
    let mut indexed = Vec::with_capacity(edges.len());
    for e in edges {
        let u = *lookup
            .get(&e.u)
            .ok_or_else(|| Error::UnknownVertex(e.u.clone()))?;
        let v = *lookup
            .get(&e.v)
            .ok_or_else(|| Error::UnknownVertex(e.v.clone()))?;
        indexed.push((u.index(), v.index(), e.weight));
    }
    Graph::from_indexed(labels, measure, indexed)
}

impl Graph {
    /// Construct from dense indices. Validates every invariant of the data model.
    pub fn from_indexed(
        labels: Vec<String>,
        measure: Vec<f64>,
        edges: Vec<(usize, usize, f64)>,
    ) -> Result<Graph> {
        let n = labels.len();
        if n == 0 {
            return Err(Error::EmptySpec);
        }
        if measure.len() != n {
            return Err(Error::InvalidParameter(format!(
                "{} labels but {} measures",
                n,
                measure.len()
            )));
        }
        for (i, &m) in measure.iter().enumerate() {
            if !(m > 0.0) || !m.is_finite() {
                return Err(Error::Nonpositive {
                    what: "measure",
                    at: labels[i].clone(),
                    value: m,
                });
            }
        }
        let mut canonical: BTreeMap<(u32, u32), f64> = BTreeMap::new();
        for (u, v, w) in edges {
            if u >= n || v >= n {
                return Err(Error::UnknownVertex(format!("#{}", u.max(v))));
            }
            if u == v {
                return Err(Error::LoopEdge(labels[u].clone()));
            }
            if !(w > 0.0) || !w.is_finite() {
                return Err(Error::Nonpositive {
                    what: "edge weight",
                    at: format!("{}-{}", labels[u], labels[v]),
                    value: w,
                });
            }
            let key = (u.min(v) as u32, u.max(v) as u32);
            if let Some(&prev) = canonical.get(&key) {
                if prev != w {
                    return Err(Error::AsymmetricDuplicate {
                        u: labels[u].clone(),
                        v: labels[v].clone(),
                        first: prev,
                        second: w,
                    });
                }
            } else {
                canonical.insert(key, w);
            }
        }
        let edges: Vec<Edge> = canonical
            .into_iter()
            .map(|((u, v), w)| Edge {
                u: VertexId(u),
                v: VertexId(v),
                weight: w,
            })
            .collect();

        let mut counts = alloc::vec![0usize; n];
        for e in &edges {
            counts[e.u.index()] += 1;
            counts[e.v.index()] += 1;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for c in &counts {
            let last = *offsets.last().unwrap();
            offsets.push(last + c);
        }
        let mut fill = offsets.clone();
        let mut adjacency = alloc::vec![(VertexId(0), 0.0); offsets[n]];
        for e in &edges {
            adjacency[fill[e.u.index()]] = (e.v, e.weight);
            fill[e.u.index()] += 1;
            adjacency[fill[e.v.index()]] = (e.u, e.weight);
            fill[e.v.index()] += 1;
        }
        for x in 0..n {
            adjacency[offsets[x]..offsets[x + 1]].sort_by_key(|&(y, _)| y);
        }
        let degree = (0..n)
            .map(|x| adjacency[offsets[x]..offsets[x + 1]].iter().map(|&(_, w)| w).sum())
            .collect();

        let lookup = labels
            .iter()
            .enumerate()
            .map(|(i, l)| (l.clone(), VertexId::from(i)))
            .collect::<BTreeMap<_, _>>();
        if lookup.len() != n {
            let mut seen = BTreeMap::new();
            for l in &labels {
                if seen.insert(l, ()).is_some() {
                    return Err(Error::DuplicateVertex(l.clone()));
                }
            }
        }

        let graph = Graph {
            labels,
            lookup,
            measure,
            degree,
            edges,
            offsets,
            adjacency,
        };
        let components = graph.component_count();
        if components != 1 {
            return Err(Error::Disconnected { components });
        }
        Ok(graph)
    }

    fn component_count(&self) -> usize {
        let n = self.len();
        let mut seen = alloc::vec![false; n];
        let mut stack = Vec::new();
        let mut components = 0;
        for start in 0..n {
            if seen[start] {
                continue;
            }
            components += 1;
            seen[start] = true;
            stack.push(start);
            while let Some(x) = stack.pop() {
                for &(y, _) in self.neighbors(VertexId::from(x)) {
                    if !seen[y.index()] {
                        seen[y.index()] = true;
                        stack.push(y.index());
                    }
                }
            }
        }
        components
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.len()).map(VertexId::from)
    }

    #[inline]
    pub fn label(&self, x: VertexId) -> &str {
        &self.labels[x.index()]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn find(&self, label: &str) -> Option<VertexId> {
        self.lookup.get(label).copied()
    }

    pub fn require(&self, label: &str) -> Result<VertexId> {
        self.find(label)
            .ok_or_else(|| Error::UnknownVertex(label.to_string()))
    }

    #[inline]
    pub fn measure(&self, x: VertexId) -> f64 {
        self.measure[x.index()]
    }

    pub fn measures(&self) -> &[f64] {
        &self.measure
    }

    /// `deg(x) = Σ_y b(x, y)`.
    #[inline]
    pub fn degree(&self, x: VertexId) -> f64 {
        self.degree[x.index()]
    }

    /// `Deg(x) = deg(x) / m(x)`.
    #[inline]
    pub fn weighted_degree(&self, x: VertexId) -> f64 {
        self.degree[x.index()] / self.measure[x.index()]
    }

    pub fn max_weighted_degree(&self) -> f64 {
        self.vertices()
            .map(|x| self.weighted_degree(x))
            .fold(0.0, f64::max)
    }

    #[inline]
    pub fn neighbors(&self, x: VertexId) -> &[(VertexId, f64)] {
        &self.adjacency[self.offsets[x.index()]..self.offsets[x.index() + 1]]
    }

    /// `b(x, y)`, zero for non-neighbors and on the diagonal.
    pub fn weight(&self, x: VertexId, y: VertexId) -> f64 {
        let nb = self.neighbors(x);
        match nb.binary_search_by_key(&y, |&(z, _)| z) {
            Ok(i) => nb[i].1,
            Err(_) => 0.0,
        }
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn total_measure(&self) -> f64 {
        self.measure.iter().sum()
    }

    /// FNV-1a over labels, measures and canonical edges.
    pub fn content_hash(&self) -> u64 {
        let mut h = Fnv::default();
        for (l, m) in self.labels.iter().zip(&self.measure) {
            h.write(l.as_bytes());
            h.write(&[0xff]);
            h.write(&m.to_bits().to_le_bytes());
        }
        for e in &self.edges {
            h.write(&e.u.0.to_le_bytes());
            h.write(&e.v.0.to_le_bytes());
            h.write(&e.weight.to_bits().to_le_bytes());
        }
        h.finish()
    }
}

#[derive(Clone, Copy)]
pub(crate) struct Fnv(u64);

impl Default for Fnv {
    fn default() -> Self {
        Fnv(0xcbf2_9ce4_8422_2325)
    }
}

impl Fnv {
    pub(crate) fn write(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 ^= b as u64;
            self.0 = self.0.wrapping_mul(0x0100_0000_01b3);
        }
    }

    pub(crate) fn finish(self) -> u64 {
        self.0
    }
}

/// Sorted subset of a host graph's vertices with its cached measure.
#[derive(Clone, Debug, PartialEq)]
pub struct VertexSet {
    members: Vec<VertexId>,
    measure: f64,
}

impl VertexSet {
    pub fn new(graph: &Graph, members: impl IntoIterator<Item = VertexId>) -> Result<Self> {
        let mut members: Vec<VertexId> = members.into_iter().collect();
        members.sort_unstable();
        members.dedup();
        if let Some(bad) = members.iter().find(|v| v.index() >= graph.len()) {
            return Err(Error::UnknownVertex(format!("#{}", bad.0)));
        }
        let measure = members.iter().map(|&v| graph.measure(v)).sum();
        Ok(Self { members, measure })
    }

    pub fn all(graph: &Graph) -> Self {
        Self {
            members: graph.vertices().collect(),
            measure: graph.total_measure(),
        }
    }

    pub fn members(&self) -> &[VertexId] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Cached `m(U)`.
    pub fn measure(&self) -> f64 {
        self.measure
    }

    pub fn contains(&self, x: VertexId) -> bool {
        self.members.binary_search(&x).is_ok()
    }

    pub fn is_subset_of(&self, other: &VertexSet) -> bool {
        self.members.iter().all(|&x| other.contains(x))
    }
}

/// Closed ball `B_x(r) = {y : ρ(x, y) ≤ r}`.
pub fn ball(graph: &Graph, metric: &PseudoMetric, x: VertexId, r: f64) -> Result<VertexSet> {
    if x.index() >= graph.len() {
        return Err(Error::UnknownVertex(format!("#{}", x.0)));
    }
    if !(r >= 0.0) {
        return Err(Error::InvalidParameter(format!("ball radius {r}")));
    }
    if metric.len() != graph.len() {
        return Err(Error::InvalidParameter(
            "metric and graph sizes differ".to_string(),
        ));
    }
    let row = metric.row(x);
    let members = row
        .iter()
        .enumerate()
        .filter(|&(_, &d)| d <= r)
        .map(|(i, _)| VertexId::from(i));
    VertexSet::new(graph, members)
}
