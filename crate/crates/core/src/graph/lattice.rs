//! Boxes `{-R, …, R}^n` of the nearest-neighbour lattice.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Graph;
use crate::error::{Error, Result};

const MAX_BOX_VERTICES: usize = 1 << 24;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ConductanceRule {
    Constant(f64),
    /// Independent uniform weights on `[lo, hi]`, keyed by `(seed, edge)`.
    IidUniform { lo: f64, hi: f64, seed: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MeasureRule {
    Constant(f64),
    /// `m = deg`.
    Normalizing,
}

/// Label of a lattice point: coordinates joined by commas.
pub fn lattice_label(coords: &[i64]) -> String {
    let mut s = String::new();
    for (i, c) in coords.iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        s.push_str(&format!("{c}"));
    }
    s
}

/// Weight of the edge leaving the lattice point `coords` along `axis`.
///
/// The stream key depends only on the lattice edge, never on the box, so
/// nested boxes share their conductances.
pub(crate) fn conductance(rule: ConductanceRule, coords: &[i64], axis: usize) -> f64 {
    match rule {
        ConductanceRule::Constant(c) => c,
        ConductanceRule::IidUniform { lo, hi, seed } => {
            let mut h = super::Fnv::default();
            for c in coords {
                h.write(&c.to_le_bytes());
            }
            h.write(&(axis as u64).to_le_bytes());
            let key = h.finish();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(key);
            lo + (hi - lo) * rng.random::<f64>()
        }
    }
}

fn validate(rule: ConductanceRule) -> Result<()> {
    match rule {
        ConductanceRule::Constant(c) if !(c > 0.0) => Err(Error::InvalidParameter(format!(
            "conductance must be positive, got {c}"
        ))),
        ConductanceRule::IidUniform { lo, hi, .. } if !(lo > 0.0) || !(hi >= lo) => {
            Err(Error::InvalidParameter(format!(
                "iid conductances need 0 < lo <= hi, got [{lo}, {hi}]"
            )))
        }
        _ => Ok(()),
    }
}

/// Box `{-R, …, R}^n` with nearest-neighbour edges. Vertices are ordered
/// lexicographically with the first coordinate most significant.
pub fn build_lattice_box(
    dim: usize,
    radius: usize,
    conductance_rule: ConductanceRule,
    measure_rule: MeasureRule,
) -> Result<Graph> {
    if dim == 0 || radius == 0 {
        return Err(Error::InvalidParameter(format!(
            "lattice box needs dimension >= 1 and radius >= 1, got n={dim}, R={radius}"
        )));
    }
    validate(conductance_rule)?;
    if let MeasureRule::Constant(c) = measure_rule {
        if !(c > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "measure must be positive, got {c}"
            )));
        }
    }
    let side = 2 * radius + 1;
    let n = (0..dim).try_fold(1usize, |acc, _| acc.checked_mul(side));
    let n = match n {
        Some(n) if n <= MAX_BOX_VERTICES => n,
        _ => {
            return Err(Error::TooLarge {
                what: "lattice box",
                n: usize::MAX,
                max: MAX_BOX_VERTICES,
            })
        }
    };

    let mut labels = Vec::with_capacity(n);
    let mut coords = alloc::vec![-(radius as i64); dim];
    for _ in 0..n {
        labels.push(lattice_label(&coords));
        for axis in (0..dim).rev() {
            if coords[axis] < radius as i64 {
                coords[axis] += 1;
                break;
            }
            coords[axis] = -(radius as i64);
        }
    }

    let mut edges = Vec::with_capacity(n * dim);
    let mut point = alloc::vec![0i64; dim];
    for idx in 0..n {
        let mut rest = idx;
        for axis in (0..dim).rev() {
            point[axis] = (rest % side) as i64 - radius as i64;
            rest /= side;
        }
        let mut stride = 1usize;
        for axis in (0..dim).rev() {
            if point[axis] < radius as i64 {
                let j = idx + stride;
                edges.push((idx, j, conductance(conductance_rule, &point, axis)));
            }
            stride *= side;
        }
    }

    let measure = match measure_rule {
        MeasureRule::Constant(c) => alloc::vec![c; n],
        MeasureRule::Normalizing => {
            let mut deg = alloc::vec![0.0; n];
            for &(u, v, w) in &edges {
                deg[u] += w;
                deg[v] += w;
            }
            deg
        }
    };
    Graph::from_indexed(labels, measure, edges)
}

/// Vertices of a lattice box with fewer than `2n` neighbours.
pub fn lattice_boundary(graph: &Graph, dim: usize) -> Vec<super::VertexId> {
    graph
        .vertices()
        .filter(|&x| graph.neighbors(x).len() < 2 * dim)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_box() {
        let g = build_lattice_box(1, 2, ConductanceRule::Constant(1.0), MeasureRule::Constant(1.0))
            .unwrap();
        assert_eq!(g.len(), 5);
        assert_eq!(g.edges().len(), 4);
        assert_eq!(g.degree(g.require("0").unwrap()), 2.0);
        assert_eq!(g.degree(g.require("-2").unwrap()), 1.0);
    }

    #[test]
    fn normalizing_measure_on_square() {
        let g = build_lattice_box(2, 1, ConductanceRule::Constant(1.0), MeasureRule::Normalizing)
            .unwrap();
        assert_eq!(g.len(), 9);
        let c = g.require("0,0").unwrap();
        assert_eq!(g.measure(c), 4.0);
        assert_eq!(g.weighted_degree(c), 1.0);
        assert_eq!(g.neighbors(g.require("1,1").unwrap()).len(), 2);
        // (0,0) ~ (1,0) and (0,1) but not (1,1)
        assert!(g.weight(c, g.require("1,0").unwrap()) > 0.0);
        assert!(g.weight(c, g.require("0,1").unwrap()) > 0.0);
        assert_eq!(g.weight(c, g.require("1,1").unwrap()), 0.0);
    }

    #[test]
    fn iid_conductances_are_reproducible() {
        let rule = ConductanceRule::IidUniform {
            lo: 1.0,
            hi: 2.0,
            seed: 7,
        };
        let a = build_lattice_box(1, 3, rule, MeasureRule::Constant(1.0)).unwrap();
        let b = build_lattice_box(1, 3, rule, MeasureRule::Constant(1.0)).unwrap();
        assert_eq!(a.edges(), b.edges());
        assert_eq!(a.content_hash(), b.content_hash());
        assert!(a.edges().iter().all(|e| (1.0..=2.0).contains(&e.weight)));
        let distinct = a.edges().windows(2).any(|w| w[0].weight != w[1].weight);
        assert!(distinct);
        let other = build_lattice_box(
            1,
            3,
            ConductanceRule::IidUniform {
                lo: 1.0,
                hi: 2.0,
                seed: 8,
            },
            MeasureRule::Constant(1.0),
        )
        .unwrap();
        assert_ne!(a.content_hash(), other.content_hash());
    }

    #[test]
    fn nested_boxes_share_conductances() {
        let rule = ConductanceRule::IidUniform {
            lo: 0.5,
            hi: 2.0,
            seed: 11,
        };
        let small = build_lattice_box(2, 2, rule, MeasureRule::Constant(1.0)).unwrap();
        let large = build_lattice_box(2, 4, rule, MeasureRule::Constant(1.0)).unwrap();
        for e in small.edges() {
            let u = large.require(small.label(e.u)).unwrap();
            let v = large.require(small.label(e.v)).unwrap();
            assert_eq!(large.weight(u, v), e.weight);
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        let bad = ConductanceRule::IidUniform {
            lo: 0.0,
            hi: 2.0,
            seed: 1,
        };
        assert!(build_lattice_box(1, 3, bad, MeasureRule::Constant(1.0)).is_err());
        assert!(build_lattice_box(0, 3, ConductanceRule::Constant(1.0), MeasureRule::Constant(1.0)).is_err());
        assert!(build_lattice_box(1, 0, ConductanceRule::Constant(1.0), MeasureRule::Constant(1.0)).is_err());
    }
}
