//! Anti-trees: spheres `S_k` of prescribed size, consecutive spheres completely
//! joined, standard weights and counting measure.

use alloc::format;
use alloc::string::ToString;
use alloc::vec::Vec;

use libm::{floor, pow, sqrt};

use super::Graph;
use crate::error::{Error, Result};

const MAX_ANTI_TREE_VERTICES: usize = 1 << 20;

/// `s_k = ⌊k^γ⌋` for `k ≥ 1`, `s_0 = 1`, `s_{-1} = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SphereFunction {
    gamma: f64,
}

impl SphereFunction {
    pub fn new(gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma < 2.0) {
            return Err(Error::InvalidParameter(format!(
                "sphere exponent gamma must lie in (0, 2), got {gamma}"
            )));
        }
        Ok(Self { gamma })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Sphere size at level `k`; `k = -1` gives 0.
    pub fn size(&self, k: i64) -> usize {
        match k {
            k if k < 0 => 0,
            0 => 1,
            // guard against k^γ landing a hair below an integer
            k => floor(pow(k as f64, self.gamma) + 1e-9) as usize,
        }
    }

    /// `n = 4(γ + 1)/(2 − γ)`, the volume growth exponent of the anti-tree.
    pub fn dimension(&self) -> f64 {
        4.0 * (self.gamma + 1.0) / (2.0 - self.gamma)
    }
}

/// Finite anti-tree with levels `0..=K`. The root is labelled `o`, the `i`-th
/// vertex of sphere `k` is labelled `k:i`; vertices are ordered by level.
pub fn build_anti_tree(gamma: f64, levels: usize) -> Result<Graph> {
    let spheres = SphereFunction::new(gamma)?;
    if levels == 0 {
        return Err(Error::InvalidParameter(
            "anti-tree needs at least one level".to_string(),
        ));
    }
    let sizes: Vec<usize> = (0..=levels as i64).map(|k| spheres.size(k)).collect();
    let n: usize = sizes.iter().sum();
    if n > MAX_ANTI_TREE_VERTICES {
        return Err(Error::TooLarge {
            what: "anti-tree",
            n,
            max: MAX_ANTI_TREE_VERTICES,
        });
    }
    let mut offsets = Vec::with_capacity(sizes.len() + 1);
    offsets.push(0usize);
    let mut labels = Vec::with_capacity(n);
    for (k, &s) in sizes.iter().enumerate() {
        offsets.push(offsets[k] + s);
        for i in 0..s {
            labels.push(if k == 0 {
                "o".to_string()
            } else {
                format!("{k}:{i}")
            });
        }
    }
    let mut edges = Vec::new();
    for k in 0..levels {
        for u in offsets[k]..offsets[k + 1] {
            for v in offsets[k + 1]..offsets[k + 2] {
                edges.push((u, v, 1.0));
            }
        }
    }
    Graph::from_indexed(labels, alloc::vec![1.0; n], edges)
}

/// Level of an anti-tree vertex label (`o` is level 0).
pub fn anti_tree_level(label: &str) -> Option<usize> {
    if label == "o" {
        return Some(0);
    }
    label.split(':').next()?.parse().ok()
}

/// Radial data of the infinite anti-tree under the path-degree metric with
/// jump cap `S`, tabulated for levels `0..=K`.
///
/// All quantities refer to the untruncated graph, so they serve as the metric
/// and volume side of bound checks whose kernel comes from a truncation.
#[derive(Clone, Debug)]
pub struct AntiTreeProfile {
    spheres: SphereFunction,
    jump: f64,
    sizes: Vec<f64>,
    degrees: Vec<f64>,
    /// `w_k`: path-degree length of an edge between levels `k` and `k + 1`.
    weights: Vec<f64>,
    /// `r_k = Σ_{j<k} w_j`.
    radial: Vec<f64>,
}

impl AntiTreeProfile {
    pub fn new(gamma: f64, jump: f64, levels: usize) -> Result<Self> {
        let spheres = SphereFunction::new(gamma)?;
        if !(jump > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "jump size must be positive, got {jump}"
            )));
        }
        let sizes: Vec<f64> = (0..=levels as i64 + 2)
            .map(|k| spheres.size(k) as f64)
            .collect();
        let degrees: Vec<f64> = (0..=levels + 1)
            .map(|k| {
                let below = if k == 0 { 0.0 } else { sizes[k - 1] };
                below + sizes[k + 1]
            })
            .collect();
        let weights: Vec<f64> = (0..=levels)
            .map(|k| jump.min(1.0 / sqrt(degrees[k])).min(1.0 / sqrt(degrees[k + 1])))
            .collect();
        let mut radial = Vec::with_capacity(levels + 1);
        radial.push(0.0);
        for k in 0..levels {
            radial.push(radial[k] + weights[k]);
        }
        Ok(Self {
            spheres,
            jump,
            sizes,
            degrees,
            weights,
            radial,
        })
    }

    pub fn spheres(&self) -> SphereFunction {
        self.spheres
    }

    pub fn jump(&self) -> f64 {
        self.jump
    }

    /// Highest tabulated level.
    pub fn levels(&self) -> usize {
        self.radial.len() - 1
    }

    pub fn sphere_size(&self, k: usize) -> f64 {
        self.sizes[k]
    }

    /// `deg = s_{k-1} + s_{k+1}` in the infinite graph.
    pub fn degree(&self, k: usize) -> f64 {
        self.degrees[k]
    }

    pub fn edge_length(&self, k: usize) -> f64 {
        self.weights[k]
    }

    /// Distance from the root to any vertex of `S_k`.
    pub fn radius(&self, k: usize) -> f64 {
        self.radial[k]
    }

    /// Path-degree distance between a vertex of `S_i` and a vertex of `S_j`;
    /// `same_vertex` distinguishes `x = y` from two vertices of one sphere.
    pub fn distance(&self, i: usize, j: usize, same_vertex: bool) -> f64 {
        if i != j {
            let (a, b) = (i.min(j), i.max(j));
            return self.radial[b] - self.radial[a];
        }
        if same_vertex {
            return 0.0;
        }
        let up = self.weights[i];
        if i == 0 {
            up * 2.0
        } else {
            2.0 * up.min(self.weights[i - 1])
        }
    }

    /// `m(B_x(r))` for a vertex `x ∈ S_i` in the infinite anti-tree.
    ///
    /// Fails when the ball reaches beyond the tabulated levels.
    pub fn ball_volume(&self, i: usize, r: f64) -> Result<f64> {
        let top = self.levels();
        let mut volume = 1.0;
        if self.sizes[i] > 1.0 && self.distance(i, i, false) <= r {
            volume += self.sizes[i] - 1.0;
        }
        for j in (0..i).rev() {
            if self.radial[i] - self.radial[j] > r {
                break;
            }
            volume += self.sizes[j];
        }
        let mut j = i + 1;
        loop {
            if j > top {
                return Err(Error::Domain(format!(
                    "ball of radius {r} around level {i} exceeds the {top} tabulated levels"
                )));
            }
            if self.radial[j] - self.radial[i] > r {
                break;
            }
            volume += self.sizes[j];
            j += 1;
        }
        Ok(volume)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_sizes() {
        let s = SphereFunction::new(1.0).unwrap();
        assert_eq!((-1..=3).map(|k| s.size(k)).collect::<Vec<_>>(), [0, 1, 1, 2, 3]);
        let s = SphereFunction::new(0.5).unwrap();
        assert_eq!((0..=4).map(|k| s.size(k)).collect::<Vec<_>>(), [1, 1, 1, 1, 2]);
        assert!(SphereFunction::new(2.0).is_err());
        assert!(SphereFunction::new(0.0).is_err());
        assert_eq!(SphereFunction::new(0.5).unwrap().dimension(), 4.0);
        assert_eq!(SphereFunction::new(1.0).unwrap().dimension(), 8.0);
    }

    #[test]
    fn small_anti_trees() {
        let g = build_anti_tree(1.0, 3).unwrap();
        assert_eq!(g.len(), 7);
        assert_eq!(g.degree(g.require("1:0").unwrap()), 3.0);
        assert_eq!(g.degree(g.require("3:2").unwrap()), 2.0);
        let g = build_anti_tree(0.5, 4).unwrap();
        assert_eq!(g.len(), 6);
        let g = build_anti_tree(0.5, 1).unwrap();
        assert_eq!(g.len(), 2);
        assert_eq!(g.edges().len(), 1);
        assert_eq!(anti_tree_level("o"), Some(0));
        assert_eq!(anti_tree_level("12:3"), Some(12));
    }

    #[test]
    fn profile_matches_interior_of_truncation() {
        let gamma = 0.5;
        let k = 12;
        let g = build_anti_tree(gamma, k).unwrap();
        let p = AntiTreeProfile::new(gamma, 1.0, k).unwrap();
        for x in g.vertices() {
            let lvl = anti_tree_level(g.label(x)).unwrap();
            if lvl < k {
                assert_eq!(g.degree(x), p.degree(lvl));
            }
        }
        // root: one neighbor, weight min(1, 1, 1/sqrt(deg_1)) = 1/sqrt(2)
        assert!((p.edge_length(0) - core::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert_eq!(p.ball_volume(0, 0.0).unwrap(), 1.0);
        assert_eq!(p.ball_volume(0, p.radius(2)).unwrap(), 3.0);
    }
}
