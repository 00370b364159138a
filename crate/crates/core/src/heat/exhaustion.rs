//! Dirichlet exhaustion of infinite families.
//!
//! The domain at radius `R` is the box (or the anti-tree levels) of radius
//! `R` inside the graph of radius `R + 1`, with killing outside. Dirichlet
//! kernels increase with the domain and converge to the kernel of the
//! infinite graph, so a doubling schedule with a Cauchy test is a sound
//! stopping rule at fixed `t`.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use libm::exp;

use super::{heat_kernel_operator, Backend, HeatKernelSlice, TruncationRecord};
use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::graph::{
    anti_tree_level, build_anti_tree, build_lattice_box, ConductanceRule, Graph, MeasureRule,
    SphereFunction, VertexId, VertexSet,
};
use crate::laplacian::LaplacianOperator;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExhaustionFamily {
    /// Boxes `{−R,…,R}^n` of the lattice with the given weights.
    LatticeBox {
        dim: usize,
        conductance: ConductanceRule,
        measure: MeasureRule,
    },
    /// Anti-tree truncated after level `R`.
    AntiTree { gamma: f64 },
}

impl ExhaustionFamily {
    pub fn describe(&self) -> String {
        match self {
            ExhaustionFamily::LatticeBox { dim, .. } => format!("lattice box, n={dim}"),
            ExhaustionFamily::AntiTree { gamma } => format!("anti-tree, gamma={gamma}"),
        }
    }

    fn vertex_count(&self, radius: usize) -> Option<usize> {
        match *self {
            ExhaustionFamily::LatticeBox { dim, .. } => {
                let side = 2 * radius + 3;
                (0..dim).try_fold(1usize, |acc, _| acc.checked_mul(side))
            }
            ExhaustionFamily::AntiTree { gamma } => {
                let s = SphereFunction::new(gamma).ok()?;
                Some((0..=radius as i64 + 1).map(|k| s.size(k)).sum())
            }
        }
    }

    /// Radius a label needs to be inside the domain.
    fn label_radius(&self, label: &str) -> Result<usize> {
        let bad = || Error::UnknownVertex(String::from(label));
        match *self {
            ExhaustionFamily::LatticeBox { dim, .. } => {
                let mut r = 0usize;
                let mut count = 0;
                for part in label.split(',') {
                    let c: i64 = part.trim().parse().map_err(|_| bad())?;
                    r = r.max(c.unsigned_abs() as usize);
                    count += 1;
                }
                if count != dim {
                    return Err(bad());
                }
                Ok(r)
            }
            ExhaustionFamily::AntiTree { .. } => anti_tree_level(label).ok_or_else(bad),
        }
    }

    /// Host graph of radius `R + 1` and the Dirichlet domain of radius `R`.
    pub fn domain(&self, radius: usize) -> Result<(Graph, VertexSet)> {
        match *self {
            ExhaustionFamily::LatticeBox {
                dim,
                conductance,
                measure,
            } => {
                let g = build_lattice_box(dim, radius + 1, conductance, measure)?;
                let inner = g
                    .vertices()
                    .filter(|&v| self.label_radius(g.label(v)).map_or(false, |r| r <= radius))
                    .collect::<Vec<_>>();
                let set = VertexSet::new(&g, inner)?;
                Ok((g, set))
            }
            ExhaustionFamily::AntiTree { gamma } => {
                let g = build_anti_tree(gamma, radius + 1)?;
                let inner = g
                    .vertices()
                    .filter(|&v| anti_tree_level(g.label(v)).map_or(false, |k| k <= radius))
                    .collect::<Vec<_>>();
                let set = VertexSet::new(&g, inner)?;
                Ok((g, set))
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExhaustionOptions {
    /// Cauchy tolerance on `max |p^{B_R} − p^{B_{R/2}}|`.
    pub tol: f64,
    /// First radius of the doubling schedule (raised to cover all labels).
    pub start_radius: usize,
    /// The schedule stops before a domain exceeds this many vertices.
    pub max_vertices: usize,
}

impl Default for ExhaustionOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            start_radius: 8,
            max_vertices: 1 << 16,
        }
    }
}

fn domain_slice(
    family: &ExhaustionFamily,
    radius: usize,
    times: &[f64],
    sources: &[String],
    targets: &[String],
    exec: &dyn Executor,
) -> Result<HeatKernelSlice> {
    let (g, set) = family.domain(radius)?;
    let op = LaplacianOperator::dirichlet(&g, &set)?;
    let find = |l: &String| g.require(l);
    let xs: Vec<VertexId> = sources.iter().map(find).collect::<Result<_>>()?;
    let ys: Vec<VertexId> = targets.iter().map(find).collect::<Result<_>>()?;
    heat_kernel_operator(&g, &op, times, &xs, &ys, Backend::ExpmAction, exec)
}

/// Kernel of the infinite family on a `(t, x, y)` grid via the doubling
/// schedule. When the schedule runs out of room before the Cauchy test
/// passes, the last slice is returned with `converged = false`.
pub fn heat_kernel_exhaustion(
    family: &ExhaustionFamily,
    times: &[f64],
    sources: &[String],
    targets: &[String],
    opts: ExhaustionOptions,
    exec: &dyn Executor,
) -> Result<HeatKernelSlice> {
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidParameter(format!("exhaustion tol {}", opts.tol)));
    }
    let mut needed = opts.start_radius.max(1);
    for l in sources.iter().chain(targets) {
        needed = needed.max(family.label_radius(l)?);
    }
    let mut radius = opts.start_radius.max(1);
    while radius < needed {
        radius *= 2;
    }
    let fits = |r: usize| family.vertex_count(r).is_some_and(|n| n <= opts.max_vertices);
    if !fits(radius) {
        return Err(Error::TooLarge {
            what: "exhaustion domain",
            n: family.vertex_count(radius).unwrap_or(usize::MAX),
            max: opts.max_vertices,
        });
    }
    let mut previous = domain_slice(family, radius, times, sources, targets, exec)?;
    let mut previous_radius = radius;
    loop {
        let next_radius = previous_radius * 2;
        if !fits(next_radius) {
            previous.truncation = Some(TruncationRecord {
                family: family.describe(),
                radius: previous_radius,
                previous_radius: None,
                max_change: f64::INFINITY,
                tol: opts.tol,
                converged: false,
            });
            return Ok(previous);
        }
        let mut current = domain_slice(family, next_radius, times, sources, targets, exec)?;
        let mut max_change = 0.0f64;
        for (k, (&new, &old)) in current.log_values().iter().zip(previous.log_values()).enumerate() {
            if new == f64::NEG_INFINITY && old == f64::NEG_INFINITY {
                continue;
            }
            // Dirichlet kernels increase with the domain
            if new < old - 1e-9 {
                let (t, x, y, _) = current.iter().nth(k).unwrap();
                return Err(Error::Monotonicity(format!(
                    "p_t({x},{y}) at t={t} dropped from {} to {} when the radius grew to {next_radius}",
                    exp(old),
                    exp(new)
                )));
            }
            max_change = max_change.max(exp(new) - exp(old));
        }
        if max_change <= opts.tol {
            current.truncation = Some(TruncationRecord {
                family: family.describe(),
                radius: next_radius,
                previous_radius: Some(previous_radius),
                max_change,
                tol: opts.tol,
                converged: true,
            });
            return Ok(current);
        }
        previous = current;
        previous_radius = next_radius;
    }
}

/// Single-point convenience wrapper around [`heat_kernel_exhaustion`].
pub fn exhaustion_value(
    family: &ExhaustionFamily,
    t: f64,
    x: &str,
    y: &str,
    opts: ExhaustionOptions,
    exec: &dyn Executor,
) -> Result<(f64, TruncationRecord)> {
    let s = heat_kernel_exhaustion(
        family,
        &[t],
        &[String::from(x)],
        &[String::from(y)],
        opts,
        exec,
    )?;
    let record = s.truncation.clone().expect("exhaustion always records its truncation");
    Ok((s.value(0, 0, 0), record))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::Sequential;

    fn line() -> ExhaustionFamily {
        ExhaustionFamily::LatticeBox {
            dim: 1,
            conductance: ConductanceRule::Constant(1.0),
            measure: MeasureRule::Constant(1.0),
        }
    }

    #[test]
    fn integer_line_at_unit_time() {
        let (p, rec) = exhaustion_value(&line(), 1.0, "0", "0", ExhaustionOptions::default(), &Sequential).unwrap();
        assert!((p - 0.308_508_322_553_671).abs() < 1e-12);
        assert!(rec.converged);
        assert!(rec.max_change <= 1e-12);
        let (p0, _) = exhaustion_value(&line(), 0.0, "0", "3", ExhaustionOptions::default(), &Sequential).unwrap();
        assert_eq!(p0, 0.0);
    }

    #[test]
    fn anti_tree_kernel_grows_with_the_domain() {
        let fam = ExhaustionFamily::AntiTree { gamma: 0.5 };
        let mut last = 0.0;
        for k in [8, 16, 32] {
            let (g, set) = fam.domain(k).unwrap();
            let op = LaplacianOperator::dirichlet(&g, &set).unwrap();
            let o = g.require("o").unwrap();
            let s = heat_kernel_operator(&g, &op, &[4.0], &[o], &[o], Backend::ExpmAction, &Sequential).unwrap();
            assert!(s.value(0, 0, 0) >= last);
            last = s.value(0, 0, 0);
        }
    }

    #[test]
    fn exhausted_schedule_reports_non_convergence() {
        let opts = ExhaustionOptions {
            tol: 1e-300,
            start_radius: 4,
            max_vertices: 40,
        };
        let (_, rec) = exhaustion_value(&line(), 50.0, "0", "0", opts, &Sequential).unwrap();
        assert!(!rec.converged);
        assert!(exhaustion_value(&line(), 1.0, "0,0", "0", opts, &Sequential).is_err());
    }
}
