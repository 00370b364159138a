//! Log-barrier interior-point method for small convex programs with linear
//! objective and convex quadratic constraints:
//!
//! maximize `cᵀx` subject to `g_i(x) = Σ_k c_ik (a_ikᵀx)² + l_iᵀx − h_i ≤ 0`.
//!
//! The Newton systems are assembled in banded form; for the metric programs
//! on lattice boxes the band is a couple of box widths, so a Newton step
//! costs `O(n · bw²)`.

use alloc::format;
use alloc::vec::Vec;

use libm::{fabs, log, sqrt};

use crate::error::{Error, Result};

/// Quality record of a solve.
#[derive(Clone, Debug, PartialEq)]
pub struct SolverCertificate {
    pub objective: f64,
    /// Largest constraint value `max_i g_i(x)` clipped at 0.
    pub residual: f64,
    pub iterations: usize,
    /// Certified optimality gap: the true supremum lies in
    /// `[objective, objective + gap]`.
    pub gap: f64,
    pub tolerance: f64,
}

impl SolverCertificate {
    pub fn upper(&self) -> f64 {
        self.objective + self.gap
    }
}

/// One convex quadratic constraint with sparse support.
#[derive(Clone, Debug)]
pub struct Constraint {
    support: Vec<usize>,
    /// `(c_k, a_k)` with `a_k` indexed locally into `support`.
    squares: Vec<(f64, Vec<(usize, f64)>)>,
    linear: Vec<(usize, f64)>,
    bound: f64,
    /// Constant local Hessian `Σ_k 2 c_k a_k a_kᵀ`, row-major over `support`.
    hessian: Vec<f64>,
}

impl Constraint {
    /// `Σ_k c_k (a_kᵀx)² + lᵀx ≤ bound`, with `c_k ≥ 0` and global indices.
    pub fn new(squares: Vec<(f64, Vec<(usize, f64)>)>, linear: Vec<(usize, f64)>, bound: f64) -> Self {
        let mut support: Vec<usize> = squares
            .iter()
            .flat_map(|(_, a)| a.iter().map(|&(i, _)| i))
            .chain(linear.iter().map(|&(i, _)| i))
            .collect();
        support.sort_unstable();
        support.dedup();
        let local = |i: usize| support.binary_search(&i).unwrap();
        let squares: Vec<(f64, Vec<(usize, f64)>)> = squares
            .into_iter()
            .map(|(c, a)| (c, a.into_iter().map(|(i, v)| (local(i), v)).collect()))
            .collect();
        let linear = linear.into_iter().map(|(i, v)| (local(i), v)).collect();
        let s = support.len();
        let mut hessian = alloc::vec![0.0; s * s];
        for (c, a) in &squares {
            for &(i, ai) in a {
                for &(j, aj) in a {
                    hessian[i * s + j] += 2.0 * c * ai * aj;
                }
            }
        }
        Self {
            support,
            squares,
            linear,
            bound,
            hessian,
        }
    }

    /// Linear constraint `lᵀx ≤ bound`.
    pub fn linear(linear: Vec<(usize, f64)>, bound: f64) -> Self {
        Self::new(Vec::new(), linear, bound)
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        let mut g = -self.bound;
        for (c, a) in &self.squares {
            let ax: f64 = a.iter().map(|&(i, v)| v * x[self.support[i]]).sum();
            g += c * ax * ax;
        }
        for &(i, v) in &self.linear {
            g += v * x[self.support[i]];
        }
        g
    }

    fn gradient(&self, x: &[f64], out: &mut Vec<f64>) {
        out.clear();
        out.resize(self.support.len(), 0.0);
        for (c, a) in &self.squares {
            let ax: f64 = a.iter().map(|&(i, v)| v * x[self.support[i]]).sum();
            for &(i, v) in a {
                out[i] += 2.0 * c * ax * v;
            }
        }
        for &(i, v) in &self.linear {
            out[i] += v;
        }
    }
}

/// Newton decrement `λ²` below which a point counts as near-central.
const NEAR_CENTER: f64 = 0.25;

/// Newton steps allowed per barrier stage once a central point is known.
const STAGE_NEWTON: usize = 500;

/// Suboptimality bound `(m + √m + 1/2)/t` for points with `λ ≤ 1/2` on the
/// central path of a barrier with `m` logarithmic terms.
fn gap_bound(m: f64, t: f64) -> f64 {
    (m + sqrt(m) + 0.5) / t
}

/// `maximize cᵀx` over the intersection of the constraints.
#[derive(Clone, Debug)]
pub struct ConvexProgram {
    dim: usize,
    objective: Vec<(usize, f64)>,
    constraints: Vec<Constraint>,
}

/// Barrier-method controls.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BarrierOptions {
    /// Target duality gap.
    pub tol: f64,
    /// Barrier parameter growth per outer stage.
    pub mu: f64,
    pub max_newton: usize,
}

impl Default for BarrierOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            mu: 8.0,
            max_newton: 2000,
        }
    }
}

impl ConvexProgram {
    pub fn new(dim: usize, objective: Vec<(usize, f64)>, constraints: Vec<Constraint>) -> Self {
        Self {
            dim,
            objective,
            constraints,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        self.objective.iter().map(|&(i, c)| c * x[i]).sum()
    }

    /// `max_i g_i(x)`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        self.constraints
            .iter()
            .map(|c| c.value(x))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    fn bandwidth(&self) -> usize {
        self.constraints
            .iter()
            .map(|c| c.support.last().unwrap_or(&0) - c.support.first().unwrap_or(&0))
            .max()
            .unwrap_or(0)
    }

    /// `t·cᵀx + Σ ln(−g_i)`, or `None` outside the open feasible set.
    fn merit(&self, x: &[f64], t: f64) -> Option<f64> {
        let mut phi = t * self.objective(x);
        for c in &self.constraints {
            let g = c.value(x);
            if !(g < 0.0) {
                return None;
            }
            phi += log(-g);
        }
        Some(phi)
    }

    /// Path-following from the strictly feasible `x0`.
    pub fn solve(&self, x0: Vec<f64>, opts: BarrierOptions) -> Result<(Vec<f64>, SolverCertificate)> {
        if x0.len() != self.dim {
            return Err(Error::InvalidParameter(format!(
                "start point has dimension {}, program has {}",
                x0.len(),
                self.dim
            )));
        }
        if !(opts.tol > 0.0) || !(opts.mu > 1.0) {
            return Err(Error::InvalidParameter(format!(
                "barrier options need tol > 0 and mu > 1, got {opts:?}"
            )));
        }
        let m = self.constraints.len() as f64;
        if self.max_violation(&x0) >= 0.0 {
            return Err(Error::Precondition(
                "barrier start point is not strictly feasible".into(),
            ));
        }
        let n = self.dim;
        let bw = self.bandwidth().min(n.saturating_sub(1));
        let mut x = x0;
        let mut t = 1.0f64;
        let mut iterations = 0usize;
        let mut band = Band::new(n, bw);
        let mut grad = alloc::vec![0.0; n];
        let mut local = Vec::new();
        // last iterate known to be near the central path, with its t
        let mut anchor: Option<(Vec<f64>, f64)> = None;
        loop {
            // centering: maximize t·cᵀx + Σ ln(−g_i)
            let mut near_steps = 0;
            let mut stage_steps = 0;
            let centered = loop {
                if iterations >= opts.max_newton {
                    return Err(Error::NoConvergence(format!(
                        "barrier method used {iterations} Newton steps at gap {}",
                        gap_bound(m, t)
                    )));
                }
                // Past the conditioning floor (Hessian condition ~t²) Newton
                // stops making progress; give up on this t.
                if stage_steps >= STAGE_NEWTON && anchor.is_some() {
                    break false;
                }
                iterations += 1;
                stage_steps += 1;
                grad.iter_mut().for_each(|g| *g = 0.0);
                band.clear();
                for &(i, c) in &self.objective {
                    grad[i] += t * c;
                }
                for c in &self.constraints {
                    let g = c.value(&x);
                    c.gradient(&x, &mut local);
                    let s = c.support.len();
                    let inv = 1.0 / g; // negative
                    for a in 0..s {
                        grad[c.support[a]] += local[a] * inv;
                    }
                    // Hessian of −ln(−g): ∇g∇gᵀ/g² − ∇²g/g
                    for a in 0..s {
                        let ia = c.support[a];
                        for b in 0..=a {
                            let ib = c.support[b];
                            let h = local[a] * local[b] * inv * inv - c.hessian[a * s + b] * inv;
                            band.add(ia, ib, h);
                        }
                    }
                }
                // Newton direction of the concave merit: H dx = grad
                let mut dx = grad.clone();
                band.solve_with_jitter(&mut dx)?;
                let decrement: f64 = dx.iter().zip(&grad).map(|(d, g)| d * g).sum();
                if decrement * 0.5 <= 1e-9 {
                    break true;
                }
                // Inside λ² ≤ 1/4 Newton converges quadratically; at large t
                // rounding in t·cᵀx keeps the decrement from shrinking, so
                // many steps there mean the floor is reached.
                if decrement <= NEAR_CENTER {
                    near_steps += 1;
                    if near_steps > 20 {
                        break true;
                    }
                }
                let phi0 = self.merit(&x, t).unwrap();
                let mut alpha = 1.0;
                let mut trial = x.clone();
                loop {
                    for ((tr, xi), d) in trial.iter_mut().zip(&x).zip(&dx) {
                        *tr = xi + alpha * d;
                    }
                    if let Some(phi) = self.merit(&trial, t) {
                        if phi >= phi0 + 0.25 * alpha * decrement {
                            break;
                        }
                    }
                    alpha *= 0.5;
                    if alpha < 1e-14 {
                        break;
                    }
                }
                if alpha < 1e-14 {
                    // no ascent left in double precision
                    break decrement <= NEAR_CENTER;
                }
                x = trial;
            };
            if centered {
                if gap_bound(m, t) <= opts.tol {
                    break;
                }
                anchor = Some((x.clone(), t));
                t *= opts.mu;
            } else if let Some((xa, ta)) = anchor.take() {
                x = xa;
                t = ta;
                break;
            } else {
                return Err(Error::NoConvergence("barrier method found no central point".into()));
            }
        }
        let objective = self.objective(&x);
        let residual = self.max_violation(&x).max(0.0);
        let gap = gap_bound(m, t);
        if gap > opts.tol * 1e3 {
            return Err(Error::NoConvergence(format!(
                "barrier stalled at gap {gap} (target {})",
                opts.tol
            )));
        }
        Ok((
            x,
            SolverCertificate {
                objective,
                residual,
                iterations,
                gap,
                tolerance: opts.tol,
            },
        ))
    }
}

/// Symmetric positive definite band matrix, lower band stored row-wise.
struct Band {
    n: usize,
    bw: usize,
    data: Vec<f64>,
}

impl Band {
    fn new(n: usize, bw: usize) -> Self {
        Self {
            n,
            bw,
            data: alloc::vec![0.0; n * (bw + 1)],
        }
    }

    fn clear(&mut self) {
        self.data.iter_mut().for_each(|v| *v = 0.0);
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        // j ≤ i, i − j ≤ bw
        i * (self.bw + 1) + (self.bw + j - i)
    }

    fn add(&mut self, i: usize, j: usize, v: f64) {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        let k = self.idx(i, j);
        self.data[k] += v;
    }

    /// In-place Cholesky `A = LLᵀ`; false on a nonpositive pivot.
    fn factor(&mut self) -> bool {
        let (n, bw) = (self.n, self.bw);
        for i in 0..n {
            let lo = i.saturating_sub(bw);
            for j in lo..=i {
                let mut s = self.data[self.idx(i, j)];
                let klo = lo.max(j.saturating_sub(bw));
                for k in klo..j {
                    s -= self.data[self.idx(i, k)] * self.data[self.idx(j, k)];
                }
                if i == j {
                    if !(s > 0.0) || !s.is_finite() {
                        return false;
                    }
                    let k = self.idx(i, i);
                    self.data[k] = libm::sqrt(s);
                } else {
                    let k = self.idx(i, j);
                    self.data[k] = s / self.data[self.idx(j, j)];
                }
            }
        }
        true
    }

    fn substitute(&self, b: &mut [f64]) {
        let (n, bw) = (self.n, self.bw);
        for i in 0..n {
            let mut s = b[i];
            for k in i.saturating_sub(bw)..i {
                s -= self.data[self.idx(i, k)] * b[k];
            }
            b[i] = s / self.data[self.idx(i, i)];
        }
        for i in (0..n).rev() {
            let mut s = b[i];
            for k in i + 1..(i + bw + 1).min(n) {
                s -= self.data[self.idx(k, i)] * b[k];
            }
            b[i] = s / self.data[self.idx(i, i)];
        }
    }

    /// Solve `A x = b`, regularizing the diagonal if the factorization fails.
    fn solve_with_jitter(&mut self, b: &mut [f64]) -> Result<()> {
        let original = self.data.clone();
        let scale = (0..self.n)
            .map(|i| fabs(original[self.idx(i, i)]))
            .fold(0.0, f64::max)
            .max(f64::MIN_POSITIVE);
        let mut jitter = 0.0;
        for _ in 0..12 {
            if jitter > 0.0 {
                self.data.copy_from_slice(&original);
                for i in 0..self.n {
                    let k = self.idx(i, i);
                    self.data[k] += jitter;
                }
            }
            if self.factor() {
                self.substitute(b);
                return Ok(());
            }
            jitter = if jitter == 0.0 { scale * 1e-14 } else { jitter * 100.0 };
        }
        Err(Error::NoConvergence(
            "Newton system is not positive definite".into(),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn band_cholesky_solves_tridiagonal() {
        let n = 6;
        let mut band = Band::new(n, 1);
        for i in 0..n {
            band.add(i, i, 2.0);
            if i > 0 {
                band.add(i, i - 1, -1.0);
            }
        }
        let x_true: Vec<f64> = (0..n).map(|i| i as f64 - 2.0).collect();
        let mut b: Vec<f64> = (0..n)
            .map(|i| {
                2.0 * x_true[i]
                    - if i > 0 { x_true[i - 1] } else { 0.0 }
                    - if i + 1 < n { x_true[i + 1] } else { 0.0 }
            })
            .collect();
        band.solve_with_jitter(&mut b).unwrap();
        for (a, e) in b.iter().zip(&x_true) {
            assert!((a - e).abs() < 1e-12);
        }
    }

    #[test]
    fn disc_maximum() {
        // max x + y on x² + y² ≤ 2  →  2 at (1, 1)
        let p = ConvexProgram::new(
            2,
            alloc::vec![(0, 1.0), (1, 1.0)],
            alloc::vec![Constraint::new(
                alloc::vec![(1.0, alloc::vec![(0, 1.0)]), (1.0, alloc::vec![(1, 1.0)])],
                alloc::vec![],
                2.0
            )],
        );
        let (x, cert) = p.solve(alloc::vec![0.0, 0.0], BarrierOptions::default()).unwrap();
        assert!((cert.objective - 2.0).abs() < 1e-7);
        assert!(cert.objective <= 2.0);
        assert!(cert.upper() >= 2.0 - 1e-12);
        assert!((x[0] - 1.0).abs() < 1e-4);
        assert_eq!(cert.residual, 0.0);
    }

    #[test]
    fn linear_program_vertex() {
        // max x + 2y, x + y ≤ 1, x ≥ 0, y ≥ 0  →  2
        let p = ConvexProgram::new(
            2,
            alloc::vec![(0, 1.0), (1, 2.0)],
            alloc::vec![
                Constraint::linear(alloc::vec![(0, 1.0), (1, 1.0)], 1.0),
                Constraint::linear(alloc::vec![(0, -1.0)], 0.0),
                Constraint::linear(alloc::vec![(1, -1.0)], 0.0),
            ],
        );
        let (_, cert) = p.solve(alloc::vec![0.25, 0.25], BarrierOptions::default()).unwrap();
        assert!((cert.objective - 2.0).abs() < 1e-7);
    }

    #[test]
    fn infeasible_start_is_rejected() {
        let p = ConvexProgram::new(
            1,
            alloc::vec![(0, 1.0)],
            alloc::vec![Constraint::linear(alloc::vec![(0, 1.0)], 1.0)],
        );
        assert!(matches!(
            p.solve(alloc::vec![1.0], BarrierOptions::default()),
            Err(Error::Precondition(_))
        ));
    }
}
