//! Action of `e^{−tΔ}` on point masses by uniformization:
//!
//! `e^{−tΔ} = Σ_k e^{−Λt} (Λt)^k / k! · P^k`, `P = I − Δ/Λ`, `Λ = 2·max Deg + 1`.
//!
//! `P` is entrywise nonnegative, so the series has no cancellation. The powers
//! `P^k v` are shared by every time in the grid. A first pass accumulates in
//! linear arithmetic relative to the Poisson mode of each time; entries that
//! end up below `1e−200` of that scale (far pairs at short times) are redone
//! in a second pass that carries `P^k v` in log-domain.

use alloc::format;
use alloc::vec::Vec;

use libm::{exp, log};

use crate::error::{Error, Result};
use crate::laplacian::LaplacianOperator;
use crate::special::{ln_gamma, LogSum};

/// Relative truncation target for the Poisson tail.
pub const TAIL_TOL: f64 = 1e-14;
const LN_TAIL_TOL: f64 = -32.236_191_301_916_64;
/// Linear accumulators below this (relative to the Poisson mode weight) are
/// recomputed in log-domain.
const LINEAR_FLOOR: f64 = 1e-200;
const RESCALE_BELOW: f64 = 1e-200;
const MAX_POWERS: usize = 50_000_000;

/// Uniformization rate used for `op`.
pub fn uniformization_rate(op: &LaplacianOperator) -> f64 {
    2.0 * op.max_weighted_degree() + 1.0
}

struct Poisson {
    lambda: f64,
    ln_lambda: f64,
    /// Log weight at the mode, the reference scale of the linear pass.
    reference: f64,
}

impl Poisson {
    fn new(lambda: f64) -> Self {
        let ln_lambda = log(lambda);
        let mode = libm::floor(lambda);
        let mut p = Self {
            lambda,
            ln_lambda,
            reference: 0.0,
        };
        p.reference = p.ln_weight(mode as usize);
        p
    }

    #[inline]
    fn ln_weight(&self, k: usize) -> f64 {
        -self.lambda + k as f64 * self.ln_lambda - ln_gamma(k as f64 + 1.0)
    }

    /// Log of an upper bound on `Σ_{j>k} w_j`, valid once `k + 1 > λ`.
    fn ln_tail_after(&self, k: usize) -> Option<f64> {
        let next = (k + 1) as f64;
        if next <= self.lambda {
            return None;
        }
        let ratio = self.lambda / (next + 1.0);
        Some(self.ln_weight(k + 1) - log(1.0 - ratio))
    }
}

/// `ln p_t(x, y)` for every `t ∈ times` and `x ∈ rows` (active positions) at
/// the fixed column `y`, laid out `[t][row]`.
///
/// Entries of `P^k(δ_y/m_y)` are bounded by `1/√(m_x m_y)`, which turns the
/// Poisson tail bound into a per-entry relative stopping rule.
pub fn log_column(op: &LaplacianOperator, y: usize, rows: &[usize], times: &[f64]) -> Result<Vec<f64>> {
    let n = op.len();
    if y >= n || rows.iter().any(|&r| r >= n) {
        return Err(Error::InvalidParameter(
            "kernel row or column outside the operator".into(),
        ));
    }
    for &t in times {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::InvalidParameter(format!("time {t} must be finite and >= 0")));
        }
    }
    let m = op.measure();
    let ln_my = log(m[y]);
    let nt = times.len();
    let nr = rows.len();
    let mut out = alloc::vec![f64::NEG_INFINITY; nt * nr];
    let ln_bound: Vec<f64> = rows.iter().map(|&r| -0.5 * (log(m[r]) + ln_my)).collect();
    let max_ln_bound = ln_bound.iter().copied().fold(f64::NEG_INFINITY, f64::max);

    let rate = uniformization_rate(op);
    let positive: Vec<usize> = (0..nt).filter(|&i| times[i] > 0.0).collect();
    for i in 0..nt {
        if times[i] == 0.0 {
            for (r, &row) in rows.iter().enumerate() {
                if row == y {
                    out[i * nr + r] = -ln_my;
                }
            }
        }
    }
    if positive.is_empty() {
        return Ok(out);
    }
    let poisson: Vec<Poisson> = times.iter().map(|&t| Poisson::new(rate * t)).collect();

    // linear pass
    let mut v = alloc::vec![0.0; n];
    v[y] = 1.0 / m[y];
    let mut next = alloc::vec![0.0; n];
    let mut ln_scale = 0.0;
    let mut acc = alloc::vec![0.0; nt * nr];
    let mut active: Vec<usize> = positive.clone();
    let mut k = 0usize;
    while !active.is_empty() {
        if k > MAX_POWERS {
            return Err(Error::NoConvergence(format!(
                "uniformization exceeded {MAX_POWERS} powers"
            )));
        }
        active.retain(|&i| {
            let p = &poisson[i];
            let c = exp(p.ln_weight(k) - p.reference + ln_scale);
            let row = &mut acc[i * nr..(i + 1) * nr];
            if c > 0.0 {
                for (a, &r) in row.iter_mut().zip(rows) {
                    *a += c * v[r];
                }
            }
            match p.ln_tail_after(k) {
                None => true,
                Some(tail) => {
                    // entries still below the floor go to the log pass
                    let floor = row
                        .iter()
                        .copied()
                        .fold(f64::INFINITY, f64::min)
                        .max(LINEAR_FLOOR);
                    tail - p.reference + max_ln_bound > LN_TAIL_TOL + log(floor)
                }
            }
        });
        if active.is_empty() {
            break;
        }
        step_linear(op, rate, &v, &mut next);
        core::mem::swap(&mut v, &mut next);
        let vmax = v.iter().copied().fold(0.0, f64::max);
        if vmax > 0.0 && vmax < RESCALE_BELOW {
            v.iter_mut().for_each(|x| *x /= vmax);
            ln_scale += log(vmax);
        }
        k += 1;
    }

    let mut flagged: Vec<(usize, usize)> = Vec::new();
    for &i in &positive {
        for r in 0..nr {
            let a = acc[i * nr + r];
            if a >= LINEAR_FLOOR {
                out[i * nr + r] = poisson[i].reference + log(a);
            } else {
                flagged.push((i, r));
            }
        }
    }
    if !flagged.is_empty() {
        log_pass(op, rate, y, rows, &poisson, &ln_bound, &flagged, &mut out, nr)?;
    }
    Ok(out)
}

fn step_linear(op: &LaplacianOperator, rate: f64, v: &[f64], out: &mut [f64]) {
    let diag = op.diagonal();
    let inv = 1.0 / rate;
    for x in 0..op.len() {
        let mut s = (1.0 - diag[x] * inv) * v[x];
        for &(y, w) in op.row(x) {
            s += w * inv * v[y as usize];
        }
        out[x] = s;
    }
}

#[allow(clippy::too_many_arguments)]
fn log_pass(
    op: &LaplacianOperator,
    rate: f64,
    y: usize,
    rows: &[usize],
    poisson: &[Poisson],
    ln_bound: &[f64],
    flagged: &[(usize, usize)],
    out: &mut [f64],
    nr: usize,
) -> Result<()> {
    let n = op.len();
    let diag = op.diagonal();
    let ln_self: Vec<f64> = diag.iter().map(|d| log(1.0 - d / rate)).collect();
    let ln_rate = log(rate);
    let ln_off: Vec<(u32, f64)> = (0..n)
        .flat_map(|x| op.row(x).iter().map(|&(z, w)| (z, log(w) - ln_rate)))
        .collect();
    let mut offsets = Vec::with_capacity(n + 1);
    offsets.push(0);
    for x in 0..n {
        offsets.push(offsets[x] + op.row(x).len());
    }

    let mut lv = alloc::vec![f64::NEG_INFINITY; n];
    lv[y] = -log(op.measure()[y]);
    let mut next = alloc::vec![f64::NEG_INFINITY; n];
    let mut sums: Vec<LogSum> = alloc::vec![LogSum::new(); flagged.len()];
    let mut pending: Vec<usize> = (0..flagged.len()).collect();
    let mut k = 0usize;
    while !pending.is_empty() {
        if k > MAX_POWERS {
            return Err(Error::NoConvergence(format!(
                "log-domain uniformization exceeded {MAX_POWERS} powers"
            )));
        }
        pending.retain(|&f| {
            let (i, r) = flagged[f];
            let p = &poisson[i];
            sums[f].add(p.ln_weight(k) + lv[rows[r]]);
            match p.ln_tail_after(k) {
                None => true,
                Some(tail) => {
                    let value = sums[f].value();
                    !(value.is_finite() && tail + ln_bound[r] <= LN_TAIL_TOL + value)
                }
            }
        });
        if pending.is_empty() {
            break;
        }
        for x in 0..n {
            let mut best = ln_self[x] + lv[x];
            for &(z, lw) in &ln_off[offsets[x]..offsets[x + 1]] {
                best = best.max(lw + lv[z as usize]);
            }
            if best == f64::NEG_INFINITY {
                next[x] = best;
                continue;
            }
            let mut s = exp(ln_self[x] + lv[x] - best);
            for &(z, lw) in &ln_off[offsets[x]..offsets[x + 1]] {
                s += exp(lw + lv[z as usize] - best);
            }
            next[x] = best + log(s);
        }
        core::mem::swap(&mut lv, &mut next);
        k += 1;
    }
    for (f, &(i, r)) in flagged.iter().enumerate() {
        out[i * nr + r] = sums[f].value();
    }
    Ok(())
}
