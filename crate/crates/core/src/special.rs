//! Scalar special functions and quadrature shared by the kernel and bound modules.
//!
//! Everything here is `libm` based so the crate stays `no_std`.

use alloc::vec::Vec;
use libm::{cos, exp, fabs, lgamma, log, log1p};

pub(crate) const LN_PI: f64 = 1.144_729_885_849_400_2;

/// `ln Γ(x)` for `x > 0`.
#[inline]
pub fn ln_gamma(x: f64) -> f64 {
    lgamma(x)
}

/// `ln(e^a + e^b)` without overflow; `-inf` is the neutral element.
#[inline]
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + log1p(exp(lo - hi))
}

/// Streaming log-sum-exp accumulator.
#[derive(Clone, Copy, Debug)]
pub struct LogSum {
    shift: f64,
    sum: f64,
}

impl Default for LogSum {
    fn default() -> Self {
        Self::new()
    }
}

impl LogSum {
    pub const fn new() -> Self {
        Self {
            shift: f64::NEG_INFINITY,
            sum: 0.0,
        }
    }

    #[inline]
    pub fn add(&mut self, log_term: f64) {
        if log_term == f64::NEG_INFINITY {
            return;
        }
        if log_term <= self.shift {
            self.sum += exp(log_term - self.shift);
        } else {
            self.sum = self.sum * exp(self.shift - log_term) + 1.0;
            self.shift = log_term;
        }
    }

    pub fn value(&self) -> f64 {
        if self.sum == 0.0 {
            f64::NEG_INFINITY
        } else {
            self.shift + log(self.sum)
        }
    }
}

/// Gauss–Legendre rule of a fixed order on `[-1, 1]`.
#[derive(Clone, Debug)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(order: usize) -> Self {
        assert!(order >= 2);
        let n = order;
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        for i in 0..n {
            // Chebyshev guess, then Newton on P_n.
            let mut x = cos(core::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5));
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if fabs(dx) < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            nodes.push(x);
            weights.push(2.0 / ((1.0 - x * x) * dp * dp));
        }
        Self { nodes, weights }
    }

    /// Fixed-order rule on `[a, b]`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: &F, a: f64, b: f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(mid + half * x))
            .sum::<f64>()
            * half
    }

    /// Adaptive bisection until each panel agrees with its two halves to
    /// `rel_tol` of the running total.
    pub fn integrate_adaptive<F: Fn(f64) -> f64>(&self, f: &F, a: f64, b: f64, rel_tol: f64) -> f64 {
        let whole = self.integrate(f, a, b);
        let scale = fabs(whole).max(f64::MIN_POSITIVE);
        let total_len = b - a;
        let mut total = 0.0;
        let mut stack: Vec<(f64, f64, f64, u32)> = alloc::vec![(a, b, whole, 0)];
        while let Some((lo, hi, coarse, depth)) = stack.pop() {
            let mid = 0.5 * (lo + hi);
            let left = self.integrate(f, lo, mid);
            let right = self.integrate(f, mid, hi);
            let fine = left + right;
            let budget = rel_tol * scale * ((hi - lo) / total_len).max(1e-3);
            if fabs(fine - coarse) <= budget || depth >= 40 {
                total += fine;
            } else {
                stack.push((lo, mid, left, depth + 1));
                stack.push((mid, hi, right, depth + 1));
            }
        }
        total
    }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// `ln(e^{-x} I_n(x))` from the power series, summed in log-domain.
pub fn ln_scaled_bessel_i(n: u32, x: f64) -> f64 {
    debug_assert!(x > 0.0);
    let nf = n as f64;
    let lhalf = log(0.5 * x);
    let peak = 0.5 * (libm::sqrt(nf * nf + x * x) - nf);
    let mut acc = LogSum::new();
    let mut best = f64::NEG_INFINITY;
    let mut k = 0u64;
    loop {
        let kf = k as f64;
        let term = (2.0 * kf + nf) * lhalf - ln_gamma(kf + 1.0) - ln_gamma(kf + nf + 1.0);
        acc.add(term);
        best = best.max(term);
        if kf > peak && term < best - 40.0 {
            break;
        }
        k += 1;
    }
    acc.value() - x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_is_exact_on_polynomials() {
        let gl = GaussLegendre::new(20);
        let v = gl.integrate(&|x: f64| x.powi(10) - 3.0 * x * x, -1.0, 2.0);
        let exact = (2f64.powi(11) + 1.0) / 11.0 - (8.0 + 1.0);
        assert!((v - exact).abs() < 1e-12);
        let w: f64 = gl.weights.iter().sum();
        assert!((w - 2.0).abs() < 1e-14);
    }

    #[test]
    fn adaptive_handles_peaked_integrand() {
        let gl = GaussLegendre::new(20);
        // ∫_0^1 e^{-200 (1-x)} dx = (1 - e^{-200}) / 200
        let v = gl.integrate_adaptive(&|x: f64| exp(-200.0 * (1.0 - x)), 0.0, 1.0, 1e-13);
        assert!((v - 1.0 / 200.0).abs() < 1e-15);
    }

    #[test]
    fn scaled_bessel_matches_reference() {
        // e^{-2} I_0(2), e^{-2} I_1(2), e^{-2} I_2(2)
        let refs = [
            0.308_508_322_553_671_04,
            0.215_269_289_248_937_66,
            0.093_239_033_304_733_38,
        ];
        for (n, r) in refs.iter().enumerate() {
            let v = exp(ln_scaled_bessel_i(n as u32, 2.0));
            assert!(((v - r) / r).abs() < 1e-13, "n={n}: {v} vs {r}");
        }
    }

    #[test]
    fn log_sum_agrees_with_direct_sum() {
        let mut acc = LogSum::new();
        let xs = [1e-3, 2.5, 7.0, 0.125];
        for x in xs {
            acc.add(log(x));
        }
        assert!((exp(acc.value()) - xs.iter().sum::<f64>()).abs() < 1e-12);
        assert_eq!(LogSum::new().value(), f64::NEG_INFINITY);
        assert!((log_add_exp(log(2.0), log(3.0)) - log(5.0)).abs() < 1e-15);
    }
}
