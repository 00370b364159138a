//! Explicit heat kernel of the integer line (`b ≡ 1`, `m ≡ 1`):
//!
//! `p_t(x,y) = t^d e^{−2t} / (√π Γ(d+½)) ∫_{−1}^{1} (1−z²)^{d−½} e^{2tz} dz`,
//! `d = |x − y|`, which equals `e^{−2t} I_d(2t)`.
//!
//! With `z = sin θ` the endpoint singularity disappears and the integrand
//! becomes `cos^{2d}θ · e^{2t(sin θ − 1)}` after pulling out `e^{2t}`.

use alloc::format;

use libm::{cos, exp, fabs, log, sin};

use crate::error::{Error, Result};
use crate::special::{ln_gamma, ln_scaled_bessel_i, GaussLegendre, LN_PI};

const QUADRATURE_TOL: f64 = 1e-13;
/// Agreement required between quadrature and the Bessel series.
const CROSS_CHECK_TOL: f64 = 1e-9;

/// `ln p_t(0, d)` on the integer line by quadrature, cross-checked against
/// the log-domain power series of `e^{−2t} I_d(2t)`.
pub fn ln_exact_integer_line_kernel(d: u32, t: f64) -> Result<f64> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "exact line kernel needs finite t > 0, got {t}"
        )));
    }
    let rule = GaussLegendre::new(24);
    let two_d = 2.0 * d as f64;
    let integrand = |theta: f64| {
        let c = cos(theta);
        let base = if d == 0 { 1.0 } else { exp(two_d * log(c.max(0.0))) };
        base * exp(2.0 * t * (sin(theta) - 1.0))
    };
    let half_pi = core::f64::consts::FRAC_PI_2;
    let integral = rule.integrate_adaptive(&integrand, -half_pi, half_pi, QUADRATURE_TOL);
    let quad = d as f64 * log(t) - 0.5 * LN_PI - ln_gamma(d as f64 + 0.5) + log(integral);
    let series = ln_scaled_bessel_i(d, 2.0 * t);
    if fabs(quad - series) > CROSS_CHECK_TOL {
        return Err(Error::NoConvergence(format!(
            "line kernel at d={d}, t={t}: quadrature {quad} vs series {series}"
        )));
    }
    Ok(quad)
}

/// `p_t(0, d)` on the integer line; see [`ln_exact_integer_line_kernel`].
pub fn exact_integer_line_kernel(d: u32, t: f64) -> Result<f64> {
    ln_exact_integer_line_kernel(d, t).map(exp)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_time_values() {
        assert!((exact_integer_line_kernel(0, 1.0).unwrap() - 0.308_508_322_553_671_04).abs() < 1e-15);
        assert!((exact_integer_line_kernel(1, 1.0).unwrap() - 0.215_269_289_248_937_66).abs() < 1e-15);
        assert!((exact_integer_line_kernel(2, 1.0).unwrap() - 0.093_239_033_304_733_38).abs() < 1e-15);
        assert!(exact_integer_line_kernel(0, 0.0).is_err());
    }

    #[test]
    fn wide_range_of_times() {
        for &t in &[1e-3, 0.1, 5.0, 100.0, 1e4] {
            for d in [0u32, 1, 7, 30] {
                assert!(ln_exact_integer_line_kernel(d, t).is_ok(), "d={d}, t={t}");
            }
        }
    }
}
