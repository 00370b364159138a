//! Right-hand sides of the heat kernel bounds, all in log-domain.
//!
//! Raw values overflow quickly (the error functions contain constants like
//! `exp(2^{19n} e)`), so every evaluator returns a natural logarithm and the
//! verifier compares `ln p` against it.

use alloc::format;
use alloc::string::String;

use libm::{asinh, log, pow, sqrt};

use crate::error::{Error, Result};
use crate::special::log_add_exp;

/// Below this argument ζ uses its Taylor series.
const ZETA_SERIES_BELOW: f64 = 1e-4;

fn positive(what: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{what} must be finite and > 0, got {v}")))
    }
}

fn nonnegative(what: &str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{what} must be finite and >= 0, got {v}")))
    }
}

/// `ζ(x) = x·arsinh(x) + 1 − √(x² + 1)`.
pub fn zeta(x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::InvalidParameter(format!("zeta needs x >= 0, got {x}")));
    }
    Ok(zeta_unchecked(x))
}

#[inline]
pub(crate) fn zeta_unchecked(x: f64) -> f64 {
    if x < ZETA_SERIES_BELOW {
        let x2 = x * x;
        return x2 * (0.5 - x2 * (1.0 / 24.0 - x2 / 80.0));
    }
    if x.is_infinite() {
        return f64::INFINITY;
    }
    // 1 − √(1+x²) = −x²/(1 + √(1+x²)) keeps the subtraction benign
    x * asinh(x) - x * x / (1.0 + sqrt(x * x + 1.0))
}

/// Logs of the Pang sandwich `c^{∓1}/(√t ∨ d) · exp(−2t ζ(d/2t))`, returned
/// as `(lower, upper)`.
pub fn pang_envelope(d: f64, t: f64, c: f64) -> Result<(f64, f64)> {
    nonnegative("d", d)?;
    positive("t", t)?;
    if !(c >= 1.0) || !c.is_finite() {
        return Err(Error::InvalidParameter(format!("Pang constant must be >= 1, got {c}")));
    }
    let core = -log(sqrt(t).max(d)) - 2.0 * t * zeta_unchecked(d / (2.0 * t));
    Ok((core - log(c), core + log(c)))
}

fn gaussian(m_x: f64, m_y: f64, rho: f64, t: f64, s: f64, scale: f64) -> Result<f64> {
    positive("m(x)", m_x)?;
    positive("m(y)", m_y)?;
    positive("jump size S", s)?;
    nonnegative("distance", rho)?;
    nonnegative("t", t)?;
    if t == 0.0 {
        // the bound is vacuous at t = 0
        return Ok(f64::INFINITY);
    }
    let st = scale * t;
    Ok(-0.5 * (log(m_x) + log(m_y)) - st / (s * s) * zeta_unchecked(rho * s / st))
}

/// Universal Gaussian `(m_x m_y)^{−1/2} exp(−(t/S²) ζ(ρS/t))` for an
/// intrinsic metric with jump size `S`. `t = 0` gives `+∞`.
pub fn universal_rhs(m_x: f64, m_y: f64, rho: f64, t: f64, s: f64) -> Result<f64> {
    gaussian(m_x, m_y, rho, t, s, 1.0)
}

/// Davies' Gaussian `(m_x m_y)^{−1/2} exp(−(2t/S²) ζ(ρ_ℇ S/(2t)))` on an
/// `S`-regular graph.
pub fn davies_rhs(m_x: f64, m_y: f64, rho: f64, t: f64, s: f64) -> Result<f64> {
    gaussian(m_x, m_y, rho, t, s, 2.0)
}

/// Dimension `n`, Faber–Krahn radius `r` and jump size `S` of the error
/// functions `θ`, `Φ`, `Ψ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErrorParams {
    pub n: f64,
    pub r: f64,
    pub s: f64,
    c_theta: f64,
}

impl ErrorParams {
    pub fn new(n: f64, r: f64, s: f64) -> Result<Self> {
        positive("n", n)?;
        nonnegative("r", r)?;
        positive("S", s)?;
        let c_theta = pow(288.0 * s, 1.0 / (n + 2.0)) * (n + 2.0);
        Ok(Self { n, r, s, c_theta })
    }

    /// `C_θ = (288 S)^{1/(n+2)} (n + 2)`.
    pub fn c_theta(&self) -> f64 {
        self.c_theta
    }

    /// `θ(s) = C_θ s^{−1/(n+2)}`.
    pub fn theta(&self, s: f64) -> Result<f64> {
        positive("s", s)?;
        Ok(self.c_theta * pow(s, -1.0 / (self.n + 2.0)))
    }

    /// `ln Φ_x(s)` with `Deg_x = deg`:
    /// `r^n [1 ∨ Deg]^{n/2 + θ(r)}` for `s < r`, `[1 ∨ Deg]^{θ(s)}` otherwise.
    pub fn log_phi(&self, deg: f64, s: f64) -> Result<f64> {
        positive("s", s)?;
        nonnegative("Deg", deg)?;
        let ln_deg = log(deg.max(1.0));
        if s < self.r {
            Ok(self.n * log(self.r) + (self.n / 2.0 + self.theta(self.r)?) * ln_deg)
        } else {
            Ok(self.theta(s)? * ln_deg)
        }
    }

    /// `τ_ρ = S² / (2 arsinh²((√τ ∨ ρ) S / τ))`.
    pub fn tau_rho(&self, tau: f64, rho: f64) -> Result<f64> {
        positive("t", tau)?;
        nonnegative("distance", rho)?;
        let a = asinh(sqrt(tau).max(rho) * self.s / tau);
        Ok(self.s * self.s / (2.0 * a * a))
    }

    /// `ln Ψ_{xy}(√τ)` with `Ψ² = Φ_x(√τ_ρ) Φ_y(√τ_ρ)`.
    pub fn log_psi(&self, tau: f64, rho: f64, deg_x: f64, deg_y: f64) -> Result<f64> {
        let s = sqrt(self.tau_rho(tau, rho)?);
        Ok(0.5 * (self.log_phi(deg_x, s)? + self.log_phi(deg_y, s)?))
    }
}

/// The factors of the (G) right-hand side, each as a logarithm.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GParts {
    pub log_psi: f64,
    /// `(N/2) ln(1 ∨ (t/S²) arsinh²(ρS/t))`
    pub log_polynomial: f64,
    /// `−½ ln(m(B_x(√t)) m(B_y(√t)))`
    pub log_volume: f64,
    /// `−(t/S²) ζ(ρS/t)`
    pub exponent: f64,
}

impl GParts {
    pub fn total(&self) -> f64 {
        self.log_psi + self.log_polynomial + self.log_volume + self.exponent
    }
}

/// (G) right-hand side
/// `Ψ (1 ∨ (t/S²)arsinh²(ρS/t))^{N/2} / √(m(B_x(√t)) m(B_y(√t))) · exp(−(t/S²)ζ(ρS/t))`.
pub fn g_rhs(vol_x: f64, vol_y: f64, rho: f64, t: f64, s: f64, log_psi: f64, big_n: f64) -> Result<GParts> {
    positive("m(B_x(√t))", vol_x)?;
    positive("m(B_y(√t))", vol_y)?;
    positive("t", t)?;
    positive("S", s)?;
    positive("N", big_n)?;
    nonnegative("distance", rho)?;
    let a = asinh(rho * s / t);
    let poly = (t / (s * s) * a * a).max(1.0);
    Ok(GParts {
        log_psi,
        log_polynomial: big_n / 2.0 * log(poly),
        log_volume: -0.5 * (log(vol_x) + log(vol_y)),
        exponent: -t / (s * s) * zeta_unchecked(rho * s / t),
    })
}

/// (VD) right-hand side `ln(Φ (R/r)^N)`, with `log_phi = 0` for the
/// constant form.
pub fn vd_rhs(log_phi: f64, big_n: f64, r: f64, big_r: f64) -> Result<f64> {
    positive("r", r)?;
    positive("N", big_n)?;
    if !(big_r >= r) {
        return Err(Error::InvalidParameter(format!("VD needs r <= R, got r={r}, R={big_r}")));
    }
    Ok(log_phi + big_n * log(big_r / r))
}

/// (FK) right-hand side `ln((a/R²)(m(B)/m(U))^{2/N})`.
pub fn fk_rhs(a: f64, big_n: f64, big_r: f64, m_ball: f64, m_set: f64) -> Result<f64> {
    positive("a", a)?;
    positive("N", big_n)?;
    positive("R", big_r)?;
    positive("m(U)", m_set)?;
    if !(m_set <= m_ball * (1.0 + 1e-12)) {
        return Err(Error::InvalidParameter(format!(
            "FK needs m(U) <= m(B), got {m_set} > {m_ball}"
        )));
    }
    Ok(log(a) - 2.0 * log(big_r) + 2.0 / big_n * log(m_ball / m_set))
}

/// `ln A = 2^{19n} e`, the default scale of the dimension function.
pub fn default_ln_a(n: f64) -> f64 {
    pow(2.0, 19.0 * n) * core::f64::consts::E
}

/// Dimension function
/// `n′(r) = n ∨ ln[m(B_o(Ar)) ‖1/m‖_{B_o(Ar)}] / ln(r / (ln r)^{n+3})`.
///
/// `ln_volume` and `ln_inv_measure` receive `ln(radius)` and return the
/// logarithm of the ball volume and of `sup 1/m` over the ball; the radius
/// `Ar` is only ever handled through its logarithm. `ln_a` overrides
/// [`default_ln_a`].
pub fn dimension_prime(
    n: f64,
    r: f64,
    ln_volume: &dyn Fn(f64) -> f64,
    ln_inv_measure: &dyn Fn(f64) -> f64,
    ln_a: Option<f64>,
) -> Result<f64> {
    positive("n", n)?;
    if !(r > core::f64::consts::E) || !r.is_finite() {
        return Err(Error::Domain(format!("dimension function needs r > e, got {r}")));
    }
    let denominator = log(r) - (n + 3.0) * log(log(r));
    if !(denominator > 0.0) {
        return Err(Error::Domain(format!(
            "dimension function undefined at r={r}: r <= (ln r)^{}",
            n + 3.0
        )));
    }
    let ln_radius = ln_a.unwrap_or_else(|| default_ln_a(n)) + log(r);
    let numerator = ln_volume(ln_radius) + ln_inv_measure(ln_radius);
    Ok(n.max(numerator / denominator))
}

/// `ln(2R + 1)` from `ln R`, the volume of a ball in `(ℤ, m ≡ 1)` under the
/// combinatorial metric, overflow-free.
pub fn ln_line_ball_volume(ln_radius: f64) -> f64 {
    log_add_exp(core::f64::consts::LN_2 + ln_radius, 0.0)
}

/// Outcome of an `(A, γ)`-regularity check on a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct RegularityCheck {
    pub regular: bool,
    /// `max_{s<t} [f(γs)/f(s)] / [f(γt)/f(t)]` over the grid.
    pub worst_ratio: f64,
    /// Grid pair `(s, t)` attaining the worst ratio.
    pub worst_pair: Option<(f64, f64)>,
}

/// Checks `f(γs)/f(s) ≤ A f(γt)/f(t)` for all grid points `s < t`.
pub fn regular_function_check(f: &dyn Fn(f64) -> f64, grid: &[f64], a: f64, gamma: f64) -> Result<RegularityCheck> {
    if !(a >= 1.0) || !(gamma >= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "regularity needs A, gamma >= 1, got A={a}, gamma={gamma}"
        )));
    }
    let mut points: alloc::vec::Vec<f64> = grid.to_vec();
    points.sort_by(f64::total_cmp);
    points.dedup();
    let mut h = alloc::vec::Vec::with_capacity(points.len());
    for &s in &points {
        positive("grid point", s)?;
        let (fs, fg) = (f(s), f(gamma * s));
        if !(fs > 0.0 && fg > 0.0) || !fs.is_finite() || !fg.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "regular function must be positive and finite, f({s})={fs}, f({})={fg}",
                gamma * s
            )));
        }
        h.push(log(fg) - log(fs));
    }
    // worst is max over s < t of h(s) − h(t): scan with a running max of h
    let mut worst = f64::NEG_INFINITY;
    let mut pair = None;
    let mut best_left = (f64::NEG_INFINITY, 0usize);
    for j in 0..h.len() {
        if j > 0 && best_left.0 - h[j] > worst {
            worst = best_left.0 - h[j];
            pair = Some((points[best_left.1], points[j]));
        }
        if h[j] > best_left.0 {
            best_left = (h[j], j);
        }
    }
    let worst_ratio = if pair.is_some() { libm::exp(worst) } else { 1.0 };
    Ok(RegularityCheck {
        regular: worst <= log(a) + 1e-12 || pair.is_none(),
        worst_ratio,
        worst_pair: pair,
    })
}

/// Bound families as data, for reports and the CLI.
#[derive(Clone, Debug, PartialEq)]
pub enum BoundSpec {
    Universal { jump: f64 },
    Davies { jump: f64 },
    Pang { c: f64 },
    GForm { params: Option<ErrorParams>, constant: f64, big_n: f64 },
    VdForm { params: Option<ErrorParams>, constant: f64, big_n: f64 },
    FkForm { a: f64, big_n: f64 },
}

impl BoundSpec {
    pub fn name(&self) -> &'static str {
        match self {
            BoundSpec::Universal { .. } => "universal",
            BoundSpec::Davies { .. } => "davies",
            BoundSpec::Pang { .. } => "pang",
            BoundSpec::GForm { .. } => "g-form",
            BoundSpec::VdForm { .. } => "vd-form",
            BoundSpec::FkForm { .. } => "fk-form",
        }
    }

    pub fn describe(&self) -> String {
        match self {
            BoundSpec::Universal { jump } | BoundSpec::Davies { jump } => {
                format!("{}(S={jump})", self.name())
            }
            BoundSpec::Pang { c } => format!("pang(c={c})"),
            BoundSpec::GForm { params, constant, big_n } | BoundSpec::VdForm { params, constant, big_n } => {
                match params {
                    Some(p) => format!("{}(C={constant}, N={big_n}, n={}, r={}, S={})", self.name(), p.n, p.r, p.s),
                    None => format!("{}(C={constant}, N={big_n})", self.name()),
                }
            }
            BoundSpec::FkForm { a, big_n } => format!("fk-form(a={a}, N={big_n})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zeta_values_and_branches() {
        assert_eq!(zeta(0.0).unwrap(), 0.0);
        assert!((zeta(1.0).unwrap() - 0.467_160_024_646_447_98).abs() < 1e-15);
        assert!(zeta(-1e-3).is_err());
        let x = ZETA_SERIES_BELOW;
        let series = zeta_unchecked(x * (1.0 - 1e-16));
        let direct = x * asinh(x) - x * x / (1.0 + sqrt(x * x + 1.0));
        assert!((series - direct).abs() <= 1e-13 * series);
    }

    #[test]
    fn pang_examples() {
        let (lo, hi) = pang_envelope(0.0, 1.0, 1.0).unwrap();
        assert_eq!((lo, hi), (0.0, 0.0));
        let (_, hi) = pang_envelope(10.0, 1.0, 1.0).unwrap();
        assert!((hi + 17.228_929_478_536_002).abs() < 1e-12);
        assert!(pang_envelope(1.0, 1.0, 0.5).is_err());
    }

    #[test]
    fn gaussian_examples() {
        assert!((universal_rhs(4.0, 4.0, 0.0, 1.0, 1.0).unwrap() + log(4.0)).abs() < 1e-15);
        assert_eq!(universal_rhs(1.0, 1.0, 3.0, 0.0, 1.0).unwrap(), f64::INFINITY);
        assert!(universal_rhs(0.0, 1.0, 3.0, 1.0, 1.0).is_err());
        // ℤ with ρ = d/√2, S = 1/√2 reproduces the Pang exponent
        let s = core::f64::consts::FRAC_1_SQRT_2;
        let u = universal_rhs(1.0, 1.0, 3.0 * s, 2.0, s).unwrap();
        assert!((u + 4.0 * zeta(0.75).unwrap()).abs() < 1e-14);
        let d = davies_rhs(1.0, 1.0, 2.0, 1.0, core::f64::consts::SQRT_2).unwrap();
        assert!((d + 0.888_943_171_384_630_2).abs() < 1e-14);
        assert!(davies_rhs(1.0, 1.0, 2.0, 2.0, 1.0).unwrap() > davies_rhs(1.0, 1.0, 2.0, 1.0, 1.0).unwrap());
    }

    #[test]
    fn error_function_examples() {
        let p = ErrorParams::new(1.0, 2.0, 1.0).unwrap();
        assert!((p.c_theta() - 19.811_563_493_367_76).abs() < 1e-12);
        assert!((p.theta(4.0).unwrap() - 12.480_502_938_311_425).abs() < 1e-12);
        assert!((p.log_phi(2.0, 1.0).unwrap() - 11.939_077_821_075_739).abs() < 1e-12);
        assert_eq!(p.log_phi(1.0, 3.0).unwrap(), 0.0);
        assert!(p.theta(0.0).is_err());
        let q = ErrorParams::new(1.0, 0.0, 1.0).unwrap();
        assert!((q.tau_rho(1.0, 4.0).unwrap() - 0.113_951_785_918_100_4).abs() < 1e-15);
        assert_eq!(q.log_psi(5.0, 1.0, 1.0, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn g_vd_fk_examples() {
        let g = g_rhs(3.0, 3.0, 0.0, 1.0, 1.0, 0.0, 1.0).unwrap();
        assert_eq!(g.log_polynomial, 0.0);
        assert_eq!(g.exponent, 0.0);
        assert!((g.total() + log(3.0)).abs() < 1e-15);
        // ρS/t = 1 with t/S² = 2
        let g = g_rhs(1.0, 1.0, 2.0, 2.0, 1.0, 0.0, 3.0).unwrap();
        let a = 0.881_373_587_019_543_f64;
        assert!((g.log_polynomial - 1.5 * log(2.0 * a * a)).abs() < 1e-14);
        assert_eq!(vd_rhs(0.5, 1.0, 3.0, 3.0).unwrap(), 0.5);
        assert!(vd_rhs(0.0, 1.0, 3.0, 2.0).is_err());
        assert!((fk_rhs(1.0, 1.0, 4.0, 9.0, 9.0).unwrap() + log(16.0)).abs() < 1e-15);
        assert!((fk_rhs(1.0, 1.0, 4.0, 9.0, 2.0).unwrap() - log(1.265_625)).abs() < 1e-14);
        assert!(fk_rhs(1.0, 1.0, 4.0, 2.0, 9.0).is_err());
    }

    #[test]
    fn dimension_function_examples() {
        let inv = |_: f64| 0.0;
        let n1 = dimension_prime(1.0, 1e4, &ln_line_ball_volume, &inv, Some(0.0)).unwrap();
        assert!((n1 - 30.098_905_403_567_854).abs() < 1e-9);
        let full = dimension_prime(1.0, 1e4, &ln_line_ball_volume, &inv, None).unwrap();
        assert!((full / 4_331_394.760_393_572 - 1.0).abs() < 1e-12);
        assert!(matches!(
            dimension_prime(1.0, 100.0, &ln_line_ball_volume, &inv, None),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn regularity_examples() {
        let grid: alloc::vec::Vec<f64> = (0..40).map(|i| libm::exp(-3.0 + 0.2 * i as f64)).collect();
        let mono = regular_function_check(&|t| pow(t, 1.5), &grid, 1.0, 2.0).unwrap();
        assert!(mono.regular);
        assert!((mono.worst_ratio - 1.0).abs() < 1e-12);
        let expo = regular_function_check(&libm::exp, &grid, 1.0, 2.0).unwrap();
        assert!(expo.regular);
        let spiky = |t: f64| if (libm::log2(t) as i64) % 2 == 0 { 1.0 } else { 10.0 };
        let bad = regular_function_check(&spiky, &grid, 2.0, 2.0).unwrap();
        assert!(!bad.regular);
        assert!(bad.worst_ratio > 2.0);
        assert!(bad.worst_pair.is_some());
    }
}
