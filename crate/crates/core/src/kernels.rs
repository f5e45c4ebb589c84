//! The oscillatory kernels behind the integral representations of section
//! and projection volumes:
//!
//! ```text
//! γ_p(s) = 1/Γ(1+1/p) ∫_0^∞ cos(s r) exp(-r^p) dr
//! δ_q(s) = p/Γ(1/q)   ∫_0^∞ cos(s r) r^(p-2) exp(-r^p) dr,   p = q/(q-1)
//! ```
//!
//! Quadrature is the reference evaluation path for both kernels. δ_q also
//! has the power series
//!
//! ```text
//! δ_q(s) = Σ_n f_{2n}(p) s^{4n}/(4n)! - f_{2n+1}(p) s^{4n+2}/(4n+2)!
//! f_k(p) = Γ(1 + (2k-1)/p) / Γ(1 - 1/p)
//! ```
//!
//! which is used for cross-validation, for the lower bounds on δ_{4/3}, and
//! to evaluate `1 - δ_q(x)` without cancellation at small `x`.

use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::quadrature::{integrate_interval_partitioned, integrate_truncated, Envelope, FnEnvelope, Partition, QuadConfig, QuadResult, Sample, StretchedExp};
use crate::specfun::{gamma_unchecked, ln_gamma_unchecked};

/// Above this exponent the weight `exp(-r^p)` is treated as a cliff at
/// `r = 1` and the range `[1, ∞)` is mapped through `u = r^p`.
pub const LARGE_P: f64 = 50.0;

/// Largest argument at which `1 - δ_q` is taken from the power series.
const SERIES_CUTOFF: f64 = 1.0;

/// Which of the two kernels (and volume functions) is meant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    Section,
    Projection,
}

/// Section exponent `p` and projection index `q`, conjugate when both are
/// present.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelParams {
    pub p: f64,
    pub q: Option<f64>,
}

impl KernelParams {
    pub fn section(p: f64) -> Result<Self> {
        check_section_p(p)?;
        Ok(Self { p, q: None })
    }

    pub fn projection(q: f64) -> Result<Self> {
        check_projection_q(q)?;
        Ok(Self { p: conjugate(q), q: Some(q) })
    }

    /// The conjugate pair for `q ∈ (1, 2]`.
    pub fn conjugate_pair(q: f64) -> Result<Self> {
        Self::projection(q)
    }
}

/// `q/(q-1)`.
pub fn conjugate(q: f64) -> f64 {
    q / (q - 1.0)
}

pub(crate) fn check_section_p(p: f64) -> Result<()> {
    if p >= 1.0 && p.is_finite() {
        Ok(())
    } else {
        Err(domain("section kernel", format!("p = {p} must be finite and >= 1")))
    }
}

pub(crate) fn check_projection_q(q: f64) -> Result<()> {
    if q > 1.0 && q <= 2.0 {
        Ok(())
    } else {
        Err(domain("projection kernel", format!("q = {q} must lie in (1, 2]")))
    }
}

fn check_argument(s: f64) -> Result<()> {
    if s >= 0.0 && s.is_finite() {
        Ok(())
    } else {
        Err(domain("kernel", format!("argument s = {s} must be finite and >= 0")))
    }
}

/// Default tolerances for kernel evaluations nested inside outer integrals.
pub fn kernel_config() -> QuadConfig {
    QuadConfig {
        abs_tol: 1e-13,
        rel_tol: 1e-12,
        max_subdivisions: 4000,
        ..QuadConfig::default()
    }
}

/// `sin(x)/x` with `sinc(0) = 1`.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

fn combine(a: QuadResult, b: QuadResult) -> QuadResult {
    let value = a.value + b.value;
    let err = a.err_estimate + b.err_estimate;
    QuadResult {
        value,
        err_estimate: err,
        evals: a.evals + b.evals,
        converged: a.converged && b.converged,
        upper: b.upper,
        tail_bound: a.tail_bound + b.tail_bound,
    }
}

fn scaled(r: QuadResult, factor: f64, cfg: &QuadConfig) -> QuadResult {
    let value = r.value * factor;
    let err = r.err_estimate * factor.abs();
    QuadResult {
        value,
        err_estimate: err,
        converged: err <= cfg.allowed_error(value),
        tail_bound: r.tail_bound * factor.abs(),
        ..r
    }
}

fn partition_for(s: f64) -> Partition {
    if s > 1.0 {
        Partition::Frequency(s)
    } else {
        Partition::Whole
    }
}

/// `∫_0^∞ cos(s r) r^m exp(-r^p) dr` for `m ∈ {0, p-2}` with absolute
/// tolerance `cfg.abs_tol`.
fn cosine_transform(p: f64, m: f64, s: f64, cfg: &QuadConfig) -> Result<QuadResult> {
    let weight = move |r: f64| {
        if r == 0.0 {
            if m == 0.0 {
                1.0
            } else {
                0.0
            }
        } else {
            r.powf(m) * (-r.powf(p)).exp()
        }
    };
    if p <= LARGE_P {
        // r^m <= r^(m+1)/U on [U, ∞), and for m = 0, (r/U)^(p-1) >= 1
        let env = FnEnvelope::new(weight, move |u: f64| {
            if u <= 0.0 {
                f64::INFINITY
            } else if m == 0.0 {
                StretchedExp::new(p).tail(u)
            } else {
                (-u.powf(p)).exp() / (p * u)
            }
        });
        return integrate_truncated(move |r| Sample::from((s * r).cos() * weight(r)), 0.0, &env, partition_for(s), cfg);
    }

    // cliff at r = 1: resolve the drop explicitly, map [1, ∞) through u = r^p
    let knee = 1.0 - 10.0 / p;
    let inner_cfg = QuadConfig {
        abs_tol: cfg.abs_tol / 4.0,
        rel_tol: cfg.rel_tol / 4.0,
        ..*cfg
    };
    let f = move |r: f64| Sample::from((s * r).cos() * weight(r));
    let body = integrate_interval_partitioned(f, 0.0, knee, partition_for(s), &inner_cfg);
    let edge = integrate_interval_partitioned(f, knee, 1.0, partition_for(s), &inner_cfg);
    // dr = u^(1/p - 1) du / p and r^m = u^(m/p)
    let expo = (m + 1.0) / p - 1.0;
    let mapped = move |u: f64| Sample::from((s * u.powf(1.0 / p)).cos() * u.powf(expo) * (-u).exp() / p);
    let env = StretchedExp { power: 1.0, scale: 1.0 / p };
    let hint = if s / p > 1.0 { Partition::Frequency(s / p) } else { Partition::Whole };
    let tail = integrate_truncated(mapped, 1.0, &env, hint, &inner_cfg)?;
    Ok(combine(combine(body, edge), tail))
}

/// γ_p(s) with its quadrature error estimate (normalized units).
pub fn gamma_kernel_result(p: f64, s: f64, cfg: &QuadConfig) -> Result<QuadResult> {
    check_section_p(p)?;
    check_argument(s)?;
    let norm = gamma_unchecked(1.0 + 1.0 / p);
    if s == 0.0 {
        return Ok(exact(1.0));
    }
    if p == 1.0 {
        return Ok(exact(1.0 / (1.0 + s * s)));
    }
    let inner = QuadConfig {
        abs_tol: cfg.abs_tol * norm,
        ..*cfg
    };
    let r = cosine_transform(p, 0.0, s, &inner)?;
    Ok(scaled(r, 1.0 / norm, cfg))
}

/// γ_p(s) = 1/Γ(1+1/p) ∫_0^∞ cos(s r) exp(-r^p) dr.
pub fn gamma_kernel(p: f64, s: f64, cfg: &QuadConfig) -> Result<f64> {
    require_converged(gamma_kernel_result(p, s, cfg)?)
}

/// δ_q(s) with its quadrature error estimate.
pub fn delta_kernel_result(q: f64, s: f64, cfg: &QuadConfig) -> Result<QuadResult> {
    check_projection_q(q)?;
    check_argument(s)?;
    if s == 0.0 {
        return Ok(exact(1.0));
    }
    let p = conjugate(q);
    let norm = p / gamma_unchecked(1.0 / q);
    let inner = QuadConfig {
        abs_tol: cfg.abs_tol / norm,
        ..*cfg
    };
    let r = cosine_transform(p, p - 2.0, s, &inner)?;
    Ok(scaled(r, norm, cfg))
}

/// δ_q(s) = p/Γ(1/q) ∫_0^∞ cos(s r) r^(p-2) exp(-r^p) dr.
pub fn delta_kernel(q: f64, s: f64, cfg: &QuadConfig) -> Result<f64> {
    require_converged(delta_kernel_result(q, s, cfg)?)
}

fn exact(value: f64) -> QuadResult {
    QuadResult {
        value,
        err_estimate: 0.0,
        evals: 0,
        converged: true,
        upper: 0.0,
        tail_bound: 0.0,
    }
}

fn require_converged(r: QuadResult) -> Result<f64> {
    if r.converged {
        Ok(r.value)
    } else {
        Err(Error::NonConvergence {
            value: r.value,
            err_estimate: r.err_estimate,
        })
    }
}

/// Coefficients of the n-th paired term of the δ_q power series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesTerm {
    pub n: usize,
    /// Γ(1 + (4n-1)/p) / Γ(1 - 1/p)
    pub f_2n: f64,
    /// Γ(1 + (4n+1)/p) / Γ(1 - 1/p)
    pub f_2n_plus_1: f64,
}

impl SeriesTerm {
    pub fn new(p: f64, n: usize) -> Self {
        let base = ln_gamma_unchecked(1.0 - 1.0 / p);
        let nf = n as f64;
        Self {
            n,
            f_2n: (ln_gamma_unchecked(1.0 + (4.0 * nf - 1.0) / p) - base).exp(),
            f_2n_plus_1: (ln_gamma_unchecked(1.0 + (4.0 * nf + 1.0) / p) - base).exp(),
        }
    }

    /// `F_n(p, s) = f_{2n} s^{4n}/(4n)! - f_{2n+1} s^{4n+2}/(4n+2)!`
    pub fn paired(&self, s: f64) -> f64 {
        if s == 0.0 {
            return if self.n == 0 { self.f_2n } else { 0.0 };
        }
        let k = 4 * self.n;
        let even = (k as f64 * s.ln() - ln_gamma_unchecked(k as f64 + 1.0)).exp();
        let odd = ((k + 2) as f64 * s.ln() - ln_gamma_unchecked(k as f64 + 3.0)).exp();
        self.f_2n * even - self.f_2n_plus_1 * odd
    }
}

/// Partial sum `Σ_{n=0}^{m} F_n(p, s)` of the δ_q power series.
pub fn delta_series_partial(q: f64, s: f64, m: usize) -> Result<f64> {
    check_projection_q(q)?;
    if !(0.0..=16.0 / 5.0).contains(&s) {
        return Err(domain("delta_series_partial", format!("s = {s} outside [0, 16/5]")));
    }
    if m > 30 {
        return Err(domain("delta_series_partial", format!("m = {m} exceeds 30")));
    }
    let p = conjugate(q);
    Ok((0..=m).map(|n| SeriesTerm::new(p, n).paired(s)).sum())
}

/// `1 - δ_q(x)` from the power series, accurate to a few ulps relative for
/// `x ≤ 1`.
pub(crate) fn one_minus_delta_series(p: f64, x: f64) -> f64 {
    let base = ln_gamma_unchecked(1.0 - 1.0 / p);
    let x2 = x * x;
    let mut power = 1.0; // x^{2j}/(2j)!
    let mut sum = 0.0;
    for j in 1..60 {
        let jf = j as f64;
        power *= x2 / ((2.0 * jf - 1.0) * (2.0 * jf));
        let coef = (ln_gamma_unchecked(1.0 + (2.0 * jf - 1.0) / p) - base).exp();
        let term = coef * power;
        // 1 - δ = Σ_{j≥1} (-1)^{j+1} c_j x^{2j}/(2j)!
        if j % 2 == 1 {
            sum += term;
        } else {
            sum -= term;
        }
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    sum
}

/// Evaluates δ_q along with `1 - δ_q`, switching to the series where it is
/// the more accurate path.
#[derive(Debug, Clone, Copy)]
pub(crate) struct DeltaEvaluator {
    pub q: f64,
    pub p: f64,
    pub cfg: QuadConfig,
}

/// Kernel value with complement and absolute error.
#[derive(Debug, Clone, Copy)]
pub(crate) struct DeltaValue {
    pub value: f64,
    pub one_minus: f64,
    pub err: f64,
}

impl DeltaEvaluator {
    pub fn new(q: f64, cfg: QuadConfig) -> Self {
        Self { q, p: conjugate(q), cfg }
    }

    pub fn eval(&self, x: f64) -> DeltaValue {
        if x <= SERIES_CUTOFF {
            let om = one_minus_delta_series(self.p, x);
            DeltaValue {
                value: 1.0 - om,
                one_minus: om,
                err: 4.0 * f64::EPSILON * om.abs(),
            }
        } else {
            match delta_kernel_result(self.q, x, &self.cfg) {
                Ok(r) => DeltaValue {
                    value: r.value,
                    one_minus: 1.0 - r.value,
                    err: r.err_estimate,
                },
                Err(_) => DeltaValue {
                    value: 0.0,
                    one_minus: 1.0,
                    err: 1.0,
                },
            }
        }
    }
}

/// `min(1, B_α / x^α)` bounds on `|kernel(x)|` for several orders α,
/// obtained by repeated integration by parts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayBound {
    /// `(α, B_α)` pairs in increasing order of α.
    pub orders: Vec<(f64, f64)>,
}

impl DecayBound {
    pub fn at(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 1.0;
        }
        self.orders
            .iter()
            .map(|&(alpha, b)| b / x.powf(alpha))
            .fold(1.0, f64::min)
    }

    /// Highest available order `(α, B_α)`.
    pub fn leading(&self) -> (f64, f64) {
        *self.orders.last().expect("at least one order")
    }
}

/// Decay bounds for γ_p, p ≥ 1.
///
/// With `ψ = p r^(p-1) exp(-r^p)`, integration by parts gives
/// `|γ_p(s)| Γ(1+1/p) ≤ 1/s`, `≤ (ψ(0) + TV(ψ))/s²` and, for p ≥ 2,
/// `≤ TV(ψ′)/s³`.
pub fn section_decay(p: f64) -> DecayBound {
    let norm = gamma_unchecked(1.0 + 1.0 / p);
    let a = (p - 1.0) / p;
    let psi_max = p * a.powf(a) * (-a).exp();
    let mut orders = vec![(1.0, 1.0 / norm), (2.0, 2.0 * psi_max / norm)];
    // ψ′(r) = p r^(p-2) e^{-u} ((p-1) - p u),  u = r^p
    let dpsi = |u: f64| {
        if u <= 0.0 {
            if p == 2.0 {
                2.0
            } else {
                0.0
            }
        } else {
            p * u.powf((p - 2.0) / p) * (-u).exp() * ((p - 1.0) - p * u)
        }
    };
    let disc = if p > 1.0 { (9.0 - 4.0 * (p - 2.0) / (p - 1.0)).sqrt() } else { 0.0 };
    let u_hi = (p - 1.0) * (3.0 + disc) / (2.0 * p);
    if p > 1.0 && p < 2.0 {
        // ψ′ is singular at 0: split ∫cos(sr)ψ′ at r = c/s, c = 2 - p, giving
        // |γ_p(s)| Γ(1+1/p) ≤ (2p c^(p-1) + 2p(p-1) c^(p-2) + 4|ψ′(r₊)|) / s^(1+p) for s ≥ 1
        let c = 2.0 - p;
        let b = 2.0 * p * c.powf(p - 1.0) + 2.0 * p * (p - 1.0) * c.powf(p - 2.0) + 4.0 * dpsi(u_hi).abs();
        orders.push((1.0 + p, (b / norm).max(1.0)));
    }
    if p >= 2.0 {
        let u_lo = (p - 1.0) * (3.0 - disc) / (2.0 * p);
        let tv = (dpsi(u_lo) - dpsi(0.0)).abs() + (dpsi(u_hi) - dpsi(u_lo)).abs() + dpsi(u_hi).abs();
        orders.push((3.0, tv / norm));
    }
    DecayBound { orders }
}

/// Decay bounds for δ_q with conjugate p ≥ 2.
///
/// The first order is `(2p/Γ(1/q)) ((1-2/p)/e)^(1-2/p) / u`; for p = 2 and
/// p ≥ 3 a second integration by parts with `φ = r^(p-2) exp(-r^p)` gives
/// `(|φ′(0)| + TV(φ′)) p/Γ(1/q) / u²`.
pub fn projection_decay(p: f64) -> DecayBound {
    let q = p / (p - 1.0);
    let norm = p / gamma_unchecked(1.0 / q);
    let e = 1.0 - 2.0 / p;
    let first = 2.0 * norm * (e / std::f64::consts::E).powf(e);
    let mut orders = vec![(1.0, first)];
    if p == 2.0 || p >= 3.0 {
        let dphi0 = if p == 3.0 { 1.0 } else { 0.0 };
        // φ′(r) = r^(p-3) e^{-u} ((p-2) - p u)
        let dphi = |u: f64| {
            if u <= 0.0 {
                dphi0
            } else {
                u.powf((p - 3.0) / p) * (-u).exp() * ((p - 2.0) - p * u)
            }
        };
        let disc = (5.0 * p * p - 10.0 * p + 1.0).sqrt();
        let u_lo = ((3.0 * p - 5.0) - disc).max(0.0) / (2.0 * p);
        let u_hi = ((3.0 * p - 5.0) + disc) / (2.0 * p);
        let tv = (dphi(u_lo) - dphi0).abs() + (dphi(u_hi) - dphi(u_lo)).abs() + dphi(u_hi).abs();
        orders.push((2.0, (dphi0.abs() + tv) * norm));
    }
    DecayBound { orders }
}

/// First-order tail bounds: `1/(s Γ(1+1/p))` for γ_p and
/// `(2p/Γ(1/q)) ((1-2/p)/e)^(1-2/p) / s` for δ_q.
pub fn tail_envelope(kind: KernelKind, params: &KernelParams, s: f64) -> f64 {
    if s <= 0.0 {
        return f64::INFINITY;
    }
    match kind {
        KernelKind::Section => 1.0 / (s * gamma_unchecked(1.0 + 1.0 / params.p)),
        KernelKind::Projection => projection_decay(params.p).orders[0].1 / s,
    }
}

/// First positive zero of γ_4: scan in steps of 0.05 for a sign change,
/// then 60 bisection steps.
pub fn gamma4_first_zero(cfg: &QuadConfig) -> Result<f64> {
    first_zero(|s| gamma_kernel(4.0, s, cfg), 0.05, 10.0)
}

pub(crate) fn first_zero<F>(f: F, step: f64, limit: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let mut lo = 0.0;
    let mut f_lo = f(lo)?;
    while lo < limit {
        let hi = lo + step;
        let f_hi = f(hi)?;
        if f_lo.signum() != f_hi.signum() {
            return bisect(&f, lo, hi, f_lo, 60);
        }
        lo = hi;
        f_lo = f_hi;
    }
    Err(Error::Bracket { lo: 0.0, hi: limit })
}

pub(crate) fn bisect<F>(f: &F, mut lo: f64, mut hi: f64, f_lo: f64, iterations: usize) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let sign_lo = f_lo.signum();
    for _ in 0..iterations {
        let mid = 0.5 * (lo + hi);
        if f(mid)?.signum() == sign_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Finite-difference check of `δ_q′(s) = -(Γ(1+1/p)/Γ(1-1/p)) s γ_p(s)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResidualReport {
    pub residual: f64,
    /// C in the centered-difference error `C h²`; `C = sup|δ‴|/6`, bounded
    /// via `∫ r^(p+1) exp(-r^p) dr = Γ(1+(p+2)/p)/(p+2)`.
    pub truncation_constant: f64,
    /// Evaluation noise of the difference quotient and the right side.
    pub noise: f64,
    /// `C h² + 10 noise`.
    pub bound: f64,
}

pub fn derivative_relation_residual(q: f64, s: f64, h: f64, cfg: &QuadConfig) -> Result<ResidualReport> {
    if !(q > 1.0 && q < 2.0) {
        return Err(domain("derivative_relation_residual", format!("q = {q} must lie in (1, 2)")));
    }
    if !(s > 0.0) {
        return Err(domain("derivative_relation_residual", "s must be positive"));
    }
    if !(1e-6..=1e-3).contains(&h) {
        return Err(domain("derivative_relation_residual", format!("h = {h} outside [1e-6, 1e-3]")));
    }
    let p = conjugate(q);
    let plus = delta_kernel_result(q, s + h, cfg)?;
    let minus = delta_kernel_result(q, (s - h).max(0.0), cfg)?;
    let g = gamma_kernel_result(p, s, cfg)?;
    let kappa = gamma_unchecked(1.0 + 1.0 / p) / gamma_unchecked(1.0 - 1.0 / p);
    let fd = (plus.value - minus.value) / (2.0 * h);
    let residual = (fd + kappa * s * g.value).abs();
    let third = p / gamma_unchecked(1.0 / q) * gamma_unchecked(1.0 + (p + 2.0) / p) / (p + 2.0);
    let c = third / 6.0;
    let noise = (plus.err_estimate + minus.err_estimate) / (2.0 * h) + kappa * s * g.err_estimate;
    Ok(ResidualReport {
        residual,
        truncation_constant: c,
        noise,
        bound: c * h * h + 10.0 * noise,
    })
}

/// Residual of `γ_{2k}^{(2k-1)}(s) = (-1)^k s γ_{2k}(s) / (2k)` for
/// k ∈ {1, 2}, using a centered first difference (k = 1) or the five-point
/// third-difference stencil (k = 2).
pub fn gamma_even_ode_residual(k: u32, s: f64, h: f64, cfg: &QuadConfig) -> Result<f64> {
    let p = 2.0 * f64::from(k);
    let g = |x: f64| gamma_kernel(p, x, cfg);
    let derivative = match k {
        1 => (g(s + h)? - g(s - h)?) / (2.0 * h),
        2 => (g(s + 2.0 * h)? - 2.0 * g(s + h)? + 2.0 * g(s - h)? - g(s - 2.0 * h)?) / (2.0 * h.powi(3)),
        _ => return Err(domain("gamma_even_ode_residual", format!("k = {k} not in {{1, 2}}"))),
    };
    if s - 2.0 * h < 0.0 {
        return Err(domain("gamma_even_ode_residual", "stencil reaches below s = 0"));
    }
    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
    let rhs = sign * s * g(s)? / p;
    Ok((derivative - rhs).abs())
}
