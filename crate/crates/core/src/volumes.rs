//! Normalized section and projection volumes of `l_p^n` unit balls in a
//! direction `a ∈ S^{n-1}`:
//!
//! ```text
//! A_{n,p}(a) = Γ(1+1/p) (2/π) ∫_0^∞ ∏ γ_p(a_j s) ds
//! P_{n,q}(a) = Γ(1/q)   (2/π) ∫_0^∞ (1 - ∏ δ_q(a_j s)) / s² ds
//! ```
//!
//! Coordinates sharing the same modulus are grouped so each outer node
//! costs one kernel evaluation per distinct modulus.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::kernels::{check_projection_q, check_section_p, gamma_kernel_result, kernel_config, projection_decay, section_decay, DecayBound, DeltaEvaluator, KernelKind};
use crate::quadrature::{integrate_interval_partitioned, integrate_truncated, truncation_point, Envelope, Partition, QuadConfig, Sample};
use crate::specfun::{gamma_unchecked, ln_gamma_unchecked};

/// Largest section exponent accepted by quadrature.
pub const MAX_SECTION_P: f64 = 200.0;

/// Width of the Taylor patch at the removable singularity of the
/// projection integrand.
const PATCH: f64 = 1e-3;

/// Unit direction, either explicit or the diagonal `a^(k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Direction {
    n: usize,
    coords: Coords,
}

#[derive(Debug, Clone, PartialEq)]
enum Coords {
    Diag(usize),
    Explicit(Vec<f64>),
}

/// Coordinates of equal modulus `weight` occurring `multiplicity` times.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Group {
    pub weight: f64,
    pub multiplicity: usize,
}

impl Direction {
    /// `a^(k) = (1/√k)(1, …, 1, 0, …, 0) ∈ R^n`.
    pub fn diag(n: usize, k: usize) -> Result<Self> {
        if n < 2 {
            return Err(domain("Direction", format!("dimension n = {n} must be >= 2")));
        }
        if k < 1 || k > n {
            return Err(domain("Direction", format!("diagonal index k = {k} outside [1, {n}]")));
        }
        Ok(Self { n, coords: Coords::Diag(k) })
    }

    /// Explicit unit vector; its Euclidean norm must be 1 to within 1e-12.
    pub fn explicit(coords: Vec<f64>) -> Result<Self> {
        let n = coords.len();
        if n < 2 {
            return Err(domain("Direction", format!("dimension n = {n} must be >= 2")));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(domain("Direction", "coordinates must be finite"));
        }
        let norm = coords.iter().map(|c| c * c).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(domain("Direction", format!("norm {norm} is not 1")));
        }
        Ok(Self { n, coords: Coords::Explicit(coords) })
    }

    /// Scales a nonzero vector to unit length.
    pub fn normalized(coords: Vec<f64>) -> Result<Self> {
        let norm = coords.iter().map(|c| c * c).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(domain("Direction", "cannot normalize a zero or non-finite vector"));
        }
        Self::explicit(coords.into_iter().map(|c| c / norm).collect())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `Some(k)` for `a^(k)`.
    pub fn diag_index(&self) -> Option<usize> {
        match self.coords {
            Coords::Diag(k) => Some(k),
            Coords::Explicit(_) => None,
        }
    }

    pub fn coords(&self) -> Vec<f64> {
        match &self.coords {
            Coords::Diag(k) => {
                let w = 1.0 / (*k as f64).sqrt();
                (0..self.n).map(|j| if j < *k { w } else { 0.0 }).collect()
            }
            Coords::Explicit(v) => v.clone(),
        }
    }

    /// Nonzero moduli with multiplicities, largest modulus first.
    pub fn groups(&self) -> Vec<Group> {
        match &self.coords {
            Coords::Diag(k) => vec![Group {
                weight: 1.0 / (*k as f64).sqrt(),
                multiplicity: *k,
            }],
            Coords::Explicit(v) => {
                let mut mods: Vec<f64> = v.iter().map(|c| c.abs()).filter(|&c| c > 0.0).collect();
                mods.sort_by(|a, b| b.total_cmp(a));
                let mut groups: Vec<Group> = Vec::new();
                for m in mods {
                    match groups.last_mut() {
                        Some(g) if g.weight == m => g.multiplicity += 1,
                        _ => groups.push(Group { weight: m, multiplicity: 1 }),
                    }
                }
                groups
            }
        }
    }

    fn single_coordinate(&self) -> bool {
        let g = self.groups();
        g.len() == 1 && g[0].multiplicity == 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Quadrature,
    ClosedForm,
    MonteCarlo,
}

/// Normalized (n-1)-volume with an error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VolumeEstimate {
    pub value: f64,
    pub err_estimate: f64,
    pub method: Method,
    pub n: usize,
    /// p for sections, q for projections.
    pub index: f64,
}

/// Tolerances for the outer integral and for each nested kernel
/// evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VolumeConfig {
    pub outer: QuadConfig,
    pub kernel: QuadConfig,
}

impl Default for VolumeConfig {
    fn default() -> Self {
        Self {
            outer: QuadConfig {
                abs_tol: 1e-9,
                rel_tol: 1e-9,
                truncation_cap: 1e4,
                ..QuadConfig::default()
            },
            kernel: kernel_config(),
        }
    }
}

impl VolumeConfig {
    /// Outer tolerance `tol` (absolute and relative), kernels 1e4 times
    /// tighter but no tighter than 1e-14.
    pub fn with_tolerance(tol: f64) -> Self {
        let d = Self::default();
        let k = (tol * 1e-4).max(1e-14);
        Self {
            outer: QuadConfig {
                abs_tol: tol,
                rel_tol: tol,
                ..d.outer
            },
            kernel: QuadConfig {
                abs_tol: k,
                rel_tol: k * 10.0,
                ..d.kernel
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.outer.validate()?;
        self.kernel.validate()
    }
}

/// `∏_g min(1, b_g(w_g s))^{m_g} / s^extra` together with a closed-form
/// tail built from the decay orders that are active at the cut.
struct ProductEnvelope {
    factors: Vec<(f64, usize, DecayBound)>,
    extra: f64,
}

impl Envelope for ProductEnvelope {
    fn bound(&self, s: f64) -> f64 {
        let prod: f64 = self.factors.iter().map(|(w, m, b)| b.at(w * s).powi(*m as i32)).product();
        if self.extra > 0.0 {
            prod / s.powf(self.extra)
        } else {
            prod
        }
    }

    fn tail(&self, u: f64) -> f64 {
        if u <= 0.0 {
            return f64::INFINITY;
        }
        // for s ≥ u each active factor is below (B/(w s))^α, so the product
        // is below (value at u)·(u/s)^E
        let mut value = 1.0;
        let mut exponent = self.extra;
        for (w, m, bound) in &self.factors {
            let x = w * u;
            let best = bound
                .orders
                .iter()
                .map(|&(alpha, b)| (b / x.powf(alpha), alpha))
                .filter(|&(v, _)| v <= 1.0)
                .min_by(|a, b| a.0.total_cmp(&b.0));
            if let Some((v, alpha)) = best {
                value *= v.powi(*m as i32);
                exponent += alpha * *m as f64;
            }
        }
        if exponent <= 1.0 {
            return f64::INFINITY;
        }
        value * u.powf(1.0 - self.extra) / (exponent - 1.0)
    }
}

/// `v^m` with sign, computed through logarithms where `v > 0`.
fn signed_power(v: f64, m: usize) -> f64 {
    if m == 1 {
        v
    } else if v > 0.0 {
        (m as f64 * v.ln()).exp()
    } else {
        v.powi(m as i32)
    }
}

/// `∏ v_g^{m_g}` and the first-order propagation of kernel errors `e_g`.
fn product_with_noise(values: &[(f64, f64, usize)]) -> (f64, f64) {
    let prod: f64 = values.iter().map(|&(v, _, m)| signed_power(v, m)).product();
    let mut noise = 0.0;
    for (i, &(v, e, m)) in values.iter().enumerate() {
        if e == 0.0 {
            continue;
        }
        let others: f64 = values
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, &(w, _, mj))| signed_power(w.abs(), mj))
            .product();
        noise += m as f64 * signed_power(v.abs(), m - 1) * others * e;
    }
    (prod, noise)
}

fn outer_partition(groups: &[Group]) -> Partition {
    let w_max = groups.iter().map(|g| g.weight).fold(0.0, f64::max);
    Partition::Scale((std::f64::consts::FRAC_PI_2 / w_max).min(1.0))
}

fn finish(value: f64, err: f64, converged: bool, n: usize, index: f64) -> Result<VolumeEstimate> {
    if !converged || !value.is_finite() {
        return Err(Error::NonConvergence { value, err_estimate: err });
    }
    Ok(VolumeEstimate {
        value,
        err_estimate: err,
        method: Method::Quadrature,
        n,
        index,
    })
}

fn closed(value: f64, n: usize, index: f64) -> VolumeEstimate {
    VolumeEstimate {
        value,
        err_estimate: 0.0,
        method: Method::ClosedForm,
        n,
        index,
    }
}

/// `A_{n,p}(a)` for `p ∈ [1, 200]`.
///
/// A direction with a single nonzero coordinate gives the coordinate
/// section, whose normalized volume is exactly 1.
pub fn section_volume(p: f64, a: &Direction, config: &VolumeConfig) -> Result<VolumeEstimate> {
    check_section_p(p)?;
    if p > MAX_SECTION_P {
        return Err(domain("section_volume", format!("p = {p} exceeds {MAX_SECTION_P}")));
    }
    config.validate()?;
    if a.single_coordinate() {
        return Ok(closed(1.0, a.n(), p));
    }
    let groups = a.groups();
    let decay = section_decay(p);
    let env = ProductEnvelope {
        factors: groups.iter().map(|g| (g.weight, g.multiplicity, decay.clone())).collect(),
        extra: 0.0,
    };
    let kcfg = config.kernel;
    let integrand = |s: f64| {
        let mut vals = Vec::with_capacity(groups.len());
        for g in &groups {
            match gamma_kernel_result(p, g.weight * s, &kcfg) {
                Ok(r) => vals.push((r.value, r.err_estimate, g.multiplicity)),
                Err(_) => return Sample { value: 0.0, noise: 1.0 },
            }
        }
        let (value, noise) = product_with_noise(&vals);
        Sample { value, noise }
    };
    let r = integrate_truncated(integrand, 0.0, &env, outer_partition(&groups), &config.outer)?;
    let factor = gamma_unchecked(1.0 + 1.0 / p) * std::f64::consts::FRAC_2_PI;
    let value = r.value * factor;
    let err = r.err_estimate * factor;
    finish(value, err, err <= config.outer.allowed_error(value), a.n(), p)
}

/// `P_{n,q}(a)` for `q ∈ (1, 2]`. Single-coordinate directions return the
/// exact value 1.
pub fn projection_volume(q: f64, a: &Direction, config: &VolumeConfig) -> Result<VolumeEstimate> {
    check_projection_q(q)?;
    if a.single_coordinate() {
        return Ok(closed(1.0, a.n(), q));
    }
    projection_volume_quadrature(q, a, config)
}

/// `P_{n,q}(a)` by quadrature for every direction, including those with a
/// single nonzero coordinate.
pub fn projection_volume_quadrature(q: f64, a: &Direction, config: &VolumeConfig) -> Result<VolumeEstimate> {
    check_projection_q(q)?;
    config.validate()?;
    let groups = a.groups();
    let eval = DeltaEvaluator::new(q, config.kernel);
    let p = eval.p;
    let decay = projection_decay(p);
    let env = ProductEnvelope {
        factors: groups.iter().map(|g| (g.weight, g.multiplicity, decay.clone())).collect(),
        extra: 2.0,
    };
    let cfg = &config.outer;
    let (upper, tail, _) = truncation_point(&env, PATCH, 0.5 * cfg.abs_tol, cfg.truncation_cap)?;

    let integrand = |s: f64| {
        let vals: Vec<_> = groups.iter().map(|g| (eval.eval(g.weight * s), g.multiplicity)).collect();
        let small = groups.iter().all(|g| g.weight * s <= 1.0);
        let one_minus = if small {
            // 1 - ∏(1 - u_g)^{m_g} without cancellation
            let log: f64 = vals.iter().map(|(d, m)| *m as f64 * (-d.one_minus).ln_1p()).sum();
            -log.exp_m1()
        } else {
            let prod: f64 = vals.iter().map(|(d, m)| signed_power(d.value, *m)).product();
            1.0 - prod
        };
        let triples: Vec<_> = vals.iter().map(|(d, m)| (d.value, d.err, *m)).collect();
        let (_, noise) = product_with_noise(&triples);
        let s2 = s * s;
        Sample {
            value: one_minus / s2,
            noise: noise / s2,
        }
    };
    let body = integrate_interval_partitioned(integrand, PATCH, upper, outer_partition(&groups), &QuadConfig { abs_tol: 0.5 * cfg.abs_tol, rel_tol: 0.5 * cfg.rel_tol, ..*cfg });

    // (1 - ∏δ)/s² = f1/2 - s² [(f2/24 - f1²/8) Σa⁴ + f1²/8] + O(s⁴)
    let base = ln_gamma_unchecked(1.0 - 1.0 / p);
    let f1 = (ln_gamma_unchecked(1.0 + 1.0 / p) - base).exp();
    let f2 = (ln_gamma_unchecked(1.0 + 3.0 / p) - base).exp();
    let sum4: f64 = groups.iter().map(|g| g.multiplicity as f64 * g.weight.powi(4)).sum();
    let c2 = (f2 / 24.0 - f1 * f1 / 8.0) * sum4 + f1 * f1 / 8.0;
    let patch = f1 * PATCH / 2.0 - c2 * PATCH.powi(3) / 3.0;
    let patch_err = PATCH.powi(5) * (f1 * f1 + f2 + 1.0);

    let raw = patch + body.value + 1.0 / upper;
    let factor = gamma_unchecked(1.0 / q) * std::f64::consts::FRAC_2_PI;
    let value = raw * factor;
    let err = (body.err_estimate + tail + patch_err) * factor;
    finish(value, err, err <= cfg.allowed_error(value), a.n(), q)
}

/// `2^(1/2 - 1/index)`; the section index may be `f64::INFINITY`.
pub fn closed_form_a2(kind: KernelKind, index: f64) -> Result<f64> {
    match kind {
        KernelKind::Section => {
            if !(index >= 1.0) {
                return Err(domain("closed_form_a2", format!("p = {index} must be >= 1")));
            }
        }
        KernelKind::Projection => check_projection_q(index)?,
    }
    Ok(2f64.powf(0.5 - 1.0 / index))
}

/// Limit of `volume(a^(n)) / volume(a^(2))` as `n → ∞`:
/// `√(3/π · 2^(2/p) Γ(1+1/p)³/Γ(1+3/p))` for sections with `p ∈ (2, ∞]`
/// and `√(2^(2/q)/π · Γ(1/q) Γ(2-1/q))` for projections with `q ∈ (1, 2]`.
pub fn limit_ratio(kind: KernelKind, index: f64) -> Result<f64> {
    let pi = std::f64::consts::PI;
    match kind {
        KernelKind::Section => {
            if !(index > 2.0) {
                return Err(domain("limit_ratio", format!("p = {index} must exceed 2")));
            }
            if index.is_infinite() {
                return Ok((3.0 / pi).sqrt());
            }
            let p = index;
            let log = (2.0 / p) * std::f64::consts::LN_2 + 3.0 * ln_gamma_unchecked(1.0 + 1.0 / p) - ln_gamma_unchecked(1.0 + 3.0 / p);
            Ok((3.0 / pi * log.exp()).sqrt())
        }
        KernelKind::Projection => {
            check_projection_q(index)?;
            let q = index;
            let log = (2.0 / q) * std::f64::consts::LN_2 + ln_gamma_unchecked(1.0 / q) + ln_gamma_unchecked(2.0 - 1.0 / q);
            Ok((log.exp() / pi).sqrt())
        }
    }
}

/// Volumes along the diagonal family `a^(k)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagonalScan {
    pub kind: KernelKind,
    pub n: usize,
    pub index: f64,
    /// Argmax (sections) or argmin (projections), smaller k on exact ties.
    pub best_k: usize,
    /// Another k lies within the combined error bars of the best value.
    pub ambiguous: bool,
    pub rows: Vec<(usize, VolumeEstimate)>,
}

/// Diagonal indices evaluated by [`diagonal_scan`]: all of `1..=n` up to
/// n = 64, otherwise about 48 log-spaced values together with 1, 2 and n.
pub fn scan_indices(n: usize) -> Vec<usize> {
    if n <= 64 {
        return (1..=n).collect();
    }
    let mut ks: Vec<usize> = (0..48)
        .map(|i| ((n as f64).ln() * i as f64 / 47.0).exp().round() as usize)
        .chain([1, 2, n])
        .map(|k| k.clamp(1, n))
        .collect();
    ks.sort_unstable();
    ks.dedup();
    ks
}

/// Evaluates `a^(k)` over [`scan_indices`] in parallel and reports the
/// extremal k.
pub fn diagonal_scan(kind: KernelKind, n: usize, index: f64, config: &VolumeConfig) -> Result<DiagonalScan> {
    if n < 2 {
        return Err(domain("diagonal_scan", format!("dimension n = {n} must be >= 2")));
    }
    let rows: Vec<(usize, VolumeEstimate)> = scan_indices(n)
        .into_par_iter()
        .map(|k| {
            let dir = Direction::diag(n, k)?;
            let v = match kind {
                KernelKind::Section => section_volume(index, &dir, config)?,
                KernelKind::Projection => projection_volume(index, &dir, config)?,
            };
            Ok((k, v))
        })
        .collect::<Result<_>>()?;

    let better = |a: f64, b: f64| match kind {
        KernelKind::Section => a > b,
        KernelKind::Projection => a < b,
    };
    let mut best = 0;
    for (i, (_, v)) in rows.iter().enumerate() {
        if better(v.value, rows[best].1.value) {
            best = i;
        }
    }
    let (best_k, best_v) = rows[best];
    let ambiguous = rows
        .iter()
        .any(|(k, v)| *k != best_k && (v.value - best_v.value).abs() <= v.err_estimate + best_v.err_estimate);
    Ok(DiagonalScan {
        kind,
        n,
        index,
        best_k,
        ambiguous,
        rows,
    })
}
