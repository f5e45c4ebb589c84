//! Critical exponents, the dimension thresholds beyond which the diagonal
//! direction beats `a^(2)`, numerical verification of the auxiliary
//! inequalities behind those thresholds, and empirical crossover scans.
//!
//! With `g` the limit ratio from [`limit_ratio`]:
//!
//! ```text
//! section:    g′(p) = (3/2) g(p)/p² · k(p),  k(p) = Ψ(1+3/p) - Ψ(1+1/p) - (2/3) ln 2
//! projection: g′(q) = g(q)/(2q²) · h(q),     h(q) = Ψ(2-1/q) - Ψ(1/q) - 2 ln 2
//! ```

use std::f64::consts::LN_2;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::kernels::{delta_kernel_result, gamma_kernel_result, kernel_config, sinc, KernelKind};
use crate::quadrature::QuadConfig;
use crate::specfun::{digamma_unchecked, gamma_unchecked, ln_gamma_unchecked};
use crate::volumes::{closed_form_a2, limit_ratio, projection_volume, section_volume, Direction, VolumeConfig};

/// Constant in the upper bound `g(q) ≤ 1 - M (1/q - 1/2)(3/4 - 1/q)`.
pub const PROJECTION_BOUND_M: f64 = 0.86326;

/// Largest `n_max` accepted by [`crossover_scan`].
pub const MAX_SCAN_DIMENSION: usize = 5000;

fn section_g(p: f64) -> f64 {
    limit_ratio(KernelKind::Section, p).expect("p > 2")
}

fn projection_g(q: f64) -> f64 {
    limit_ratio(KernelKind::Projection, q).expect("q in (1, 2]")
}

/// `k(p) = Ψ(1+3/p) - Ψ(1+1/p) - (2/3) ln 2`, the sign of the section `g′`.
pub fn section_k(p: f64) -> f64 {
    digamma_unchecked(1.0 + 3.0 / p) - digamma_unchecked(1.0 + 1.0 / p) - 2.0 / 3.0 * LN_2
}

/// `h(q) = Ψ(2-1/q) - Ψ(1/q) - 2 ln 2`, the sign of the projection `g′`.
pub fn projection_h(q: f64) -> f64 {
    digamma_unchecked(2.0 - 1.0 / q) - digamma_unchecked(1.0 / q) - 2.0 * LN_2
}

/// Analytic derivative of the section limit ratio; defined for `p ≥ 2`.
pub fn section_g_derivative(p: f64) -> f64 {
    let log = (2.0 / p) * LN_2 + 3.0 * ln_gamma_unchecked(1.0 + 1.0 / p) - ln_gamma_unchecked(1.0 + 3.0 / p);
    let g = (3.0 / std::f64::consts::PI * log.exp()).sqrt();
    1.5 * g / (p * p) * section_k(p)
}

/// Analytic derivative of the projection limit ratio.
pub fn projection_g_derivative(q: f64) -> f64 {
    projection_g(q) / (2.0 * q * q) * projection_h(q)
}

/// `f(p) = Γ(1+3/p)/Γ(1+1/p)`.
pub fn section_moment_ratio(p: f64) -> f64 {
    (ln_gamma_unchecked(1.0 + 3.0 / p) - ln_gamma_unchecked(1.0 + 1.0 / p)).exp()
}

/// `f(q) = Γ(2-1/q)/Γ(1/q)`.
pub fn projection_gamma_ratio(q: f64) -> f64 {
    gamma_unchecked(2.0 - 1.0 / q) / gamma_unchecked(1.0 / q)
}

/// A bracketed root with its residual.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Root {
    pub value: f64,
    pub residual: f64,
    pub bracket: [f64; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalExponents {
    /// Solution of `g(p) = 1` on `(5, ∞)` for the section ratio.
    pub p0: Root,
    /// Maximum of the section ratio `g` on `(2, ∞)`.
    pub p1_section: Root,
    /// Minimum of the projection ratio `g` on `(1, 2)`.
    pub q1_projection: Root,
    /// Minimum of `Γ(1+3/p)/Γ(1+1/p)` on `[3, ∞)`.
    pub f_min_location: Root,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootConfig {
    /// Bisection stops once the bracket is narrower than this.
    pub width: f64,
}

impl Default for RootConfig {
    fn default() -> Self {
        Self { width: 1e-10 }
    }
}

fn bisect_root<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, width: f64) -> Result<Root> {
    let (mut a, mut b) = (lo, hi);
    let fa = f(a);
    if fa.signum() == f(b).signum() {
        return Err(Error::Bracket { lo, hi });
    }
    while b - a > width {
        let m = 0.5 * (a + b);
        if f(m).signum() == fa.signum() {
            a = m;
        } else {
            b = m;
        }
    }
    let value = 0.5 * (a + b);
    Ok(Root {
        value,
        residual: f(value).abs(),
        bracket: [lo, hi],
    })
}

/// Locates `p0`, `p1_section`, `q1_projection` and `f_min_location` by
/// bisection on fixed brackets.
pub fn critical_exponents(config: &RootConfig) -> Result<CriticalExponents> {
    if !(config.width > 0.0) {
        return Err(domain("critical_exponents", "bisection width must be positive"));
    }
    let w = config.width;
    Ok(CriticalExponents {
        p0: bisect_root(|p| section_g(p) - 1.0, 26.0, 27.0, w)?,
        p1_section: bisect_root(section_k, 4.0, 5.0, w)?,
        q1_projection: bisect_root(projection_h, 1.0, 2.0, w)?,
        // d/dp ln f = (Ψ(1+1/p) - 3Ψ(1+3/p)) / p²
        f_min_location: bisect_root(|p| digamma_unchecked(1.0 + 1.0 / p) - 3.0 * digamma_unchecked(1.0 + 3.0 / p), 3.0, 30.0, w)?,
    })
}

/// Dimension beyond which `a^(n)` is known to beat `a^(2)`:
/// `65/(p-2)` for `2 < p < 5`, `650/(p0-p)` for `5 ≤ p < p0`, and
/// `(32/15)/(q-4/3) + (24/5)/(2-q)` for projections with `4/3 < q < 2`.
pub fn theorem_threshold(kind: KernelKind, index: f64, p0: f64) -> Result<f64> {
    match kind {
        KernelKind::Section => {
            if !(index > 2.0 && index < p0) {
                return Err(domain("theorem_threshold", format!("p = {index} outside (2, {p0})")));
            }
            Ok(if index < 5.0 { 65.0 / (index - 2.0) } else { 650.0 / (p0 - index) })
        }
        KernelKind::Projection => {
            if !(index > 4.0 / 3.0 && index < 2.0) {
                return Err(domain("theorem_threshold", format!("q = {index} outside (4/3, 2)")));
            }
            Ok((32.0 / 15.0) / (index - 4.0 / 3.0) + (24.0 / 5.0) / (2.0 - index))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LemmaId {
    /// `Γ(1+3/p)/Γ(1+1/p) ≥ 0.9429` for `p ≥ 3`.
    Lemma1a,
    /// `g(p) ≥ 1 + (p0-p)/1317` on `[5, p0]`.
    Lemma1bLinear,
    /// `g(p) > 25/24` on `[4, 5]`.
    Lemma1bMid,
    /// `g(p) ≥ 1 + (p-2)/44` on `[2, 4]`.
    Lemma1bLow,
    /// `|sinc(s) - Γ(1+1/p) γ_p(s)| ≤ 0.3926` for `p ≥ 2`.
    Lemma2,
    /// `Γ(2-1/q)/Γ(1/q)` decreasing on `[1, 2]` with value `≤ 0.7397` at 4/3.
    Lemma3a,
    /// `g(q) ≤ 1 - M (1/q - 1/2)(3/4 - 1/q)` on `[4/3, 2]`.
    Lemma3b,
    /// `δ_{4/3} ≤ δ_q ≤ δ_2` on `[0, 16/5]` for `q ∈ [4/3, 2]`.
    Lemma4,
    /// `|δ_q(s)| ≤ 0.588` for `q ∈ [4/3, 2]`, `s ∈ [48/25, 16/5]`.
    Corollary,
}

impl LemmaId {
    pub const ALL: [LemmaId; 9] = [
        LemmaId::Lemma1a,
        LemmaId::Lemma1bLinear,
        LemmaId::Lemma1bMid,
        LemmaId::Lemma1bLow,
        LemmaId::Lemma2,
        LemmaId::Lemma3a,
        LemmaId::Lemma3b,
        LemmaId::Lemma4,
        LemmaId::Corollary,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LemmaId::Lemma1a => "lemma1a",
            LemmaId::Lemma1bLinear => "lemma1b_linear",
            LemmaId::Lemma1bMid => "lemma1b_mid",
            LemmaId::Lemma1bLow => "lemma1b_low",
            LemmaId::Lemma2 => "lemma2",
            LemmaId::Lemma3a => "lemma3a",
            LemmaId::Lemma3b => "lemma3b",
            LemmaId::Lemma4 => "lemma4",
            LemmaId::Corollary => "corollary",
        }
    }
}

/// Grid resolution and kernel tolerances for [`verify_lemma_bounds`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    /// Points per unit length along each axis; at least 50.
    pub density: f64,
    pub kernel: QuadConfig,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            density: 50.0,
            kernel: kernel_config(),
        }
    }
}

/// One grid point: the index (`p` or `q`), the kernel argument where the
/// inequality involves one, and `bound - value`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridPoint {
    pub index: f64,
    pub s: Option<f64>,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LemmaReport {
    pub lemma_id: LemmaId,
    pub grid: Vec<GridPoint>,
    pub worst_margin: f64,
    pub worst_point: GridPoint,
    pub pass: bool,
}

/// Tolerance on the worst margin below which a bound counts as failed.
pub const MARGIN_TOLERANCE: f64 = 1e-9;

fn axis(lo: f64, hi: f64, density: f64) -> Vec<f64> {
    let count = ((hi - lo) * density).ceil().max(1.0) as usize;
    (0..=count).map(|i| if i == count { hi } else { lo + (hi - lo) * i as f64 / count as f64 }).collect()
}

fn plane(indices: &[f64], args: &[f64]) -> Vec<(f64, f64)> {
    indices.iter().flat_map(|&i| args.iter().map(move |&s| (i, s))).collect()
}

fn kernel_value(r: Result<crate::quadrature::QuadResult>) -> f64 {
    r.map(|r| r.value).unwrap_or(f64::NAN)
}

/// Checks one auxiliary inequality pointwise on a grid and reports the
/// smallest margin; the bound passes iff that margin is at least
/// `-MARGIN_TOLERANCE`.
pub fn verify_lemma_bounds(lemma_id: LemmaId, grid_spec: &GridSpec) -> Result<LemmaReport> {
    let d = grid_spec.density;
    if !(d >= 50.0) {
        return Err(domain("verify_lemma_bounds", format!("grid density {d} is below 50 points per unit")));
    }
    let kcfg = grid_spec.kernel;
    let one_d = |xs: Vec<f64>, margin: &(dyn Fn(f64) -> f64 + Sync)| -> Vec<GridPoint> {
        xs.into_par_iter()
            .map(|x| GridPoint {
                index: x,
                s: None,
                margin: margin(x),
            })
            .collect()
    };
    let two_d = |pts: Vec<(f64, f64)>, margin: &(dyn Fn(f64, f64) -> f64 + Sync)| -> Vec<GridPoint> {
        pts.into_par_iter()
            .map(|(x, s)| GridPoint {
                index: x,
                s: Some(s),
                margin: margin(x, s),
            })
            .collect()
    };

    let grid = match lemma_id {
        LemmaId::Lemma1a => {
            let mut xs = axis(3.0, 100.0, d);
            xs.push(critical_exponents(&RootConfig::default())?.f_min_location.value);
            one_d(xs, &|p| section_moment_ratio(p) - 0.9429)
        }
        LemmaId::Lemma1bLinear => {
            let p0 = critical_exponents(&RootConfig::default())?.p0.value;
            one_d(axis(5.0, p0, d), &|p| section_g(p) - (1.0 + (p0 - p) / 1317.0))
        }
        LemmaId::Lemma1bMid => one_d(axis(4.0, 5.0, d), &|p| section_g(p) - 25.0 / 24.0),
        LemmaId::Lemma1bLow => one_d(axis(2.0, 4.0, d), &|p| {
            // g(2) = 1 exactly; the formula loses a few ulps there
            let g = if p == 2.0 { 1.0 } else { section_g(p) };
            g - (1.0 + (p - 2.0) / 44.0)
        }),
        LemmaId::Lemma2 => two_d(plane(&axis(2.0, 10.0, d), &axis(0.0, 10.0, d)), &|p, s| {
            let norm = gamma_unchecked(1.0 + 1.0 / p);
            let g = kernel_value(gamma_kernel_result(p, s, &kcfg));
            0.3926 - (sinc(s) - norm * g).abs()
        }),
        LemmaId::Lemma3a => {
            let qs = axis(1.0, 2.0, d);
            let mut pts: Vec<GridPoint> = qs
                .windows(2)
                .map(|w| GridPoint {
                    index: w[1],
                    s: None,
                    margin: projection_gamma_ratio(w[0]) - projection_gamma_ratio(w[1]),
                })
                .collect();
            pts.push(GridPoint {
                index: 4.0 / 3.0,
                s: None,
                margin: 0.7397 - projection_gamma_ratio(4.0 / 3.0),
            });
            pts
        }
        LemmaId::Lemma3b => one_d(axis(4.0 / 3.0, 2.0, d), &|q| {
            let bound = 1.0 - PROJECTION_BOUND_M * (1.0 / q - 0.5) * (0.75 - 1.0 / q);
            bound - projection_g(q)
        }),
        LemmaId::Lemma4 => two_d(plane(&axis(4.0 / 3.0, 2.0, d), &axis(0.0, 3.2, d)), &|q, s| {
            let lo = kernel_value(delta_kernel_result(4.0 / 3.0, s, &kcfg));
            let hi = (-s * s / 4.0).exp();
            let v = kernel_value(delta_kernel_result(q, s, &kcfg));
            (v - lo).min(hi - v)
        }),
        LemmaId::Corollary => two_d(plane(&axis(4.0 / 3.0, 2.0, d), &axis(1.92, 3.2, d)), &|q, s| {
            0.588 - kernel_value(delta_kernel_result(q, s, &kcfg)).abs()
        }),
    };

    // a NaN margin (failed evaluation) is the worst possible outcome
    let worst_point = *grid
        .iter()
        .min_by(|a, b| {
            let ma = if a.margin.is_nan() { f64::NEG_INFINITY } else { a.margin };
            let mb = if b.margin.is_nan() { f64::NEG_INFINITY } else { b.margin };
            ma.total_cmp(&mb)
        })
        .expect("non-empty grid");
    let worst_margin = worst_point.margin;
    Ok(LemmaReport {
        lemma_id,
        grid,
        worst_margin,
        worst_point,
        pass: worst_margin >= -MARGIN_TOLERANCE,
    })
}

/// Diagonal versus `a^(2)` at one dimension.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CrossoverRow {
    pub n: usize,
    pub diagonal: f64,
    pub a2: f64,
    /// `diagonal - a2` for sections, `a2 - diagonal` for projections.
    pub margin: f64,
    /// Combined error estimate of both values.
    pub err: f64,
    /// `margin > 3 err`.
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossoverReport {
    pub kind: KernelKind,
    pub index: f64,
    pub n_max: usize,
    pub n_theorem: f64,
    /// Smallest tested n from which the inequality holds at every larger
    /// tested n; `None` if it fails at `n_max`.
    pub n_empirical: Option<usize>,
    /// The inequality holds at every tested `n ≥ ceil(n_theorem)`.
    pub verified_beyond_threshold: bool,
    pub rows: Vec<CrossoverRow>,
}

/// Dimensions tested by [`crossover_scan`]: every n up to 100, about 60
/// log-spaced values beyond, every n within 10 of the threshold, and
/// `n_max`.
pub fn crossover_grid(n_theorem: f64, n_max: usize) -> Vec<usize> {
    let mut ns: Vec<usize> = (3..=n_max.min(100)).collect();
    if n_max > 100 {
        let span = (n_max as f64 / 100.0).ln();
        ns.extend((1..=60).map(|i| (100.0 * (span * i as f64 / 60.0).exp()).round() as usize));
    }
    let t = n_theorem.ceil();
    if t.is_finite() {
        let t = t as i64;
        ns.extend(((t - 10).max(3)..=t + 10).map(|n| n as usize));
    }
    ns.push(n_max);
    ns.retain(|&n| n >= 3 && n <= n_max);
    ns.sort_unstable();
    ns.dedup();
    ns
}

/// Compares `a^(n)` with `a^(2)` along [`crossover_grid`].
pub fn crossover_scan(kind: KernelKind, index: f64, n_max: usize, config: &VolumeConfig) -> Result<CrossoverReport> {
    if !(3..=MAX_SCAN_DIMENSION).contains(&n_max) {
        return Err(domain("crossover_scan", format!("n_max = {n_max} outside [3, {MAX_SCAN_DIMENSION}]")));
    }
    let p0 = critical_exponents(&RootConfig::default())?.p0.value;
    let n_theorem = theorem_threshold(kind, index, p0)?;
    let a2 = closed_form_a2(kind, index)?;

    let rows: Vec<CrossoverRow> = crossover_grid(n_theorem, n_max)
        .into_par_iter()
        .map(|n| {
            let dir = Direction::diag(n, n)?;
            let (v, margin) = match kind {
                KernelKind::Section => {
                    let v = section_volume(index, &dir, config)?;
                    (v, v.value - a2)
                }
                KernelKind::Projection => {
                    let v = projection_volume(index, &dir, config)?;
                    (v, a2 - v.value)
                }
            };
            Ok(CrossoverRow {
                n,
                diagonal: v.value,
                a2,
                margin,
                err: v.err_estimate,
                holds: margin > 3.0 * v.err_estimate,
            })
        })
        .collect::<Result<_>>()?;

    let mut n_empirical = None;
    for row in rows.iter().rev() {
        if !row.holds {
            break;
        }
        n_empirical = Some(row.n);
    }
    let threshold = n_theorem.ceil();
    let verified_beyond_threshold = rows.iter().filter(|r| r.n as f64 >= threshold).all(|r| r.holds);
    Ok(CrossoverReport {
        kind,
        index,
        n_max,
        n_theorem,
        n_empirical,
        verified_beyond_threshold,
        rows,
    })
}
