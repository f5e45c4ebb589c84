//! Monte Carlo estimates of section and projection volumes from their
//! probabilistic representations
//!
//! ```text
//! A_{n,p}(a) = Γ(1+1/p) E 1/‖Σ a_j R_j ξ_j‖₂     ξ_j uniform on S² ⊂ R³
//! P_{n,q}(a) = Γ(1/q)   E |Σ a_j X_j|
//! ```
//!
//! where `R_j` has density `∝ t^p exp(-t^p)` on `[0, ∞)` and `X_j` has
//! density `∝ |t|^(p-2) exp(-|t|^p)` on `R`, `p = q/(q-1)`. Substituting
//! `u = t^p` turns both into powers of Gamma variates:
//! `R = G^(1/p)` with `G ~ Gamma(1 + 1/p)`, and `|X| = G^(1/p)` with
//! `G ~ Gamma(1 - 1/p)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{domain, Result};
use crate::kernels::{check_projection_q, check_section_p, conjugate};
use crate::specfun::gamma_unchecked;
use crate::volumes::Direction;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct McConfig {
    pub samples: u64,
    pub seed: u64,
    /// Independent substreams; each owns its generator.
    pub streams: u64,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            samples: 1_000_000,
            seed: 0x5eed_1e55,
            streams: 32,
        }
    }
}

impl McConfig {
    pub fn validate(&self) -> Result<()> {
        if self.samples < 1000 {
            return Err(domain("McConfig", format!("samples = {} must be >= 1000", self.samples)));
        }
        if self.streams == 0 || self.streams > self.samples {
            return Err(domain("McConfig", format!("streams = {} must lie in [1, samples]", self.streams)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub mean: f64,
    /// Sample standard deviation over `√samples`.
    pub std_error: f64,
    pub samples: u64,
}

/// Gamma(shape, 1) variate by the Marsaglia–Tsang squeeze method; shapes
/// below 1 use `Gamma(shape + 1) · U^(1/shape)`.
pub fn sample_gamma<R: Rng + ?Sized>(shape: f64, rng: &mut R) -> f64 {
    if shape < 1.0 {
        let u: f64 = rng.random();
        return sample_gamma(shape + 1.0, rng) * u.powf(1.0 / shape);
    }
    let d = shape - 1.0 / 3.0;
    let c = 1.0 / (9.0 * d).sqrt();
    loop {
        let x: f64 = rng.sample(StandardNormal);
        let v = 1.0 + c * x;
        if v <= 0.0 {
            continue;
        }
        let v = v * v * v;
        let u: f64 = rng.random();
        let x2 = x * x;
        if u < 1.0 - 0.0331 * x2 * x2 || u.ln() < 0.5 * x2 + d * (1.0 - v + v.ln()) {
            return d * v;
        }
    }
}

/// Draw from the density `p t^p exp(-t^p) / Γ(1+1/p)` on `[0, ∞)`.
pub fn sample_radial<R: Rng + ?Sized>(p: f64, rng: &mut R) -> f64 {
    sample_gamma(1.0 + 1.0 / p, rng).powf(1.0 / p)
}

/// Symmetric draw from the density `(p/(2Γ(1/q))) |t|^(p-2) exp(-|t|^p)`,
/// `p = q/(q-1)`.
pub fn sample_signed<R: Rng + ?Sized>(q: f64, rng: &mut R) -> f64 {
    let p = conjugate(q);
    let magnitude = sample_gamma(1.0 / q, rng).powf(1.0 / p);
    if rng.random::<bool>() {
        magnitude
    } else {
        -magnitude
    }
}

/// Uniform point on the unit sphere in R³.
pub fn sample_sphere3<R: Rng + ?Sized>(rng: &mut R) -> [f64; 3] {
    loop {
        let v: [f64; 3] = [rng.sample(StandardNormal), rng.sample(StandardNormal), rng.sample(StandardNormal)];
        let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if norm > 1e-150 {
            return [v[0] / norm, v[1] / norm, v[2] / norm];
        }
    }
}

/// Running count, mean and sum of squared deviations.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    count: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(self, other: Self) -> Self {
        if self.count == 0 {
            return other;
        }
        if other.count == 0 {
            return self;
        }
        let count = self.count + other.count;
        let delta = other.mean - self.mean;
        let mean = self.mean + delta * other.count as f64 / count as f64;
        let m2 = self.m2 + other.m2 + delta * delta * (self.count as f64 * other.count as f64 / count as f64);
        Self { count, mean, m2 }
    }
}

/// Runs `draw` on every substream in parallel and reduces in stream order.
fn estimate<F>(mc: &McConfig, draw: F) -> Result<McEstimate>
where
    F: Fn(&mut ChaCha8Rng) -> f64 + Sync,
{
    mc.validate()?;
    let per = mc.samples / mc.streams;
    let extra = mc.samples % mc.streams;
    let parts: Vec<Moments> = (0..mc.streams)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(mc.seed);
            rng.set_stream(i);
            let mut m = Moments::default();
            for _ in 0..per + u64::from(i < extra) {
                m.push(draw(&mut rng));
            }
            m
        })
        .collect();
    let total = parts.into_iter().fold(Moments::default(), Moments::merge);
    let variance = total.m2 / (total.count - 1) as f64;
    Ok(McEstimate {
        mean: total.mean,
        std_error: (variance / total.count as f64).sqrt(),
        samples: total.count,
    })
}

fn nonzero(a: &Direction) -> Vec<f64> {
    a.coords().into_iter().filter(|&c| c != 0.0).collect()
}

/// Estimate of `A_{n,p}(a)`.
pub fn mc_section(p: f64, a: &Direction, mc: &McConfig) -> Result<McEstimate> {
    check_section_p(p)?;
    let coords = nonzero(a);
    let norm = gamma_unchecked(1.0 + 1.0 / p);
    estimate(mc, |rng| {
        let mut sum = [0.0; 3];
        for &c in &coords {
            let r = c * sample_radial(p, rng);
            let xi = sample_sphere3(rng);
            for d in 0..3 {
                sum[d] += r * xi[d];
            }
        }
        norm / (sum[0] * sum[0] + sum[1] * sum[1] + sum[2] * sum[2]).sqrt()
    })
}

/// Estimate of `P_{n,q}(a)`.
pub fn mc_projection(q: f64, a: &Direction, mc: &McConfig) -> Result<McEstimate> {
    check_projection_q(q)?;
    let coords = nonzero(a);
    let norm = gamma_unchecked(1.0 / q);
    estimate(mc, |rng| {
        let sum: f64 = coords.iter().map(|&c| c * sample_signed(q, rng)).sum();
        norm * sum.abs()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(7)
    }

    #[test]
    fn gamma_moments() {
        let mut r = rng();
        for shape in [0.25, 0.75, 1.0, 4.0 / 3.0, 5.0] {
            let n = 200_000;
            let mut m = Moments::default();
            for _ in 0..n {
                m.push(sample_gamma(shape, &mut r));
            }
            let var = m.m2 / (n - 1) as f64;
            let se = (shape / n as f64).sqrt();
            assert!((m.mean - shape).abs() < 4.0 * se, "shape {shape}: mean {}", m.mean);
            assert!((var - shape).abs() < 0.05 * shape, "shape {shape}: var {var}");
        }
    }

    #[test]
    fn moments_merge_matches_sequential() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 37) % 101) as f64 * 0.1).collect();
        let mut all = Moments::default();
        xs.iter().for_each(|&x| all.push(x));
        let (a, b) = xs.split_at(317);
        let mut ma = Moments::default();
        let mut mb = Moments::default();
        a.iter().for_each(|&x| ma.push(x));
        b.iter().for_each(|&x| mb.push(x));
        let merged = ma.merge(mb);
        assert!((merged.mean - all.mean).abs() < 1e-12);
        assert!((merged.m2 - all.m2).abs() < 1e-9 * all.m2);
    }

    #[test]
    fn config_validation() {
        assert!(McConfig { samples: 999, ..McConfig::default() }.validate().is_err());
        assert!(McConfig { streams: 0, ..McConfig::default() }.validate().is_err());
        assert!(McConfig::default().validate().is_ok());
    }
}
