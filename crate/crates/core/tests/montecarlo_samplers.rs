use lpvol::montecarlo::{mc_projection, mc_section, sample_radial, sample_signed, sample_sphere3, McConfig};
use lpvol::quadrature::{integrate_interval, QuadConfig};
use lpvol::specfun::gamma;
use lpvol::volumes::Direction;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const N_KS: usize = 100_000;

fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Kolmogorov–Smirnov statistic of `xs` against the CDF of `density` on
/// `[lo, ∞)`, the CDF being accumulated by quadrature between sorted
/// samples.
fn ks_statistic<F: Fn(f64) -> f64>(mut xs: Vec<f64>, lo: f64, density: F) -> f64 {
    xs.sort_by(f64::total_cmp);
    let cfg = QuadConfig::with_tolerances(1e-13, 1e-12);
    let n = xs.len() as f64;
    let mut cdf = 0.0;
    let mut prev = lo;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        cdf += integrate_interval(&density, prev, x, &cfg).value;
        prev = x;
        d = d.max((cdf - i as f64 / n).abs()).max(((i + 1) as f64 / n - cdf).abs());
    }
    d
}

#[test]
fn radial_mean() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let p: f64 = 3.0;
    let xs: Vec<f64> = (0..1_000_000).map(|_| sample_radial(p, &mut rng)).collect();
    let (mean, se) = mean_and_se(&xs);
    let c = gamma(1.0 + 1.0 / p).unwrap() / p;
    let expected = gamma(1.0 + (p + 2.0) / p).unwrap() / (p + 2.0) / c;
    assert!((mean - expected).abs() < 4.0 * se, "{mean} vs {expected}");

    let xs: Vec<f64> = (0..1_000_000).map(|_| sample_radial(1.0, &mut rng)).collect();
    let (mean, se) = mean_and_se(&xs);
    assert!((mean - 2.0).abs() < 4.0 * se);
}

#[test]
fn radial_distribution() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let critical = 1.63 / (N_KS as f64).sqrt();
    for p in [2.0f64, 3.0, 4.0] {
        let norm = p / gamma(1.0 + 1.0 / p).unwrap();
        let xs: Vec<f64> = (0..N_KS).map(|_| sample_radial(p, &mut rng)).collect();
        let d = ks_statistic(xs, 0.0, |t| norm * t.powf(p) * (-t.powf(p)).exp());
        assert!(d < critical, "p = {p}: D = {d}");
    }
}

#[test]
fn signed_moments() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for (q, expected) in [(2.0, 1.0 / std::f64::consts::PI.sqrt()), (4.0 / 3.0, 1.0 / gamma(0.75).unwrap())] {
        let xs: Vec<f64> = (0..1_000_000).map(|_| sample_signed(q, &mut rng)).collect();
        let (mean, se) = mean_and_se(&xs);
        assert!(mean.abs() < 4.0 * se, "q = {q}: mean {mean}");
        let abs: Vec<f64> = xs.iter().map(|x| x.abs()).collect();
        let (m, se) = mean_and_se(&abs);
        assert!((m - expected).abs() < 4.0 * se, "q = {q}: E|X| = {m} vs {expected}");
    }
}

#[test]
fn signed_distribution() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let critical = 1.63 / (N_KS as f64).sqrt();
    for q in [4.0 / 3.0, 1.5, 2.0] {
        let p: f64 = q / (q - 1.0);
        let norm = p / gamma(1.0 / q).unwrap();
        let xs: Vec<f64> = (0..N_KS).map(|_| sample_signed(q, &mut rng).abs()).collect();
        let d = ks_statistic(xs, 0.0, |t| norm * t.powf(p - 2.0) * (-t.powf(p)).exp());
        assert!(d < critical, "q = {q}: D = {d}");
    }
}

#[test]
fn sphere_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let pts: Vec<[f64; 3]> = (0..1_000_000).map(|_| sample_sphere3(&mut rng)).collect();
    assert!(pts.iter().all(|v| ((v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt() - 1.0).abs() < 1e-12));
    for d in 0..3 {
        let sq: Vec<f64> = pts.iter().map(|v| v[d] * v[d]).collect();
        let (m, se) = mean_and_se(&sq);
        assert!((m - 1.0 / 3.0).abs() < 4.0 * se);
    }
    let first: Vec<f64> = pts.iter().take(N_KS).map(|v| v[0]).collect();
    let d = ks_statistic(first, -1.0, |_| 0.5);
    assert!(d < 1.63 / (N_KS as f64).sqrt(), "D = {d}");
}

#[test]
fn volume_examples() {
    let mc = McConfig::default();
    let a2 = Direction::diag(5, 2).unwrap();
    let e = mc_section(2.0, &a2, &mc).unwrap();
    assert!((e.mean - 1.0).abs() < 4.0 * e.std_error, "{e:?}");
    let e = mc_section(4.0, &a2, &mc).unwrap();
    assert!((e.mean - 2f64.powf(0.25)).abs() < 4.0 * e.std_error, "{e:?}");
    let e = mc_projection(1.5, &a2, &mc).unwrap();
    assert!((e.mean - 2f64.powf(-1.0 / 6.0)).abs() < 4.0 * e.std_error, "{e:?}");
    let a1 = Direction::diag(5, 1).unwrap();
    for q in [1.25, 1.5, 2.0] {
        let e = mc_projection(q, &a1, &mc).unwrap();
        assert!((e.mean - 1.0).abs() < 4.0 * e.std_error, "q = {q}: {e:?}");
    }
}

#[test]
fn reproducible() {
    let a = Direction::diag(6, 6).unwrap();
    let mc = McConfig { samples: 20_000, seed: 99, streams: 7 };
    let x = mc_section(3.0, &a, &mc).unwrap();
    let y = mc_section(3.0, &a, &mc).unwrap();
    assert_eq!(x.mean.to_bits(), y.mean.to_bits());
    assert_eq!(x.std_error.to_bits(), y.std_error.to_bits());
    assert_eq!(x.samples, 20_000);
    let z = mc_section(3.0, &a, &McConfig { seed: 100, ..mc }).unwrap();
    assert_ne!(x.mean.to_bits(), z.mean.to_bits());
    assert!(mc_section(3.0, &a, &McConfig { samples: 10, ..mc }).is_err());
}
