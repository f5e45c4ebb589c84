use lpvol::kernels::{delta_kernel, delta_series_partial, gamma_kernel, kernel_config, sinc, tail_envelope, KernelKind, KernelParams};
use lpvol::specfun::gamma;

fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect()
}

#[test]
fn first_order_envelopes_dominate() {
    let cfg = kernel_config();
    for p in [2.0, 3.0, 5.0, 10.0, 26.0] {
        let kp = KernelParams::section(p).unwrap();
        for s in grid(0.5, 50.0, 400) {
            let g = gamma_kernel(p, s, &cfg).unwrap();
            assert!(g.abs() <= tail_envelope(KernelKind::Section, &kp, s) + 1e-9, "p = {p}, s = {s}");
        }
    }
    for q in [4.0 / 3.0, 1.5, 2.0] {
        let kp = KernelParams::projection(q).unwrap();
        for s in grid(0.5, 50.0, 400) {
            let d = delta_kernel(q, s, &cfg).unwrap();
            assert!(d.abs() <= tail_envelope(KernelKind::Projection, &kp, s) + 1e-9, "q = {q}, s = {s}");
        }
    }
}

#[test]
fn sinc_deviation() {
    let cfg = kernel_config();
    for p in [2.0, 3.0, 5.0, 10.0, 100.0] {
        let norm = gamma(1.0 + 1.0 / p).unwrap();
        for s in grid(0.02, 20.0, 1000) {
            let dev = (sinc(s) - norm * gamma_kernel(p, s, &cfg).unwrap()).abs();
            assert!(dev <= 0.3926 + 1e-6, "p = {p}, s = {s}: {dev}");
        }
    }
}

#[test]
fn delta_ordering_in_q() {
    let cfg = kernel_config();
    for s in grid(0.0, 3.2, 160) {
        let lo = delta_kernel(4.0 / 3.0, s, &cfg).unwrap();
        let hi = delta_kernel(2.0, s, &cfg).unwrap();
        for q in [4.0 / 3.0, 1.5, 1.8, 2.0] {
            let d = delta_kernel(q, s, &cfg).unwrap();
            assert!(lo <= d + 1e-12 && d <= hi + 1e-8, "q = {q}, s = {s}");
        }
    }
}

#[test]
fn delta_window_bound() {
    let cfg = kernel_config();
    for q in [4.0 / 3.0, 1.5, 1.75, 2.0] {
        for s in grid(1.92, 3.2, 128) {
            assert!(delta_kernel(q, s, &cfg).unwrap().abs() <= 0.588 + 1e-6, "q = {q}, s = {s}");
        }
    }
}

#[test]
fn series_and_quadrature_agree() {
    let cfg = kernel_config();
    for q in [4.0 / 3.0, 1.5, 2.0] {
        for s in grid(0.0, 2.0, 80) {
            let series = delta_series_partial(q, s, 25).unwrap();
            assert!((series - delta_kernel(q, s, &cfg).unwrap()).abs() <= 1e-8, "q = {q}, s = {s}");
        }
    }
}
