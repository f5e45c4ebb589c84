use lpvol::quadrature::{integrate_interval, integrate_semi_infinite, integrate_truncated, Envelope, Partition, QuadConfig, Sample, StretchedExp};

fn cases() -> Vec<(Box<dyn Fn(f64) -> f64>, StretchedExp)> {
    vec![
        (Box::new(|x: f64| (-x).exp() * (3.0 * x).cos()), StretchedExp::new(1.0)),
        (Box::new(|x: f64| (-x * x).exp() * (x / (1.0 + x)).sqrt()), StretchedExp::new(2.0)),
        (Box::new(|x: f64| (-x.powi(3)).exp() * (10.0 * x).sin()), StretchedExp::new(3.0)),
    ]
}

#[test]
fn halving_tolerances_stays_within_error() {
    let cfg = QuadConfig::with_tolerances(1e-8, 1e-8);
    let half = QuadConfig::with_tolerances(5e-9, 5e-9);
    for (f, env) in cases() {
        let a = integrate_semi_infinite(&f, &env, &cfg).unwrap();
        let b = integrate_semi_infinite(&f, &env, &half).unwrap();
        assert!(a.converged && b.converged);
        assert!((a.value - b.value).abs() < a.err_estimate.max(f64::EPSILON), "{a:?} {b:?}");
    }
}

#[test]
fn extending_truncation_point_is_harmless() {
    let cfg = QuadConfig::with_tolerances(1e-10, 1e-10);
    for (f, env) in cases() {
        let a = integrate_semi_infinite(&f, &env, &cfg).unwrap();
        let longer = integrate_interval(&f, 0.0, 1.5 * a.upper, &cfg);
        assert!((a.value - longer.value).abs() < cfg.abs_tol, "U = {}", a.upper);
    }
}

#[test]
fn linearity() {
    let cfg = QuadConfig::default();
    for (f, env) in cases() {
        let base = integrate_semi_infinite(&f, &env, &cfg).unwrap().value;
        for alpha in [2.0, 10.0] {
            let scaled_env = StretchedExp { scale: alpha, ..env };
            let r = integrate_truncated(|x| Sample::from(alpha * f(x)), 0.0, &scaled_env, Partition::Whole, &cfg).unwrap();
            assert!((r.value - alpha * base).abs() <= cfg.rel_tol * (alpha * base).abs() + cfg.abs_tol);
        }
    }
    assert!(StretchedExp::new(2.0).tail(3.0) < 1e-4);
}
