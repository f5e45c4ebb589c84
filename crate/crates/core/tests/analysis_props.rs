use lpvol::analysis::{
    critical_exponents, crossover_scan, projection_gamma_ratio, section_moment_ratio, theorem_threshold, verify_lemma_bounds, GridSpec, LemmaId, RootConfig,
};
use lpvol::kernels::KernelKind;
use lpvol::volumes::{limit_ratio, VolumeConfig};

fn span(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect()
}

#[test]
fn section_ratio_rises_then_falls() {
    let c = critical_exponents(&RootConfig::default()).unwrap();
    let p1 = c.p1_section.value;
    let g = |p: f64| limit_ratio(KernelKind::Section, p).unwrap();
    let up: Vec<f64> = span(2.001, p1 - 0.01, 200).into_iter().map(g).collect();
    assert!(up.windows(2).all(|w| w[1] > w[0]));
    let down: Vec<f64> = span(p1 + 0.01, 40.0, 400).into_iter().map(g).collect();
    assert!(down.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn projection_ratio_falls_then_rises() {
    let c = critical_exponents(&RootConfig::default()).unwrap();
    let q1 = c.q1_projection.value;
    let g = |q: f64| limit_ratio(KernelKind::Projection, q).unwrap();
    let down: Vec<f64> = span(1.001, q1 - 0.01, 200).into_iter().map(g).collect();
    assert!(down.windows(2).all(|w| w[1] < w[0]));
    let up: Vec<f64> = span(q1 + 0.01, 2.0, 200).into_iter().map(g).collect();
    assert!(up.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn gamma_ratio_endpoints() {
    assert!((projection_gamma_ratio(1.0) - 1.0).abs() < 1e-15);
    assert!((projection_gamma_ratio(2.0) - 0.5).abs() < 1e-15);
    assert!((projection_gamma_ratio(4.0 / 3.0) - 0.739_668_779_797).abs() < 1e-11);
}

#[test]
fn roots_and_brackets() {
    let c = critical_exponents(&RootConfig::default()).unwrap();
    assert!((c.p0.value - 26.265).abs() < 0.01);
    assert!((c.q1_projection.value - 1.612).abs() < 0.005);
    assert!(limit_ratio(KernelKind::Section, 26.0).unwrap() > 1.0);
    assert!(limit_ratio(KernelKind::Section, 27.0).unwrap() < 1.0);
    assert!(c.p0.residual < 1e-9);
    assert_eq!(c.p0.bracket, [26.0, 27.0]);
}

#[test]
fn lemma_examples() {
    let spec = GridSpec::default();
    let r = verify_lemma_bounds(LemmaId::Lemma1bLinear, &spec).unwrap();
    assert!(r.pass && r.worst_margin >= 0.0, "{}", r.worst_margin);
    assert!(verify_lemma_bounds(LemmaId::Lemma3b, &spec).unwrap().pass);
    let f = section_moment_ratio(9.115);
    assert!(f >= 0.9429 && (f - 0.942_982_879_457).abs() < 1e-6);
    let r = verify_lemma_bounds(LemmaId::Lemma1a, &spec).unwrap();
    assert!((r.worst_point.index - 9.1147).abs() < 0.01, "{:?}", r.worst_point);
}

#[test]
fn simplified_projection_threshold_dominates() {
    for q in span(4.0 / 3.0 + 1e-3, 2.0 - 1e-3, 500) {
        let exact = theorem_threshold(KernelKind::Projection, q, 26.265).unwrap();
        let simple = 5.0 * (1.0 / (q - 4.0 / 3.0) + 1.0 / (2.0 - q));
        assert!(simple >= exact, "q = {q}");
    }
}

#[test]
fn section_crossover_at_three() {
    let r = crossover_scan(KernelKind::Section, 3.0, 200, &VolumeConfig::default()).unwrap();
    assert_eq!(r.n_theorem, 65.0);
    assert!(r.verified_beyond_threshold);
    let n = r.n_empirical.expect("crossover found");
    assert!(n <= 65, "{n}");
}

#[test]
fn projection_crossover_at_eight_fifths() {
    let r = crossover_scan(KernelKind::Projection, 1.6, 100, &VolumeConfig::default()).unwrap();
    assert!((r.n_theorem - 20.0).abs() < 1e-12);
    assert!(r.rows.iter().filter(|row| row.n >= 21).all(|row| row.holds));
    assert!(r.verified_beyond_threshold);
    assert!(r.n_empirical.unwrap() <= 21);
}

#[test]
fn section_crossover_near_two() {
    let r = crossover_scan(KernelKind::Section, 2.1, 1000, &VolumeConfig::default()).unwrap();
    assert!((r.n_theorem - 650.0).abs() < 1e-9);
    assert!(r.verified_beyond_threshold);
    assert!(r.n_empirical.unwrap() as f64 <= r.n_theorem.ceil());
}

#[test]
fn scan_rejects_bad_window() {
    let cfg = VolumeConfig::default();
    assert!(crossover_scan(KernelKind::Section, 30.0, 100, &cfg).is_err());
    assert!(crossover_scan(KernelKind::Projection, 1.2, 100, &cfg).is_err());
    assert!(crossover_scan(KernelKind::Section, 3.0, 6000, &cfg).is_err());
}
