use randcf::ergodic::{
    clt_experiment, digit_mean_stats, interval_mass, simulate_orbit, DEFAULT_BURN_IN,
};

#[test]
fn interval_masses_settle() {
    for p in [0.3, 0.5, 0.9] {
        let long = simulate_orbit(p, 0.4, 1_000_000, DEFAULT_BURN_IN, 31).unwrap();
        let short = &long.samples[..100_000];
        for (a, b) in [(0.0, 0.25), (0.25, 0.5), (0.5, 1.0)] {
            let m5 = interval_mass(short, a, b);
            let m6 = interval_mass(&long.samples, a, b);
            let se = (m5 * (1.0 - m5) / 1e5).sqrt();
            assert!((m5 - m6).abs() < 2.0 * se, "p = {p} ({a}, {b}): {m5} vs {m6}");
        }
    }
}

#[test]
fn log_digit_means_are_positive_and_finite() {
    for p in [0.1, 0.3, 0.5, 0.9, 1.0] {
        let s = digit_mean_stats(p, 20_000, 8, 3).unwrap();
        let se = s.log_mean_stderr.unwrap();
        assert!(s.log_mean.is_finite() && s.log_mean - 3.0 * se > 0.0, "p = {p}: {s:?}");
    }
}

#[test]
fn two_seeds_agree_at_half() {
    let a = digit_mean_stats(0.5, 1_000_000, 4, 1).unwrap();
    let b = digit_mean_stats(0.5, 1_000_000, 4, 2).unwrap();
    assert!(a.log_mean > 0.0 && b.log_mean > 0.0);
    assert!((a.log_mean - b.log_mean).abs() / a.log_mean < 0.01, "{} vs {}", a.log_mean, b.log_mean);
}

#[test]
fn clt_variance_is_seed_stable() {
    let f = |x: f64| if x > 0.5 { 1.0 } else { 0.0 };
    let mean = interval_mass(&simulate_orbit(0.5, 0.4, 1_000_000, DEFAULT_BURN_IN, 9).unwrap().samples, 0.5000000000000001, 2.0);
    let a = clt_experiment(f, mean, 0.5, 10_000, 1000, 1).unwrap();
    let b = clt_experiment(f, mean, 0.5, 10_000, 1000, 2).unwrap();
    assert!(!a.degenerate);
    assert!(a.ks.unwrap() < 0.05 && b.ks.unwrap() < 0.05);
    let rel = (a.sigma2_hat - b.sigma2_hat).abs() / a.sigma2_hat.max(b.sigma2_hat);
    assert!(rel < 0.1, "{} vs {}", a.sigma2_hat, b.sigma2_hat);
    assert!(a.ldp_rate.is_some_and(|r| r > 0.0));
}
