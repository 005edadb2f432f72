//! Monte Carlo experiments on the skew product in double precision: orbit
//! sampling, empirical densities, digit means, correlation decay and a CLT
//! experiment.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::expansion::step_r;
use crate::grid::GridFunction;
use crate::point::ExactPoint;

/// Orbit points below this (other than an exact fixed 0) are resampled.
pub const GUARD: f64 = 1.0 / (1u64 << 40) as f64;
pub const DEFAULT_BURN_IN: usize = 1000;

fn check_p(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain {
            value: p.to_string(),
            domain: "[0, 1]",
        });
    }
    Ok(())
}

/// Bit stream with `P(0) = p`, matching the Bernoulli ω-words.
#[derive(Debug, Clone)]
struct Bits {
    rng: ChaCha8Rng,
    p: f64,
}

impl Bits {
    fn new(p: f64, seed: u64) -> Self {
        Bits {
            rng: ChaCha8Rng::seed_from_u64(seed),
            p,
        }
    }

    fn next(&mut self) -> u8 {
        u8::from(self.rng.gen::<f64>() >= self.p)
    }
}

/// `T₀` (bit 0) or `T₁` (bit 1) in double precision.
pub fn step_r_f64(bit: u8, x: f64) -> f64 {
    let base = if bit == 0 { x } else { 1.0 - x };
    if base == 0.0 {
        return 0.0;
    }
    let y = 1.0 / base;
    (y - y.floor()).clamp(0.0, 1.0)
}

/// A double precision orbit of `R` with the near-zero guard.
#[derive(Debug, Clone)]
struct Orbit {
    bits: Bits,
    x: f64,
    guard_events: usize,
}

impl Orbit {
    fn new(p: f64, x0: f64, seed: u64) -> Self {
        Orbit {
            bits: Bits::new(p, seed),
            x: x0,
            guard_events: 0,
        }
    }

    fn advance_with(&mut self, bit: u8) {
        let next = step_r_f64(bit, self.x);
        self.x = if self.x != 0.0 && next < GUARD {
            self.guard_events += 1;
            loop {
                let u: f64 = self.bits.rng.gen();
                if u > 0.0 {
                    break u;
                }
            }
        } else {
            next
        };
    }

    fn advance(&mut self) {
        let bit = self.bits.next();
        self.advance_with(bit);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrbitSamples {
    pub samples: Vec<f64>,
    /// Times the orbit fell below the guard and was resampled.
    pub guard_events: usize,
}

/// `n` points of the `[0, 1]`-coordinate of an `R`-orbit after `burn_in`
/// discarded steps; the first sample is the point after the burn-in.
pub fn simulate_orbit(p: f64, x0: f64, n: usize, burn_in: usize, seed: u64) -> Result<OrbitSamples> {
    check_p(p)?;
    if !(0.0..=1.0).contains(&x0) {
        return Err(Error::Domain {
            value: x0.to_string(),
            domain: "[0, 1]",
        });
    }
    let mut orbit = Orbit::new(p, x0, seed);
    for _ in 0..burn_in {
        orbit.advance();
    }
    let mut samples = Vec::with_capacity(n);
    for _ in 0..n {
        samples.push(orbit.x);
        orbit.advance();
    }
    Ok(OrbitSamples {
        samples,
        guard_events: orbit.guard_events,
    })
}

/// The same orbit as [`simulate_orbit`] (same bits under the same seed),
/// iterated in exact or high precision arithmetic.
pub fn simulate_orbit_exact(
    p: f64,
    x0: &ExactPoint,
    n: usize,
    burn_in: usize,
    seed: u64,
) -> Result<Vec<ExactPoint>> {
    check_p(p)?;
    let mut bits = Bits::new(p, seed);
    let mut x = x0.clone();
    for _ in 0..burn_in {
        x = step_r(bits.next(), &x)?;
    }
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        out.push(x.clone());
        x = step_r(bits.next(), &x)?;
    }
    Ok(out)
}

/// Fraction of samples in `[a, b)`.
pub fn interval_mass(samples: &[f64], a: f64, b: f64) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    samples.iter().filter(|&&x| a <= x && x < b).count() as f64 / samples.len() as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub masses: Vec<f64>,
}

impl Histogram {
    pub fn bins(&self) -> usize {
        self.masses.len()
    }

    pub fn bin_edges(&self, i: usize) -> (f64, f64) {
        let m = self.bins() as f64;
        (i as f64 / m, (i + 1) as f64 / m)
    }

    /// Density value (mass divided by bin width) on bin `i`.
    pub fn density(&self, i: usize) -> f64 {
        self.masses[i] * self.bins() as f64
    }

    pub fn total_mass(&self) -> f64 {
        self.masses.iter().sum()
    }

    /// `∫ |hist - h| dx`, with 64-point midpoint quadrature inside each bin.
    pub fn l1_distance(&self, h: &GridFunction) -> f64 {
        const SUB: usize = 64;
        let m = self.bins();
        let width = 1.0 / (m * SUB) as f64;
        (0..m)
            .map(|i| {
                let c = self.density(i);
                (0..SUB)
                    .map(|j| {
                        let x = (i * SUB + j) as f64 * width + 0.5 * width;
                        (c - h.eval(x)).abs() * width
                    })
                    .sum::<f64>()
            })
            .sum()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("bin_left,bin_right,mass\n");
        for (i, mass) in self.masses.iter().enumerate() {
            let (l, r) = self.bin_edges(i);
            writeln!(out, "{l:.16e},{r:.16e},{mass:.16e}").expect("write to string");
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Histogram> {
        let mut lines = text.lines();
        if lines.next().map(str::trim) != Some("bin_left,bin_right,mass") {
            return Err(Error::Parse("missing header bin_left,bin_right,mass".into()));
        }
        let masses = lines
            .filter(|l| !l.trim().is_empty())
            .map(|l| {
                l.split(',')
                    .nth(2)
                    .and_then(|m| m.trim().parse::<f64>().ok())
                    .ok_or_else(|| Error::Parse(format!("bad histogram row {l:?}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        Ok(Histogram { masses })
    }
}

/// Normalized histogram of samples in `[0, 1]` over `bins` equal bins.
pub fn empirical_density(samples: &[f64], bins: usize) -> Result<Histogram> {
    if bins < 16 {
        return Err(Error::Config(format!("bins = {bins} must be at least 16")));
    }
    if samples.is_empty() {
        return Err(Error::Config("no samples".into()));
    }
    let mut counts = vec![0u64; bins];
    for &x in samples {
        let i = ((x * bins as f64) as usize).min(bins - 1);
        counts[i] += 1;
    }
    let total = samples.len() as f64;
    Ok(Histogram {
        masses: counts.into_iter().map(|c| c as f64 / total).collect(),
    })
}

/// Mean and standard error of per-trial values; the error is `None` for a
/// single trial.
fn mean_and_stderr(values: &[f64]) -> (f64, Option<f64>) {
    let t = values.len() as f64;
    let mean = values.iter().sum::<f64>() / t;
    if values.len() < 2 {
        return (mean, None);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (t - 1.0);
    (mean, Some((var / t).sqrt()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DigitMeanStats {
    pub p: f64,
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    /// Mean over trials of `(1/n) Σ log d_i`.
    pub log_mean: f64,
    pub log_mean_stderr: Option<f64>,
    /// `exp(log_mean)`
    pub geometric_mean: f64,
    pub checkpoints: Vec<usize>,
    /// `(d_1 + … + d_m)/m` at each checkpoint, averaged over trials.
    pub arithmetic_means: Vec<f64>,
    /// Fraction of trials whose arithmetic mean increases strictly across all
    /// checkpoints.
    pub strictly_increasing_fraction: f64,
    /// Fraction of trials whose arithmetic mean increases between the last
    /// two checkpoints.
    pub last_step_increasing_fraction: f64,
    pub guard_events: usize,
}

struct DigitTrial {
    log_mean: f64,
    arithmetic: Vec<f64>,
    guard_events: usize,
}

fn digit_trial(p: f64, n: usize, checkpoints: &[usize], burn_in: usize, seed: u64) -> DigitTrial {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x0: f64 = rng.gen();
    let mut orbit = Orbit::new(p, x0, seed.wrapping_add(0x9e37_79b9_7f4a_7c15));
    for _ in 0..burn_in {
        orbit.advance();
    }
    let mut bit = orbit.bits.next();
    let mut log_sum = 0.0;
    let mut sum = 0.0f64;
    let mut arithmetic = Vec::with_capacity(checkpoints.len());
    let mut next_cp = 0;
    for i in 1..=n {
        let next_bit = orbit.bits.next();
        let v = if bit == 0 { orbit.x } else { 1.0 - orbit.x };
        // The guard keeps v away from 0 except at an exact fixed point.
        let k = if v > 0.0 { (1.0 / v).floor() } else { f64::from(u32::MAX) };
        let d = k + f64::from(next_bit);
        log_sum += d.ln();
        sum += d;
        orbit.advance_with(bit);
        bit = next_bit;
        if next_cp < checkpoints.len() && i == checkpoints[next_cp] {
            arithmetic.push(sum / i as f64);
            next_cp += 1;
        }
    }
    DigitTrial {
        log_mean: log_sum / n as f64,
        arithmetic,
        guard_events: orbit.guard_events,
    }
}

/// Birkhoff averages of `log b` and `b` along independent `R`-orbits, where
/// `b(ω, x) = k(ω₁ + (-1)^{ω₁} x) + ω₂` recovers the digits of `K`.
/// Trial `t` uses seed `seed ^ t`.
pub fn digit_mean_stats(p: f64, n: usize, trials: usize, seed: u64) -> Result<DigitMeanStats> {
    check_p(p)?;
    if n < 1000 {
        return Err(Error::Config(format!("n = {n} must be at least 1000")));
    }
    if trials == 0 {
        return Err(Error::Config("trials must be positive".into()));
    }
    let checkpoints: Vec<usize> = (1..=10).map(|j| j * n / 10).collect();
    let results: Vec<DigitTrial> = (0..trials)
        .into_par_iter()
        .map(|t| digit_trial(p, n, &checkpoints, DEFAULT_BURN_IN, seed ^ t as u64))
        .collect();
    let logs: Vec<f64> = results.iter().map(|r| r.log_mean).collect();
    let (log_mean, log_mean_stderr) = mean_and_stderr(&logs);
    let arithmetic_means = (0..checkpoints.len())
        .map(|j| results.iter().map(|r| r.arithmetic[j]).sum::<f64>() / trials as f64)
        .collect();
    let frac = |pred: &dyn Fn(&[f64]) -> bool| {
        results.iter().filter(|r| pred(&r.arithmetic)).count() as f64 / trials as f64
    };
    let strictly_increasing_fraction = frac(&|a| a.windows(2).all(|w| w[1] > w[0]));
    let last_step_increasing_fraction = frac(&|a| a[a.len() - 1] > a[a.len() - 2]);
    Ok(DigitMeanStats {
        p,
        n,
        trials,
        seed,
        log_mean,
        log_mean_stderr,
        geometric_mean: log_mean.exp(),
        checkpoints,
        arithmetic_means,
        strictly_increasing_fraction,
        last_step_increasing_fraction,
        guard_events: results.iter().map(|r| r.guard_events).sum(),
    })
}

/// `c(n) = |E[f · g∘π∘Rⁿ] - E[f] E[g]|` for `n = 0..=n_max`, estimated from
/// one long orbit after the default burn-in.
pub fn correlation_sequence(
    f: impl Fn(f64) -> f64,
    g: impl Fn(f64) -> f64,
    p: f64,
    n_max: usize,
    samples: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    if samples == 0 {
        return Err(Error::Config("samples must be positive".into()));
    }
    let orbit = simulate_orbit(p, 0.5, samples + n_max, DEFAULT_BURN_IN, seed)?;
    let fx: Vec<f64> = orbit.samples[..samples].iter().map(|&x| f(x)).collect();
    let gx: Vec<f64> = orbit.samples.iter().map(|&x| g(x)).collect();
    let m = samples as f64;
    let mean_f = fx.iter().sum::<f64>() / m;
    Ok((0..=n_max)
        .map(|lag| {
            let window = &gx[lag..lag + samples];
            let mean_g = window.iter().sum::<f64>() / m;
            let cross = fx.iter().zip(window).map(|(a, b)| a * b).sum::<f64>() / m;
            (cross - mean_f * mean_g).abs()
        })
        .collect())
}

pub fn correlation_csv(c: &[f64]) -> String {
    let mut out = String::from("n,c\n");
    for (n, v) in c.iter().enumerate() {
        writeln!(out, "{n},{v:.16e}").expect("write to string");
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CltReport {
    pub p: f64,
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    /// Sample variance of `S_n / √n`.
    pub sigma2_hat: f64,
    /// Kolmogorov–Smirnov distance of the standardized values to `N(0, 1)`;
    /// absent when the variance is degenerate.
    pub ks: Option<f64>,
    /// `ε` of the tail probe, `2 σ̂ / √n`.
    pub ldp_epsilon: f64,
    /// Empirical `P(S_n > n ε)`.
    pub ldp_tail_probability: f64,
    /// `-(1/n) log P(S_n > n ε)`, absent when no trial exceeded the level.
    pub ldp_rate: Option<f64>,
    pub degenerate: bool,
}

/// `sup_x |F_emp(x) - Φ(x)|` after standardizing with the sample mean and
/// standard deviation.
pub fn ks_normal(values: &[f64]) -> Option<f64> {
    let t = values.len() as f64;
    let mean = values.iter().sum::<f64>() / t;
    let sd = (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (t - 1.0)).sqrt();
    if !(sd > 0.0) {
        return None;
    }
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    let mut z: Vec<f64> = values.iter().map(|v| (v - mean) / sd).collect();
    z.sort_by(f64::total_cmp);
    Some(
        z.iter()
            .enumerate()
            .map(|(i, &zi)| {
                let cdf = normal.cdf(zi);
                ((i + 1) as f64 / t - cdf).max(cdf - i as f64 / t)
            })
            .fold(0.0, f64::max),
    )
}

/// `trials` independent values of `S_n/√n` with `S_n = Σ_{i<n} (f(xᵢ) - mean)`,
/// each from its own orbit (seed `seed ^ t`) after the default burn-in.
pub fn clt_experiment(
    observable: impl Fn(f64) -> f64 + Sync,
    mean: f64,
    p: f64,
    n: usize,
    trials: usize,
    seed: u64,
) -> Result<CltReport> {
    check_p(p)?;
    if n == 0 || trials < 2 {
        return Err(Error::Config("clt needs n >= 1 and at least 2 trials".into()));
    }
    let sums: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let trial_seed = seed ^ t as u64;
            let x0: f64 = ChaCha8Rng::seed_from_u64(trial_seed).gen();
            let mut orbit = Orbit::new(p, x0, trial_seed.wrapping_add(0x9e37_79b9_7f4a_7c15));
            for _ in 0..DEFAULT_BURN_IN {
                orbit.advance();
            }
            let mut s = 0.0;
            for _ in 0..n {
                s += observable(orbit.x) - mean;
                orbit.advance();
            }
            s
        })
        .collect();
    let root_n = (n as f64).sqrt();
    let z: Vec<f64> = sums.iter().map(|s| s / root_n).collect();
    let t = trials as f64;
    let z_mean = z.iter().sum::<f64>() / t;
    let sigma2_hat = z.iter().map(|v| (v - z_mean).powi(2)).sum::<f64>() / (t - 1.0);
    let degenerate = sigma2_hat < 1e-8;
    let ks = if degenerate { None } else { ks_normal(&z) };
    let ldp_epsilon = 2.0 * sigma2_hat.sqrt() / root_n;
    let hits = sums.iter().filter(|&&s| s > n as f64 * ldp_epsilon).count();
    let ldp_tail_probability = hits as f64 / t;
    let ldp_rate = (hits > 0).then(|| -ldp_tail_probability.ln() / n as f64);
    Ok(CltReport {
        p,
        n,
        trials,
        seed,
        sigma2_hat,
        ks,
        ldp_epsilon,
        ldp_tail_probability,
        ldp_rate,
        degenerate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::real::Real;

    #[test]
    fn zero_is_fixed() {
        for p in [0.0, 0.3, 1.0] {
            let o = simulate_orbit(p, 0.0, 1000, 10, 4).unwrap();
            assert!(o.samples.iter().all(|&x| x == 0.0));
            assert_eq!(o.guard_events, 0);
        }
    }

    #[test]
    fn deterministic_and_in_range() {
        let a = simulate_orbit(0.5, 0.3, 10_000, 100, 11).unwrap();
        let b = simulate_orbit(0.5, 0.3, 10_000, 100, 11).unwrap();
        assert_eq!(a, b);
        assert!(a.samples.iter().all(|x| (0.0..=1.0).contains(x)));
        assert_ne!(a, simulate_orbit(0.5, 0.3, 10_000, 100, 12).unwrap());
        assert!(simulate_orbit(0.5, 1.5, 10, 0, 0).is_err());
    }

    #[test]
    fn gauss_fixed_point_in_high_precision() {
        let two = num_rational::BigRational::from_integer(2.into());
        let x = ExactPoint::Real(Real::sqrt_rational(&two, 256).add_int(-1));
        let orbit = simulate_orbit_exact(1.0, &x, 60, 0, 3).unwrap();
        let fixed = std::f64::consts::SQRT_2 - 1.0;
        assert!(orbit.iter().all(|y| (y.to_f64() - fixed).abs() < 1e-15));
        // The double precision orbit drifts away: the fixed point is repelling.
        let float = simulate_orbit(1.0, fixed, 60, 0, 3).unwrap();
        assert_eq!(float.samples[0], fixed);
        assert!((float.samples[5] - fixed).abs() < 1e-10);
    }

    #[test]
    fn histogram_mass_and_csv() {
        let o = simulate_orbit(0.7, 0.2, 50_000, 100, 5).unwrap();
        let h = empirical_density(&o.samples, 32).unwrap();
        assert!((h.total_mass() - 1.0).abs() < 1e-12);
        let back = Histogram::from_csv(&h.to_csv()).unwrap();
        assert_eq!(back, h);
        assert!(empirical_density(&o.samples, 8).is_err());
    }

    #[test]
    fn uniform_histogram_distance_to_uniform_density() {
        let samples: Vec<f64> = (0..6400).map(|i| (i as f64 + 0.5) / 6400.0).collect();
        let h = empirical_density(&samples, 64).unwrap();
        let one = GridFunction::constant(64, 1.0).unwrap();
        assert!(h.l1_distance(&one) < 1e-12);
    }

    #[test]
    fn gauss_digits_log_mean() {
        let s = digit_mean_stats(1.0, 20_000, 8, 1).unwrap();
        assert!((s.geometric_mean - 2.685452).abs() < 0.05, "{s:?}");
        assert_eq!(s.checkpoints.len(), 10);
        assert_eq!(s.checkpoints[9], 20_000);
        let json = serde_json::to_string(&s).unwrap();
        assert_eq!(serde_json::from_str::<DigitMeanStats>(&json).unwrap(), s);
    }

    #[test]
    fn constant_observable_has_no_correlation() {
        let c = correlation_sequence(|_| 1.0, |x| x, 0.5, 5, 10_000, 2).unwrap();
        assert!(c.iter().all(|&v| v < 1e-12));
        let f = |x: f64| if x > 0.5 { 1.0 } else { 0.0 };
        let c = correlation_sequence(f, f, 0.5, 3, 10_000, 2).unwrap();
        let o = simulate_orbit(0.5, 0.5, 10_003, DEFAULT_BURN_IN, 2).unwrap();
        let m = interval_mass(&o.samples[..10_000], 0.5000000000000001, 2.0);
        assert!((c[0] - m * (1.0 - m)).abs() < 1e-12);
        assert!(correlation_csv(&c).starts_with("n,c\n0,"));
    }

    #[test]
    fn zero_observable_is_degenerate() {
        let r = clt_experiment(|_| 0.0, 0.0, 0.5, 100, 20, 0).unwrap();
        assert_eq!(r.sigma2_hat, 0.0);
        assert!(r.degenerate);
        assert_eq!(r.ks, None);
    }

    #[test]
    fn ks_of_normal_quantiles_is_small() {
        let normal = Normal::new(0.0, 1.0).unwrap();
        let v: Vec<f64> = (1..1000).map(|i| normal.inverse_cdf(i as f64 / 1000.0)).collect();
        assert!(ks_normal(&v).unwrap() < 0.005);
        let skewed: Vec<f64> = (1..1000).map(|i| (i as f64 / 1000.0).powi(4)).collect();
        assert!(ks_normal(&skewed).unwrap() > 0.1);
    }
}
