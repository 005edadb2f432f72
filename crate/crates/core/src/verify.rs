//! The invariant suite behind `randcf verify`.

use std::fmt::Write as _;

use num_bigint::BigInt;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::digit::sign_of_bit;
use crate::error::Result;
use crate::expansion::{
    approximation_error, b_digit_cross_check, classify_ending, expand, first_unit_fraction_index,
    lemma_audit, ExpansionTrace,
};
use crate::grid::GridFunction;
use crate::omega::OmegaWord;
use crate::operator::{gauss_density, inoue_check, invariance_residual, solve_density, OperatorConfig};
use crate::point::ExactPoint;
use crate::real::DEFAULT_PRECISION;
use crate::sample::{random_block, random_quadratic_surd, random_rational, random_real};

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub runs: usize,
    pub seed: u64,
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn render(&self) -> String {
        let mut out = format!("verify runs={} seed={}\n", self.runs, self.seed);
        for c in &self.checks {
            let status = if c.passed { "PASS" } else { "FAIL" };
            writeln!(out, "{status} {}: {}", c.name, c.detail).expect("write to string");
        }
        let failed = self.checks.iter().filter(|c| !c.passed).count();
        writeln!(out, "{} checks, {failed} failed", self.checks.len()).expect("write to string");
        out
    }
}

/// Outcome of the exact checks on one rational expansion.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RationalCheck {
    pub determinant_failures: usize,
    pub reconstruction_failures: usize,
    pub termination_failure: Option<String>,
}

/// Expands a rational start with the periodic word `block` far enough to see
/// the ending, i.e. `q + |block| + 2` steps.
pub fn rational_trace(x: &ExactPoint, block: &[u8]) -> Result<ExpansionTrace> {
    let q = x.to_rational().denom().clone();
    let n_max = usize::try_from(q).unwrap_or(usize::MAX) + block.len() + 2;
    expand(x, &mut OmegaWord::periodic(block.to_vec())?, n_max)
}

/// Determinant identity at every `n`, exact reconstruction at every `n`,
/// arrival at a unit fraction within `q` steps and an admissible ending. A
/// block containing a 0 must terminate.
pub fn check_rational_trace(trace: &ExpansionTrace, block: &[u8]) -> RationalCheck {
    let mut out = RationalCheck::default();
    let x = trace.start.to_rational();
    let (a, q) = (x.numer(), x.denom());
    let mut parity: i8 = 1;
    for n in 1..=trace.len() {
        let (p_cur, q_cur) = trace.pq(n as isize);
        let (p_prev, q_prev) = trace.pq(n as isize - 1);
        parity *= sign_of_bit(trace.omega(n - 1));
        let alt = if n % 2 == 0 { 1 } else { -1 };
        if &p_prev * &q_cur - &p_cur * &q_prev != BigInt::from(alt * parity) {
            out.determinant_failures += 1;
        }
        // a/q = (p_n + p_{n-1} t)/(q_n + q_{n-1} t) with t = u/v, cross-multiplied.
        let t = trace.point(n).to_rational();
        let (u, v) = (t.numer(), t.denom());
        let num = &p_cur * v + &p_prev * u;
        let den = &q_cur * v + &q_prev * u;
        if den.is_zero() || a * &den != q * &num {
            out.reconstruction_failures += 1;
        }
    }
    if x.is_zero() {
        return out;
    }
    out.termination_failure = match first_unit_fraction_index(trace) {
        None => Some(format!("{x}: no unit fraction reached")),
        Some(m) if &BigInt::from(m) > q => Some(format!("{x}: unit fraction only at step {m}")),
        Some(_) if classify_ending(trace).is_none() => Some(format!("{x}: inadmissible ending")),
        Some(_) if block.contains(&0) && !trace.terminated => {
            Some(format!("{x}: no termination after {} steps", trace.len()))
        }
        Some(_) => None,
    };
    out
}

/// Outcome of the convergence checks on one high precision expansion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RealCheck {
    pub bound_failures: usize,
    pub digits_stable: bool,
    /// `|x - p_n/q_n|` at the last step.
    pub final_error: f64,
}

pub fn check_real_trace(trace: &ExpansionTrace) -> RealCheck {
    let mut bound_failures = 0;
    let mut final_error = 0.0;
    for n in 1..=trace.len() {
        let e = approximation_error(&trace.convergent_state(n), &trace.start);
        if !e.within_bound() {
            bound_failures += 1;
        }
        final_error = e.actual_f64();
    }
    RealCheck {
        bound_failures,
        digits_stable: digits_stable(trace).unwrap_or(false),
        final_error,
    }
}

/// Working precision for expanding `DEFAULT_PRECISION`-bit starts. The
/// iterates lose about `2 log₂ q_n` bits, so 256 bits alone are exhausted
/// within 50 steps whenever large digits occur.
pub const WORKING_PRECISION: u32 = 4 * DEFAULT_PRECISION;

/// A random `DEFAULT_PRECISION`-bit start (alternately a rounded quadratic
/// surd and a random real) expanded at `WORKING_PRECISION` with a fair
/// Bernoulli word.
pub fn random_real_trace<R: Rng + ?Sized>(rng: &mut R, i: usize, n: usize) -> Result<ExpansionTrace> {
    let x = if i.is_multiple_of(2) {
        random_quadratic_surd(rng, DEFAULT_PRECISION)
    } else {
        random_real(rng, DEFAULT_PRECISION)
    };
    let x = widen(&x, WORKING_PRECISION);
    let mut w = OmegaWord::bernoulli(0.5, rng.gen())?;
    expand(&x, &mut w, n)
}

fn widen(x: &ExactPoint, precision: u32) -> ExactPoint {
    match x {
        ExactPoint::Real(r) => ExactPoint::Real(r.with_precision(precision)),
        ExactPoint::Rational(_) => x.clone(),
    }
}

/// Re-expands a real trace at twice its precision with the same bits and
/// reports whether the digits agree, i.e. whether rounding never changed a
/// digit.
pub fn digits_stable(trace: &ExpansionTrace) -> Result<bool> {
    let Some(precision) = trace.start.precision() else {
        return Ok(true);
    };
    let wide = widen(&trace.start, 2 * precision);
    let again = expand(&wide, &mut OmegaWord::explicit(trace.omega_bits())?, trace.len())?;
    Ok(again.digits() == trace.digits())
}

/// `(1, 1^{n-1} 0)` gives `d = (2, …, 2, 1)`; returns the `n` where `q_n = 1`
/// and `q_{n-1} = n` fail or the audit objects.
pub fn twos_chain_failures(n_max: usize) -> Result<Vec<usize>> {
    let mut bad = Vec::new();
    for n in 2..=n_max {
        let mut bits = vec![1u8; n - 1];
        bits.push(0);
        let t = expand(&ExactPoint::rational(1, 1), &mut OmegaWord::explicit(bits)?, n)?;
        let ok = t.q(n as isize) == BigInt::from(1)
            && t.q(n as isize - 1) == BigInt::from(n)
            && lemma_audit(&t).is_empty();
        if !ok {
            bad.push(n);
        }
    }
    Ok(bad)
}

fn check(name: &'static str, passed: bool, detail: String) -> CheckResult {
    CheckResult { name, passed, detail }
}

/// Runs every check with `runs` random instances each.
pub fn run_verification(runs: usize, seed: u64) -> Result<VerifyReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = Vec::new();

    let mut rational = Vec::with_capacity(runs);
    for _ in 0..runs {
        let x = random_rational(&mut rng, 10_000);
        let block = random_block(&mut rng, 60);
        rational.push((rational_trace(&x, &block)?, block));
    }
    let results: Vec<RationalCheck> = rational.iter().map(|(t, b)| check_rational_trace(t, b)).collect();
    let det: usize = results.iter().map(|r| r.determinant_failures).sum();
    checks.push(check("determinant-identity", det == 0, format!("{det} failures over {runs} rational traces")));
    let rec: usize = results.iter().map(|r| r.reconstruction_failures).sum();
    checks.push(check("reconstruction", rec == 0, format!("{rec} inexact reconstructions")));
    let term: Vec<&String> = results.iter().filter_map(|r| r.termination_failure.as_ref()).collect();
    checks.push(check(
        "rational-termination",
        term.is_empty(),
        term.first().map_or_else(|| "all traces end admissibly".to_string(), |s| s.to_string()),
    ));

    let mut real = Vec::with_capacity(runs);
    for i in 0..runs {
        real.push(random_real_trace(&mut rng, i, 50)?);
    }
    let rc: Vec<RealCheck> = real.iter().map(check_real_trace).collect();
    let bound: usize = rc.iter().map(|r| r.bound_failures).sum();
    let worst = rc.iter().map(|r| r.final_error).fold(0.0, f64::max);
    let unstable = rc.iter().filter(|r| !r.digits_stable).count();
    checks.push(check(
        "convergent-bound",
        bound == 0 && worst < 1e-6 && unstable == 0,
        format!("{bound} bound violations, {unstable} precision-sensitive traces, worst error at n=50 {worst:.6e}"),
    ));

    let mut audit = 0;
    let mut first_violation = None;
    for t in rational.iter().map(|(t, _)| t).chain(&real) {
        let v = lemma_audit(t);
        audit += v.len();
        if first_violation.is_none() {
            first_violation = v.into_iter().next();
        }
    }
    let chain = twos_chain_failures(100)?;
    checks.push(check(
        "denominator-lemmas",
        audit == 0 && chain.is_empty(),
        match &first_violation {
            Some(v) => format!("{audit} violations, first {} at n={}: {}", v.check, v.n, v.detail),
            None => format!("0 violations, twos chain exact up to n=100 ({} mismatches)", chain.len()),
        },
    ));

    let mut mismatches = 0;
    for t in rational.iter().map(|(t, _)| t).chain(&real) {
        mismatches += b_digit_cross_check(t)?.len();
    }
    checks.push(check("b-digit", mismatches == 0, format!("{mismatches} digit mismatches")));

    let gauss = solve_density(&OperatorConfig::new(1.0))?;
    let exact = GridFunction::from_fn(gauss.density.resolution(), gauss_density)?;
    let (sup, l1) = (gauss.density.sup_distance(&exact), gauss.density.l1_distance(&exact));
    checks.push(check(
        "gauss-density",
        sup < 5e-3 && l1 < 1e-3,
        format!("sup {sup:.6e}, L1 {l1:.6e} after {} iterations", gauss.diagnostics.iters),
    ));

    let half = solve_density(&OperatorConfig::new(0.5))?;
    let mut worst = 0.0f64;
    for _ in 0..runs {
        let (u, v): (f64, f64) = (rng.gen(), rng.gen());
        let (a, b) = if u < v { (u, v) } else { (v, u) };
        if a == b {
            continue;
        }
        worst = worst.max(invariance_residual(&half.density, 0.5, a, b, 1000)?.residual);
    }
    checks.push(check(
        "invariance",
        worst < 1e-3 && half.diagnostics.h_min > 0.0,
        format!("p=0.5 max residual {worst:.6e} over {runs} intervals, min h {:.6e}", half.diagnostics.h_min),
    ));

    let inoue = inoue_check(0.5)?;
    checks.push(check(
        "inoue-conditions",
        inoue.i1 && inoue.i2 && inoue.i3,
        format!("p=0.5 sup(g0+g1) {:.6e}", inoue.sup),
    ));

    Ok(VerifyReport { runs, seed, checks })
}
