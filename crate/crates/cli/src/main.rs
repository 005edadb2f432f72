use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use randcf::ergodic::{
    clt_experiment, correlation_csv, correlation_sequence, digit_mean_stats, empirical_density,
    simulate_orbit, DEFAULT_BURN_IN,
};
use randcf::expansion::{
    expand, steer_alpha, steer_digits, DigitSet, ExpansionTrace, SteerOptions, SteerOutcome,
};
use randcf::operator::{
    solve_density, OperatorConfig, TailMode, DEFAULT_K_MAX, DEFAULT_MAX_ITER, DEFAULT_TOL,
};
use randcf::point::{format_point_decimal, parse_point, ExactPoint};
use randcf::real::DEFAULT_PRECISION;
use randcf::verify::run_verification;
use randcf::{Error, GridFunction, OmegaWord};

const SIG: usize = 17;

#[derive(Parser)]
#[command(name = "randcf", version, about = "Random continued fraction expansions and their invariant densities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Tail {
    Drop,
    BoundCorrect,
}

#[derive(Subcommand)]
enum Command {
    /// Expand x with a given ω-word.
    Expand {
        /// `a/b`, an integer, or a decimal literal.
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        /// Bit string, bit string ending in `...` (periodic), or `bernoulli:p:seed`.
        #[arg(long)]
        omega: String,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        json: bool,
        /// Bits of precision for decimal inputs.
        #[arg(long, default_value_t = DEFAULT_PRECISION)]
        precision: u32,
    },
    /// Solve for the invariant density h_p and write it as CSV.
    Density {
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 4096)]
        grid: usize,
        #[arg(long, default_value_t = DEFAULT_K_MAX)]
        kmax: usize,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
        max_iter: usize,
        #[arg(long, value_enum, default_value = "bound-correct")]
        tail: Tail,
        #[arg(long)]
        out: PathBuf,
        /// Write diagnostics JSON here.
        #[arg(long)]
        diag: Option<PathBuf>,
    },
    /// Solve for h_p at several p and print one diagnostics line per p.
    Sweep {
        /// Comma separated values of p.
        #[arg(long, value_delimiter = ',')]
        p: Vec<f64>,
        #[arg(long, default_value_t = 1024)]
        grid: usize,
        #[arg(long, default_value_t = DEFAULT_K_MAX)]
        kmax: usize,
    },
    /// Sample an R-orbit and write its histogram.
    Orbit {
        #[arg(long)]
        p: f64,
        #[arg(long)]
        x0: f64,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = DEFAULT_BURN_IN)]
        burnin: usize,
        #[arg(long, default_value_t = 100)]
        bins: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Density CSV to compare against.
        #[arg(long = "ref")]
        reference: Option<PathBuf>,
    },
    /// Digit means, and optionally a CLT experiment and correlation decay.
    Stats {
        #[arg(long)]
        p: f64,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// CLT for the centered indicator of (1/2, 1].
        #[arg(long)]
        clt: bool,
        /// Digit means (the default when no experiment is selected).
        #[arg(long)]
        digits: bool,
        /// Write the correlation sequence c(0..=50) of the indicator of (1/2, 1] here.
        #[arg(long)]
        correlation: Option<PathBuf>,
    },
    /// Expand x using only digits from a set.
    Steer {
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        /// `odd`, `even` or `set:a,b,...`
        #[arg(long)]
        digits: String,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = SteerOptions::default().lookahead)]
        lookahead: usize,
        #[arg(long, default_value_t = DEFAULT_PRECISION)]
        precision: u32,
    },
    /// Follow the α-continued fraction map with K.
    Alpha {
        #[arg(long)]
        alpha: String,
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = DEFAULT_PRECISION)]
        precision: u32,
    },
    /// Run the invariant suite.
    Verify {
        #[arg(long, default_value_t = 100)]
        runs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

enum Failure {
    Usage(String),
    Runtime(String),
    Verification,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Domain { .. } | Error::Parse(_) | Error::Config(_) | Error::ZeroInput => {
                Failure::Usage(e.to_string())
            }
            other => Failure::Runtime(other.to_string()),
        }
    }
}

type CliResult = std::result::Result<(), Failure>;

fn write_file(path: &Path, contents: &str) -> CliResult {
    fs::write(path, contents).map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))
}

fn read_file(path: &Path) -> std::result::Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn sci(v: f64) -> String {
    format!("{v:.16e}")
}

fn print_trace(trace: &ExpansionTrace) {
    println!("start {}", trace.start);
    println!("omega0 {}", trace.omega0);
    println!("n omega sign digit convergent value");
    for n in 1..=trace.len() {
        let step = &trace.steps[n - 1];
        let (p, q) = trace.pq(n as isize);
        let value = ExactPoint::Rational(trace.convergent_state(n).value());
        println!(
            "{n} {} {:+} {} {p}/{q} {}",
            step.omega,
            step.digit.epsilon,
            step.digit.d,
            format_point_decimal(&value, SIG)
        );
    }
    let digits: Vec<String> = trace.digits().iter().map(u64::to_string).collect();
    println!("digits {}", digits.join(","));
    println!("terminated {}", trace.terminated);
}

fn run(cli: Cli) -> CliResult {
    match cli.command {
        Command::Expand { x, omega, n, json, precision } => {
            let x = parse_point(&x, precision)?;
            let mut word: OmegaWord = omega.parse()?;
            let trace = expand(&x, &mut word, n)?;
            if json {
                println!("{}", trace.record().to_json());
            } else {
                print_trace(&trace);
            }
        }
        Command::Density { p, grid, kmax, tol, max_iter, tail, out, diag } => {
            let cfg = OperatorConfig {
                p,
                grid,
                k_max: kmax,
                tail: match tail {
                    Tail::Drop => TailMode::Drop,
                    Tail::BoundCorrect => TailMode::BoundCorrect,
                },
                tol,
                max_iter,
            };
            let sol = solve_density(&cfg)?;
            write_file(&out, &sol.density.to_csv())?;
            if let Some(path) = diag {
                write_file(&path, &sol.diagnostics.to_json())?;
            }
            if !sol.residuals_contract() {
                eprintln!("warning: fixed-point residual did not contract monotonically");
            }
            println!(
                "p {} iterations {} residual_L1 {} h_min {} h_max {}",
                sci(p),
                sol.diagnostics.iters,
                sci(sol.diagnostics.residual_l1),
                sci(sol.diagnostics.h_min),
                sci(sol.diagnostics.h_max)
            );
        }
        Command::Sweep { p, grid, kmax } => {
            if p.is_empty() {
                return Err(Failure::Usage("sweep needs at least one p".into()));
            }
            for p in p {
                let cfg = OperatorConfig { grid, k_max: kmax, ..OperatorConfig::new(p) };
                let sol = solve_density(&cfg)?;
                println!("{}", serde_json::to_string(&sol.diagnostics).expect("serialize"));
            }
        }
        Command::Orbit { p, x0, n, burnin, bins, seed, out, reference } => {
            let orbit = simulate_orbit(p, x0, n, burnin, seed)?;
            let hist = empirical_density(&orbit.samples, bins)?;
            write_file(&out, &hist.to_csv())?;
            let l1 = match reference {
                Some(path) => Some(hist.l1_distance(&GridFunction::from_csv(&read_file(&path)?)?)),
                None => None,
            };
            let summary = json!({
                "p": p,
                "n": n,
                "burn_in": burnin,
                "seed": seed,
                "bins": bins,
                "guard_events": orbit.guard_events,
                "l1_distance": l1,
            });
            println!("{}", serde_json::to_string_pretty(&summary).expect("serialize"));
        }
        Command::Stats { p, n, trials, seed, clt, digits, correlation } => {
            let mut report = serde_json::Map::new();
            if digits || !clt {
                let s = digit_mean_stats(p, n, trials, seed)?;
                report.insert("digits".into(), serde_json::to_value(s).expect("serialize"));
            }
            let indicator = |x: f64| if x > 0.5 { 1.0 } else { 0.0 };
            if clt || correlation.is_some() {
                let h = solve_density(&OperatorConfig::new(p))?;
                let mean = 1.0 - h.density.integral_between(0.0, 0.5);
                report.insert("indicator_mean".into(), json!(mean));
                if clt {
                    let r = clt_experiment(indicator, mean, p, n, trials, seed)?;
                    if r.degenerate {
                        eprintln!("warning: degenerate variance {}", sci(r.sigma2_hat));
                    }
                    report.insert("clt".into(), serde_json::to_value(r).expect("serialize"));
                }
                if let Some(path) = correlation {
                    let f = |x: f64| indicator(x) - mean;
                    let c = correlation_sequence(f, f, p, 50, n, seed)?;
                    write_file(&path, &correlation_csv(&c))?;
                }
            }
            println!("{}", serde_json::to_string_pretty(&report).expect("serialize"));
        }
        Command::Steer { x, digits, n, lookahead, precision } => {
            let x = parse_point(&x, precision)?;
            let set: DigitSet = digits.parse()?;
            match steer_digits(&x, &set, n, SteerOptions { lookahead })? {
                SteerOutcome::Complete(trace) => {
                    println!("status complete");
                    print_trace(&trace);
                }
                SteerOutcome::Failed(f) => {
                    println!("status failed");
                    println!("failed_step {}", f.step);
                    println!("failed_point {}", format_point_decimal(&f.point, SIG));
                    print_trace(&f.partial);
                }
            }
        }
        Command::Alpha { alpha, x, n, precision } => {
            let alpha = parse_point(&alpha, precision)?;
            let x = parse_point(&x, precision)?;
            let s = steer_alpha(&x, &alpha, n)?;
            let bits: String = s.omega.iter().map(|b| char::from(b'0' + b)).collect();
            println!("omega {bits}");
            println!("m k_orbit t_alpha");
            for (m, (a, b)) in s.orbit.iter().zip(&s.direct).enumerate() {
                println!("{m} {} {}", format_point_decimal(a, SIG), format_point_decimal(b, SIG));
            }
            println!("max_discrepancy {}", sci(s.max_discrepancy));
        }
        Command::Verify { runs, seed } => {
            let report = run_verification(runs, seed)?;
            print!("{}", report.render());
            if !report.passed() {
                for c in report.checks.iter().filter(|c| !c.passed) {
                    eprintln!("violated invariant: {}", c.name);
                }
                return Err(Failure::Verification);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification) => ExitCode::from(1),
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(2)
        }
    }
}
