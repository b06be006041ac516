//! `staircase-lab`: exact computations on staircase tableaux from the shell.

mod commands;
mod selftest;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use staircase_lab::rational::parse_rational;
use staircase_lab::{Rational, Statistic, Weights};

#[derive(Parser)]
#[command(name = "staircase-lab", version, about = "Exact computations on staircase tableaux")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Reciprocal weights `a = 1/α`, `b = 1/β` as integers or `p/q`.
#[derive(Args, Clone)]
struct WeightArgs {
    #[arg(long, default_value = "1", value_parser = rational)]
    a: Rational,
    #[arg(long, default_value = "1", value_parser = rational)]
    b: Rational,
}

impl WeightArgs {
    fn weights(&self) -> staircase_lab::Result<Weights> {
        Weights::new(self.a.clone(), self.b.clone())
    }
}

#[derive(Subcommand)]
#[allow(clippy::large_enum_variant)]
enum Command {
    /// Partition function: closed form and, for small n, brute force.
    Count {
        #[arg(long)]
        n: usize,
        /// Four-symbol tableaux with weights --alpha --beta --gamma --delta.
        #[arg(long)]
        four: bool,
        #[command(flatten)]
        w: WeightArgs,
        #[arg(long, default_value = "1", value_parser = rational)]
        alpha: Rational,
        #[arg(long, default_value = "1", value_parser = rational)]
        beta: Rational,
        #[arg(long, default_value = "1", value_parser = rational)]
        gamma: Rational,
        #[arg(long, default_value = "1", value_parser = rational)]
        delta: Rational,
        #[arg(long)]
        json: bool,
    },
    /// Law of one box: closed form next to the exact count.
    Prob {
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        w: WeightArgs,
        /// Box as `i,j` (row from the top, column from the left).
        #[arg(long = "box")]
        at: String,
        #[arg(long)]
        json: bool,
    },
    /// Joint probability of a set of boxes on the second or third diagonal.
    Joint {
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        w: WeightArgs,
        #[arg(long, value_parser = clap::value_parser!(u8).range(2..=3))]
        diag: u8,
        /// `alpha` or `nonempty`.
        #[arg(long)]
        kind: String,
        /// Increasing columns, e.g. `1,3,5`.
        #[arg(long)]
        cols: String,
        #[arg(long)]
        json: bool,
    },
    /// Factorial moments E(Y)_r, r = 0..=R.
    Moments {
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        w: WeightArgs,
        #[arg(long, value_parser = statistic)]
        stat: Statistic,
        #[arg(long, default_value_t = 4)]
        r: usize,
        /// Third diagonal only: `exact` or `main` (leading-term moments).
        #[arg(long, default_value = "exact")]
        mode: String,
        #[arg(long)]
        json: bool,
    },
    /// Exact law of a statistic.
    Pmf {
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        w: WeightArgs,
        #[arg(long, value_parser = statistic)]
        stat: Statistic,
        #[arg(long)]
        json: bool,
    },
    /// Moments and certified TV distance to the Poisson limit over several n.
    Converge {
        #[arg(long, value_parser = statistic)]
        stat: Statistic,
        /// Comma-separated sizes, e.g. `8,16,32`.
        #[arg(long)]
        ns: String,
        #[command(flatten)]
        w: WeightArgs,
        #[arg(long)]
        json: bool,
    },
    /// Exact random tableaux: a JSON header line, then one record each.
    Sample {
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        w: WeightArgs,
        #[arg(long, default_value_t = 1)]
        count: u64,
        /// Required: sampling is never seeded implicitly.
        #[arg(long)]
        seed: u64,
        /// `enum_alias` or `chain_rule`.
        #[arg(long, default_value = "chain_rule")]
        method: String,
    },
    /// Tableaux steady state against the generator solve.
    AsepVerify {
        #[arg(long)]
        n: usize,
        /// `α,β,γ,δ,u,q`, each an integer or `p/q`.
        #[arg(long)]
        rates: String,
        /// `paper_alpha_gamma`, `alpha_delta` or `both`.
        #[arg(long, default_value = "both")]
        convention: String,
        #[arg(long)]
        json: bool,
    },
    /// Oracle-equivalence suites at small sizes.
    Selftest,
}

fn rational(s: &str) -> Result<Rational, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

fn statistic(s: &str) -> Result<Statistic, String> {
    s.parse().map_err(|e: staircase_lab::Error| {
        let names: Vec<&str> = Statistic::ALL.iter().map(|s| s.name()).collect();
        format!("{e}; expected one of {}", names.join(", "))
    })
}

/// Why a command did not succeed.
pub enum Failure {
    /// Bad input: exit code 2.
    Invalid(String),
    /// A self-test suite disagreed with its oracle: exit code 3.
    Mismatch(String),
}

impl From<staircase_lab::Error> for Failure {
    fn from(e: staircase_lab::Error) -> Self {
        Failure::Invalid(e.to_string())
    }
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(v) = std::env::var("STAIRCASE_LAB_THREADS") else {
        return Ok(());
    };
    let threads: usize = v
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| Failure::Invalid(format!("STAIRCASE_LAB_THREADS must be a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Failure::Invalid(e.to_string()))
}

fn run(cli: Cli) -> Result<String, Failure> {
    configure_threads()?;
    use commands as c;
    match cli.command {
        Command::Count {
            n,
            four,
            w,
            alpha,
            beta,
            gamma,
            delta,
            json,
        } => {
            if four {
                c::count_four(n, [alpha, beta, gamma, delta], json)
            } else {
                c::count(n, &w.weights()?, json)
            }
        }
        Command::Prob { n, w, at, json } => c::prob(n, &w.weights()?, &at, json),
        Command::Joint {
            n,
            w,
            diag,
            kind,
            cols,
            json,
        } => c::joint(n, &w.weights()?, diag, &kind, &cols, json),
        Command::Moments {
            n,
            w,
            stat,
            r,
            mode,
            json,
        } => c::moments(n, &w.weights()?, stat, r, &mode, json),
        Command::Pmf { n, w, stat, json } => c::pmf(n, &w.weights()?, stat, json),
        Command::Converge { stat, ns, w, json } => c::converge(stat, &ns, &w.weights()?, json),
        Command::Sample {
            n,
            w,
            count,
            seed,
            method,
        } => c::sample(n, &w.weights()?, count, seed, &method),
        Command::AsepVerify {
            n,
            rates,
            convention,
            json,
        } => c::asep_verify(n, &rates, &convention, json),
        Command::Selftest => selftest::run(),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(Failure::Invalid(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Mismatch(report)) => {
            print!("{report}");
            eprintln!("self-test failed");
            ExitCode::from(3)
        }
    }
}
