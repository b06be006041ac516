//! Factorial moments of diagonal statistics, moment inversion and distances
//! to the Poisson limits.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::dpcount;
use crate::error::{Error, Result};
use crate::formulas::falling;
use crate::interval::{poisson_masses, Interval, DEFAULT_BITS};
use crate::pmf::Pmf;
use crate::rational::{binomial, factorial, format_rational, int, Rational};
use crate::statistic::Statistic;
use crate::weights::Weights;

/// Which boxes of a diagonal are counted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum MomentKind {
    Alpha,
    Beta,
    NonEmpty,
}

/// How third-diagonal moments are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum ThirdDiagMode {
    /// Exact, from the counting engine.
    ExactDp,
    /// The sum of the leading terms over well-separated tuples.
    MainTerm,
}

/// `μ_r = E(Y)_r = E[Y(Y-1)…(Y-r+1)]` for `r = 0..=R`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FactorialMoments {
    #[serde(serialize_with = "crate::rational::serialize_all")]
    mu: Vec<Rational>,
}

impl FactorialMoments {
    pub fn new(mu: Vec<Rational>) -> Result<Self> {
        if mu.first() != Some(&Rational::one()) {
            return Err(Error::InvalidPmf("the zeroth factorial moment must be 1".into()));
        }
        Ok(FactorialMoments { mu })
    }

    pub fn get(&self, r: usize) -> Option<&Rational> {
        self.mu.get(r)
    }

    pub fn as_slice(&self) -> &[Rational] {
        &self.mu
    }

    pub fn max_r(&self) -> usize {
        self.mu.len() - 1
    }
}

/// `Σ_{j_1<…<j_r ≤ m, gaps ≥ gap} Π_l f(l, j_l)` for every `r ≤ max_r`,
/// by a recurrence over the position of the last index.
fn gap_tuple_sums(max_r: usize, m: usize, gap: usize, f: impl Fn(usize, usize) -> Rational) -> Vec<Rational> {
    // prev[j]: tuples of length l-1 with last entry ≤ j
    let mut prev = vec![Rational::one(); m + 1];
    let mut out = vec![Rational::one()];
    for l in 1..=max_r {
        let mut cur = vec![Rational::zero(); m + 1];
        for j in 1..=m {
            let before = match l {
                1 => Rational::one(),
                _ if j > gap => prev[j - gap].clone(),
                _ => Rational::zero(),
            };
            cur[j] = &cur[j - 1] + f(l, j) * before;
        }
        out.push(cur[m].clone());
        prev = cur;
    }
    out
}

fn check_r(max_r: usize, allowed: usize) -> Result<()> {
    if max_r > allowed {
        Err(Error::MomentOutOfRange { r: max_r, max: allowed })
    } else {
        Ok(())
    }
}

fn fact(r: usize) -> Rational {
    Rational::from_integer(factorial(r))
}

/// Exact factorial moments of `A_n`, `B_n` or `X_n` on the second diagonal.
pub fn factorial_moments_second_diag(n: usize, w: &Weights, kind: MomentKind, max_r: usize) -> Result<FactorialMoments> {
    if n == 0 {
        return Err(Error::SizeOutOfRange { what: "moments", n, min: 1, max: usize::MAX });
    }
    check_r(max_r, (n - 1).div_ceil(2) + 1)?;
    let m = n - 1;
    let s = int(n as i64) + w.a() + w.b();
    let mu = match kind {
        MomentKind::Beta => return factorial_moments_second_diag(n, &w.swapped(), MomentKind::Alpha, max_r),
        MomentKind::NonEmpty => (0..=max_r)
            .map(|r| {
                let count = binomial(m as i64 - r as i64 + 1, r as i64);
                if count.is_zero() {
                    return Rational::zero();
                }
                let den: Rational = (1..=r as i64).map(|k| &s - int(r as i64) + int(k - 1)).product();
                fact(r) * Rational::from_integer(count) / den
            })
            .collect(),
        MomentKind::Alpha => {
            let b = w.b().clone();
            let nums = gap_tuple_sums(max_r, m, 2, |l, j| &b + int(j as i64 - 2 * l as i64 + 1));
            nums.into_iter()
                .enumerate()
                .map(|(r, num)| {
                    if num.is_zero() {
                        return Rational::zero();
                    }
                    let den: Rational = (1..=r as i64)
                        .map(|k| falling(&(&s - int(2 * r as i64 - 2 * k + 1)), 2))
                        .product();
                    fact(r) * num / den
                })
                .collect()
        }
    };
    FactorialMoments::new(mu)
}

fn third_stat(kind: MomentKind) -> Result<Statistic> {
    match kind {
        MomentKind::Alpha => Ok(Statistic::A3),
        MomentKind::NonEmpty => Ok(Statistic::X3),
        MomentKind::Beta => Err(Error::UnknownStatistic("beta count on the third diagonal".into())),
    }
}

/// Factorial moments of `A_n^{(3)}` or `X_n^{(3)}`.
pub fn factorial_moments_third_diag(
    n: usize,
    w: &Weights,
    kind: MomentKind,
    max_r: usize,
    mode: ThirdDiagMode,
) -> Result<FactorialMoments> {
    let stat = third_stat(kind)?;
    check_r(max_r, stat.max_value(n) + 1)?;
    match mode {
        ThirdDiagMode::ExactDp => {
            let bm = dpcount::binomial_moments(n, w, stat, max_r)?;
            FactorialMoments::new(bm.into_iter().enumerate().map(|(r, x)| x * fact(r)).collect())
        }
        ThirdDiagMode::MainTerm => {
            let m = n.saturating_sub(2);
            let s = int(n as i64) + w.a() + w.b();
            let b = w.b().clone();
            let nums = match kind {
                MomentKind::Alpha => gap_tuple_sums(max_r, m, 3, |l, j| &b + int(j as i64 - 2 * l as i64 + 1)),
                _ => gap_tuple_sums(max_r, m, 3, |_, _| Rational::one()),
            };
            let mu = nums
                .into_iter()
                .enumerate()
                .map(|(r, num)| {
                    if num.is_zero() {
                        return Rational::zero();
                    }
                    let den: Rational = match kind {
                        MomentKind::Alpha => (1..=r as i64)
                            .map(|k| falling(&(&s - int(2 * r as i64 - 2 * k + 1)), 2))
                            .product(),
                        _ => (1..=r as i64).map(|k| &s - int(r as i64) + int(k - 1)).product(),
                    };
                    fact(r) * num / den
                })
                .collect();
            FactorialMoments::new(mu)
        }
    }
}

/// Exact factorial moments of any supported statistic, `r = 0..=max_r`.
pub fn factorial_moments(n: usize, w: &Weights, stat: Statistic, max_r: usize) -> Result<FactorialMoments> {
    match stat {
        Statistic::A2 => factorial_moments_second_diag(n, w, MomentKind::Alpha, max_r),
        Statistic::B2 => factorial_moments_second_diag(n, w, MomentKind::Beta, max_r),
        Statistic::X2 => factorial_moments_second_diag(n, w, MomentKind::NonEmpty, max_r),
        Statistic::A3 => factorial_moments_third_diag(n, w, MomentKind::Alpha, max_r, ThirdDiagMode::ExactDp),
        Statistic::X3 => factorial_moments_third_diag(n, w, MomentKind::NonEmpty, max_r, ThirdDiagMode::ExactDp),
        Statistic::NAlpha | Statistic::NBeta => {
            check_r(max_r, n + 1)?;
            let bm = dpcount::binomial_moments(n, w, stat, max_r)?;
            FactorialMoments::new(bm.into_iter().enumerate().map(|(r, x)| x * fact(r)).collect())
        }
    }
}

/// `P(Y = k) = Σ_{r≥k} (-1)^{r-k} μ_r / (k! (r-k)!)`; the vector must end in a zero.
pub fn pmf_from_factorial_moments(m: &FactorialMoments) -> Result<Pmf> {
    let mu = m.as_slice();
    if mu.last().is_some_and(|x| !x.is_zero()) || mu.len() < 2 {
        return Err(Error::UnterminatedMoments);
    }
    let len = mu.len();
    let masses = (0..len)
        .map(|k| {
            let mut acc = Rational::zero();
            for (r, x) in mu.iter().enumerate().skip(k) {
                let term = x / (fact(k) * fact(r - k));
                if (r - k) % 2 == 0 {
                    acc += term;
                } else {
                    acc -= term;
                }
            }
            if acc.is_negative() {
                Err(Error::NegativeMass(k))
            } else {
                Ok(acc)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Pmf::new(masses)
}

/// Exact law of a second-diagonal statistic at any size, by inversion.
pub fn second_diag_law(n: usize, w: &Weights, kind: MomentKind) -> Result<Pmf> {
    let max_r = (n - 1).div_ceil(2) + 1;
    pmf_from_factorial_moments(&factorial_moments_second_diag(n, w, kind, max_r)?)
}

/// Exact law of any supported statistic; third-diagonal and symbol-count
/// laws come from the counting engine.
pub fn statistic_law(n: usize, w: &Weights, stat: Statistic) -> Result<Pmf> {
    match stat {
        Statistic::A2 => second_diag_law(n, w, MomentKind::Alpha),
        Statistic::B2 => second_diag_law(n, w, MomentKind::Beta),
        Statistic::X2 => second_diag_law(n, w, MomentKind::NonEmpty),
        _ => dpcount::statistic_pmf(n, w, stat),
    }
}

/// Certified enclosure of `TV(p, Pois(λ))`, tail beyond the support included.
pub fn tv_to_poisson(p: &Pmf, lambda: &Rational) -> Result<Interval> {
    tv_to_poisson_bits(p, lambda, DEFAULT_BITS)
}

pub fn tv_to_poisson_bits(p: &Pmf, lambda: &Rational, bits: u32) -> Result<Interval> {
    if !lambda.is_positive() {
        return Err(Error::InvalidPmf(format!("Poisson parameter {lambda} must be positive")));
    }
    let kmax = p.max_support();
    let pois = poisson_masses(lambda, kmax, bits);
    let mut diff = Interval::exact_int(0, bits);
    let mut covered = Interval::exact_int(0, bits);
    for (k, q) in pois.iter().enumerate() {
        diff = diff.add(&Interval::from_rational(&p.mass(k), bits).abs_diff(q));
        covered = covered.add(q);
    }
    let tail = Interval::exact_int(1, bits).sub(&covered);
    Ok(diff.add(&tail).half())
}

/// One line of a convergence table.
#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceRow {
    pub n: usize,
    /// `E(Y)_r` for `r = 1..=4`.
    #[serde(serialize_with = "crate::rational::serialize_all")]
    pub moments: Vec<Rational>,
    #[serde(skip)]
    pub tv: Interval,
    /// Midpoint of the certified TV enclosure, 15 decimals.
    pub tv_decimal: String,
    /// Upper bound on the enclosure width.
    pub tv_width: f64,
    #[serde(serialize_with = "crate::rational::serialize_all")]
    pub law: Vec<Rational>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReport {
    pub statistic: Statistic,
    #[serde(serialize_with = "crate::rational::serialize")]
    pub lambda: Rational,
    pub weights: Weights,
    pub rows: Vec<ConvergenceRow>,
}

pub const TV_DIGITS: u32 = 15;

/// Exact moments and certified TV distance for each `n`.
pub fn convergence_report(ns: &[usize], w: &Weights, stat: Statistic, lambda: &Rational) -> Result<ConvergenceReport> {
    if stat.poisson_limit().as_ref() != Some(lambda) {
        return Err(Error::MismatchedLimit {
            stat: stat.to_string(),
            lambda: format_rational(lambda),
        });
    }
    let rows = ns
        .par_iter()
        .map(|&n| {
            let law = statistic_law(n, w, stat)?;
            let moments = (1..=4).map(|r| law.factorial_moment(r)).collect();
            let tv = tv_to_poisson(&law, lambda)?;
            Ok(ConvergenceRow {
                n,
                moments,
                tv_decimal: tv.to_decimal(TV_DIGITS),
                tv_width: tv.width_f64(),
                tv,
                law: law.masses().to_vec(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConvergenceReport {
        statistic: stat,
        lambda: lambda.clone(),
        weights: w.clone(),
        rows,
    })
}

impl ConvergenceReport {
    pub const CSV_HEADER: &'static str = "n,r1,r2,r3,r4,tv";

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for row in &self.rows {
            let ms: Vec<String> = row.moments.iter().map(format_rational).collect();
            out.push_str(&format!("{},{},{}\n", row.n, ms.join(","), row.tv_decimal));
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// TV certainly decreases from each row to the next.
    pub fn tv_strictly_decreasing(&self) -> bool {
        self.rows.windows(2).all(|p| p[1].tv.certainly_lt(&p[0].tv))
    }
}

/// `E(A_n)_r → 2^{-r}`: returns `n·|E(A_n)_r − 2^{-r}|` for each `n`.
pub fn scaled_moment_gaps(ns: &[usize], w: &Weights, stat: Statistic, r: usize) -> Result<Vec<Rational>> {
    let lambda = stat
        .poisson_limit()
        .ok_or_else(|| Error::UnknownStatistic(stat.to_string()))?;
    let limit = num_traits::pow(lambda, r);
    ns.iter()
        .map(|&n| {
            let mu = factorial_moments(n, w, stat, r)?;
            let gap = (&mu.as_slice()[r] - &limit).abs();
            Ok(gap * Rational::from_integer(BigInt::from(n)))
        })
        .collect()
}
