//! Closed forms in exact arithmetic.
//!
//! All evaluators take the reciprocal parameters `a = 1/α`, `b = 1/β`, so
//! infinite α or β are just `a = 0` or `b = 0`.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::constraint::{ConstraintSet, Requirement};
use crate::error::{Error, Result};
use crate::rational::{binomial, factorial, int, pow, Rational};
use crate::tableau::{BoxIndex, Diagonal};
use crate::weights::{FourWeights, Weights};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FactorialKind {
    /// `x(x+1)…(x+k-1)`
    Rising,
    /// `x(x-1)…(x-k+1)`
    Falling,
}

pub fn rising_falling(x: &Rational, k: i64, kind: FactorialKind) -> Result<Rational> {
    if k < 0 {
        return Err(Error::InvalidTuple(format!("factorial length {k} is negative")));
    }
    let step = match kind {
        FactorialKind::Rising => int(1),
        FactorialKind::Falling => int(-1),
    };
    let mut acc = Rational::one();
    let mut term = x.clone();
    for _ in 0..k {
        acc *= &term;
        term += &step;
    }
    Ok(acc)
}

pub fn rising(x: &Rational, k: usize) -> Rational {
    rising_falling(x, k as i64, FactorialKind::Rising).expect("nonnegative length")
}

pub fn falling(x: &Rational, k: usize) -> Rational {
    rising_falling(x, k as i64, FactorialKind::Falling).expect("nonnegative length")
}

/// `(a+b)^{rising n}`, the partition function divided by `α^n β^n`.
pub fn normalized_partition_closed(n: usize, w: &Weights) -> Rational {
    rising(&(w.a() + w.b()), n)
}

/// `Z_n(α, β) = α^n β^n (a+b)^{rising n}`; α and β must be finite.
pub fn partition_closed(n: usize, w: &Weights) -> Result<Rational> {
    match (w.alpha(), w.beta()) {
        (Some(alpha), Some(beta)) => {
            Ok(pow(&(alpha * beta), n) * normalized_partition_closed(n, w))
        }
        _ => Err(Error::InvalidWeights(
            "the unnormalized partition function needs finite α and β".into(),
        )),
    }
}

/// `Z_n(α, β, γ, δ) = Π_{i<n} (α+β+γ+δ + i(α+γ)(β+δ))`.
pub fn partition_closed_four(n: usize, fw: &FourWeights) -> Rational {
    let s = &fw.alpha + &fw.beta + &fw.gamma + &fw.delta;
    let p = (&fw.alpha + &fw.gamma) * (&fw.beta + &fw.delta);
    (0..n).map(|i| &s + &p * int(i as i64)).product()
}

/// Marginal law of a single box.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BoxLaw {
    #[serde(serialize_with = "crate::rational::serialize")]
    pub alpha: Rational,
    #[serde(serialize_with = "crate::rational::serialize")]
    pub beta: Rational,
    #[serde(serialize_with = "crate::rational::serialize")]
    pub empty: Rational,
}

pub fn box_law(n: usize, w: &Weights, b: BoxIndex) -> Result<BoxLaw> {
    if !b.in_shape(n) {
        return Err(Error::BoxOutOfShape(b, n));
    }
    let (a, bb) = (w.a(), w.b());
    let (i, j) = (int(b.i as i64), int(b.j as i64));
    let (alpha, beta) = if b.is_main_diagonal(n) {
        let den = int(n as i64) + a + bb - int(1);
        ((int(n as i64) - &i + bb) / &den, (a + &i - int(1)) / den)
    } else {
        let den = falling(&(&i + &j + a + bb - int(1)), 2);
        ((&j - int(1) + bb) / &den, (&i - int(1) + a) / den)
    };
    let empty = int(1) - &alpha - &beta;
    Ok(BoxLaw { alpha, beta, empty })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum GapClass {
    /// Strictly increasing only.
    Free,
    /// Consecutive entries differ by at least 2.
    Gap2,
    /// Consecutive entries differ by at least 3.
    Gap3,
}

impl GapClass {
    pub fn min_gap(self) -> usize {
        match self {
            GapClass::Free => 1,
            GapClass::Gap2 => 2,
            GapClass::Gap3 => 3,
        }
    }
}

/// Strictly increasing positive column indices `j_1 < … < j_r`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct IndexTuple(Vec<usize>);

impl IndexTuple {
    pub fn new(cols: Vec<usize>) -> Result<Self> {
        if cols.first() == Some(&0) {
            return Err(Error::InvalidTuple("column indices start at 1".into()));
        }
        if cols.windows(2).any(|p| p[0] >= p[1]) {
            return Err(Error::InvalidTuple(format!("{cols:?} is not strictly increasing")));
        }
        Ok(IndexTuple(cols))
    }

    pub fn cols(&self) -> &[usize] {
        &self.0
    }

    pub fn r(&self) -> usize {
        self.0.len()
    }

    /// The strongest gap class the tuple belongs to.
    pub fn gap_class(&self) -> GapClass {
        let g = self.0.windows(2).map(|p| p[1] - p[0]).min().unwrap_or(usize::MAX);
        match g {
            1 => GapClass::Free,
            2 => GapClass::Gap2,
            _ => GapClass::Gap3,
        }
    }

    /// First consecutive pair closer than `class` allows.
    pub fn first_violation(&self, class: GapClass) -> Option<(usize, usize)> {
        self.0
            .windows(2)
            .find(|p| p[1] - p[0] < class.min_gap())
            .map(|p| (p[0], p[1]))
    }
}

impl fmt::Display for IndexTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<String> = self.0.iter().map(|j| j.to_string()).collect();
        write!(f, "({})", s.join(","))
    }
}

impl std::str::FromStr for IndexTuple {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let cols = s
            .split(',')
            .filter(|p| !p.trim().is_empty())
            .map(|p| {
                p.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::InvalidTuple(format!("bad column {p:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        IndexTuple::new(cols)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum JointKind {
    /// Every listed box holds an α.
    Alpha,
    /// Every listed box is non-empty.
    NonEmpty,
}

impl JointKind {
    pub fn requirement(self) -> Requirement {
        match self {
            JointKind::Alpha => Requirement::MustAlpha,
            JointKind::NonEmpty => Requirement::MustNonEmpty,
        }
    }
}

impl std::str::FromStr for JointKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "alpha" => Ok(JointKind::Alpha),
            "nonempty" => Ok(JointKind::NonEmpty),
            _ => Err(Error::InvalidTuple(format!("unknown kind {s:?}"))),
        }
    }
}

/// Why a formula evaluator returned 0 without evaluating a product.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum ZeroReason {
    /// Two boxes are too close: the event is impossible.
    GapViolation { left: usize, right: usize },
    /// Two boxes are too close for the main term; only an order bound is known.
    OrderOnly { left: usize, right: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FormulaValue {
    #[serde(serialize_with = "crate::rational::serialize")]
    pub value: Rational,
    pub reason: Option<ZeroReason>,
}

impl FormulaValue {
    fn product(value: Rational) -> Self {
        FormulaValue { value, reason: None }
    }

    fn zero(reason: ZeroReason) -> Self {
        FormulaValue {
            value: Rational::zero(),
            reason: Some(reason),
        }
    }
}

fn check_cols(t: &IndexTuple, max: usize, what: &str) -> Result<()> {
    match t.cols().last() {
        Some(&j) if j > max => Err(Error::InvalidTuple(format!(
            "column {j} is past the end of the {what} diagonal (last column {max})"
        ))),
        _ => Ok(()),
    }
}

/// `Π_{k=1}^r (b + j_{r-k+1} - 2r + 2k - 1) / (n+a+b-2r+2k-1)_2`.
fn alpha_product(n: usize, w: &Weights, cols: &[usize]) -> Rational {
    let r = cols.len() as i64;
    let s = int(n as i64) + w.a() + w.b();
    (1..=r)
        .map(|k| {
            let j = int(cols[(r - k) as usize] as i64);
            let num = w.b() + j - int(2 * r - 2 * k + 1);
            num / falling(&(&s - int(2 * r - 2 * k + 1)), 2)
        })
        .product()
}

/// `Π_{k=1}^r 1 / (n+a+b-r+k-1)`.
fn nonempty_product(n: usize, w: &Weights, r: usize) -> Rational {
    let s = int(n as i64) + w.a() + w.b();
    (1..=r as i64)
        .map(|k| int(1) / (&s - int(r as i64) + int(k - 1)))
        .product()
}

/// Joint law of boxes `(n-j, j)` on the second diagonal.
pub fn second_diag_joint(n: usize, w: &Weights, t: &IndexTuple, kind: JointKind) -> Result<FormulaValue> {
    check_cols(t, n.saturating_sub(1), "second")?;
    if let Some((left, right)) = t.first_violation(GapClass::Gap2) {
        return Ok(FormulaValue::zero(ZeroReason::GapViolation { left, right }));
    }
    Ok(FormulaValue::product(match kind {
        JointKind::Alpha => alpha_product(n, w, t.cols()),
        JointKind::NonEmpty => nonempty_product(n, w, t.r()),
    }))
}

pub fn second_diag_joint_alpha(n: usize, w: &Weights, t: &IndexTuple) -> Result<FormulaValue> {
    second_diag_joint(n, w, t, JointKind::Alpha)
}

pub fn second_diag_joint_nonempty(n: usize, w: &Weights, t: &IndexTuple) -> Result<FormulaValue> {
    second_diag_joint(n, w, t, JointKind::NonEmpty)
}

/// Leading term of the joint law of boxes `(n-j-1, j)` on the third
/// diagonal. The true probability differs by `O((n+a+b)^{-(r+1)})`; for
/// tuples with a gap below 3 only `O((n+a+b)^{-r})` is known and the value
/// returned is 0 with an [`ZeroReason::OrderOnly`] flag.
pub fn third_diag_main_term(n: usize, w: &Weights, t: &IndexTuple, kind: JointKind) -> Result<FormulaValue> {
    check_cols(t, n.saturating_sub(2), "third")?;
    if let Some((left, right)) = t.first_violation(GapClass::Gap3) {
        return Ok(FormulaValue::zero(ZeroReason::OrderOnly { left, right }));
    }
    Ok(FormulaValue::product(match kind {
        JointKind::Alpha => alpha_product(n, w, t.cols()),
        JointKind::NonEmpty => nonempty_product(n, w, t.r()),
    }))
}

/// The event "every box of `t` on diagonal `d` satisfies `kind`".
pub fn diagonal_event(n: usize, d: Diagonal, t: &IndexTuple, kind: JointKind) -> Result<ConstraintSet> {
    let mut c = ConstraintSet::new();
    for &j in t.cols() {
        let b = d.box_at(n, j).ok_or_else(|| {
            Error::InvalidTuple(format!("column {j} is not on diagonal {} of size {n}", d.offset() + 1))
        })?;
        c = c.require(b, kind.requirement())?;
    }
    Ok(c)
}

/// Lexicographic iterator over `r`-tuples in `1..=m` with consecutive gaps
/// of at least `gap`.
#[derive(Debug, Clone)]
pub struct GapTuples {
    m: usize,
    gap: usize,
    cur: Option<Vec<usize>>,
}

impl GapTuples {
    pub fn new(r: usize, m: usize, gap: usize) -> Self {
        let first: Vec<usize> = (0..r).map(|k| 1 + k * gap).collect();
        let fits = first.last().is_none_or(|&l| l <= m);
        GapTuples {
            m,
            gap,
            cur: fits.then_some(first),
        }
    }
}

impl Iterator for GapTuples {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.cur.take()?;
        let r = out.len();
        let mut next = out.clone();
        for k in (0..r).rev() {
            if next[k] + 1 + (r - 1 - k) * self.gap <= self.m {
                next[k] += 1;
                for t in k + 1..r {
                    next[t] = next[k] + (t - k) * self.gap;
                }
                self.cur = Some(next);
                break;
            }
        }
        Some(out)
    }
}

/// `J_{r,m}`: tuples `1 ≤ j_1 < … < j_r ≤ m` with `j_{k+1} - j_k ≥ 2`.
pub fn gap_index_sets(r: usize, m: usize) -> GapTuples {
    GapTuples::new(r, m, 2)
}

/// `|J_{r,m}| = C(m-r+1, r)`.
pub fn gap_index_count(r: usize, m: usize) -> BigInt {
    binomial(m as i64 - r as i64 + 1, r as i64)
}

/// Both sides of `Σ_{J_{r,m}} Π j_k = (m+1)_{2r} / (2^r r!)`.
pub fn lemma_la_sum(r: usize, m: usize) -> (Rational, Rational) {
    let lhs: BigInt = gap_index_sets(r, m)
        .map(|t| t.iter().map(|&j| BigInt::from(j)).product::<BigInt>())
        .sum();
    let rhs = falling(&int(m as i64 + 1), 2 * r)
        / Rational::from_integer(BigInt::from(2u32).pow(r as u32) * factorial(r));
    (Rational::from_integer(lhs), rhs)
}
