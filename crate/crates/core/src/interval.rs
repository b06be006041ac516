//! Outward-rounded fixed-point intervals for certified real quantities.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::rational::Rational;

/// Default fractional bits; far below any tolerance used elsewhere.
pub const DEFAULT_BITS: u32 = 320;

/// A closed interval `[lo, hi] / 2^bits` known to contain a real number.
#[derive(Clone, PartialEq, Eq)]
pub struct Interval {
    lo: BigInt,
    hi: BigInt,
    bits: u32,
}

fn floor_div(a: &BigInt, b: &BigInt) -> BigInt {
    a.div_floor(b)
}

fn ceil_div(a: &BigInt, b: &BigInt) -> BigInt {
    -((-a).div_floor(b))
}

impl Interval {
    pub fn exact_int(v: i64, bits: u32) -> Self {
        let x = BigInt::from(v) << bits;
        Interval {
            lo: x.clone(),
            hi: x,
            bits,
        }
    }

    pub fn from_rational(x: &Rational, bits: u32) -> Self {
        let num = x.numer() << bits;
        Interval {
            lo: floor_div(&num, x.denom()),
            hi: ceil_div(&num, x.denom()),
            bits,
        }
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    fn scale(&self) -> BigInt {
        BigInt::one() << self.bits
    }

    pub fn add(&self, o: &Interval) -> Interval {
        Interval {
            lo: &self.lo + &o.lo,
            hi: &self.hi + &o.hi,
            bits: self.bits,
        }
    }

    pub fn sub(&self, o: &Interval) -> Interval {
        Interval {
            lo: &self.lo - &o.hi,
            hi: &self.hi - &o.lo,
            bits: self.bits,
        }
    }

    /// Product of two intervals with nonnegative lower ends.
    pub fn mul_nonneg(&self, o: &Interval) -> Interval {
        debug_assert!(!self.lo.is_negative() && !o.lo.is_negative());
        let s = self.scale();
        Interval {
            lo: floor_div(&(&self.lo * &o.lo), &s),
            hi: ceil_div(&(&self.hi * &o.hi), &s),
            bits: self.bits,
        }
    }

    pub fn div_int(&self, k: u64) -> Interval {
        let k = BigInt::from(k);
        Interval {
            lo: floor_div(&self.lo, &k),
            hi: ceil_div(&self.hi, &k),
            bits: self.bits,
        }
    }

    /// `1/x` for an interval with a positive lower end.
    pub fn recip_pos(&self) -> Interval {
        debug_assert!(self.lo.is_positive());
        let s2 = BigInt::one() << (2 * self.bits);
        Interval {
            lo: floor_div(&s2, &self.hi),
            hi: ceil_div(&s2, &self.lo),
            bits: self.bits,
        }
    }

    /// Enclosure of `|x - y|`.
    pub fn abs_diff(&self, o: &Interval) -> Interval {
        let d = self.sub(o);
        if !d.lo.is_negative() {
            d
        } else if !d.hi.is_positive() {
            Interval {
                lo: -d.hi,
                hi: -d.lo,
                bits: self.bits,
            }
        } else {
            Interval {
                lo: BigInt::zero(),
                hi: d.hi.max(-d.lo),
                bits: self.bits,
            }
        }
    }

    pub fn half(&self) -> Interval {
        self.div_int(2)
    }

    pub fn widen_hi(&self, extra: &Interval) -> Interval {
        Interval {
            lo: self.lo.clone(),
            hi: &self.hi + &extra.hi,
            bits: self.bits,
        }
    }

    pub fn lo_f64(&self) -> f64 {
        fixed_to_f64(&self.lo, self.bits)
    }

    pub fn hi_f64(&self) -> f64 {
        fixed_to_f64(&self.hi, self.bits)
    }

    pub fn mid_f64(&self) -> f64 {
        fixed_to_f64(&(&self.lo + &self.hi), self.bits + 1)
    }

    /// Upper bound on the width.
    pub fn width_f64(&self) -> f64 {
        fixed_to_f64(&(&self.hi - &self.lo), self.bits)
    }

    /// Every point of `self` is below every point of `o`.
    pub fn certainly_lt(&self, o: &Interval) -> bool {
        self.hi < o.lo
    }

    /// Compares when the intervals are disjoint.
    pub fn certain_cmp(&self, o: &Interval) -> Option<Ordering> {
        if self.hi < o.lo {
            Some(Ordering::Less)
        } else if o.hi < self.lo {
            Some(Ordering::Greater)
        } else if self.lo == self.hi && self == o {
            Some(Ordering::Equal)
        } else {
            None
        }
    }

    pub fn contains_rational(&self, x: &Rational) -> bool {
        let p = Interval::from_rational(x, self.bits);
        self.lo <= p.lo && p.hi <= self.hi
    }

    /// The midpoint rounded to `digits` decimal places.
    pub fn to_decimal(&self, digits: u32) -> String {
        let ten = BigInt::from(10u32).pow(digits);
        let num = (&self.lo + &self.hi) * &ten;
        let den = BigInt::one() << (self.bits + 1);
        // round half up
        let q = floor_div(&(num * 2 + &den), &(den * 2));
        let neg = q.is_negative();
        let q = q.abs();
        let (int_part, frac) = q.div_rem(&ten);
        let frac = frac.to_string();
        let pad = "0".repeat(digits as usize - frac.len());
        format!("{}{}.{}{}", if neg { "-" } else { "" }, int_part, pad, frac)
    }
}

fn fixed_to_f64(x: &BigInt, bits: u32) -> f64 {
    let shift = x.bits().saturating_sub(60) as u32;
    let top = (x >> shift).to_f64().unwrap_or(f64::NAN);
    top * 2f64.powi(shift as i32 - bits as i32)
}

impl fmt::Debug for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:e}, {:e}]", self.lo_f64(), self.hi_f64())
    }
}

/// Certified enclosures of `e^{-λ} λ^k / k!` for `k = 0..=kmax`.
pub fn poisson_masses(lambda: &Rational, kmax: usize, bits: u32) -> Vec<Interval> {
    let lam = Interval::from_rational(lambda, bits);
    // λ^i / i! for i = 0, 1, …; reused for the masses below
    let mut terms = vec![Interval::exact_int(1, bits)];
    // two units in the last place
    let eps = BigInt::from(2u32);
    let two_lambda = lambda * Rational::from_integer(2.into());
    let mut i = 0usize;
    loop {
        i += 1;
        let t = terms[i - 1].mul_nonneg(&lam).div_int(i as u64);
        terms.push(t);
        // Tail after the first i terms is below 2λ^i/i! once i ≥ 2λ.
        let big_enough = Rational::from_integer((i as i64).into()) >= two_lambda;
        let tail = terms[i].add(&terms[i]);
        if big_enough && tail.hi <= eps && i >= kmax {
            break;
        }
    }
    let n_terms = terms.len() - 1;
    let mut exp = Interval::exact_int(0, bits);
    for t in &terms[..n_terms] {
        exp = exp.add(t);
    }
    let tail = terms[n_terms].add(&terms[n_terms]);
    let exp = exp.widen_hi(&tail);
    let emin = exp.recip_pos();
    terms[..=kmax].iter().map(|t| emin.mul_nonneg(t)).collect()
}
