//! Measure parameters.
//!
//! Two-parameter weights are carried as reciprocals `a = 1/α`, `b = 1/β`,
//! so `a = 0` stands for `α = ∞` and stays exact.

use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{format_rational, parse_rational, Rational};

/// Reciprocal weights `(a, b)` of the measure on α/β tableaux.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Weights {
    a: Rational,
    b: Rational,
}

impl Weights {
    /// Both nonnegative, not both zero.
    pub fn new(a: Rational, b: Rational) -> Result<Self> {
        if a.is_negative() || b.is_negative() {
            return Err(Error::InvalidWeights("a and b must be nonnegative".into()));
        }
        if a.is_zero() && b.is_zero() {
            return Err(Error::InvalidWeights(
                "a = b = 0 has no well-defined limit measure".into(),
            ));
        }
        Ok(Weights { a, b })
    }

    /// From the symbol weights `α, β > 0`.
    pub fn from_alpha_beta(alpha: &Rational, beta: &Rational) -> Result<Self> {
        if !alpha.is_positive() || !beta.is_positive() {
            return Err(Error::InvalidWeights("α and β must be positive".into()));
        }
        Weights::new(alpha.recip(), beta.recip())
    }

    /// `a = b = 1`, the uniform measure.
    pub fn unit() -> Self {
        Weights {
            a: Rational::one(),
            b: Rational::one(),
        }
    }

    /// Parses two `p/q` strings.
    pub fn parse(a: &str, b: &str) -> Result<Self> {
        Weights::new(parse_rational(a)?, parse_rational(b)?)
    }

    pub fn a(&self) -> &Rational {
        &self.a
    }

    pub fn b(&self) -> &Rational {
        &self.b
    }

    /// `α = 1/a`, or `None` when `α = ∞`.
    pub fn alpha(&self) -> Option<Rational> {
        (!self.a.is_zero()).then(|| self.a.recip())
    }

    pub fn beta(&self) -> Option<Rational> {
        (!self.b.is_zero()).then(|| self.b.recip())
    }

    /// Weights of the transposed measure: `(b, a)`.
    pub fn swapped(&self) -> Self {
        Weights {
            a: self.b.clone(),
            b: self.a.clone(),
        }
    }

    /// Law of the subtableau `S[i, j]`: `(a + i - 1, b + j - 1)`.
    pub fn shifted(&self, i: usize, j: usize) -> Self {
        Weights {
            a: &self.a + Rational::from_integer((i as i64 - 1).into()),
            b: &self.b + Rational::from_integer((j as i64 - 1).into()),
        }
    }
}

impl fmt::Display for Weights {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "a={} b={}",
            format_rational(&self.a),
            format_rational(&self.b)
        )
    }
}

impl Serialize for Weights {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr {
            a: String,
            b: String,
        }
        Repr {
            a: format_rational(&self.a),
            b: format_rational(&self.b),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Weights {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            a: String,
            b: String,
        }
        let r = Repr::deserialize(d)?;
        Weights::parse(&r.a, &r.b).map_err(serde::de::Error::custom)
    }
}

/// Finite symbol weights `α, β, γ, δ` of the four-parameter model.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FourWeights {
    pub alpha: Rational,
    pub beta: Rational,
    pub gamma: Rational,
    pub delta: Rational,
}

impl FourWeights {
    /// Nonnegative, with `α + γ > 0` and `β + δ > 0`.
    pub fn new(alpha: Rational, beta: Rational, gamma: Rational, delta: Rational) -> Result<Self> {
        if [&alpha, &beta, &gamma, &delta].iter().any(|x| x.is_negative()) {
            return Err(Error::InvalidWeights(
                "α, β, γ, δ must be nonnegative".into(),
            ));
        }
        if (&alpha + &gamma).is_zero() || (&beta + &delta).is_zero() {
            return Err(Error::InvalidWeights(
                "α + γ and β + δ must be positive".into(),
            ));
        }
        Ok(FourWeights {
            alpha,
            beta,
            gamma,
            delta,
        })
    }

    pub fn ones() -> Self {
        let one = Rational::one();
        FourWeights {
            alpha: one.clone(),
            beta: one.clone(),
            gamma: one.clone(),
            delta: one,
        }
    }

    /// The α/β weights `(α + γ, β + δ)` of the merged model.
    pub fn merged(&self) -> Weights {
        Weights::from_alpha_beta(&(&self.alpha + &self.gamma), &(&self.beta + &self.delta))
            .expect("validated on construction")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    #[test]
    fn rejects_degenerate_weights() {
        assert!(Weights::new(int(0), int(0)).is_err());
        assert!(Weights::new(int(-1), int(1)).is_err());
        assert!(Weights::new(int(0), int(2)).is_ok());
        assert!(FourWeights::new(int(0), int(1), int(0), int(1)).is_err());
    }

    #[test]
    fn reciprocal_form() {
        let w = Weights::from_alpha_beta(&int(2), &ratio(1, 3)).unwrap();
        assert_eq!(w.a(), &ratio(1, 2));
        assert_eq!(w.b(), &int(3));
        assert_eq!(w.swapped().a(), &int(3));
        assert_eq!(Weights::new(int(0), int(1)).unwrap().alpha(), None);
        let s = w.shifted(3, 2);
        assert_eq!((s.a(), s.b()), (&ratio(5, 2), &int(4)));
    }

    #[test]
    fn serde_uses_rational_strings() {
        let w = Weights::parse("1/2", "3").unwrap();
        let js = serde_json::to_string(&w).unwrap();
        assert_eq!(js, r#"{"a":"1/2","b":"3"}"#);
        let back: Weights = serde_json::from_str(&js).unwrap();
        assert_eq!(back, w);
    }
}
