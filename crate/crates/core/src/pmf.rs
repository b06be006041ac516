//! Exact distributions on `{0, 1, ..., K}`.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rational::{format_rational, to_f64, Rational};

/// Probability masses `p(0), ..., p(K)`; nonnegative and summing to one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pmf {
    masses: Vec<Rational>,
}

impl Pmf {
    pub fn new(mut masses: Vec<Rational>) -> Result<Self> {
        if let Some(k) = masses.iter().position(|m| m.is_negative()) {
            return Err(Error::InvalidPmf(format!("negative mass at {k}")));
        }
        let total: Rational = masses.iter().sum();
        if !total.is_one() {
            return Err(Error::InvalidPmf(format!(
                "masses sum to {}",
                format_rational(&total)
            )));
        }
        while masses.len() > 1 && masses.last().is_some_and(|m| m.is_zero()) {
            masses.pop();
        }
        Ok(Pmf { masses })
    }

    /// Normalizes nonnegative weights.
    pub fn from_weights(weights: Vec<Rational>) -> Result<Self> {
        let total: Rational = weights.iter().sum();
        if total.is_zero() {
            return Err(Error::InvalidPmf("all weights are zero".into()));
        }
        Pmf::new(weights.into_iter().map(|w| w / &total).collect())
    }

    pub fn point_mass(k: usize) -> Self {
        let mut masses = vec![Rational::zero(); k + 1];
        masses[k] = Rational::one();
        Pmf { masses }
    }

    /// Largest `k` with positive mass.
    pub fn max_support(&self) -> usize {
        self.masses.len() - 1
    }

    pub fn mass(&self, k: usize) -> Rational {
        self.masses.get(k).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn masses(&self) -> &[Rational] {
        &self.masses
    }

    pub fn mean(&self) -> Rational {
        self.factorial_moment(1)
    }

    /// `E[(Y)_r] = E[Y (Y-1) ... (Y-r+1)]`.
    pub fn factorial_moment(&self, r: usize) -> Rational {
        self.masses
            .iter()
            .enumerate()
            .skip(r)
            .map(|(k, m)| {
                let falling: BigInt = (0..r).map(|s| BigInt::from(k - s)).product();
                m * Rational::from_integer(falling)
            })
            .sum()
    }

    /// `μ_0, ..., μ_R`.
    pub fn factorial_moments(&self, max_r: usize) -> Vec<Rational> {
        (0..=max_r).map(|r| self.factorial_moment(r)).collect()
    }

    /// Exact total variation distance `½ Σ |p(k) - q(k)|`.
    pub fn tv(&self, other: &Pmf) -> Rational {
        let k = self.masses.len().max(other.masses.len());
        let s: Rational = (0..k).map(|i| (self.mass(i) - other.mass(i)).abs()).sum();
        s / Rational::from_integer(2.into())
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.masses.iter().map(to_f64).collect()
    }

    /// Masses as `"p/q"` strings.
    pub fn to_strings(&self) -> Vec<String> {
        self.masses.iter().map(format_rational).collect()
    }
}

/// A Monte Carlo law with per-bin binomial standard errors.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalPmf {
    pub samples: u64,
    pub counts: Vec<u64>,
}

impl EmpiricalPmf {
    pub fn from_counts(counts: Vec<u64>) -> Result<Self> {
        let samples: u64 = counts.iter().sum();
        if samples == 0 {
            return Err(Error::NoSamples);
        }
        Ok(EmpiricalPmf { samples, counts })
    }

    pub fn frequency(&self, k: usize) -> f64 {
        self.counts.get(k).copied().unwrap_or(0) as f64 / self.samples as f64
    }

    pub fn frequencies(&self) -> Vec<f64> {
        (0..self.counts.len()).map(|k| self.frequency(k)).collect()
    }

    /// `sqrt(p (1 - p) / N)` for each bin.
    pub fn std_errors(&self) -> Vec<f64> {
        self.frequencies()
            .into_iter()
            .map(|p| (p * (1.0 - p) / self.samples as f64).sqrt())
            .collect()
    }

    pub fn mean(&self) -> f64 {
        self.frequencies()
            .iter()
            .enumerate()
            .map(|(k, p)| k as f64 * p)
            .sum()
    }

    /// Standard error of the sample mean.
    pub fn mean_std_error(&self) -> f64 {
        let m = self.mean();
        let var: f64 = self
            .frequencies()
            .iter()
            .enumerate()
            .map(|(k, p)| (k as f64 - m).powi(2) * p)
            .sum();
        (var / self.samples as f64).sqrt()
    }

    pub fn tv_to(&self, exact: &Pmf) -> f64 {
        let k = self.counts.len().max(exact.masses().len());
        0.5 * (0..k)
            .map(|i| (self.frequency(i) - to_f64(&exact.mass(i))).abs())
            .sum::<f64>()
    }

    pub fn tv_between(&self, other: &EmpiricalPmf) -> f64 {
        let k = self.counts.len().max(other.counts.len());
        0.5 * (0..k)
            .map(|i| (self.frequency(i) - other.frequency(i)).abs())
            .sum::<f64>()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    #[test]
    fn validation() {
        assert!(Pmf::new(vec![ratio(1, 2), ratio(1, 3)]).is_err());
        assert!(Pmf::new(vec![ratio(3, 2), ratio(-1, 2)]).is_err());
        let p = Pmf::new(vec![ratio(2, 3), ratio(1, 3), ratio(0, 1)]).unwrap();
        assert_eq!(p.max_support(), 1);
        assert_eq!(p.mean(), ratio(1, 3));
        assert_eq!(p.factorial_moment(2), ratio(0, 1));
    }

    #[test]
    fn factorial_moments_of_a_small_law() {
        // Y uniform on {0,1,2,3}: E(Y)_2 = (0+0+2+6)/4 = 2
        let p = Pmf::new(vec![ratio(1, 4); 4]).unwrap();
        assert_eq!(p.factorial_moment(2), ratio(2, 1));
        assert_eq!(p.factorial_moment(3), ratio(6, 4));
        assert_eq!(p.factorial_moment(4), ratio(0, 1));
    }

    #[test]
    fn exact_tv() {
        let p = Pmf::point_mass(0);
        let q = Pmf::new(vec![ratio(2, 3), ratio(1, 3)]).unwrap();
        assert_eq!(p.tv(&q), ratio(1, 3));
    }

    #[test]
    fn empirical_needs_samples() {
        assert_eq!(EmpiricalPmf::from_counts(vec![0, 0]), Err(Error::NoSamples));
        let e = EmpiricalPmf::from_counts(vec![3, 1]).unwrap();
        assert_eq!(e.frequency(1), 0.25);
        assert!((e.std_errors()[0] - (0.75f64 * 0.25 / 4.0).sqrt()).abs() < 1e-15);
    }
}
