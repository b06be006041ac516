//! Exact random generation of weighted tableaux.
//!
//! Two interchangeable backends draw from `P_{n,α,β}`:
//!
//! * `EnumAlias` enumerates every tableau once per `n`, groups them by
//!   `(Nα, Nβ)` (the weight depends on nothing else) and draws a class from an
//!   integer alias table, then a tableau uniformly inside the class.
//! * `ChainRule` draws box by box from the conditional laws of
//!   [`ChainRule`](crate::dpcount::ChainRule).
//!
//! Both use exact integer arithmetic, so the only approximation is the
//! random stream itself.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::{BigUint, RandBigInt};
use num_traits::{One, Pow, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dpcount::{ChainRule, N_DP};
use crate::enumerate::{check_enum_range, for_each_tableau, Alphabet, N_ENUM};
use crate::error::{Error, Result};
use crate::pmf::EmpiricalPmf;
use crate::rational::{format_rational, gcd_all, unsigned_parts, Rational};
use crate::statistic::Statistic;
use crate::tableau::{Cell, Tableau};
use crate::weights::{FourWeights, Weights};

/// The deterministic random stream used throughout.
pub type RngHandle = ChaCha8Rng;

pub fn seeded(seed: u64) -> RngHandle {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleMethod {
    EnumAlias,
    ChainRule,
}

impl SampleMethod {
    pub fn name(self) -> &'static str {
        match self {
            SampleMethod::EnumAlias => "enum_alias",
            SampleMethod::ChainRule => "chain_rule",
        }
    }

    /// Largest supported size.
    pub fn max_n(self) -> usize {
        match self {
            SampleMethod::EnumAlias => N_ENUM,
            SampleMethod::ChainRule => N_DP,
        }
    }
}

impl fmt::Display for SampleMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SampleMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "enum_alias" | "enum-alias" | "alias" => Ok(SampleMethod::EnumAlias),
            "chain_rule" | "chain-rule" | "chain" => Ok(SampleMethod::ChainRule),
            _ => Err(Error::UnknownMethod(s.into())),
        }
    }
}

/// JSON header written before a dump of sampled tableaux.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SampleHeader {
    pub n: usize,
    pub a: String,
    pub b: String,
    pub seed: u64,
    pub method: SampleMethod,
}

impl SampleHeader {
    pub fn new(n: usize, w: &Weights, seed: u64, method: SampleMethod) -> Self {
        SampleHeader {
            n,
            a: format_rational(w.a()),
            b: format_rational(w.b()),
            seed,
            method,
        }
    }
}

/// Every tableau of one size, packed two bits per box and grouped by
/// symbol counts.
struct ClassIndex {
    n: usize,
    classes: Vec<((usize, usize), Vec<u128>)>,
}

fn encode(t: &Tableau) -> u128 {
    t.cells().iter().enumerate().fold(0u128, |acc, (k, c)| {
        let code = match c {
            Cell::Empty => 0u128,
            Cell::Alpha => 1,
            Cell::Beta => 2,
            _ => unreachable!("two-symbol enumeration"),
        };
        acc | (code << (2 * k))
    })
}

fn decode(n: usize, code: u128) -> Tableau {
    let mut t = Tableau::empty(n);
    for (k, c) in t.cells_mut().iter_mut().enumerate() {
        *c = match (code >> (2 * k)) & 3 {
            0 => Cell::Empty,
            1 => Cell::Alpha,
            _ => Cell::Beta,
        };
    }
    t
}

impl ClassIndex {
    fn build(n: usize) -> Result<Self> {
        check_enum_range(n, N_ENUM)?;
        let mut map: BTreeMap<(usize, usize), Vec<u128>> = BTreeMap::new();
        for_each_tableau(n, Alphabet::TwoSymbol, |t| {
            let s = t.symbol_counts();
            map.entry((s.n_alpha, s.n_beta)).or_default().push(encode(t));
        })?;
        Ok(ClassIndex {
            n,
            classes: map.into_iter().collect(),
        })
    }
}

/// Vose alias table over integer weights; exact up to the random stream.
#[derive(Debug, Clone)]
struct IntAlias {
    /// Acceptance threshold of each slot out of `total`.
    accept: Vec<BigUint>,
    alias: Vec<usize>,
    total: BigUint,
}

impl IntAlias {
    /// At least one weight must be positive.
    fn new(weights: &[BigUint]) -> Self {
        let m = weights.len();
        let total: BigUint = weights.iter().sum();
        let mut scaled: Vec<BigUint> = weights.iter().map(|w| w * m).collect();
        let mut accept = vec![total.clone(); m];
        let mut alias: Vec<usize> = (0..m).collect();
        let (mut small, mut large): (Vec<usize>, Vec<usize>) = (0..m).partition(|&i| scaled[i] < total);
        while let (Some(s), Some(&l)) = (small.pop(), large.last()) {
            accept[s] = scaled[s].clone();
            alias[s] = l;
            // scaled[l] >= total, so this stays nonnegative
            scaled[l] = &scaled[l] + &scaled[s] - &total;
            if scaled[l] < total {
                large.pop();
                small.push(l);
            }
        }
        IntAlias {
            accept,
            alias,
            total,
        }
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let i = rng.gen_range(0..self.accept.len());
        if rng.gen_biguint_below(&self.total) < self.accept[i] {
            i
        } else {
            self.alias[i]
        }
    }

    /// The exact law implied by the table.
    fn exact_law(&self) -> Vec<Rational> {
        let m = self.accept.len();
        let mut num = self.accept.clone();
        for k in 0..m {
            if self.alias[k] != k {
                num[self.alias[k]] += &self.total - &self.accept[k];
            }
        }
        let den = &self.total * m;
        num.iter()
            .map(|x| Rational::new(x.clone().into(), den.clone().into()))
            .collect()
    }
}

/// Alias sampler for one `(n, w)`.
pub struct AliasSampler {
    index: Arc<ClassIndex>,
    table: IntAlias,
}

impl AliasSampler {
    pub fn new(n: usize, w: &Weights) -> Result<Self> {
        let index = class_index(n)?;
        let (pa, qa) = unsigned_parts(w.a());
        let (pb, qb) = unsigned_parts(w.b());
        // a^{n-Nα} b^{n-Nβ} times (qa qb)^n, summed over the class
        let mut weights: Vec<BigUint> = index
            .classes
            .iter()
            .map(|&((na, nb), ref codes)| {
                Pow::pow(&pa, n - na)
                    * Pow::pow(&qa, na)
                    * Pow::pow(&pb, n - nb)
                    * Pow::pow(&qb, nb)
                    * codes.len()
            })
            .collect();
        let g = gcd_all(&weights);
        if !g.is_one() {
            for x in &mut weights {
                *x /= &g;
            }
        }
        Ok(AliasSampler {
            table: IntAlias::new(&weights),
            index,
        })
    }

    pub fn n(&self) -> usize {
        self.index.n
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Tableau {
        let (_, codes) = &self.index.classes[self.table.draw(rng)];
        decode(self.index.n, codes[rng.gen_range(0..codes.len())])
    }

    /// Exact probability with which `t` is drawn.
    pub fn exact_prob(&self, t: &Tableau) -> Rational {
        let code = encode(t);
        let s = t.symbol_counts();
        let law = self.table.exact_law();
        self.index
            .classes
            .iter()
            .zip(law)
            .find(|(((na, nb), codes), _)| (*na, *nb) == (s.n_alpha, s.n_beta) && codes.contains(&code))
            .map(|((_, codes), p)| p / Rational::from_integer(codes.len().into()))
            .unwrap_or_else(Rational::zero)
    }
}

fn class_index(n: usize) -> Result<Arc<ClassIndex>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<ClassIndex>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(c) = cache.lock().expect("cache lock").get(&n) {
        return Ok(c.clone());
    }
    // Built outside the lock: large sizes take seconds.
    let built = Arc::new(ClassIndex::build(n)?);
    Ok(cache.lock().expect("cache lock").entry(n).or_insert(built).clone())
}

/// A ready-to-draw sampler for one `(n, w, method)`.
#[derive(Clone)]
pub enum Sampler {
    Alias(Arc<AliasSampler>),
    Chain(Arc<ChainRule>),
}

impl Sampler {
    /// Cached per `(n, a, b)` and method.
    pub fn new(n: usize, w: &Weights, method: SampleMethod) -> Result<Self> {
        type Key = (usize, Weights, SampleMethod);
        static CACHE: OnceLock<Mutex<HashMap<Key, Sampler>>> = OnceLock::new();
        if n == 0 || n > method.max_n() {
            return Err(Error::SizeOutOfRange {
                what: method.name(),
                n,
                min: 1,
                max: method.max_n(),
            });
        }
        let cache = CACHE.get_or_init(Default::default);
        let key = (n, w.clone(), method);
        if let Some(s) = cache.lock().expect("cache lock").get(&key) {
            return Ok(s.clone());
        }
        let built = match method {
            SampleMethod::EnumAlias => Sampler::Alias(Arc::new(AliasSampler::new(n, w)?)),
            SampleMethod::ChainRule => Sampler::Chain(Arc::new(ChainRule::new(n, w)?)),
        };
        Ok(cache.lock().expect("cache lock").entry(key).or_insert(built).clone())
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Tableau {
        match self {
            Sampler::Alias(s) => s.sample(rng),
            Sampler::Chain(c) => c.sample(rng),
        }
    }
}

/// One exact draw from `P_{n,α,β}`.
pub fn sample<R: Rng + ?Sized>(n: usize, w: &Weights, rng: &mut R, method: SampleMethod) -> Result<Tableau> {
    Ok(Sampler::new(n, w, method)?.sample(rng))
}

/// Exact Bernoulli trial for a probability in `[0, 1]`.
fn bernoulli<R: Rng + ?Sized>(p: &Rational, rng: &mut R) -> bool {
    let (num, den) = unsigned_parts(p);
    !num.is_zero() && rng.gen_biguint_below(&den) < num
}

/// Turns each Alpha into Gamma with probability `γ/(α+γ)` and each Beta into
/// Delta with probability `δ/(β+δ)`, independently.
pub fn randomize_four_params<R: Rng + ?Sized>(t: &Tableau, fw: &FourWeights, rng: &mut R) -> Tableau {
    let p_gamma = &fw.gamma / (&fw.alpha + &fw.gamma);
    let p_delta = &fw.delta / (&fw.beta + &fw.delta);
    let mut out = t.clone();
    for c in out.cells_mut() {
        *c = match *c {
            Cell::Alpha if bernoulli(&p_gamma, rng) => Cell::Gamma,
            Cell::Beta if bernoulli(&p_delta, rng) => Cell::Delta,
            c => c,
        };
    }
    out
}

/// A draw from the four-parameter measure: sample with `(α+γ, β+δ)`, then
/// split the symbols.
pub fn sample_four<R: Rng + ?Sized>(n: usize, fw: &FourWeights, rng: &mut R, method: SampleMethod) -> Result<Tableau> {
    let t = sample(n, &fw.merged(), rng, method)?;
    Ok(randomize_four_params(&t, fw, rng))
}

/// Monte Carlo law of `stat` from `samples` independent draws.
pub fn empirical_pmf<R: Rng + ?Sized>(
    n: usize,
    w: &Weights,
    stat: Statistic,
    samples: u64,
    rng: &mut R,
    method: SampleMethod,
) -> Result<EmpiricalPmf> {
    if samples == 0 {
        return Err(Error::NoSamples);
    }
    let sampler = Sampler::new(n, w, method)?;
    let mut counts = vec![0u64; stat.max_value(n) + 1];
    for _ in 0..samples {
        counts[stat.evaluate(&sampler.sample(rng))] += 1;
    }
    EmpiricalPmf::from_counts(counts)
}
