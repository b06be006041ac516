//! Exhaustive generation of small staircase tableaux.
//!
//! Everything here is deliberately brute force: it is the ground truth the
//! closed forms, the counting engine and the sampler are checked against.
//! Probabilities are evaluated from exact tallies of `(Nα, Nβ)` so the
//! expensive walk happens once per size, not once per parameter choice.

use std::collections::BTreeMap;

use num_traits::Zero;

use crate::constraint::ConstraintSet;
use crate::error::{Error, Result};
use crate::pmf::Pmf;
use crate::rational::{pow, Rational};
use crate::statistic::Statistic;
use crate::tableau::{sweep_order, Cell, SymbolCounts, Tableau};
use crate::weights::{FourWeights, Weights};

/// Largest size the enumeration oracle accepts by default; `(9+1)!` tableaux.
pub const N_ENUM: usize = 9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Alphabet {
    /// Empty, α, β.
    TwoSymbol,
    /// Empty, α, γ, β, δ.
    FourSymbol,
}

impl Alphabet {
    fn options(self) -> &'static [Cell] {
        match self {
            Alphabet::TwoSymbol => &[Cell::Empty, Cell::Alpha, Cell::Beta],
            Alphabet::FourSymbol => &[Cell::Empty, Cell::Alpha, Cell::Gamma, Cell::Beta, Cell::Delta],
        }
    }
}

pub(crate) fn check_enum_range(n: usize, max: usize) -> Result<()> {
    if (1..=max).contains(&n) {
        Ok(())
    } else {
        Err(Error::SizeOutOfRange {
            what: "enumeration",
            n,
            min: 1,
            max,
        })
    }
}

/// Depth-first generator over the column-major sweep.
///
/// Only leftward and upward boxes constrain a placement, so the walker keeps
/// a count of non-empty boxes per row (is the row still clean?) and per
/// column (is anything above?). Every leaf is a valid tableau.
pub struct TableauWalker {
    n: usize,
    options: &'static [Cell],
    slots: Vec<Slot>,
    next_opt: Vec<u8>,
    row_count: Vec<u8>,
    col_count: Vec<u8>,
    tableau: Tableau,
    pos: usize,
    at_leaf: bool,
    done: bool,
}

#[derive(Clone, Copy)]
struct Slot {
    i: usize,
    j: usize,
    flat: usize,
    diagonal: bool,
}

impl TableauWalker {
    /// No range check: the caller decides how much output it can afford.
    pub fn new(n: usize, alphabet: Alphabet) -> Self {
        let order = sweep_order(n);
        // Map each sweep position to the row-major storage index.
        let slots = order
            .iter()
            .map(|b| Slot {
                i: b.i,
                j: b.j,
                flat: (b.i - 1) * (n + 1) - (b.i - 1) * b.i / 2 + b.j - 1,
                diagonal: b.is_main_diagonal(n),
            })
            .collect::<Vec<_>>();
        TableauWalker {
            n,
            options: alphabet.options(),
            next_opt: vec![0; slots.len()],
            slots,
            row_count: vec![0; n + 1],
            col_count: vec![0; n + 1],
            tableau: Tableau::empty(n),
            pos: 0,
            at_leaf: false,
            done: n == 0,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn undo(&mut self, pos: usize) {
        let s = self.slots[pos];
        let cells = self.tableau.cells_mut();
        if !cells[s.flat].is_empty() {
            self.row_count[s.i] -= 1;
            self.col_count[s.j] -= 1;
        }
        cells[s.flat] = Cell::Empty;
    }

    /// Advances to the next tableau and lends it out.
    pub fn next_ref(&mut self) -> Option<&Tableau> {
        if self.done {
            return None;
        }
        if self.at_leaf {
            self.at_leaf = false;
            self.undo(self.pos);
        }
        loop {
            let s = self.slots[self.pos];
            let mut placed = false;
            while (self.next_opt[self.pos] as usize) < self.options.len() {
                let c = self.options[self.next_opt[self.pos] as usize];
                self.next_opt[self.pos] += 1;
                let legal = if c.is_empty() {
                    !s.diagonal
                } else if c.is_alpha_like() {
                    self.col_count[s.j] == 0
                } else {
                    self.row_count[s.i] == 0
                };
                if legal {
                    if !c.is_empty() {
                        self.row_count[s.i] += 1;
                        self.col_count[s.j] += 1;
                    }
                    self.tableau.cells_mut()[s.flat] = c;
                    placed = true;
                    break;
                }
            }
            if placed {
                if self.pos + 1 == self.slots.len() {
                    self.at_leaf = true;
                    return Some(&self.tableau);
                }
                self.pos += 1;
                self.next_opt[self.pos] = 0;
            } else {
                if self.pos == 0 {
                    self.done = true;
                    return None;
                }
                self.pos -= 1;
                self.undo(self.pos);
            }
        }
    }
}

impl Iterator for TableauWalker {
    type Item = Tableau;

    fn next(&mut self) -> Option<Tableau> {
        self.next_ref().cloned()
    }
}

/// Streams every α/β tableau of size `n` exactly once.
pub fn enumerate_tableaux(n: usize) -> Result<TableauWalker> {
    check_enum_range(n, N_ENUM)?;
    Ok(TableauWalker::new(n, Alphabet::TwoSymbol))
}

/// Calls `f` on every tableau without allocating per tableau.
pub fn for_each_tableau(n: usize, alphabet: Alphabet, mut f: impl FnMut(&Tableau)) -> Result<()> {
    check_enum_range(n, N_ENUM)?;
    let mut w = TableauWalker::new(n, alphabet);
    while let Some(t) = w.next_ref() {
        f(t);
    }
    Ok(())
}

pub fn count_tableaux(n: usize) -> Result<u64> {
    let mut c = 0u64;
    for_each_tableau(n, Alphabet::TwoSymbol, |_| c += 1)?;
    Ok(c)
}

/// `a^{n-Nα} b^{n-Nβ}`: the weight of an α/β tableau divided by `α^n β^n`.
pub fn normalized_weight(n: usize, counts: (usize, usize), w: &Weights) -> Rational {
    pow(w.a(), n - counts.0) * pow(w.b(), n - counts.1)
}

type Histogram = BTreeMap<(usize, usize), u64>;

fn eval_histogram(n: usize, h: &Histogram, w: &Weights) -> Rational {
    h.iter()
        .map(|(&k, &c)| normalized_weight(n, k, w) * Rational::from_integer(c.into()))
        .sum()
}

/// Tableau counts per `(key, Nα, Nβ)` from a single walk.
#[derive(Debug, Clone)]
pub struct Census<K: Ord> {
    n: usize,
    total: Histogram,
    by_key: BTreeMap<K, Histogram>,
}

impl<K: Ord + Clone> Census<K> {
    /// `keys` pushes every key the tableau belongs to.
    pub fn collect(n: usize, mut keys: impl FnMut(&Tableau, &mut Vec<K>)) -> Result<Self> {
        let mut total = Histogram::new();
        let mut by_key: BTreeMap<K, Histogram> = BTreeMap::new();
        let mut buf = Vec::new();
        for_each_tableau(n, Alphabet::TwoSymbol, |t| {
            let c = t.symbol_counts();
            let nab = (c.n_alpha, c.n_beta);
            *total.entry(nab).or_default() += 1;
            buf.clear();
            keys(t, &mut buf);
            for k in buf.drain(..) {
                *by_key.entry(k).or_default().entry(nab).or_default() += 1;
            }
        })?;
        Ok(Census { n, total, by_key })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn tableau_count(&self) -> u64 {
        self.total.values().sum()
    }

    /// `Σ a^{n-Nα} b^{n-Nβ}` over all tableaux.
    pub fn partition(&self, w: &Weights) -> Rational {
        eval_histogram(self.n, &self.total, w)
    }

    pub fn count(&self, key: &K) -> u64 {
        self.by_key.get(key).map_or(0, |h| h.values().sum())
    }

    pub fn weight(&self, key: &K, w: &Weights) -> Rational {
        self.by_key
            .get(key)
            .map_or_else(Rational::zero, |h| eval_histogram(self.n, h, w))
    }

    pub fn prob(&self, key: &K, w: &Weights) -> Rational {
        self.weight(key, w) / self.partition(w)
    }

    pub fn keys(&self) -> impl Iterator<Item = &K> {
        self.by_key.keys()
    }

    /// The (unconditioned) law of the keys, for keyings that are functions.
    pub fn law(&self, w: &Weights) -> BTreeMap<K, Rational> {
        let z = self.partition(w);
        self.by_key
            .iter()
            .map(|(k, h)| (k.clone(), eval_histogram(self.n, h, w) / &z))
            .collect()
    }
}

/// `Z_n(α, β) = Σ α^{Nα} β^{Nβ}`; needs finite α and β.
pub fn brute_partition(n: usize, w: &Weights) -> Result<Rational> {
    let (alpha, beta) = match (w.alpha(), w.beta()) {
        (Some(a), Some(b)) => (a, b),
        _ => {
            return Err(Error::InvalidWeights(
                "the unnormalized partition function needs finite α and β".into(),
            ))
        }
    };
    let census = Census::<()>::collect(n, |_, _| {})?;
    Ok(census
        .total
        .iter()
        .map(|(&(na, nb), &c)| pow(&alpha, na) * pow(&beta, nb) * Rational::from_integer(c.into()))
        .sum())
}

/// `Σ a^{n-Nα} b^{n-Nβ}`, finite for every admissible `(a, b)`.
pub fn brute_partition_normalized(n: usize, w: &Weights) -> Result<Rational> {
    Ok(Census::<()>::collect(n, |_, _| {})?.partition(w))
}

/// Four-parameter partition function by walking the four-symbol tableaux.
pub fn brute_partition_four(n: usize, fw: &FourWeights) -> Result<Rational> {
    Ok(four_symbol_histogram(n)?
        .iter()
        .map(|(c, &k)| {
            pow(&fw.alpha, c.n_alpha)
                * pow(&fw.beta, c.n_beta)
                * pow(&fw.gamma, c.n_gamma)
                * pow(&fw.delta, c.n_delta)
                * Rational::from_integer(k.into())
        })
        .sum())
}

/// Four-symbol tableau counts by symbol multiplicities.
pub fn four_symbol_histogram(n: usize) -> Result<BTreeMap<SymbolCounts, u64>> {
    let mut h: BTreeMap<SymbolCounts, u64> = BTreeMap::new();
    for_each_tableau(n, Alphabet::FourSymbol, |t| {
        *h.entry(t.symbol_counts()).or_default() += 1;
    })?;
    Ok(h)
}

/// `P_{n,α,β}(S satisfies c)` by exhaustive enumeration.
pub fn oracle_event_prob(n: usize, w: &Weights, c: &ConstraintSet) -> Result<Rational> {
    c.check_shape(n)?;
    let census = Census::collect(n, |t, out| {
        if c.satisfied_by(t) {
            out.push(());
        }
    })?;
    Ok(census.prob(&(), w))
}

/// Exact law of `stat` by exhaustive enumeration.
pub fn oracle_statistic_pmf(n: usize, w: &Weights, stat: Statistic) -> Result<Pmf> {
    let census = Census::collect(n, |t, out| out.push(stat.evaluate(t)))?;
    let law = census.law(w);
    let k = law.keys().max().copied().unwrap_or(0);
    Pmf::new((0..=k).map(|v| law.get(&v).cloned().unwrap_or_else(Rational::zero)).collect())
}

/// Law of `key(S)` conditioned on `S` satisfying `cond`.
pub fn oracle_conditional_law<K: Ord + Clone>(
    n: usize,
    w: &Weights,
    cond: &ConstraintSet,
    key: impl Fn(&Tableau) -> K,
) -> Result<BTreeMap<K, Rational>> {
    cond.check_shape(n)?;
    let census = Census::collect(n, |t, out| {
        if cond.satisfied_by(t) {
            out.push(key(t));
        }
    })?;
    let weights: BTreeMap<K, Rational> =
        census.keys().map(|k| (k.clone(), census.weight(k, w))).collect();
    let z_event: Rational = weights.values().sum();
    if z_event.is_zero() {
        return Ok(BTreeMap::new());
    }
    Ok(weights.into_iter().map(|(k, v)| (k, v / &z_event)).collect())
}

/// Exact probabilities of individual tableaux of one size.
pub struct OracleMeasure {
    n: usize,
    w: Weights,
    z: Rational,
}

impl OracleMeasure {
    pub fn new(n: usize, w: &Weights) -> Result<Self> {
        Ok(OracleMeasure {
            n,
            w: w.clone(),
            z: brute_partition_normalized(n, w)?,
        })
    }

    pub fn prob(&self, t: &Tableau) -> Rational {
        debug_assert_eq!(t.n(), self.n);
        let c = t.symbol_counts();
        normalized_weight(self.n, (c.n_alpha, c.n_beta), &self.w) / &self.z
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraint::Requirement;
    use crate::rational::{int, ratio};
    use std::collections::HashSet;

    #[test]
    fn small_counts() {
        assert_eq!(count_tableaux(1).unwrap(), 2);
        assert_eq!(count_tableaux(2).unwrap(), 6);
        assert_eq!(count_tableaux(4).unwrap(), 120);
        assert!(count_tableaux(0).is_err());
        assert!(count_tableaux(N_ENUM + 1).is_err());
    }

    #[test]
    fn every_tableau_is_valid_and_distinct() {
        for n in 1..=6 {
            let all: Vec<Tableau> = enumerate_tableaux(n).unwrap().collect();
            assert!(all.iter().all(|t| t.is_valid()));
            let set: HashSet<_> = all.iter().cloned().collect();
            assert_eq!(set.len(), all.len());
        }
    }

    /// Every filling of a tiny staircase, valid or not.
    fn all_fillings(n: usize, symbols: &[Cell]) -> Vec<Tableau> {
        let cells = n * (n + 1) / 2;
        let k = symbols.len();
        (0..k.pow(cells as u32))
            .map(|mut code| {
                Tableau::from_fn(n, |_| {
                    let c = symbols[code % k];
                    code /= k;
                    c
                })
            })
            .collect()
    }

    #[test]
    fn walker_agrees_with_filtering_all_fillings() {
        for n in 1..=4 {
            let expect = all_fillings(n, &[Cell::Empty, Cell::Alpha, Cell::Beta])
                .into_iter()
                .filter(|t| t.is_valid())
                .count() as u64;
            assert_eq!(count_tableaux(n).unwrap(), expect, "n={n}");
        }
        for n in 1..=3 {
            let all = all_fillings(
                n,
                &[Cell::Empty, Cell::Alpha, Cell::Beta, Cell::Gamma, Cell::Delta],
            );
            let expect = all.into_iter().filter(|t| t.is_valid()).count() as u64;
            let got: u64 = four_symbol_histogram(n).unwrap().values().sum();
            assert_eq!(got, expect, "four-symbol n={n}");
        }
    }

    #[test]
    fn partition_examples() {
        let one = FourWeights::ones();
        assert_eq!(brute_partition_four(1, &one).unwrap(), int(4));
        assert_eq!(brute_partition_four(2, &one).unwrap(), int(32));
        assert_eq!(brute_partition(3, &Weights::unit()).unwrap(), int(24));
        let inf = Weights::new(int(0), int(1)).unwrap();
        assert!(brute_partition(2, &inf).is_err());
        // a = 0: only tableaux with an α in every column survive
        assert_eq!(brute_partition_normalized(2, &inf).unwrap(), int(2));
    }

    #[test]
    fn event_examples() {
        let w = Weights::unit();
        let c = ConstraintSet::new().with(1, 2, Requirement::MustAlpha);
        assert_eq!(oracle_event_prob(2, &w, &c).unwrap(), ratio(2, 3));
        let c = ConstraintSet::new().with(1, 1, Requirement::MustAlpha);
        assert_eq!(oracle_event_prob(2, &w, &c).unwrap(), ratio(1, 6));
        assert_eq!(oracle_event_prob(2, &w, &ConstraintSet::new()).unwrap(), int(1));
    }

    #[test]
    fn statistic_examples() {
        let w = Weights::unit();
        let p = oracle_statistic_pmf(2, &w, Statistic::X2).unwrap();
        assert_eq!(p.masses(), &[ratio(2, 3), ratio(1, 3)]);
        let p = oracle_statistic_pmf(1, &Weights::parse("1/2", "3").unwrap(), Statistic::X2).unwrap();
        assert_eq!(p, Pmf::point_mass(0));
        // E(A_3) is the sum of the single-box α probabilities on the second diagonal
        let p = oracle_statistic_pmf(3, &w, Statistic::A2).unwrap();
        let direct: Rational = [(2, 1), (1, 2)]
            .iter()
            .map(|&(i, j)| {
                oracle_event_prob(3, &w, &ConstraintSet::new().with(i, j, Requirement::MustAlpha))
                    .unwrap()
            })
            .sum();
        assert_eq!(p.mean(), direct);
    }

    #[test]
    fn statistics_respect_structural_bounds() {
        for n in 1..=7 {
            for stat in Statistic::ALL {
                let p = oracle_statistic_pmf(n, &Weights::unit(), stat).unwrap();
                assert!(p.max_support() <= stat.max_value(n), "{stat} n={n}");
            }
        }
    }

    #[test]
    fn measure_sums_to_one() {
        let w = Weights::parse("1/2", "3").unwrap();
        let m = OracleMeasure::new(4, &w).unwrap();
        let total: Rational = enumerate_tableaux(4).unwrap().map(|t| m.prob(&t)).sum();
        assert_eq!(total, int(1));
    }
}
