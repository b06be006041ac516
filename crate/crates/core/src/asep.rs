//! Staircase tableaux and the open-boundary exclusion process.
//!
//! Two independent routes to the stationary law on `n` sites:
//!
//! * [`steady_state_via_tableaux`] sums u/q-filled four-symbol tableaux by
//!   type (the diagonal read as a particle word);
//! * [`steady_state_via_generator`] solves `πQ = 0` for the continuous-time
//!   generator directly.
//!
//! [`cross_validate`] compares them state by state for each way of reading
//! the type.
//!
//! Site `i` is the diagonal box of row `i`, so site 1 sits at the top right
//! of the staircase. Particles enter site 1 at rate α and leave it at rate γ;
//! they enter site `n` at rate δ and leave it at rate β; bulk hops go right
//! at rate `u` and left at rate `q`.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::enumerate::{check_enum_range, for_each_tableau, Alphabet};
use crate::error::{Error, Result};
use crate::rational::{format_rational, parse_rational, pow, unsigned_parts, Rational};
use crate::tableau::{Cell, Tableau};

/// Largest size summed by the four-symbol enumeration (`4^7 · 7!` tableaux).
pub const N_ASEP_ENUM: usize = 7;
/// Largest size accepted by the generator solve.
pub const N_ASEP_GENERATOR: usize = 10;
/// Largest size accepted by [`cross_validate`].
pub const N_CROSS_VALIDATE: usize = 6;

/// Boundary rates `α, β, γ, δ` and hop rates `u` (right) and `q` (left).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct AsepParams {
    #[serde(serialize_with = "crate::rational::serialize")]
    pub alpha: Rational,
    #[serde(serialize_with = "crate::rational::serialize")]
    pub beta: Rational,
    #[serde(serialize_with = "crate::rational::serialize")]
    pub gamma: Rational,
    #[serde(serialize_with = "crate::rational::serialize")]
    pub delta: Rational,
    #[serde(serialize_with = "crate::rational::serialize")]
    pub u: Rational,
    #[serde(serialize_with = "crate::rational::serialize")]
    pub q: Rational,
}

impl AsepParams {
    /// Nonnegative rates with `α + δ > 0` and `u + q > 0`.
    pub fn new(alpha: Rational, beta: Rational, gamma: Rational, delta: Rational, u: Rational, q: Rational) -> Result<Self> {
        let p = AsepParams {
            alpha,
            beta,
            gamma,
            delta,
            u,
            q,
        };
        if p.rates().iter().any(|r| r.is_negative()) {
            return Err(Error::InvalidRates("rates must be nonnegative".into()));
        }
        if (&p.alpha + &p.delta).is_zero() {
            return Err(Error::InvalidRates("need a positive entry rate (α or δ)".into()));
        }
        if (&p.u + &p.q).is_zero() {
            return Err(Error::InvalidRates("u + q must be positive".into()));
        }
        Ok(p)
    }

    /// Parses `α, β, γ, δ, u, q` from `p/q` strings.
    pub fn parse(rates: [&str; 6]) -> Result<Self> {
        let r = rates
            .iter()
            .map(|s| parse_rational(s))
            .collect::<Result<Vec<_>>>()?;
        let [alpha, beta, gamma, delta, u, q]: [Rational; 6] = r.try_into().expect("six rates");
        AsepParams::new(alpha, beta, gamma, delta, u, q)
    }

    pub fn ones() -> Self {
        let one = Rational::one();
        AsepParams::new(one.clone(), one.clone(), one.clone(), one.clone(), one.clone(), one).expect("valid")
    }

    /// `[α, β, γ, δ, u, q]`.
    pub fn rates(&self) -> [Rational; 6] {
        [
            self.alpha.clone(),
            self.beta.clone(),
            self.gamma.clone(),
            self.delta.clone(),
            self.u.clone(),
            self.q.clone(),
        ]
    }

    /// All rates divided by `u`; the stationary law is unchanged.
    pub fn normalized_u(&self) -> Result<Self> {
        if self.u.is_zero() {
            return Err(Error::InvalidRates("cannot normalize u = 0".into()));
        }
        let [a, b, g, d, u, q] = self.rates().map(|r| r / &self.u);
        AsepParams::new(a, b, g, d, u, q)
    }
}

impl fmt::Display for AsepParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r = self.rates().map(|x| format_rational(&x));
        write!(
            f,
            "α={} β={} γ={} δ={} u={} q={}",
            r[0], r[1], r[2], r[3], r[4], r[5]
        )
    }
}

/// Occupation of `n` sites; bit `i - 1` is site `i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AsepState {
    n: usize,
    bits: u32,
}

impl AsepState {
    pub fn new(n: usize, bits: u32) -> Self {
        assert!(n <= 31, "at most 31 sites");
        AsepState {
            n,
            bits: bits & ((1u32 << n) - 1),
        }
    }

    pub fn from_sites(sites: &[bool]) -> Self {
        let bits = sites
            .iter()
            .enumerate()
            .fold(0u32, |acc, (i, &s)| acc | (u32::from(s) << i));
        AsepState::new(sites.len(), bits)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Index among the `2^n` states.
    pub fn index(&self) -> usize {
        self.bits as usize
    }

    /// Site numbers start at 1.
    pub fn is_filled(&self, site: usize) -> bool {
        (self.bits >> (site - 1)) & 1 == 1
    }

    /// `0`/`1` word, site 1 first.
    pub fn word(&self) -> String {
        (1..=self.n)
            .map(|s| if self.is_filled(s) { '1' } else { '0' })
            .collect()
    }

    pub fn all(n: usize) -> impl Iterator<Item = AsepState> {
        (0..1u32 << n).map(move |b| AsepState::new(n, b))
    }
}

/// Filled sites as `•`, empty as `∘`, separated by spaces.
impl fmt::Display for AsepState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<&str> = (1..=self.n)
            .map(|i| if self.is_filled(i) { "•" } else { "∘" })
            .collect();
        f.write_str(&s.join(" "))
    }
}

/// Accepts `0`/`1` or `∘`/`•`, whitespace ignored.
impl FromStr for AsepState {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let sites = s
            .chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| match c {
                '1' | '•' => Ok(true),
                '0' | '∘' => Ok(false),
                _ => Err(Error::Parse {
                    line: 1,
                    msg: format!("unexpected site symbol {c:?}"),
                }),
            })
            .collect::<Result<Vec<_>>>()?;
        if sites.is_empty() || sites.len() > 31 {
            return Err(Error::Parse {
                line: 1,
                msg: "a state needs 1 to 31 sites".into(),
            });
        }
        Ok(AsepState::from_sites(&sites))
    }
}

impl Serialize for AsepState {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.word())
    }
}

/// Which diagonal symbols mark a filled site.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Convention {
    /// α or γ on the diagonal.
    #[default]
    PaperAlphaGamma,
    /// α or δ on the diagonal.
    AlphaDelta,
}

impl Convention {
    pub const ALL: [Convention; 2] = [Convention::PaperAlphaGamma, Convention::AlphaDelta];

    pub fn name(self) -> &'static str {
        match self {
            Convention::PaperAlphaGamma => "paper_alpha_gamma",
            Convention::AlphaDelta => "alpha_delta",
        }
    }

    pub fn is_filled(self, c: Cell) -> bool {
        match self {
            Convention::PaperAlphaGamma => matches!(c, Cell::Alpha | Cell::Gamma),
            Convention::AlphaDelta => matches!(c, Cell::Alpha | Cell::Delta),
        }
    }
}

impl fmt::Display for Convention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Convention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper_alpha_gamma" | "alpha_gamma" | "paper" => Ok(Convention::PaperAlphaGamma),
            "alpha_delta" => Ok(Convention::AlphaDelta),
            _ => Err(Error::Parse {
                line: 1,
                msg: format!("unknown convention {s:?} (expected paper_alpha_gamma or alpha_delta)"),
            }),
        }
    }
}

/// The state read off the main diagonal.
pub fn tableau_type(t: &Tableau, convention: Convention) -> AsepState {
    let n = t.n();
    let sites: Vec<bool> = (1..=n)
        .map(|i| convention.is_filled(t.at(i, n + 1 - i)))
        .collect();
    AsepState::from_sites(&sites)
}

/// Content of a box after the u/q filling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GridEntry {
    Symbol(Cell),
    U,
    Q,
}

impl GridEntry {
    pub fn to_char(self) -> char {
        match self {
            GridEntry::Symbol(c) => c.to_char(),
            GridEntry::U => 'u',
            GridEntry::Q => 'q',
        }
    }
}

/// Exponents of `α, β, γ, δ, u, q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Monomial(pub [u8; 6]);

impl Monomial {
    pub fn evaluate(&self, p: &AsepParams) -> Rational {
        p.rates()
            .iter()
            .zip(self.0)
            .map(|(r, e)| pow(r, e as usize))
            .product()
    }

    fn pack(&self) -> u64 {
        self.0
            .iter()
            .enumerate()
            .fold(0u64, |acc, (k, &e)| acc | (u64::from(e) << (6 * k)))
    }

    fn unpack(x: u64) -> Self {
        Monomial(std::array::from_fn(|k| ((x >> (6 * k)) & 63) as u8))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = ["α", "β", "γ", "δ", "u", "q"];
        let parts: Vec<String> = names
            .iter()
            .zip(self.0)
            .filter(|(_, e)| *e > 0)
            .map(|(s, e)| if e == 1 { s.to_string() } else { format!("{s}^{e}") })
            .collect();
        if parts.is_empty() {
            f.write_str("1")
        } else {
            f.write_str(&parts.join(" "))
        }
    }
}

/// A four-symbol tableau whose empty boxes carry `u` or `q`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FilledGrid {
    tableau: Tableau,
    entries: Vec<GridEntry>,
}

impl FilledGrid {
    pub fn tableau(&self) -> &Tableau {
        &self.tableau
    }

    pub fn entry(&self, i: usize, j: usize) -> GridEntry {
        let n = self.tableau.n();
        assert!(i + j <= n + 1, "box ({i},{j}) outside the staircase");
        self.entries[row_offset(n, i) + j - 1]
    }

    pub fn monomial(&self) -> Monomial {
        monomial_of(&self.entries)
    }

    pub fn weight(&self, p: &AsepParams) -> Rational {
        self.monomial().evaluate(p)
    }

    /// One line per row, symbols `A B G D u q`.
    pub fn to_text(&self) -> String {
        let n = self.tableau.n();
        (1..=n)
            .map(|i| (1..=n + 1 - i).map(|j| self.entry(i, j).to_char()).collect::<String>())
            .collect::<Vec<_>>()
            .join("\n")
    }
}

fn row_offset(n: usize, i: usize) -> usize {
    (i - 1) * (n + 1) - (i - 1) * i / 2
}

fn monomial_of(entries: &[GridEntry]) -> Monomial {
    let mut m = Monomial::default();
    for e in entries {
        let k = match e {
            GridEntry::Symbol(Cell::Alpha) => 0,
            GridEntry::Symbol(Cell::Beta) => 1,
            GridEntry::Symbol(Cell::Gamma) => 2,
            GridEntry::Symbol(Cell::Delta) => 3,
            GridEntry::U => 4,
            GridEntry::Q => 5,
            GridEntry::Symbol(Cell::Empty) => unreachable!("every box is filled"),
        };
        m.0[k] += 1;
    }
    m
}

/// Fills `out` row by row. Boxes left of a β get `u` and left of a δ get
/// `q`; every other empty box looks at the nearest symbol below it and gets
/// `u` under an α or δ, `q` otherwise.
fn fill_into(t: &Tableau, out: &mut Vec<GridEntry>) {
    let n = t.n();
    out.clear();
    out.extend(t.cells().iter().map(|&c| GridEntry::Symbol(c)));
    for i in 1..=n {
        let row = &mut out[row_offset(n, i)..row_offset(n, i) + n + 1 - i];
        // A β or δ is always the first symbol of its row.
        if let Some(j0) = row.iter().position(|e| *e != GridEntry::Symbol(Cell::Empty)) {
            let fill = match row[j0] {
                GridEntry::Symbol(Cell::Beta) => Some(GridEntry::U),
                GridEntry::Symbol(Cell::Delta) => Some(GridEntry::Q),
                _ => None,
            };
            if let Some(f) = fill {
                row[..j0].fill(f);
            }
        }
    }
    for j in 1..=n {
        let mut below = Cell::Empty;
        for i in (1..=n + 1 - j).rev() {
            let e = &mut out[row_offset(n, i) + j - 1];
            match *e {
                GridEntry::Symbol(Cell::Empty) => {
                    *e = if matches!(below, Cell::Alpha | Cell::Delta) {
                        GridEntry::U
                    } else {
                        GridEntry::Q
                    };
                }
                GridEntry::Symbol(c) => below = c,
                _ => {}
            }
        }
    }
}

/// The u/q filling of a valid four-symbol tableau.
pub fn uq_fill(t: &Tableau) -> FilledGrid {
    let mut entries = Vec::new();
    fill_into(t, &mut entries);
    FilledGrid {
        tableau: t.clone(),
        entries,
    }
}

/// `(diagonal word, monomial, multiplicity)`; the word holds two bits per
/// site so either convention can be applied later.
type WeightTable = Vec<(u32, Monomial, u64)>;

fn diag_code(c: Cell) -> u32 {
    match c {
        Cell::Alpha => 0,
        Cell::Beta => 1,
        Cell::Gamma => 2,
        Cell::Delta => 3,
        Cell::Empty => unreachable!("diagonal boxes are filled"),
    }
}

fn diag_cell(code: u32) -> Cell {
    [Cell::Alpha, Cell::Beta, Cell::Gamma, Cell::Delta][code as usize]
}

fn build_weight_table(n: usize) -> Result<WeightTable> {
    check_enum_range(n, N_ASEP_ENUM)?;
    // key: monomial in the low 36 bits, diagonal word above
    let mut acc: FxHashMap<u64, u64> = FxHashMap::default();
    let mut buf = Vec::new();
    for_each_tableau(n, Alphabet::FourSymbol, |t| {
        fill_into(t, &mut buf);
        let word = (1..=n).fold(0u64, |w, i| w | (u64::from(diag_code(t.at(i, n + 1 - i))) << (2 * (i - 1))));
        *acc.entry((word << 36) | monomial_of(&buf).pack()).or_default() += 1;
    })?;
    let mut table: WeightTable = acc
        .into_iter()
        .map(|(k, c)| ((k >> 36) as u32, Monomial::unpack(k & ((1 << 36) - 1)), c))
        .collect();
    table.sort_unstable();
    Ok(table)
}

/// Rate-free summary of all filled tableaux of size `n`, cached per `n`.
fn weight_table(n: usize) -> Result<Arc<WeightTable>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<WeightTable>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(t) = cache.lock().expect("cache lock").get(&n) {
        return Ok(t.clone());
    }
    let built = Arc::new(build_weight_table(n)?);
    Ok(cache.lock().expect("cache lock").entry(n).or_insert(built).clone())
}

/// An exact law on the `2^n` states, indexed by [`AsepState::index`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateLaw {
    n: usize,
    probs: Vec<Rational>,
}

impl StateLaw {
    fn from_weights(n: usize, weights: Vec<Rational>) -> Result<Self> {
        let total: Rational = weights.iter().sum();
        if total.is_zero() {
            return Err(Error::InvalidRates("every state has zero weight".into()));
        }
        Ok(StateLaw {
            n,
            probs: weights.into_iter().map(|w| w / &total).collect(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn prob(&self, s: AsepState) -> &Rational {
        &self.probs[s.index()]
    }

    pub fn probs(&self) -> &[Rational] {
        &self.probs
    }

    pub fn iter(&self) -> impl Iterator<Item = (AsepState, &Rational)> {
        self.probs
            .iter()
            .enumerate()
            .map(move |(k, p)| (AsepState::new(self.n, k as u32), p))
    }

    /// Probability that `site` is occupied.
    pub fn density(&self, site: usize) -> Rational {
        self.iter().filter(|(s, _)| s.is_filled(site)).map(|(_, p)| p).sum()
    }
}

/// Weights of the table entries as integers over a common denominator.
///
/// Every monomial has total degree `n(n+1)/2`, so scaling all six rates by
/// the lcm `L` of their denominators scales every weight by the same `L^D`.
fn integer_weights<'a>(n: usize, table: &'a WeightTable, p: &AsepParams) -> (impl Iterator<Item = (u32, BigUint)> + 'a, BigUint) {
    let degree = n * (n + 1) / 2;
    let rates = p.rates();
    let lcm = rates
        .iter()
        .fold(BigUint::one(), |l, r| l.lcm(&unsigned_parts(r).1));
    let powers: Vec<Vec<BigUint>> = rates
        .iter()
        .map(|r| {
            let (num, den) = unsigned_parts(r);
            let m = num * (&lcm / den);
            std::iter::successors(Some(BigUint::one()), |x| Some(x * &m))
                .take(degree + 1)
                .collect()
        })
        .collect();
    let weights = table.iter().map(move |(word, m, c)| {
        let w = m
            .0
            .iter()
            .enumerate()
            .fold(BigUint::from(*c), |acc, (k, &e)| acc * &powers[k][e as usize]);
        (*word, w)
    });
    (weights, num_traits::Pow::pow(&lcm, degree))
}

/// `Z_n(α, β, γ, δ, q, u)`, the total weight of all filled tableaux.
pub fn partition_uq(n: usize, p: &AsepParams) -> Result<Rational> {
    let table = weight_table(n)?;
    let (weights, scale) = integer_weights(n, &table, p);
    let total: BigUint = weights.map(|(_, w)| w).sum();
    Ok(Rational::new(total.into(), scale.into()))
}

/// Normalized weight of the filled tableaux of each type.
pub fn steady_state_via_tableaux(n: usize, p: &AsepParams, convention: Convention) -> Result<StateLaw> {
    let table = weight_table(n)?;
    let (weights, _) = integer_weights(n, &table, p);
    // the state of each diagonal word under this convention
    let state_of: Vec<usize> = (0..1u32 << (2 * n))
        .map(|word| {
            let sites: Vec<bool> = (0..n)
                .map(|k| convention.is_filled(diag_cell((word >> (2 * k)) & 3)))
                .collect();
            AsepState::from_sites(&sites).index()
        })
        .collect();
    let mut sums = vec![BigUint::zero(); 1 << n];
    for (word, w) in weights {
        sums[state_of[word as usize]] += w;
    }
    StateLaw::from_weights(n, sums.into_iter().map(|x| Rational::from_integer(x.into())).collect())
}

/// Which of `α, β, γ, δ, u, q` drives a transition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Rate {
    Alpha = 0,
    Beta = 1,
    Gamma = 2,
    Delta = 3,
    U = 4,
    Q = 5,
}

/// Every transition `(from, to, rate)` of the chain on `n` sites.
fn transitions(n: usize) -> Vec<(usize, usize, Rate)> {
    let mut out = Vec::new();
    for s in 0..1usize << n {
        let filled = |site: usize| (s >> (site - 1)) & 1 == 1;
        let flip = |site: usize| s ^ (1 << (site - 1));
        out.push((s, flip(1), if filled(1) { Rate::Gamma } else { Rate::Alpha }));
        out.push((s, flip(n), if filled(n) { Rate::Beta } else { Rate::Delta }));
        for k in 1..n {
            match (filled(k), filled(k + 1)) {
                (true, false) => out.push((s, flip(k) ^ (1 << k), Rate::U)),
                (false, true) => out.push((s, flip(k) ^ (1 << k), Rate::Q)),
                _ => {}
            }
        }
    }
    out
}

/// Number of closed communicating classes, i.e. the dimension of the space
/// of stationary vectors.
fn closed_classes(states: usize, edges: &[(usize, usize)]) -> usize {
    let mut g = DiGraph::<(), ()>::with_capacity(states, edges.len());
    for _ in 0..states {
        g.add_node(());
    }
    g.extend_with_edges(edges.iter().map(|&(a, b)| (a as u32, b as u32)));
    let mut component = vec![0usize; states];
    let sccs = tarjan_scc(&g);
    for (k, scc) in sccs.iter().enumerate() {
        for v in scc {
            component[v.index()] = k;
        }
    }
    let mut leaks = vec![false; sccs.len()];
    for &(a, b) in edges {
        if component[a] != component[b] {
            leaks[component[a]] = true;
        }
    }
    leaks.iter().filter(|l| !**l).count()
}

fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    a * b % p
}

fn pow_mod(mut a: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, a, p);
        }
        a = mul_mod(a, a, p);
        e >>= 1;
    }
    r
}

/// Solves `A x = e_last` modulo `p`; `None` when `A` is singular mod `p`.
fn solve_mod(mut a: Vec<Vec<u64>>, p: u64) -> Option<Vec<u64>> {
    let m = a.len();
    let mut rhs = vec![0u64; m];
    rhs[m - 1] = 1;
    for col in 0..m {
        let piv = (col..m).find(|&r| a[r][col] != 0)?;
        a.swap(col, piv);
        rhs.swap(col, piv);
        let inv = pow_mod(a[col][col], p - 2, p);
        for x in a[col][col..].iter_mut() {
            *x = mul_mod(*x, inv, p);
        }
        rhs[col] = mul_mod(rhs[col], inv, p);
        let support: Vec<usize> = (col + 1..m).filter(|&c| a[col][c] != 0).collect();
        let (top, rest) = a.split_at_mut(col + 1);
        let pivot_row = &top[col];
        for (k, row) in rest.iter_mut().enumerate() {
            let f = row[col];
            if f == 0 {
                continue;
            }
            let neg = p - f;
            row[col] = 0;
            for &c in &support {
                row[c] = (row[c] + mul_mod(neg, pivot_row[c], p)) % p;
            }
            rhs[col + 1 + k] = (rhs[col + 1 + k] + mul_mod(neg, rhs[col], p)) % p;
        }
    }
    for col in (0..m).rev() {
        let mut v = rhs[col];
        for c in col + 1..m {
            if a[col][c] != 0 {
                v = (v + p - mul_mod(a[col][c], rhs[c], p)) % p;
            }
        }
        rhs[col] = v;
    }
    Some(rhs)
}

/// Smallest `|r/s|` congruent to `x` modulo `m`, if one is small enough to
/// be determined.
fn rational_reconstruct(x: &BigInt, m: &BigInt) -> Option<Rational> {
    let bound = (m / 2u32).sqrt();
    let (mut r0, mut r1) = (m.clone(), x.mod_floor(m));
    let (mut t0, mut t1) = (BigInt::zero(), BigInt::one());
    while r1 > bound {
        let q = &r0 / &r1;
        let r2 = &r0 - &q * &r1;
        r0 = std::mem::replace(&mut r1, r2);
        let t2 = &t0 - &q * &t1;
        t0 = std::mem::replace(&mut t1, t2);
    }
    if t1.is_zero() || t1.abs() > bound || !r1.gcd(&t1).is_one() {
        return None;
    }
    Some(Rational::new(r1, t1))
}

/// Primes just below `2^31`, so products fit in a `u64`.
fn primes() -> impl Iterator<Item = u64> {
    (1u64..1 << 31).rev().step_by(2).filter(|&p| primal_check::miller_rabin(p))
}

/// Exact stationary law of the generator.
///
/// Rates are scaled to integers and `Qᵀ π = 0, Σ π = 1` is solved modulo a
/// growing set of primes; the candidate recovered by CRT and rational
/// reconstruction is returned only after it passes both equations exactly.
pub fn steady_state_via_generator(n: usize, p: &AsepParams) -> Result<StateLaw> {
    if !(1..=N_ASEP_GENERATOR).contains(&n) {
        return Err(Error::SizeOutOfRange {
            what: "generator solve",
            n,
            min: 1,
            max: N_ASEP_GENERATOR,
        });
    }
    let states = 1usize << n;
    let rates = p.rates();
    let trans: Vec<(usize, usize, Rate)> = transitions(n)
        .into_iter()
        .filter(|&(_, _, r)| !rates[r as usize].is_zero())
        .collect();
    let k = closed_classes(states, &trans.iter().map(|&(a, b, _)| (a, b)).collect::<Vec<_>>());
    if k != 1 {
        return Err(Error::Reducible(k));
    }
    let lcm = rates
        .iter()
        .fold(BigUint::one(), |l, r| l.lcm(&unsigned_parts(r).1));
    let int_rates: Vec<BigUint> = rates
        .iter()
        .map(|r| {
            let (num, den) = unsigned_parts(r);
            num * (&lcm / den)
        })
        .collect();

    let mut modulus = BigInt::one();
    let mut residues = vec![BigInt::zero(); states];
    for prime in primes() {
        let rp: Vec<u64> = int_rates
            .iter()
            .map(|r| (r % prime).to_u64().expect("reduced"))
            .collect();
        // a zero residue of a nonzero rate would change the chain mod p
        if rp.iter().zip(&int_rates).any(|(m, r)| *m == 0 && !r.is_zero()) {
            continue;
        }
        let mut a = vec![vec![0u64; states]; states];
        for &(from, to, r) in &trans {
            let v = rp[r as usize];
            a[to][from] = (a[to][from] + v) % prime;
            a[from][from] = (a[from][from] + prime - v) % prime;
        }
        a[states - 1] = vec![1; states];
        let Some(x) = solve_mod(a, prime) else {
            continue;
        };
        // CRT: residues ← residues + modulus · ((x - residues) · modulus⁻¹ mod p)
        let bp = BigInt::from(prime);
        let minv = pow_mod((&modulus % &bp).to_u64().expect("reduced"), prime - 2, prime);
        for (res, xi) in residues.iter_mut().zip(&x) {
            let cur = res.mod_floor(&bp).to_u64().expect("reduced");
            let d = mul_mod((xi + prime - cur) % prime, minv, prime);
            *res += &modulus * BigInt::from(d);
        }
        modulus *= &bp;

        let Some(pi) = residues
            .iter()
            .map(|r| rational_reconstruct(r, &modulus))
            .collect::<Option<Vec<_>>>()
        else {
            continue;
        };
        if is_stationary(states, &trans, &rates, &pi) {
            return Ok(StateLaw { n, probs: pi });
        }
    }
    Err(Error::Internal("ran out of primes".into()))
}

fn is_stationary(states: usize, trans: &[(usize, usize, Rate)], rates: &[Rational; 6], pi: &[Rational]) -> bool {
    if pi.iter().any(|x| x.is_negative()) || !pi.iter().sum::<Rational>().is_one() {
        return false;
    }
    let mut flow = vec![Rational::zero(); states];
    for &(from, to, r) in trans {
        let f = &pi[from] * &rates[r as usize];
        flow[to] += &f;
        flow[from] -= f;
    }
    flow.iter().all(|f| f.is_zero())
}

/// One state of a cross-validation report.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StateComparison {
    pub state: AsepState,
    #[serde(serialize_with = "crate::rational::serialize")]
    pub tableaux_prob: Rational,
    #[serde(serialize_with = "crate::rational::serialize")]
    pub generator_prob: Rational,
    pub equal: bool,
}

/// Tableaux sum against generator solve for one convention.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConventionReport {
    pub n: usize,
    pub params: AsepParams,
    pub convention: Convention,
    pub per_state: Vec<StateComparison>,
    pub matches: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CrossValidation {
    pub n: usize,
    /// The rates after dividing by `u`.
    pub params: AsepParams,
    pub reports: Vec<ConventionReport>,
    pub matching: Vec<Convention>,
}

impl CrossValidation {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }
}

/// Compares both backends state by state after normalizing `u` to 1.
pub fn cross_validate(n: usize, p: &AsepParams, conventions: &[Convention]) -> Result<CrossValidation> {
    if !(1..=N_CROSS_VALIDATE).contains(&n) {
        return Err(Error::SizeOutOfRange {
            what: "cross-validation",
            n,
            min: 1,
            max: N_CROSS_VALIDATE,
        });
    }
    let p = p.normalized_u()?;
    let generator = steady_state_via_generator(n, &p)?;
    let mut reports = Vec::new();
    for &convention in conventions {
        let tab = steady_state_via_tableaux(n, &p, convention)?;
        let per_state: Vec<StateComparison> = AsepState::all(n)
            .map(|s| StateComparison {
                state: s,
                tableaux_prob: tab.prob(s).clone(),
                generator_prob: generator.prob(s).clone(),
                equal: tab.prob(s) == generator.prob(s),
            })
            .collect();
        let matches = per_state.iter().all(|c| c.equal);
        reports.push(ConventionReport {
            n,
            params: p.clone(),
            convention,
            per_state,
            matches,
        });
    }
    let matching = reports.iter().filter(|r| r.matches).map(|r| r.convention).collect();
    Ok(CrossValidation {
        n,
        params: p,
        reports,
        matching,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formulas::partition_closed_four;
    use crate::rational::{int, ratio};
    use crate::tableau::tests::figure_four_symbol;
    use crate::weights::FourWeights;

    fn params(r: [i64; 6]) -> AsepParams {
        let [a, b, g, d, u, q] = r.map(int);
        AsepParams::new(a, b, g, d, u, q).unwrap()
    }

    #[test]
    fn figure_filling() {
        let g = uq_fill(&figure_four_symbol());
        let expected = [
            "AqqGquA", "qqqqqD", "uuBuG", "qqqD", "uuB", "qG", "B",
        ];
        assert_eq!(g.to_text(), expected.join("\n"));
        assert_eq!(g.monomial(), Monomial([2, 3, 3, 2, 6, 12]));
        assert_eq!(g.monomial().to_string(), "α^2 β^3 γ^3 δ^2 u^6 q^12");
    }

    #[test]
    fn figure_type() {
        let t = figure_four_symbol();
        assert_eq!(tableau_type(&t, Convention::AlphaDelta).to_string(), "• • ∘ • ∘ ∘ ∘");
        assert_eq!(tableau_type(&t, Convention::PaperAlphaGamma).to_string(), "• ∘ • ∘ ∘ • ∘");
    }

    #[test]
    fn size_one_types() {
        let g = Tableau::from_rows(vec![vec![Cell::Gamma]]).unwrap();
        assert!(tableau_type(&g, Convention::PaperAlphaGamma).is_filled(1));
        assert!(!tableau_type(&g, Convention::AlphaDelta).is_filled(1));
        let fill = uq_fill(&g);
        assert_eq!(fill.monomial(), Monomial([0, 0, 1, 0, 0, 0]));
    }

    #[test]
    fn unit_hops_recover_the_four_parameter_partition() {
        let p = AsepParams::new(ratio(1, 2), int(3), ratio(2, 7), int(5), int(1), int(1)).unwrap();
        let fw = FourWeights::new(ratio(1, 2), int(3), ratio(2, 7), int(5)).unwrap();
        for n in 1..=4 {
            assert_eq!(partition_uq(n, &p).unwrap(), partition_closed_four(n, &fw));
        }
    }

    #[test]
    fn size_one_laws() {
        let law = steady_state_via_tableaux(1, &AsepParams::ones(), Convention::default()).unwrap();
        assert_eq!(law.probs(), &[ratio(1, 2), ratio(1, 2)]);
        let p = params([2, 1, 3, 1, 1, 1]);
        let filled = AsepState::new(1, 1);
        let paper = steady_state_via_tableaux(1, &p, Convention::PaperAlphaGamma).unwrap();
        let ad = steady_state_via_tableaux(1, &p, Convention::AlphaDelta).unwrap();
        assert_eq!(paper.prob(filled), &ratio(5, 7));
        assert_eq!(ad.prob(filled), &ratio(3, 7));
        let gen = steady_state_via_generator(1, &p).unwrap();
        assert_eq!(gen.prob(filled), &ratio(3, 7));
        let cv = cross_validate(1, &p, &Convention::ALL).unwrap();
        assert_eq!(cv.matching, vec![Convention::AlphaDelta]);
    }

    #[test]
    fn generator_is_stationary_and_normalized() {
        let p = AsepParams::new(ratio(3, 2), ratio(1, 3), ratio(2, 5), int(2), int(1), ratio(1, 4)).unwrap();
        for n in 1..=5 {
            let law = steady_state_via_generator(n, &p).unwrap();
            assert_eq!(law.probs().iter().sum::<Rational>(), int(1));
            let rates = p.rates();
            let trans = transitions(n);
            assert!(is_stationary(1 << n, &trans, &rates, law.probs()));
        }
    }

    #[test]
    fn reducible_chains_are_reported() {
        // Entry at site 1 and left hops only: 10 and 11 both absorb.
        let p = params([1, 0, 0, 0, 0, 1]);
        assert_eq!(steady_state_via_generator(2, &p).unwrap_err(), Error::Reducible(2));
        // A single absorbing state is still a unique stationary law.
        let full = steady_state_via_generator(2, &params([1, 0, 0, 0, 1, 1])).unwrap();
        assert_eq!(full.prob(AsepState::new(2, 3)), &int(1));
    }

    #[test]
    fn rejects_bad_rates() {
        assert!(AsepParams::parse(["0", "1", "1", "0", "1", "1"]).is_err());
        assert!(AsepParams::parse(["1", "1", "1", "1", "0", "0"]).is_err());
        assert!(AsepParams::parse(["-1", "1", "1", "1", "1", "1"]).is_err());
    }

    #[test]
    fn reconstruction() {
        let m = BigInt::from(1_000_000_007u64) * BigInt::from(998_244_353u64);
        let den_inv = BigInt::from(391).extended_gcd(&m).x.mod_floor(&m);
        let r = (BigInt::from(-17) * den_inv).mod_floor(&m);
        assert_eq!(rational_reconstruct(&r, &m), Some(ratio(-17, 391)));
    }

    #[test]
    fn state_text() {
        let s: AsepState = "• ∘ •".parse().unwrap();
        assert_eq!(s.word(), "101");
        assert_eq!("101".parse::<AsepState>().unwrap(), s);
        assert_eq!(s.to_string(), "• ∘ •");
    }
}
