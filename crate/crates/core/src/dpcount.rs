//! Constrained weighted counting by a column sweep.
//!
//! Boxes are visited column by column, left to right, and top to bottom
//! inside a column. A β only looks left (its row must still be clean) and an
//! α only looks up inside its own column, so the state
//! `(dirty-row mask, has_symbol_above)` carries everything later boxes need.
//! The bottom box of each column lies on the main diagonal; once it is
//! placed its row never appears again and its bit is dropped.
//!
//! With `a = pa/qa` and `b = pb/qb` the normalized weight
//! `a^{n-Nα} b^{n-Nβ}` times `(qa·qb)^n` is a product of integer factors
//! attached to single placements:
//!
//! * α in a clean row contributes `qa·pb` (the row will never hold a β),
//!   α in a dirty row contributes `qa`;
//! * β as the first symbol of its column contributes `qb·pa` (the column
//!   will never hold an α), a later β contributes `qb`.
//!
//! Every row and column receives at least one symbol through the diagonal,
//! so this accounts for each factor exactly once. Values are computed in
//! `u128` and recomputed with big integers if anything overflows.

use std::fmt::Debug;

use num_bigint::{BigInt, BigUint, RandBigInt};
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use rayon::prelude::*;

use crate::constraint::{ConstraintSet, Requirement};
use crate::error::{Error, Result};
use crate::pmf::Pmf;
use crate::rational::{unsigned_parts, Rational};
use crate::statistic::Statistic;
use crate::tableau::{sweep_order, BoxIndex, Cell, Tableau};
use crate::weights::Weights;

/// Largest size accepted by the counting engine.
pub const N_DP: usize = 22;

const BLOCK: usize = 2048;

pub(crate) fn check_dp_range(n: usize) -> Result<()> {
    if (1..=N_DP).contains(&n) {
        Ok(())
    } else {
        Err(Error::SizeOutOfRange {
            what: "constrained counting",
            n,
            min: 1,
            max: N_DP,
        })
    }
}

/// Scalar type of the sweep.
pub(crate) trait Coeff: Clone + Send + Sync + Debug + 'static {
    fn zero() -> Self;
    fn one() -> Self;
    fn from_big(x: &BigUint) -> Option<Self>;
    fn is_zero(&self) -> bool;
    /// `self += x·f`, reporting overflow with `false`.
    fn add_mul(&mut self, x: &Self, f: &Self) -> bool;
    fn add(&mut self, x: &Self) -> bool;
    fn to_big(&self) -> BigUint;
}

impl Coeff for u128 {
    fn zero() -> Self {
        0
    }
    fn one() -> Self {
        1
    }
    fn from_big(x: &BigUint) -> Option<Self> {
        x.to_u128()
    }
    fn is_zero(&self) -> bool {
        *self == 0
    }
    #[inline]
    fn add_mul(&mut self, x: &Self, f: &Self) -> bool {
        match x.checked_mul(*f).and_then(|p| self.checked_add(p)) {
            Some(v) => {
                *self = v;
                true
            }
            None => false,
        }
    }
    #[inline]
    fn add(&mut self, x: &Self) -> bool {
        match self.checked_add(*x) {
            Some(v) => {
                *self = v;
                true
            }
            None => false,
        }
    }
    fn to_big(&self) -> BigUint {
        BigUint::from(*self)
    }
}

impl Coeff for BigUint {
    fn zero() -> Self {
        <BigUint as Zero>::zero()
    }
    fn one() -> Self {
        <BigUint as One>::one()
    }
    fn from_big(x: &BigUint) -> Option<Self> {
        Some(x.clone())
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn add_mul(&mut self, x: &Self, f: &Self) -> bool {
        if !Zero::is_zero(x) {
            *self += x * f;
        }
        true
    }
    fn add(&mut self, x: &Self) -> bool {
        *self += x;
        true
    }
    fn to_big(&self) -> BigUint {
        self.clone()
    }
}

impl Coeff for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_big(x: &BigUint) -> Option<Self> {
        x.to_f64()
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn add_mul(&mut self, x: &Self, f: &Self) -> bool {
        *self += x * f;
        true
    }
    fn add(&mut self, x: &Self) -> bool {
        *self += x;
        true
    }
    fn to_big(&self) -> BigUint {
        num_traits::FromPrimitive::from_f64(self.floor()).unwrap_or_default()
    }
}

/// Exact scalars the sampler can draw against.
pub(crate) trait ExactCoeff: Coeff + Ord {
    fn sample_below<R: Rng + ?Sized>(rng: &mut R, bound: &Self) -> Self;
    fn sub_assign(&mut self, x: &Self);
}

impl ExactCoeff for u128 {
    fn sample_below<R: Rng + ?Sized>(rng: &mut R, bound: &Self) -> Self {
        rng.gen_range(0..*bound)
    }
    fn sub_assign(&mut self, x: &Self) {
        *self -= *x;
    }
}

impl ExactCoeff for BigUint {
    fn sample_below<R: Rng + ?Sized>(rng: &mut R, bound: &Self) -> Self {
        rng.gen_biguint_below(bound)
    }
    fn sub_assign(&mut self, x: &Self) {
        *self -= x;
    }
}

/// How marked placements act on the lanes of a value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Marking {
    /// One lane, marks ignored.
    Plain,
    /// Lane `k` holds the weight of `X = k`: a mark multiplies by `z`.
    Pgf,
    /// Lane `k` holds `Σ C(X, k)·wt`: a mark multiplies by `1 + y`.
    Binomial,
}

#[derive(Debug, Clone, Copy)]
struct CellPlan {
    empty: bool,
    alpha: bool,
    beta: bool,
    mark_alpha: bool,
    mark_beta: bool,
}

struct Plan {
    n: usize,
    cells: Vec<CellPlan>,
    marking: Marking,
    lanes: usize,
    pa: BigUint,
    qa: BigUint,
    pb: BigUint,
    qb: BigUint,
}

impl Plan {
    fn new(
        n: usize,
        w: &Weights,
        c: &ConstraintSet,
        marks: Option<Statistic>,
        marking: Marking,
        lanes: usize,
    ) -> Result<Plan> {
        check_dp_range(n)?;
        c.check_shape(n)?;
        let cells = sweep_order(n)
            .into_iter()
            .map(|b| {
                let req = c.get(b);
                let counts = |cell| marks.is_some_and(|s| s.counts(n, b, cell));
                CellPlan {
                    empty: !b.is_main_diagonal(n) && req.allows(Cell::Empty),
                    alpha: req.allows(Cell::Alpha),
                    beta: req.allows(Cell::Beta),
                    mark_alpha: counts(Cell::Alpha),
                    mark_beta: counts(Cell::Beta),
                }
            })
            .collect();
        let (pa, qa) = unsigned_parts(w.a());
        let (pb, qb) = unsigned_parts(w.b());
        Ok(Plan {
            n,
            cells,
            marking,
            lanes,
            pa,
            qa,
            pb,
            qb,
        })
    }

    /// `(qa·qb)^n`, the scale of every integer result.
    fn scale(&self) -> BigUint {
        num_traits::pow(&self.qa * &self.qb, self.n)
    }
}

#[derive(Debug, Clone)]
struct Factors<C> {
    one: C,
    alpha_clean: C,
    alpha_dirty: C,
    beta_first: C,
    beta_later: C,
}

impl<C: Coeff> Factors<C> {
    fn new(p: &Plan) -> Option<Self> {
        Some(Factors {
            one: C::one(),
            alpha_clean: C::from_big(&(&p.qa * &p.pb))?,
            alpha_dirty: C::from_big(&p.qa)?,
            beta_first: C::from_big(&(&p.qb * &p.pa))?,
            beta_later: C::from_big(&p.qb)?,
        })
    }

    fn alpha(&self, row_dirty: bool) -> &C {
        if row_dirty {
            &self.alpha_dirty
        } else {
            &self.alpha_clean
        }
    }

    fn beta(&self, symbol_above: bool) -> &C {
        if symbol_above {
            &self.beta_later
        } else {
            &self.beta_first
        }
    }
}

/// Work counters of one sweep.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DpStats {
    /// Masks stored at column boundaries, summed over columns.
    pub boundary_states: usize,
    /// `(mask, flag)` states written, summed over all boxes.
    pub cell_states: usize,
    /// Largest single layer.
    pub peak_states: usize,
}

#[inline]
fn accumulate<C: Coeff>(dst: &mut [C], src: &[C], f: &C, marked: bool, marking: Marking) -> bool {
    let lanes = dst.len();
    if !marked || marking == Marking::Plain {
        for k in 0..lanes {
            if !src[k].is_zero() && !dst[k].add_mul(&src[k], f) {
                return false;
            }
        }
        return true;
    }
    for k in 0..lanes {
        if src[k].is_zero() {
            continue;
        }
        if marking == Marking::Binomial && !dst[k].add_mul(&src[k], f) {
            return false;
        }
        if k + 1 < lanes && !dst[k + 1].add_mul(&src[k], f) {
            return false;
        }
    }
    true
}

/// One box of the forward sweep, written as a gather over target states.
#[allow(clippy::too_many_arguments)]
fn forward_cell<C: Coeff>(
    src: &[C],
    src_width: usize,
    dst: &mut [C],
    i: usize,
    cp: &CellPlan,
    f: &Factors<C>,
    lanes: usize,
    marking: Marking,
) -> bool {
    let bit = 1usize << (i - 1);
    let src_masks = 1usize << src_width;
    let get = |mask: usize, flag: usize| -> Option<&[C]> {
        (mask < src_masks).then(|| {
            let o = (mask * 2 + flag) * lanes;
            &src[o..o + lanes]
        })
    };
    let state = 2 * lanes;
    dst.par_chunks_mut(state * BLOCK).enumerate().all(|(bi, chunk)| {
        for (k, slot) in chunk.chunks_mut(state).enumerate() {
            let m = bi * BLOCK + k;
            slot.iter_mut().for_each(|x| *x = C::zero());
            let (d0, d1) = slot.split_at_mut(lanes);
            if cp.empty {
                if let Some(s) = get(m, 0) {
                    if !accumulate(d0, s, &f.one, false, marking) {
                        return false;
                    }
                }
                if let Some(s) = get(m, 1) {
                    if !accumulate(d1, s, &f.one, false, marking) {
                        return false;
                    }
                }
            }
            if m & bit == 0 {
                continue;
            }
            let clean = m ^ bit;
            if cp.alpha {
                if let Some(s) = get(m, 0) {
                    if !accumulate(d1, s, f.alpha(true), cp.mark_alpha, marking) {
                        return false;
                    }
                }
                if let Some(s) = get(clean, 0) {
                    if !accumulate(d1, s, f.alpha(false), cp.mark_alpha, marking) {
                        return false;
                    }
                }
            }
            if cp.beta {
                for flag in 0..2 {
                    if let Some(s) = get(clean, flag) {
                        if !accumulate(d1, s, f.beta(flag == 1), cp.mark_beta, marking) {
                            return false;
                        }
                    }
                }
            }
        }
        true
    })
}

/// Closes a column of height `h`: keep flag-1 states and forget row `h`.
fn fold_column<C: Coeff>(src: &[C], h: usize, dst: &mut [C], lanes: usize) -> bool {
    let top = 1usize << (h - 1);
    let state = 2 * lanes;
    dst.par_chunks_mut(state * BLOCK).enumerate().all(|(bi, chunk)| {
        for (k, slot) in chunk.chunks_mut(state).enumerate() {
            let m = bi * BLOCK + k;
            slot.iter_mut().for_each(|x| *x = C::zero());
            for mask in [m, m | top] {
                let o = (mask * 2 + 1) * lanes;
                for l in 0..lanes {
                    if !slot[l].add(&src[o + l]) {
                        return false;
                    }
                }
            }
        }
        true
    })
}

fn forward<C: Coeff>(plan: &Plan, stats: &mut DpStats) -> Option<Vec<C>> {
    let n = plan.n;
    let lanes = plan.lanes;
    let f = Factors::<C>::new(plan)?;
    let mut src = vec![C::zero(); 2 * lanes];
    src[0] = C::one();
    let mut dst: Vec<C> = Vec::new();
    let mut width = 0usize;
    let mut pos = 0usize;
    *stats = DpStats::default();
    for j in 1..=n {
        let h = n + 1 - j;
        for i in 1..=h {
            // Before column 2 only rows already visited can be dirty.
            let wd = if j == 1 { i } else { h };
            let len = (1usize << wd) * 2 * lanes;
            dst.clear();
            dst.resize(len, C::zero());
            if !forward_cell(&src, width, &mut dst, i, &plan.cells[pos], &f, lanes, plan.marking) {
                return None;
            }
            pos += 1;
            std::mem::swap(&mut src, &mut dst);
            width = wd;
            stats.cell_states += 2 << wd;
            stats.peak_states = stats.peak_states.max(2 << wd);
        }
        let wd = h - 1;
        dst.clear();
        dst.resize((1usize << wd) * 2 * lanes, C::zero());
        if !fold_column(&src, h, &mut dst, lanes) {
            return None;
        }
        std::mem::swap(&mut src, &mut dst);
        width = wd;
        stats.boundary_states += 1 << wd;
    }
    src.truncate(lanes);
    Some(src)
}

fn run_exact(plan: &Plan) -> (Vec<Rational>, DpStats) {
    let mut stats = DpStats::default();
    let raw: Vec<BigUint> = match forward::<u128>(plan, &mut stats) {
        Some(v) => v.iter().map(Coeff::to_big).collect(),
        None => forward::<BigUint>(plan, &mut stats).expect("big integers do not overflow"),
    };
    let scale = BigInt::from(plan.scale());
    let out = raw
        .into_iter()
        .map(|x| Rational::new(BigInt::from(x), scale.clone()))
        .collect();
    (out, stats)
}

/// `Σ a^{n-Nα} b^{n-Nβ}` over tableaux satisfying `c`; contradictory
/// constraints simply give 0.
pub fn constrained_partition(n: usize, w: &Weights, c: &ConstraintSet) -> Result<Rational> {
    Ok(partition_with_stats(n, w, c)?.0)
}

pub fn partition_with_stats(n: usize, w: &Weights, c: &ConstraintSet) -> Result<(Rational, DpStats)> {
    let plan = Plan::new(n, w, c, None, Marking::Plain, 1)?;
    let (mut v, stats) = run_exact(&plan);
    Ok((v.swap_remove(0), stats))
}

/// `P_{n,α,β}(S satisfies c)`.
pub fn event_prob(n: usize, w: &Weights, c: &ConstraintSet) -> Result<Rational> {
    let num = constrained_partition(n, w, c)?;
    let den = constrained_partition(n, w, &ConstraintSet::new())?;
    Ok(num / den)
}

/// Floating-point sweep for timing comparisons only.
pub fn partition_f64(n: usize, w: &Weights) -> Result<f64> {
    let plan = Plan::new(n, w, &ConstraintSet::new(), None, Marking::Plain, 1)?;
    let mut stats = DpStats::default();
    let v = forward::<f64>(&plan, &mut stats).ok_or(Error::Internal("float sweep".into()))?;
    let scale = plan.scale().to_f64().unwrap_or(f64::INFINITY);
    Ok(v[0] / scale)
}

/// Weight of `{stat = k}` within the event `c`, for every `k`.
pub fn statistic_weights(n: usize, w: &Weights, c: &ConstraintSet, stat: Statistic) -> Result<Vec<Rational>> {
    let lanes = stat.max_value(n) + 1;
    let plan = Plan::new(n, w, c, Some(stat), Marking::Pgf, lanes)?;
    Ok(run_exact(&plan).0)
}

/// Exact law of a statistic, at sizes well beyond enumeration.
pub fn statistic_pmf(n: usize, w: &Weights, stat: Statistic) -> Result<Pmf> {
    let weights = statistic_weights(n, w, &ConstraintSet::new(), stat)?;
    Pmf::from_weights(weights)
}

/// `E C(X, r)` for `r = 0..=max_r`, where `X = stat`.
pub fn binomial_moments(n: usize, w: &Weights, stat: Statistic, max_r: usize) -> Result<Vec<Rational>> {
    let plan = Plan::new(n, w, &ConstraintSet::new(), Some(stat), Marking::Binomial, max_r + 1)?;
    let (v, _) = run_exact(&plan);
    let z = v[0].clone();
    Ok(v.into_iter().map(|x| x / &z).collect())
}

/// Conditional law of one box given the boxes before it in sweep order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellLaw {
    pub at: BoxIndex,
    pub empty: Rational,
    pub alpha: Rational,
    pub beta: Rational,
}

impl CellLaw {
    pub fn prob(&self, c: Cell) -> Rational {
        match c {
            Cell::Empty => self.empty.clone(),
            Cell::Alpha => self.alpha.clone(),
            Cell::Beta => self.beta.clone(),
            _ => Rational::zero(),
        }
    }
}

/// Completion weights for sampling and for conditional box laws.
///
/// `boundary[j]` holds, for every dirty mask entering column `j`, the total
/// weight of all ways to fill columns `j..=n`. Inside a column only the
/// states reachable from the actual incoming mask are recomputed, which costs
/// about `2^{h+2}` for a column of height `h`.
pub struct ChainRule {
    n: usize,
    scale: BigUint,
    tables: Tables,
}

enum Tables {
    Small(Chain<u128>),
    Big(Chain<BigUint>),
}

struct Chain<C> {
    n: usize,
    cells: Vec<CellPlan>,
    f: Factors<C>,
    boundary: Vec<Vec<C>>,
    total: C,
}

/// Within-column completion weights for one incoming mask.
/// `levels[i-1][lo*2+flag]` is the weight of finishing the column from row `i`.
struct ColumnTables<C> {
    levels: Vec<Vec<C>>,
}

fn column_start(n: usize, j: usize) -> usize {
    // Boxes in columns before j.
    (1..j).map(|c| n + 1 - c).sum()
}

impl<C: ExactCoeff> Chain<C> {
    fn build(plan: &Plan) -> Option<Self> {
        let n = plan.n;
        let f = Factors::<C>::new(plan)?;
        let mut chain = Chain {
            n,
            cells: plan.cells.clone(),
            f,
            boundary: vec![Vec::new(); n + 2],
            total: C::zero(),
        };
        chain.boundary[n + 1] = vec![C::one()];
        for j in (2..=n).rev() {
            chain.boundary[j] = chain.full_column(j)?;
        }
        let first = chain.column(1, 0)?;
        chain.total = first.levels[0][0].clone();
        Some(chain)
    }

    /// Completion weights of column `j` for every incoming mask.
    fn full_column(&self, j: usize) -> Option<Vec<C>> {
        let h = self.n + 1 - j;
        let next = &self.boundary[j + 1];
        let keep = (1usize << (h - 1)) - 1;
        let mut level: Vec<C> = (0..(2usize << h))
            .map(|s| if s & 1 == 1 { next[(s >> 1) & keep].clone() } else { C::zero() })
            .collect();
        let mut prev = vec![C::zero(); level.len()];
        let start = column_start(self.n, j);
        for i in (1..=h).rev() {
            let cp = self.cells[start + i - 1];
            let bit = 1usize << (i - 1);
            let f = &self.f;
            let ok = prev.par_chunks_mut(2 * BLOCK).enumerate().all(|(bi, chunk)| {
                for (k, slot) in chunk.chunks_mut(2).enumerate() {
                    let m = bi * BLOCK + k;
                    for flag in 0..2 {
                        let mut acc = C::zero();
                        let dirty = m & bit != 0;
                        if cp.empty && !acc.add(&level[m * 2 + flag]) {
                            return false;
                        }
                        let target = &level[(m | bit) * 2 + 1];
                        if cp.alpha && flag == 0 && !acc.add_mul(target, f.alpha(dirty)) {
                            return false;
                        }
                        if cp.beta && !dirty && !acc.add_mul(target, f.beta(flag == 1)) {
                            return false;
                        }
                        slot[flag] = acc;
                    }
                }
                true
            });
            if !ok {
                return None;
            }
            std::mem::swap(&mut level, &mut prev);
        }
        Some(level.into_iter().step_by(2).collect())
    }

    /// Completion weights of column `j` from the states reachable from `mask`.
    fn column(&self, j: usize, mask: usize) -> Option<ColumnTables<C>> {
        let h = self.n + 1 - j;
        let next = &self.boundary[j + 1];
        let keep = (1usize << (h - 1)) - 1;
        let start = column_start(self.n, j);
        let mut levels: Vec<Vec<C>> = vec![Vec::new(); h + 1];
        levels[h] = (0..(2usize << h))
            .map(|s| if s & 1 == 1 { next[(s >> 1) & keep].clone() } else { C::zero() })
            .collect();
        for i in (1..=h).rev() {
            let cp = self.cells[start + i - 1];
            let bit = 1usize << (i - 1);
            let dirty = mask & bit != 0;
            let below = &levels[i];
            let mut cur = vec![C::zero(); 2usize << (i - 1)];
            for lo in 0..bit {
                // Level i+1 is indexed by the low i bits of the mask.
                let idx = |newbit: bool| lo | if newbit { bit } else { 0 };
                for flag in 0..2 {
                    let mut acc = C::zero();
                    if cp.empty && !acc.add(&below[idx(dirty) * 2 + flag]) {
                        return None;
                    }
                    let target = &below[idx(true) * 2 + 1];
                    if cp.alpha && flag == 0 && !acc.add_mul(target, self.f.alpha(dirty)) {
                        return None;
                    }
                    if cp.beta && !dirty && !acc.add_mul(target, self.f.beta(flag == 1)) {
                        return None;
                    }
                    cur[lo * 2 + flag] = acc;
                }
            }
            levels[i - 1] = cur;
        }
        Some(ColumnTables { levels })
    }

    /// The placements available at row `i` of a column with incoming `mask`,
    /// from state `(lo, flag)`, with their integer weights.
    fn options(
        &self,
        tables: &ColumnTables<C>,
        cp: &CellPlan,
        mask: usize,
        i: usize,
        lo: usize,
        flag: usize,
    ) -> Option<Vec<(Cell, C, usize, usize)>> {
        let bit = 1usize << (i - 1);
        let dirty = mask & bit != 0;
        let below = &tables.levels[i];
        let mut out = Vec::with_capacity(3);
        let weigh = |f: &C, lo2: usize, flag2: usize| -> Option<C> {
            let mut v = C::zero();
            v.add_mul(&below[lo2 * 2 + flag2], f).then_some(v)
        };
        if cp.empty {
            let lo2 = lo | if dirty { bit } else { 0 };
            out.push((Cell::Empty, weigh(&self.f.one, lo2, flag)?, lo2, flag));
        }
        if cp.alpha && flag == 0 {
            out.push((Cell::Alpha, weigh(self.f.alpha(dirty), lo | bit, 1)?, lo | bit, 1));
        }
        if cp.beta && !dirty {
            out.push((Cell::Beta, weigh(self.f.beta(flag == 1), lo | bit, 1)?, lo | bit, 1));
        }
        Some(out)
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<Vec<Cell>> {
        let n = self.n;
        let mut out = Vec::with_capacity(n * (n + 1) / 2);
        let mut mask = 0usize;
        for j in 1..=n {
            let h = n + 1 - j;
            let tables = self.column(j, mask)?;
            let start = column_start(n, j);
            let (mut lo, mut flag) = (0usize, 0usize);
            for i in 1..=h {
                let total = &tables.levels[i - 1][lo * 2 + flag];
                let mut u = C::sample_below(rng, total);
                let options = self.options(&tables, &self.cells[start + i - 1], mask, i, lo, flag)?;
                let mut chosen = None;
                for (cell, wgt, lo2, flag2) in options {
                    if u < wgt {
                        chosen = Some((cell, lo2, flag2));
                        break;
                    }
                    u.sub_assign(&wgt);
                }
                let (cell, lo2, flag2) = chosen?;
                out.push(cell);
                lo = lo2;
                flag = flag2;
            }
            mask = lo & ((1usize << (h - 1)) - 1);
        }
        Some(out)
    }

    fn cell_law(&self, prefix: &[Cell]) -> Result<(BoxIndex, [C; 3], C)> {
        let n = self.n;
        let order = sweep_order(n);
        if prefix.len() >= order.len() {
            return Err(Error::PrefixTooLong(prefix.len()));
        }
        let target = order[prefix.len()];
        let mut mask = 0usize;
        let mut pos = 0usize;
        for j in 1..=target.j {
            let h = n + 1 - j;
            let tables = self
                .column(j, mask)
                .ok_or_else(|| Error::Internal("completion table overflow".into()))?;
            let (mut lo, mut flag) = (0usize, 0usize);
            for i in 1..=h {
                let cp = &self.cells[pos];
                let options = self
                    .options(&tables, cp, mask, i, lo, flag)
                    .ok_or_else(|| Error::Internal("completion table overflow".into()))?;
                if pos == prefix.len() {
                    let total = tables.levels[i - 1][lo * 2 + flag].clone();
                    if total.is_zero() {
                        return Err(Error::InconsistentPrefix);
                    }
                    let mut law = [C::zero(), C::zero(), C::zero()];
                    for (cell, wgt, _, _) in options {
                        let k = match cell {
                            Cell::Empty => 0,
                            Cell::Alpha => 1,
                            _ => 2,
                        };
                        law[k] = wgt;
                    }
                    return Ok((target, law, total));
                }
                let placed = prefix[pos];
                let (_, wgt, lo2, flag2) = options
                    .into_iter()
                    .find(|o| o.0 == placed)
                    .ok_or(Error::InconsistentPrefix)?;
                if wgt.is_zero() {
                    return Err(Error::InconsistentPrefix);
                }
                lo = lo2;
                flag = flag2;
                pos += 1;
            }
            mask = lo & ((1usize << (h - 1)) - 1);
        }
        Err(Error::Internal("prefix replay ran past its target".into()))
    }
}

fn big_ratio(x: &BigUint, y: &BigUint) -> Rational {
    Rational::new(BigInt::from(x.clone()), BigInt::from(y.clone()))
}

impl ChainRule {
    pub fn new(n: usize, w: &Weights) -> Result<Self> {
        let plan = Plan::new(n, w, &ConstraintSet::new(), None, Marking::Plain, 1)?;
        let tables = match Chain::<u128>::build(&plan) {
            Some(c) => Tables::Small(c),
            None => Tables::Big(
                Chain::<BigUint>::build(&plan)
                    .ok_or_else(|| Error::Internal("big integers do not overflow".into()))?,
            ),
        };
        Ok(ChainRule {
            n,
            scale: plan.scale(),
            tables,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Whether the completion tables needed big integers.
    pub fn is_big(&self) -> bool {
        matches!(self.tables, Tables::Big(_))
    }

    /// The normalized partition function `Σ a^{n-Nα} b^{n-Nβ}`.
    pub fn partition(&self) -> Rational {
        let total = match &self.tables {
            Tables::Small(c) => c.total.to_big(),
            Tables::Big(c) => c.total.clone(),
        };
        big_ratio(&total, &self.scale)
    }

    /// Law of the next box in sweep order given the boxes before it.
    pub fn conditional_cell_law(&self, prefix: &[Cell]) -> Result<CellLaw> {
        fn finish<C: Coeff>(at: BoxIndex, law: [C; 3], total: C) -> CellLaw {
            let t = total.to_big();
            CellLaw {
                at,
                empty: big_ratio(&law[0].to_big(), &t),
                alpha: big_ratio(&law[1].to_big(), &t),
                beta: big_ratio(&law[2].to_big(), &t),
            }
        }
        match &self.tables {
            Tables::Small(c) => c.cell_law(prefix).map(|(a, l, t)| finish(a, l, t)),
            Tables::Big(c) => c.cell_law(prefix).map(|(a, l, t)| finish(a, l, t)),
        }
    }

    /// One exact draw from `P_{n,α,β}`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Tableau {
        let cells = match &self.tables {
            Tables::Small(c) => c.sample(rng),
            Tables::Big(c) => c.sample(rng),
        }
        .expect("completion tables are consistent");
        let order = sweep_order(self.n);
        let mut t = Tableau::empty(self.n);
        for (b, c) in order.into_iter().zip(cells) {
            t.set(b, c);
        }
        t
    }
}

/// Conditional law of the next box; builds fresh tables on every call.
pub fn conditional_cell_law(n: usize, w: &Weights, prefix: &[Cell]) -> Result<CellLaw> {
    ChainRule::new(n, w)?.conditional_cell_law(prefix)
}

/// Turns a fixed tableau prefix into box constraints.
pub fn prefix_constraints(n: usize, prefix: &[Cell]) -> Result<ConstraintSet> {
    let order = sweep_order(n);
    if prefix.len() > order.len() {
        return Err(Error::PrefixTooLong(prefix.len()));
    }
    let mut c = ConstraintSet::new();
    for (b, cell) in order.into_iter().zip(prefix) {
        let r = match cell {
            Cell::Empty => Requirement::MustEmpty,
            Cell::Alpha => Requirement::MustAlpha,
            Cell::Beta => Requirement::MustBeta,
            _ => return Err(Error::InconsistentPrefix),
        };
        c = c.require(b, r)?;
    }
    Ok(c)
}
