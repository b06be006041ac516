use num_traits::Zero;
use proptest::prelude::*;
use staircase_lab::dpcount::event_prob;
use staircase_lab::enumerate::normalized_weight;
use staircase_lab::formulas::normalized_partition_closed;
use staircase_lab::moments::{pmf_from_factorial_moments, FactorialMoments};
use staircase_lab::rational::ratio;
use staircase_lab::sampler::{seeded, SampleMethod, Sampler};
use staircase_lab::{BoxIndex, Cell, ConstraintSet, Pmf, Rational, Requirement, Tableau, Weights};

fn weights() -> impl Strategy<Value = Weights> {
    (0i64..8, 1i64..5, 0i64..8, 1i64..5)
        .prop_filter("a = b = 0", |(p, _, r, _)| p + r > 0)
        .prop_map(|(p, q, r, s)| Weights::new(ratio(p, q), ratio(r, s)).unwrap())
}

/// A tableau drawn from the measure itself, so the properties see typical shapes.
fn tableau(max_n: usize) -> impl Strategy<Value = (Tableau, Weights)> {
    (1..=max_n, weights(), any::<u64>()).prop_map(|(n, w, seed)| {
        let s = Sampler::new(n, &w, SampleMethod::ChainRule).unwrap();
        (s.sample(&mut seeded(seed)), w)
    })
}

fn exact(c: Cell) -> Requirement {
    match c {
        Cell::Alpha => Requirement::MustAlpha,
        Cell::Beta => Requirement::MustBeta,
        _ => Requirement::MustEmpty,
    }
}

/// Requires the boxes of `t` to appear in the big tableau at `place(box)`.
fn pin(c: ConstraintSet, t: &Tableau, place: impl Fn(BoxIndex) -> BoxIndex) -> ConstraintSet {
    t.boxes()
        .fold(c, |c, (b, cell)| c.require(place(b), exact(cell)).unwrap())
}

fn prob(t: &Tableau, w: &Weights) -> Rational {
    let c = t.symbol_counts();
    normalized_weight(t.n(), (c.n_alpha, c.n_beta), w) / normalized_partition_closed(t.n(), w)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn transpose_is_an_involution_and_swaps_weights((t, w) in tableau(10)) {
        let s = t.transpose();
        prop_assert!(s.is_valid());
        prop_assert_eq!(&s.transpose(), &t);
        prop_assert_eq!(prob(&s, &w.swapped()), prob(&t, &w));
    }

    #[test]
    fn subtableaux_are_valid((t, _) in tableau(10), i in 1usize..10, j in 1usize..10) {
        prop_assume!(i + j <= t.n() + 1);
        let s = t.subtableau(i, j).unwrap();
        prop_assert_eq!(s.n(), t.n() + 2 - i - j);
        prop_assert!(s.is_valid());
    }

    #[test]
    fn subtableau_law_is_shifted_measure((t, w) in tableau(8), i in 1usize..8, j in 1usize..8) {
        let n = t.n();
        prop_assume!(i + j <= n + 1);
        let s = t.subtableau(i, j).unwrap();
        let event = pin(ConstraintSet::new(), &s, |b| BoxIndex::new(b.i + i - 1, b.j + j - 1));
        prop_assert_eq!(event_prob(n, &w, &event).unwrap(), prob(&s, &w.shifted(i, j)));
    }

    #[test]
    fn alpha_corner_frees_the_rest((t, w) in tableau(8)) {
        let n = t.n() + 2;
        let corner = ConstraintSet::new().with(n - 1, 1, Requirement::MustAlpha);
        let z = event_prob(n, &w, &corner).unwrap();
        prop_assume!(!z.is_zero());
        let event = pin(corner, &t, |b| BoxIndex::new(b.i, b.j + 2));
        prop_assert_eq!(event_prob(n, &w, &event).unwrap() / z, prob(&t, &w));
    }

    #[test]
    fn beta_corner_deletes_a_row_and_column((t, w) in tableau(8)) {
        let m = t.n();
        prop_assume!(m >= 2 && t.at(m, 1) == Cell::Beta);
        let n = m + 1;
        let corner = ConstraintSet::new().with(n - 1, 1, Requirement::MustBeta);
        prop_assume!(!event_prob(n, &w, &corner).unwrap().is_zero());
        let lhs = event_prob(n, &w, &pin(corner.clone(), &t, |b| {
            BoxIndex::new(if b.i < n - 1 { b.i } else { b.i + 1 }, if b.j < 2 { b.j } else { b.j + 1 })
        })).unwrap() / event_prob(n, &w, &corner).unwrap();
        let small = ConstraintSet::new().with(m, 1, Requirement::MustBeta);
        let rhs = prob(&t, &w) / event_prob(m, &w, &small).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn beta_switch(n in 5usize..=12, w in weights(), picks in prop::collection::btree_set(3usize..=10, 1..=3)) {
        let cols: Vec<usize> = picks.into_iter().filter(|&j| j <= n - 2).collect();
        prop_assume!(!cols.is_empty());
        let base = cols
            .iter()
            .fold(ConstraintSet::new(), |c, &j| c.with(n - j - 1, j, Requirement::MustNonEmpty));
        let lhs = base.clone()
            .with(n - 1, 1, Requirement::MustEmpty)
            .with(n, 1, Requirement::MustBeta);
        let rhs = base.with(n - 1, 2, Requirement::MustBeta);
        prop_assert_eq!(event_prob(n, &w, &lhs).unwrap(), event_prob(n, &w, &rhs).unwrap());
    }

    #[test]
    fn constraints_only_shrink_events(
        n in 2usize..=10,
        w in weights(),
        reqs in prop::collection::vec((1usize..=10, 1usize..=10, 0usize..4), 1..5),
    ) {
        let kinds = [Requirement::MustAlpha, Requirement::MustBeta, Requirement::MustNonEmpty, Requirement::MustEmpty];
        let mut c = ConstraintSet::new();
        let mut last = event_prob(n, &w, &c).unwrap();
        for (i, j, k) in reqs {
            if i + j > n + 1 {
                continue;
            }
            let Ok(next) = c.clone().require(BoxIndex::new(i, j), kinds[k]) else { continue };
            let p = event_prob(n, &w, &next).unwrap();
            prop_assert!(p <= last);
            c = next;
            last = p;
        }
    }

    #[test]
    fn factorial_moments_invert(weights in prop::collection::vec(0i64..20, 1..8)) {
        prop_assume!(weights.iter().any(|&x| x > 0));
        let pmf = Pmf::from_weights(weights.iter().map(|&x| ratio(x, 1)).collect()).unwrap();
        let mu = FactorialMoments::new(pmf.factorial_moments(pmf.max_support() + 1)).unwrap();
        prop_assert_eq!(pmf_from_factorial_moments(&mu).unwrap(), pmf);
    }
}
