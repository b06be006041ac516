use staircase_lab::dpcount::binomial_moments;
use staircase_lab::enumerate::{enumerate_tableaux, OracleMeasure};
use staircase_lab::moments::statistic_law;
use staircase_lab::rational::{int, to_f64};
use staircase_lab::sampler::{empirical_pmf, sample, sample_four, seeded, Sampler};
use staircase_lab::{Cell, FourWeights, SampleMethod, Statistic, Tableau, Weights};
use std::collections::HashMap;

const METHODS: [SampleMethod; 2] = [SampleMethod::EnumAlias, SampleMethod::ChainRule];

#[test]
fn every_size_two_tableau_within_four_sigma() {
    let w = Weights::unit();
    let oracle = OracleMeasure::new(2, &w).unwrap();
    let draws = 60_000u32;
    for method in METHODS {
        let mut rng = seeded(2024);
        let mut counts: HashMap<Tableau, u32> = HashMap::new();
        for _ in 0..draws {
            *counts.entry(sample(2, &w, &mut rng, method).unwrap()).or_default() += 1;
        }
        let all: Vec<_> = enumerate_tableaux(2).unwrap().collect();
        assert_eq!(all.len(), 6);
        for t in all {
            let p = to_f64(&oracle.prob(&t));
            let f = counts.get(&t).copied().unwrap_or(0) as f64 / draws as f64;
            let sigma = (p * (1.0 - p) / draws as f64).sqrt();
            assert!((f - p).abs() < 4.0 * sigma, "{method}: {f} vs {p}");
        }
    }
}

#[test]
fn size_six_second_diagonal_law() {
    for w in [Weights::unit(), Weights::parse("1/2", "3").unwrap()] {
        let exact = statistic_law(6, &w, Statistic::X2).unwrap();
        let mut emp = Vec::new();
        for (seed, method) in [(1, SampleMethod::EnumAlias), (2, SampleMethod::ChainRule)] {
            let mut rng = seeded(seed);
            let e = empirical_pmf(6, &w, Statistic::X2, 100_000, &mut rng, method).unwrap();
            assert!(e.tv_to(&exact) < 0.01, "{method}: {}", e.tv_to(&exact));
            emp.push(e);
        }
        assert!(emp[0].tv_between(&emp[1]) < 0.015);
    }
}

#[test]
fn size_sixteen_third_diagonal_mean() {
    let w = Weights::unit();
    let exact_mean = to_f64(&binomial_moments(16, &w, Statistic::X3, 1).unwrap()[1]);
    let mut rng = seeded(16);
    let e = empirical_pmf(16, &w, Statistic::X3, 1500, &mut rng, SampleMethod::ChainRule).unwrap();
    let z = (e.mean() - exact_mean) / e.mean_std_error();
    assert!(z.abs() < 4.0, "mean {} vs {exact_mean}, z = {z}", e.mean());
}

#[test]
fn four_symbols_uniform_at_size_one() {
    let fw = FourWeights::ones();
    let draws = 100_000;
    let mut rng = seeded(4);
    let mut counts: HashMap<Cell, u64> = HashMap::new();
    for _ in 0..draws {
        let t = sample_four(1, &fw, &mut rng, SampleMethod::ChainRule).unwrap();
        *counts.entry(t.at(1, 1)).or_default() += 1;
    }
    let expected = draws as f64 / 4.0;
    let chi2: f64 = [Cell::Alpha, Cell::Beta, Cell::Gamma, Cell::Delta]
        .iter()
        .map(|c| (counts.get(c).copied().unwrap_or(0) as f64 - expected).powi(2) / expected)
        .sum();
    // 0.999 quantile of chi-square with 3 degrees of freedom
    assert!(chi2 < 16.27, "chi2 = {chi2}");
}

#[test]
fn gamma_share_matches_rates() {
    let fw = FourWeights::new(int(2), int(1), int(3), int(1)).unwrap();
    let mut rng = seeded(5);
    let sampler = Sampler::new(5, &fw.merged(), SampleMethod::EnumAlias).unwrap();
    let (mut gamma, mut alpha_like) = (0u64, 0u64);
    for _ in 0..20_000 {
        let t = staircase_lab::sampler::randomize_four_params(&sampler.sample(&mut rng), &fw, &mut rng);
        let s = t.symbol_counts();
        gamma += s.n_gamma as u64;
        alpha_like += (s.n_gamma + s.n_alpha) as u64;
    }
    let f = gamma as f64 / alpha_like as f64;
    let sigma = (0.6 * 0.4 / alpha_like as f64).sqrt();
    assert!((f - 0.6).abs() < 4.0 * sigma, "{f}");
}
