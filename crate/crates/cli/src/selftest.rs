//! Small-size oracle-equivalence suites: every closed form and every fast
//! engine against brute-force enumeration.

use staircase_lab::asep::{cross_validate, AsepParams, Convention};
use staircase_lab::dpcount::{statistic_pmf, ChainRule};
use staircase_lab::enumerate::{
    brute_partition, count_tableaux, enumerate_tableaux, oracle_event_prob, oracle_statistic_pmf, OracleMeasure,
};
use staircase_lab::formulas::{
    box_law, diagonal_event, gap_index_count, gap_index_sets, lemma_la_sum, partition_closed, second_diag_joint,
    GapTuples, IndexTuple, JointKind,
};
use staircase_lab::moments::statistic_law;
use staircase_lab::rational::factorial;
use staircase_lab::tableau::sweep_order;
use staircase_lab::{BoxIndex, ConstraintSet, Diagonal, Rational, Requirement, Statistic, Weights};

use crate::Failure;

type Suite = fn() -> Result<usize, String>;

fn weight_grid() -> Vec<Weights> {
    [("1", "1"), ("1/2", "3"), ("3", "1/2"), ("0", "1"), ("2/7", "0")]
        .iter()
        .map(|(a, b)| Weights::parse(a, b).expect("valid"))
        .collect()
}

fn finite_grid() -> Vec<Weights> {
    weight_grid().into_iter().filter(|w| w.alpha().is_some() && w.beta().is_some()).collect()
}

fn ensure(ok: bool, what: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(what())
    }
}

fn partitions() -> Result<usize, String> {
    let mut checks = 0;
    for n in 1..=5 {
        let c = count_tableaux(n).map_err(|e| e.to_string())?;
        ensure(u64::try_from(factorial(n + 1)).ok() == Some(c), || format!("count at n={n}: {c}"))?;
        for w in finite_grid() {
            let closed = partition_closed(n, &w).map_err(|e| e.to_string())?;
            let brute = brute_partition(n, &w).map_err(|e| e.to_string())?;
            ensure(closed == brute, || format!("n={n} {w}: closed {closed} brute {brute}"))?;
            checks += 2;
        }
    }
    Ok(checks)
}

fn box_laws() -> Result<usize, String> {
    let mut checks = 0;
    for n in 1..=5 {
        for w in weight_grid() {
            for i in 1..=n {
                for j in 1..=n + 1 - i {
                    let b = BoxIndex::new(i, j);
                    let law = box_law(n, &w, b).map_err(|e| e.to_string())?;
                    for (req, f) in [(Requirement::MustAlpha, &law.alpha), (Requirement::MustBeta, &law.beta)] {
                        let c = ConstraintSet::new().with(i, j, req);
                        let o = oracle_event_prob(n, &w, &c).map_err(|e| e.to_string())?;
                        ensure(&o == f, || format!("n={n} {w} box {b} {req:?}: formula {f} oracle {o}"))?;
                        checks += 1;
                    }
                }
            }
        }
    }
    Ok(checks)
}

fn second_diagonal_joints() -> Result<usize, String> {
    let mut checks = 0;
    for n in 2..=6 {
        for w in weight_grid() {
            for r in 1..=3 {
                for cols in GapTuples::new(r, n - 1, 1) {
                    let t = IndexTuple::new(cols).map_err(|e| e.to_string())?;
                    for kind in [JointKind::Alpha, JointKind::NonEmpty] {
                        let f = second_diag_joint(n, &w, &t, kind).map_err(|e| e.to_string())?;
                        let ev = diagonal_event(n, Diagonal::Second, &t, kind).map_err(|e| e.to_string())?;
                        let o = oracle_event_prob(n, &w, &ev).map_err(|e| e.to_string())?;
                        ensure(f.value == o, || format!("n={n} {w} cols {t} {kind:?}: {} vs {o}", f.value))?;
                        checks += 1;
                    }
                }
            }
        }
    }
    Ok(checks)
}

fn gap_sums() -> Result<usize, String> {
    let mut checks = 0;
    for r in 1..=4 {
        for m in 0..=20 {
            let (lhs, rhs) = lemma_la_sum(r, m);
            ensure(lhs == rhs, || format!("r={r} m={m}: {lhs} vs {rhs}"))?;
            let listed = gap_index_sets(r, m).count();
            ensure(gap_index_count(r, m) == listed.into(), || format!("|J_{r},{m}| = {listed}"))?;
            checks += 2;
        }
    }
    Ok(checks)
}

fn statistic_laws() -> Result<usize, String> {
    let mut checks = 0;
    for n in 1..=6 {
        for w in weight_grid() {
            for stat in Statistic::ALL {
                let o = oracle_statistic_pmf(n, &w, stat).map_err(|e| e.to_string())?;
                let dp = statistic_pmf(n, &w, stat).map_err(|e| e.to_string())?;
                let mm = statistic_law(n, &w, stat).map_err(|e| e.to_string())?;
                ensure(o == dp && o == mm, || format!("n={n} {w} {stat}: laws differ"))?;
                checks += 2;
            }
        }
    }
    Ok(checks)
}

fn chain_rule() -> Result<usize, String> {
    let mut checks = 0;
    for n in 1..=4 {
        for w in weight_grid() {
            let chain = ChainRule::new(n, &w).map_err(|e| e.to_string())?;
            let oracle = OracleMeasure::new(n, &w).map_err(|e| e.to_string())?;
            let order = sweep_order(n);
            for t in enumerate_tableaux(n).map_err(|e| e.to_string())? {
                let cells: Vec<_> = order.iter().map(|b| t.at(b.i, b.j)).collect();
                let mut p = Rational::from_integer(1.into());
                for k in 0..cells.len() {
                    if p == Rational::from_integer(0.into()) {
                        break;
                    }
                    let law = chain.conditional_cell_law(&cells[..k]).map_err(|e| e.to_string())?;
                    p *= law.prob(cells[k]);
                }
                ensure(p == oracle.prob(&t), || format!("n={n} {w}: chain product differs on\n{t}"))?;
                checks += 1;
            }
        }
    }
    Ok(checks)
}

fn asep_types() -> Result<usize, String> {
    let mut checks = 0;
    let rates = [
        ["2", "1", "3", "1", "1", "1"],
        ["1/2", "7/8", "1", "4/7", "1", "1"],
        ["5", "3", "2/3", "6", "1", "6/5"],
    ];
    for n in 1..=2 {
        for r in rates {
            let p = AsepParams::parse(r).map_err(|e| e.to_string())?;
            let cv = cross_validate(n, &p, &Convention::ALL).map_err(|e| e.to_string())?;
            ensure(cv.matching == [Convention::AlphaDelta], || {
                format!("n={n} {p}: matching conventions {:?}", cv.matching)
            })?;
            checks += 1;
        }
    }
    Ok(checks)
}

const SUITES: [(&str, Suite); 7] = [
    ("partition", partitions),
    ("box-laws", box_laws),
    ("second-diagonal-joints", second_diagonal_joints),
    ("gap-sums", gap_sums),
    ("statistic-laws", statistic_laws),
    ("chain-rule", chain_rule),
    ("asep-types", asep_types),
];

pub fn run() -> Result<String, Failure> {
    let mut out = String::new();
    let mut failed = false;
    for (name, suite) in SUITES {
        match suite() {
            Ok(k) => out.push_str(&format!("{name}: ok ({k} checks)\n")),
            Err(e) => {
                failed = true;
                out.push_str(&format!("{name}: MISMATCH {e}\n"));
            }
        }
    }
    if failed {
        Err(Failure::Mismatch(out))
    } else {
        Ok(out)
    }
}
