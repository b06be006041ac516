//! One function per subcommand; each returns the full text to print.

use serde::Serialize;
use serde_json::json;
use staircase_lab::asep::{cross_validate, AsepParams, Convention};
use staircase_lab::dpcount::{event_prob, N_DP};
use staircase_lab::enumerate::{brute_partition, brute_partition_four, oracle_event_prob, N_ENUM};
use staircase_lab::formulas::{
    box_law, diagonal_event, partition_closed, partition_closed_four, second_diag_joint, third_diag_main_term,
    FormulaValue, IndexTuple, JointKind, ZeroReason,
};
use staircase_lab::moments::{
    convergence_report, factorial_moments, factorial_moments_third_diag, statistic_law, MomentKind, ThirdDiagMode,
};
use staircase_lab::rational::{format_rational, to_f64};
use staircase_lab::sampler::{seeded, SampleHeader};
use staircase_lab::{
    BoxIndex, ConstraintSet, Diagonal, FourWeights, Rational, Requirement, SampleMethod, Sampler, Statistic, Weights,
};

use crate::Failure;

/// Four-symbol brute force stops here: `4^6 · 6!` tableaux.
const FOUR_BRUTE_MAX: usize = 6;
/// Largest size for which `joint` also runs the enumeration oracle.
const JOINT_ORACLE_MAX: usize = 8;

fn fmt(x: &Rational) -> String {
    format_rational(x)
}

fn json_text<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn check_n(n: usize, max: usize, what: &'static str) -> Result<(), Failure> {
    if (1..=max).contains(&n) {
        Ok(())
    } else {
        Err(staircase_lab::Error::SizeOutOfRange { what, n, min: 1, max }.into())
    }
}

pub fn count(n: usize, w: &Weights, json: bool) -> Result<String, Failure> {
    check_n(n, usize::from(u8::MAX), "count")?;
    let closed = partition_closed(n, w)?;
    let brute = if n <= N_ENUM { Some(brute_partition(n, w)?) } else { None };
    Ok(count_output(n, &closed, brute.as_ref(), json))
}

pub fn count_four(n: usize, rates: [Rational; 4], json: bool) -> Result<String, Failure> {
    check_n(n, usize::from(u8::MAX), "count")?;
    let [alpha, beta, gamma, delta] = rates;
    let fw = FourWeights::new(alpha, beta, gamma, delta)?;
    let closed = partition_closed_four(n, &fw);
    let brute = if n <= FOUR_BRUTE_MAX {
        Some(brute_partition_four(n, &fw)?)
    } else {
        None
    };
    Ok(count_output(n, &closed, brute.as_ref(), json))
}

fn count_output(n: usize, closed: &Rational, brute: Option<&Rational>, json: bool) -> String {
    if json {
        json_text(&json!({
            "n": n,
            "closed": fmt(closed),
            "brute": brute.map(fmt),
        }))
    } else {
        format!("n,closed,brute\n{n},{},{}\n", fmt(closed), brute.map(fmt).unwrap_or_default())
    }
}

pub fn prob(n: usize, w: &Weights, at: &str, json: bool) -> Result<String, Failure> {
    check_n(n, N_DP, "prob")?;
    let b: BoxIndex = at.parse()?;
    let law = box_law(n, w, b)?;
    let exact = |r: Requirement| -> Result<Rational, Failure> {
        Ok(event_prob(n, w, &ConstraintSet::new().require(b, r)?)?)
    };
    let rows = [
        ("alpha", law.alpha.clone(), exact(Requirement::MustAlpha)?),
        ("beta", law.beta.clone(), exact(Requirement::MustBeta)?),
        ("empty", law.empty.clone(), exact(Requirement::MustEmpty)?),
    ];
    if json {
        let entries: Vec<_> = rows
            .iter()
            .map(|(s, f, e)| json!({"symbol": s, "formula": fmt(f), "exact": fmt(e), "equal": f == e}))
            .collect();
        return Ok(json_text(&json!({"n": n, "box": [b.i, b.j], "law": entries})));
    }
    let mut out = String::from("i,j,symbol,formula,exact\n");
    for (s, f, e) in &rows {
        out.push_str(&format!("{},{},{s},{},{}\n", b.i, b.j, fmt(f), fmt(e)));
    }
    Ok(out)
}

fn reason_text(r: &Option<ZeroReason>) -> String {
    match r {
        None => String::new(),
        Some(ZeroReason::GapViolation { left, right }) => format!("gap_violation:{left}-{right}"),
        Some(ZeroReason::OrderOnly { left, right }) => format!("order_only:{left}-{right}"),
    }
}

pub fn joint(n: usize, w: &Weights, diag: u8, kind: &str, cols: &str, json: bool) -> Result<String, Failure> {
    check_n(n, N_DP, "joint")?;
    let kind: JointKind = kind.parse()?;
    let tuple: IndexTuple = cols.parse()?;
    let (d, formula): (Diagonal, FormulaValue) = if diag == 2 {
        (Diagonal::Second, second_diag_joint(n, w, &tuple, kind)?)
    } else {
        (Diagonal::Third, third_diag_main_term(n, w, &tuple, kind)?)
    };
    let event = diagonal_event(n, d, &tuple, kind)?;
    let exact = event_prob(n, w, &event)?;
    let oracle = if n <= JOINT_ORACLE_MAX {
        Some(oracle_event_prob(n, w, &event)?)
    } else {
        None
    };
    if json {
        return Ok(json_text(&json!({
            "n": n,
            "diag": diag,
            "kind": kind_name(kind),
            "cols": tuple.cols(),
            "formula": fmt(&formula.value),
            "formula_is": if diag == 2 { "closed_form" } else { "main_term" },
            "reason": formula.reason,
            "exact": fmt(&exact),
            "oracle": oracle.as_ref().map(fmt),
        })));
    }
    Ok(format!(
        "n,diag,kind,cols,formula,reason,exact,oracle\n{n},{diag},{},{},{},{},{},{}\n",
        kind_name(kind),
        tuple.cols().iter().map(|c| c.to_string()).collect::<Vec<_>>().join(" "),
        fmt(&formula.value),
        reason_text(&formula.reason),
        fmt(&exact),
        oracle.as_ref().map(fmt).unwrap_or_default(),
    ))
}

fn kind_name(k: JointKind) -> &'static str {
    match k {
        JointKind::Alpha => "alpha",
        JointKind::NonEmpty => "nonempty",
    }
}

pub fn moments(n: usize, w: &Weights, stat: Statistic, r: usize, mode: &str, json: bool) -> Result<String, Failure> {
    check_n(n, N_DP, "moments")?;
    let mu = match mode {
        "exact" => factorial_moments(n, w, stat, r)?,
        "main" => {
            let kind = match stat {
                Statistic::A3 => MomentKind::Alpha,
                Statistic::X3 => MomentKind::NonEmpty,
                _ => return Err(Failure::Invalid("--mode main applies to A3 and X3 only".into())),
            };
            factorial_moments_third_diag(n, w, kind, r, ThirdDiagMode::MainTerm)?
        }
        other => return Err(Failure::Invalid(format!("unknown mode {other:?} (expected exact or main)"))),
    };
    let values: Vec<String> = mu.as_slice().iter().map(fmt).collect();
    if json {
        return Ok(json_text(&json!({
            "n": n,
            "stat": stat.name(),
            "mode": mode,
            "factorial_moments": values,
        })));
    }
    let mut out = String::from("r,moment\n");
    for (k, v) in values.iter().enumerate() {
        out.push_str(&format!("{k},{v}\n"));
    }
    Ok(out)
}

pub fn pmf(n: usize, w: &Weights, stat: Statistic, json: bool) -> Result<String, Failure> {
    check_n(n, N_DP, "pmf")?;
    let law = statistic_law(n, w, stat)?;
    if json {
        return Ok(json_text(&json!({
            "n": n,
            "stat": stat.name(),
            "masses": law.to_strings(),
        })));
    }
    // `approx` is the only floating-point column
    let mut out = String::from("k,mass,approx\n");
    for (k, m) in law.masses().iter().enumerate() {
        out.push_str(&format!("{k},{},{:.15e}\n", fmt(m), to_f64(m)));
    }
    Ok(out)
}

fn parse_ns(ns: &str) -> Result<Vec<usize>, Failure> {
    let parsed = ns
        .split(',')
        .map(|s| s.trim().parse::<usize>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| Failure::Invalid(format!("--ns expects comma-separated sizes, got {ns:?}")))?;
    if parsed.is_empty() || parsed.contains(&0) {
        return Err(Failure::Invalid("--ns needs positive sizes".into()));
    }
    Ok(parsed)
}

pub fn converge(stat: Statistic, ns: &str, w: &Weights, json: bool) -> Result<String, Failure> {
    let ns = parse_ns(ns)?;
    let lambda = stat
        .poisson_limit()
        .ok_or_else(|| Failure::Invalid(format!("{stat} has no Poisson limit")))?;
    if stat.diagonal() == Some(Diagonal::Third) {
        if let Some(&n) = ns.iter().find(|&&n| n > N_DP) {
            check_n(n, N_DP, "third-diagonal laws")?;
        }
    }
    let report = convergence_report(&ns, w, stat, &lambda)?;
    Ok(if json {
        let mut s = report.to_json();
        s.push('\n');
        s
    } else {
        report.to_csv()
    })
}

pub fn sample(n: usize, w: &Weights, count: u64, seed: u64, method: &str) -> Result<String, Failure> {
    let method: SampleMethod = method.parse()?;
    let sampler = Sampler::new(n, w, method)?;
    let mut rng = seeded(seed);
    let mut out = serde_json::to_string(&SampleHeader::new(n, w, seed, method)).expect("serializable");
    out.push('\n');
    for _ in 0..count {
        out.push_str(&sampler.sample(&mut rng).to_text());
    }
    Ok(out)
}

pub fn asep_verify(n: usize, rates: &str, convention: &str, json: bool) -> Result<String, Failure> {
    let parts: Vec<&str> = rates.split(',').collect();
    let parts: [&str; 6] = parts
        .try_into()
        .map_err(|_| Failure::Invalid(format!("--rates expects six values α,β,γ,δ,u,q, got {rates:?}")))?;
    let params = AsepParams::parse(parts)?;
    let conventions = match convention {
        "both" => Convention::ALL.to_vec(),
        c => vec![c.parse::<Convention>()?],
    };
    let cv = cross_validate(n, &params, &conventions)?;
    if json {
        let mut s = cv.to_json();
        s.push('\n');
        return Ok(s);
    }
    let mut out = String::from("convention,state,tableaux_prob,generator_prob,equal\n");
    for rep in &cv.reports {
        for s in &rep.per_state {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                rep.convention,
                s.state.word(),
                fmt(&s.tableaux_prob),
                fmt(&s.generator_prob),
                s.equal
            ));
        }
    }
    Ok(out)
}
