//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any fails.

use std::time::{Duration, Instant};

use subgreedy::bounds::{audit_corollary, g, g_nwf, g_tilde};
use subgreedy::greedy::{run_greedy, run_lazy_greedy, TiePolicy};
use subgreedy::instances::{
    make_zoo_instance, predicted_values, tight_instance, FunctionZooSpec, TightFamilyParams,
    ZooKind,
};
use subgreedy::lp::{
    b_value, build_primal, check_b_monotonicity, dual_closed_form, head_closed_form, index_range,
    partial_sums, simplex_solve, tail_closed_form,
};
use subgreedy::verify::{
    brute_force_opt, check_monotone, check_submodular, overlap, total_curvature, verify_theorem1,
};
use subgreedy::{rat, Mode, Rat, Value};

struct Outcome {
    passed: bool,
    detail: String,
}

impl Outcome {
    fn new(failures: &[String], summary: String) -> Self {
        let passed = failures.is_empty();
        let detail = if passed {
            summary
        } else {
            format!(
                "{summary}; {} failure(s), first: {}",
                failures.len(),
                failures[0]
            )
        };
        Outcome { passed, detail }
    }
}

fn exact(r: &Rat) -> Value {
    Value::Exact(r.clone())
}

fn tightness_equality() -> Outcome {
    let alphas = [rat(1, 1), rat(3, 4), rat(1, 2), rat(1, 4)];
    let mut failures = Vec::new();
    let mut cases = 0;
    for n in 2..=10usize {
        for t in (n / 2 + 1)..=n {
            for alpha in &alphas {
                cases += 1;
                let tag = format!("n={n} T={t} alpha={alpha}");
                let params = TightFamilyParams::with_default_r(n, t, alpha.clone()).unwrap();
                let inst = tight_instance(&params).unwrap();
                if !check_monotone(&inst).unwrap() {
                    failures.push(format!("{tag}: not monotone"));
                }
                if !check_submodular(&inst).unwrap() {
                    failures.push(format!("{tag}: not submodular"));
                }
                let curvature = total_curvature(&inst).unwrap();
                if curvature != exact(alpha) {
                    failures.push(format!("{tag}: curvature {curvature}"));
                }
                let trace = run_greedy(&inst, t, &TiePolicy::FirstIndex).unwrap();
                let opt = brute_force_opt(&inst, t).unwrap();
                let ratio = trace.final_value() / &opt.best_value;
                let expected = g_tilde(t, &exact(alpha), n).unwrap();
                if ratio != expected {
                    failures.push(format!("{tag}: ratio {ratio} != {expected}"));
                }
                let predicted = predicted_values(&params).unwrap();
                if exact(&predicted.ratio) != ratio {
                    failures.push(format!("{tag}: predicted ratio {}", predicted.ratio));
                }
                let solution = trace.solution(n);
                for s in &opt.optima {
                    let m = overlap(&solution, s);
                    if m != 2 * t - n {
                        failures.push(format!("{tag}: overlap {m} != {}", 2 * t - n));
                    }
                }
            }
        }
    }
    Outcome::new(&failures, format!("{cases} (n, T, alpha) cases exact"))
}

fn random_lower_bound() -> Outcome {
    let mut failures = Vec::new();
    let mut checks = 0usize;
    let mut optima = 0usize;
    let plan = [
        (ZooKind::WeightedCoverage, 200u64),
        (ZooKind::ConcaveCardinality, 200),
        (ZooKind::Additive, 100),
    ];
    for (kind, count) in plan {
        for seed in 0..count {
            let n = 2 + (seed as usize % 9);
            let mode = if seed % 2 == 0 {
                Mode::Exact
            } else {
                Mode::Float
            };
            let inst = make_zoo_instance(&FunctionZooSpec::new(kind, n, mode, seed)).unwrap();
            let tag = format!("{kind:?} seed={seed} n={n}");
            if !check_monotone(&inst).unwrap() || !check_submodular(&inst).unwrap() {
                failures.push(format!("{tag}: generator left the problem class"));
                continue;
            }
            for t in 1..=n {
                match verify_theorem1(&inst, t, &TiePolicy::FirstIndex) {
                    Ok(check) => {
                        checks += 1;
                        optima += check.m_per_optimum.len();
                        if !check.passed || !check.overlap_bound_ok {
                            failures.push(format!(
                                "{tag} T={t}: ratio {} bounds {:?}",
                                check.ratio, check.bound_per_optimum
                            ));
                        }
                    }
                    Err(e) => failures.push(format!("{tag} T={t}: {e}")),
                }
            }
        }
    }
    Outcome::new(
        &failures,
        format!("500 instances, {checks} (instance, T) checks against {optima} optima"),
    )
}

fn dual_certificate_grid() -> Outcome {
    let alphas = [rat(1, 1), rat(3, 4), rat(1, 2), rat(1, 4), rat(1, 10)];
    let mut failures = Vec::new();
    let mut cases = 0;
    let mut slack_rows = 0;
    for t in 1..=25usize {
        for m in 0..t {
            for alpha in &alphas {
                cases += 1;
                let tag = format!("T={t} m={m} alpha={alpha}");
                let cert = dual_closed_form(t, alpha, m).unwrap();
                if !cert.feasible {
                    failures.push(format!("{tag}: infeasible"));
                }
                if !cert.first_rows_tight() {
                    failures.push(format!("{tag}: rows 1..T-m not tight"));
                }
                slack_rows += cert.row_slacks[t - m..]
                    .iter()
                    .filter(|s| **s != rat(0, 1))
                    .count();
                let (head, tail) = partial_sums(&cert);
                if head != head_closed_form(t, alpha, m).unwrap() {
                    failures.push(format!("{tag}: head sum {head}"));
                }
                if tail != tail_closed_form(t, m) {
                    failures.push(format!("{tag}: tail sum {tail}"));
                }
                if exact(&cert.objective) != g(t, &exact(alpha), m).unwrap() {
                    failures.push(format!("{tag}: objective {}", cert.objective));
                }
            }
        }
    }
    Outcome::new(
        &failures,
        format!("{cases} certificates exact; rows after T-m with nonzero slack: {slack_rows}"),
    )
}

fn lp_cross_checks() -> Outcome {
    let alphas = [rat(1, 1), rat(1, 2)];
    let mut failures = Vec::new();
    let mut solves = 0;
    let mut strong = 0;
    let mut facts = 0;
    for alpha in &alphas {
        for t in 1..=7usize {
            for m in 0..t {
                let tag = format!("T={t} m={m} alpha={alpha}");
                let cert = dual_closed_form(t, alpha, m).unwrap();
                let primal = build_primal(t, alpha, &index_range(t - m + 1, t)).unwrap();
                let value = simplex_solve(&primal).unwrap().value;
                solves += 1;
                if value < cert.objective {
                    failures.push(format!("{tag}: primal {value} < dual {}", cert.objective));
                }
                if value == cert.objective {
                    strong += 1;
                }
                debug_assert_eq!(
                    value,
                    b_value(t, alpha, &index_range(t - m + 1, t)).unwrap()
                );
            }
            let report = check_b_monotonicity(t, alpha, 50, 1000 + t as u64).unwrap();
            facts += report.fact_i.len() + report.fact_ii.len() + report.drop_last.len();
            if !report.passed() {
                failures.push(format!(
                    "T={t} alpha={alpha}: {} monotonicity violations",
                    report.violations
                ));
            }
        }
    }
    Outcome::new(
        &failures,
        format!(
            "{solves} weak-duality solves ({strong} with equal optima), {facts} monotonicity comparisons"
        ),
    )
}

fn corollary_audit() -> Outcome {
    let one = rat(1, 1);
    let mut failures = Vec::new();
    for n in [4usize, 6, 8, 10] {
        let report = audit_corollary(n, &one).unwrap();
        if !report.consistent {
            failures.push(format!(
                "n={n}: expected consistent, min {}",
                report.min_value
            ));
        }
    }
    for (n, floor, low) in [
        (3usize, rat(1, 1), rat(3, 4)),
        (7, rat(19, 27), rat(175, 256)),
    ] {
        let report = audit_corollary(n, &one).unwrap();
        if report.consistent {
            failures.push(format!("n={n}: expected a discrepancy"));
            continue;
        }
        if report.corollary_floor != exact(&floor) || report.min_value != exact(&low) {
            failures.push(format!(
                "n={n}: corollary {} vs min {}",
                report.corollary_floor, report.min_value
            ));
        }
        match &report.witness_instance {
            Some(w) if w.verified_ratio == Some(exact(&low)) && w.ratio_matches == Some(true) => {}
            other => failures.push(format!("n={n}: witness not verified: {other:?}")),
        }
    }
    Outcome::new(
        &failures,
        "even n consistent; n=3 (1 vs 3/4) and n=7 (19/27 vs 175/256) discrepancies with verified witnesses".into(),
    )
}

fn closed_form_sanity() -> Outcome {
    let mut failures = Vec::new();
    let floor = 1.0 - (-1.0f64).exp() - 1e-12;
    for t in 1..=1000 {
        let v = g_nwf(t, Mode::Float).unwrap().to_f64();
        if v <= floor {
            failures.push(format!("g_nwf({t}) = {v}"));
        }
    }
    let alphas = [rat(1, 1), rat(3, 4), rat(1, 2), rat(1, 4), rat(1, 10)];
    let one = Value::one(Mode::Exact);
    for alpha in &alphas {
        let a = exact(alpha);
        for t in 1..=25usize {
            let values: Vec<Value> = (0..=t).map(|m| g(t, &a, m).unwrap()).collect();
            if values.windows(2).any(|w| w[1] < w[0]) {
                failures.push(format!("g({t}, {alpha}, m) decreases in m"));
            }
            if values[t] != one {
                failures.push(format!("g({t}, {alpha}, {t}) = {}", values[t]));
            }
            if g_tilde(t, &a, t).unwrap() != one {
                failures.push(format!("g~({t}, {alpha}, {t}) != 1"));
            }
        }
    }
    for alpha in [1e-2, 1e-4, 1e-6] {
        let a = Value::Float(alpha);
        for t in 1..=50usize {
            for n in t..=2 * t + 1 {
                let gap = 1.0 - g_tilde(t, &a, n).unwrap().to_f64();
                if gap > alpha {
                    failures.push(format!("1 - g~({t}, {alpha}, {n}) = {gap}"));
                }
            }
        }
    }
    Outcome::new(&failures, "all closed-form identities hold".into())
}

fn lazy_equivalence() -> Outcome {
    let mut failures = Vec::new();
    let mut runs = 0;
    for seed in 0..100u64 {
        let n = 2 + (seed as usize % 13);
        let mut spec = FunctionZooSpec::new(ZooKind::WeightedCoverage, n, Mode::Exact, seed);
        spec.distinct_weights = true;
        let inst = make_zoo_instance(&spec).unwrap();
        for t in 1..=n {
            runs += 1;
            let plain = run_greedy(&inst, t, &TiePolicy::FirstIndex).unwrap();
            let lazy = run_lazy_greedy(&inst, t, &TiePolicy::FirstIndex).unwrap();
            if plain.chosen != lazy.chosen || plain.prefix_values != lazy.prefix_values {
                failures.push(format!("distinct seed={seed} n={n} T={t}"));
            }
        }
    }
    for seed in 0..100u64 {
        let n = 2 + (seed as usize % 13);
        let inst = make_zoo_instance(&FunctionZooSpec::new(
            ZooKind::WeightedCoverage,
            n,
            Mode::Exact,
            10_000 + seed,
        ))
        .unwrap();
        for policy in [TiePolicy::FirstIndex, TiePolicy::LastIndex] {
            for t in 1..=n {
                runs += 1;
                let plain = run_greedy(&inst, t, &policy).unwrap();
                let lazy = run_lazy_greedy(&inst, t, &policy).unwrap();
                if plain.final_value() != lazy.final_value() {
                    failures.push(format!("tied seed={seed} n={n} T={t} {policy:?}"));
                }
            }
        }
    }
    Outcome::new(&failures, format!("{runs} lazy/plain runs agree"))
}

fn main() {
    type Criterion = (&'static str, fn() -> Outcome);
    let criteria: [Criterion; 7] = [
        ("tightness equality", tightness_equality),
        ("random-instance lower bound", random_lower_bound),
        ("dual certificate grid", dual_certificate_grid),
        ("LP cross-checks", lp_cross_checks),
        ("corollary audit", corollary_audit),
        ("closed-form sanity", closed_form_sanity),
        ("lazy greedy equivalence", lazy_equivalence),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let elapsed: Duration = start.elapsed();
        let status = if outcome.passed { "PASS" } else { "FAIL" };
        println!(
            "criterion {} {name}: {status} ({}; {:.2}s)",
            i + 1,
            outcome.detail,
            elapsed.as_secs_f64()
        );
        if !outcome.passed {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("{failed} criterion/criteria failed");
        std::process::exit(1);
    }
}
