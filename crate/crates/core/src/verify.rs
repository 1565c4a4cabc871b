//! Brute-force oracles and property checkers.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{g, g_cc, g_nwf, g_tilde, overlap_lower_bound};
use crate::error::{invalid, Error, Result};
use crate::greedy::{normalized_gains, run_greedy, GreedyTrace, TiePolicy};
use crate::instance::{Instance, InstanceKind};
use crate::scalar::{Mode, Value, FLOAT_TOL};
use crate::subset::{binomial, subsets_of_size, ElementId, SubsetMask};

/// Brute force over `C(n, T)` subsets for table and zoo instances.
pub const BRUTE_FORCE_MAX_N: usize = 24;
/// Brute force limit when every subset goes through the exact closed form.
pub const BRUTE_FORCE_CLOSED_FORM_MAX_N: usize = 20;
/// Limit for the `2^n · n²` property scans.
pub const PROPERTY_CHECK_MAX_N: usize = 16;

const PARALLEL_CHUNK: usize = 1 << 14;

/// Exact optimum of the cardinality-constrained problem.
#[derive(Debug, Clone, PartialEq)]
pub struct OptResult {
    pub best_value: Value,
    /// Every optimal `T`-subset, in increasing bit order.
    pub optima: Vec<SubsetMask>,
}

fn is_optimal(v: &Value, best: &Value) -> bool {
    match (v, best) {
        (Value::Float(a), Value::Float(b)) => *a >= b - FLOAT_TOL,
        _ => v == best,
    }
}

/// Enumerates every `T`-subset. Large enumerations are evaluated in parallel
/// chunks and merged in enumeration order, so the result does not depend on
/// scheduling.
pub fn brute_force_opt(instance: &Instance, t: usize) -> Result<OptResult> {
    let n = instance.n();
    let limit = match instance.kind() {
        InstanceKind::TightFamily => BRUTE_FORCE_CLOSED_FORM_MAX_N,
        _ => BRUTE_FORCE_MAX_N,
    };
    if n > limit {
        return Err(Error::ResourceLimit(format!(
            "brute force supports n <= {limit} for this instance kind, got n={n}"
        )));
    }
    if t < 1 || t > n {
        return Err(invalid(format!("T={t} outside [1, {n}]")));
    }

    let mut best: Option<Value> = None;
    let mut optima: Vec<(SubsetMask, Value)> = Vec::new();
    let mut absorb = |mask: SubsetMask, value: Value| {
        let improves = match &best {
            None => true,
            Some(b) => value.cmp_same(b).is_gt(),
        };
        if improves {
            best = Some(value.clone());
            let b = best.as_ref().expect("just set");
            optima.retain(|(_, v)| is_optimal(v, b));
        }
        if is_optimal(&value, best.as_ref().expect("set above")) {
            optima.push((mask, value));
        }
    };

    let mut stream = subsets_of_size(n, t)?;
    if binomial(n, t) <= PARALLEL_CHUNK as u128 {
        for mask in stream {
            let v = instance.eval_bits(mask.bits());
            absorb(mask, v);
        }
    } else {
        loop {
            let chunk: Vec<SubsetMask> = stream.by_ref().take(PARALLEL_CHUNK).collect();
            if chunk.is_empty() {
                break;
            }
            let values: Vec<Value> = chunk
                .par_iter()
                .map(|m| instance.eval_bits(m.bits()))
                .collect();
            for (mask, v) in chunk.into_iter().zip(values) {
                absorb(mask, v);
            }
        }
    }

    let best_value = best.expect("at least one T-subset exists");
    Ok(OptResult {
        optima: optima.into_iter().map(|(m, _)| m).collect(),
        best_value,
    })
}

/// `f` on every subset, indexed by mask bits.
pub fn value_table(instance: &Instance) -> Result<Vec<Value>> {
    let n = instance.n();
    if n > PROPERTY_CHECK_MAX_N {
        return Err(Error::ResourceLimit(format!(
            "exhaustive property checks support n <= {PROPERTY_CHECK_MAX_N}, got n={n}"
        )));
    }
    Ok((0..1u64 << n)
        .into_par_iter()
        .map(|bits| instance.eval_bits(bits))
        .collect())
}

/// `f(S ∪ {x}) ≥ f(S)` for all `S` and `x ∉ S`.
pub fn check_monotone(instance: &Instance) -> Result<bool> {
    let table = value_table(instance)?;
    Ok(monotone_in(&table, instance.n()))
}

fn monotone_in(table: &[Value], n: usize) -> bool {
    (0..table.len()).all(|s| {
        (0..n)
            .filter(|x| s >> x & 1 == 0)
            .all(|x| table[s | 1 << x].ge_tol(&table[s]))
    })
}

/// Pairwise form: `f(S+x) + f(S+y) ≥ f(S+x+y) + f(S)` for all `S` and
/// distinct `x, y ∉ S`.
pub fn check_submodular(instance: &Instance) -> Result<bool> {
    let table = value_table(instance)?;
    Ok(submodular_in(&table, instance.n()))
}

fn submodular_in(table: &[Value], n: usize) -> bool {
    (0..table.len()).into_par_iter().all(|s| {
        for x in (0..n).filter(|x| s >> x & 1 == 0) {
            for y in (x + 1..n).filter(|y| s >> y & 1 == 0) {
                let lhs = &table[s | 1 << x] + &table[s | 1 << y];
                let rhs = &table[s | 1 << x | 1 << y] + &table[s];
                if !lhs.ge_tol(&rhs) {
                    return false;
                }
            }
        }
        true
    })
}

/// Whether `f(S ∪ {x}) − f(S) = f({x})` everywhere, i.e. the submodular
/// inequality is an equality for all pairs of sets.
pub fn check_additive(instance: &Instance) -> Result<bool> {
    let table = value_table(instance)?;
    let n = instance.n();
    Ok((0..table.len()).all(|s| {
        (0..n)
            .filter(|x| s >> x & 1 == 0)
            .all(|x| (&table[s | 1 << x] - &table[s]).approx_eq(&table[1 << x]))
    }))
}

/// `max{1 − (f(X) − f(X∖{x})) / f({x}) : f({x}) ≠ 0}`.
pub fn total_curvature(instance: &Instance) -> Result<Value> {
    let full = instance.ground_set();
    let f_full = instance.eval_bits(full.bits());
    let mut best: Option<Value> = None;
    for x in (0..instance.n()).map(ElementId) {
        let single = instance.eval_bits(1 << x.0);
        if single.is_zero() {
            continue;
        }
        let drop = &f_full - &instance.eval_bits(full.without(x).bits());
        let c = Value::one(instance.mode()) - drop / single;
        if best.as_ref().is_none_or(|b| c.cmp_same(b).is_gt()) {
            best = Some(c);
        }
    }
    best.ok_or_else(|| Error::Degenerate("every singleton has value f(∅)".into()))
}

/// `|s1 ∩ s2|`.
pub fn overlap(s1: &SubsetMask, s2: &SubsetMask) -> usize {
    s1.intersection(s2).len()
}

/// Guarantee check of the greedy ratio against every optimum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremCheck {
    #[serde(rename = "T")]
    pub t: usize,
    pub ratio: Value,
    /// Curvature used for the bounds (snapped to 0 or 1 within float
    /// tolerance).
    pub alpha: Value,
    pub greedy: Vec<ElementId>,
    pub optima: Vec<Vec<ElementId>>,
    pub m_per_optimum: Vec<usize>,
    pub bound_per_optimum: Vec<Value>,
    pub g_tilde: Value,
    pub g_cc: Value,
    pub g_nwf: Value,
    /// Every overlap respects `m ≥ max{0, 2T − n}`.
    pub overlap_bound_ok: bool,
    pub passed: bool,
}

fn effective_alpha(alpha: Value) -> Result<Value> {
    match alpha {
        Value::Float(a) => {
            if !(-FLOAT_TOL..=1.0 + FLOAT_TOL).contains(&a) {
                Err(Error::Degenerate(format!(
                    "curvature {a} outside [0, 1]; instance is not monotone submodular"
                )))
            } else if a <= FLOAT_TOL {
                Ok(Value::Float(0.0))
            } else {
                Ok(Value::Float(a.min(1.0)))
            }
        }
        Value::Exact(ref a) => {
            let zero = Value::zero(Mode::Exact);
            let one = Value::one(Mode::Exact);
            if alpha < zero || alpha > one {
                Err(Error::Degenerate(format!(
                    "curvature {} outside [0, 1]; instance is not monotone submodular",
                    crate::scalar::format_rat(a)
                )))
            } else {
                Ok(alpha)
            }
        }
    }
}

/// Runs greedy and brute force, then checks `ratio ≥ G(T, α, m)` for every
/// optimum and `ratio ≥ G~(T, α, n)`. With `α = 0` every bound is 1.
pub fn verify_theorem1(instance: &Instance, t: usize, policy: &TiePolicy) -> Result<TheoremCheck> {
    let trace = run_greedy(instance, t, policy)?;
    let opt = brute_force_opt(instance, t)?;
    let alpha = effective_alpha(total_curvature(instance)?)?;
    theorem_check(instance, t, &trace, &opt, alpha)
}

fn theorem_check(
    instance: &Instance,
    t: usize,
    trace: &GreedyTrace,
    opt: &OptResult,
    alpha: Value,
) -> Result<TheoremCheck> {
    let n = instance.n();
    let mode = instance.mode();
    if opt.best_value.is_zero() || opt.best_value.is_negative() {
        return Err(Error::Degenerate("optimal value is not positive".into()));
    }
    let ratio = trace.final_value() / &opt.best_value;
    let greedy_set = trace.solution(n);
    let additive = alpha.is_zero();
    let one = Value::one(mode);
    let bound = |m: usize| -> Result<Value> {
        if additive {
            Ok(one.clone())
        } else {
            g(t, &alpha, m)
        }
    };

    let m_per_optimum: Vec<usize> = opt.optima.iter().map(|s| overlap(&greedy_set, s)).collect();
    let bound_per_optimum = m_per_optimum
        .iter()
        .map(|&m| bound(m))
        .collect::<Result<Vec<_>>>()?;
    let g_tilde_value = if additive {
        one.clone()
    } else {
        g_tilde(t, &alpha, n)?
    };
    let g_cc_value = if additive {
        one.clone()
    } else {
        g_cc(t, &alpha)?
    };
    let g_nwf_value = g_nwf(t, mode)?;
    let lower = overlap_lower_bound(t, n);
    let overlap_bound_ok = m_per_optimum.iter().all(|&m| m >= lower);
    let passed = bound_per_optimum.iter().all(|b| ratio.ge_tol(b))
        && ratio.ge_tol(&g_tilde_value)
        && ratio.ge_tol(&g_cc_value)
        && g_cc_value.ge_tol(&g_nwf_value);

    Ok(TheoremCheck {
        t,
        ratio,
        alpha,
        greedy: trace.chosen.clone(),
        optima: opt.optima.iter().map(|s| s.elements().collect()).collect(),
        m_per_optimum,
        bound_per_optimum,
        g_tilde: g_tilde_value,
        g_cc: g_cc_value,
        g_nwf: g_nwf_value,
        overlap_bound_ok,
        passed,
    })
}

/// Left-hand side minus 1 of each per-step inequality
/// `1 ≤ α·Σ_{y_i ∉ S_opt} a_i + Σ_{y_i ∈ S_opt} a_i + (T − |S_{t-1} ∩ S_opt|)·a_t`.
pub fn lemma51_slacks(
    instance: &Instance,
    t: usize,
    policy: &TiePolicy,
    s_opt: &SubsetMask,
) -> Result<Vec<Value>> {
    if s_opt.len() != t {
        return Err(invalid(format!(
            "optimal set has {} elements, expected T={t}",
            s_opt.len()
        )));
    }
    let trace = run_greedy(instance, t, policy)?;
    let opt_value = instance.evaluate(s_opt)?;
    let alpha = effective_alpha(total_curvature(instance)?)?;
    lemma51_slacks_for(&trace, &opt_value, s_opt, &alpha, t)
}

fn lemma51_slacks_for(
    trace: &GreedyTrace,
    opt_value: &Value,
    s_opt: &SubsetMask,
    alpha: &Value,
    t: usize,
) -> Result<Vec<Value>> {
    let a = normalized_gains(trace, opt_value)?;
    let mode = opt_value.mode();
    let mut outside = Value::zero(mode);
    let mut inside = Value::zero(mode);
    let mut common = 0usize;
    let mut slacks = Vec::with_capacity(t);
    for (a_t, &y) in a.iter().zip(&trace.chosen).take(t) {
        let lhs = alpha * &outside + &inside + Value::from_int(mode, (t - common) as i64) * a_t;
        slacks.push(lhs - Value::one(mode));
        if s_opt.contains(y) {
            inside = inside + a_t;
            common += 1;
        } else {
            outside = outside + a_t;
        }
    }
    Ok(slacks)
}

/// Whether all `T` per-step inequalities hold (float slack 1e-12).
pub fn check_lemma51(
    instance: &Instance,
    t: usize,
    policy: &TiePolicy,
    s_opt: &SubsetMask,
) -> Result<bool> {
    let slacks = lemma51_slacks(instance, t, policy, s_opt)?;
    Ok(slacks.iter().all(|s| !s.below_zero_tol()))
}

/// Full verification report for one instance and cardinality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub n: usize,
    #[serde(rename = "T")]
    pub t: usize,
    pub monotone: bool,
    pub submodular: bool,
    pub curvature: Option<Value>,
    pub theorem1: Option<TheoremCheck>,
    pub lemma51: Option<bool>,
    pub notes: Vec<String>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.monotone
            && self.submodular
            && self
                .theorem1
                .as_ref()
                .is_some_and(|c| c.passed && c.overlap_bound_ok)
            && self.lemma51 == Some(true)
    }
}

/// Monotonicity, submodularity, curvature, the guarantee and the
/// per-step inequalities for every optimum.
pub fn verify_instance(instance: &Instance, t: usize, policy: &TiePolicy) -> Result<VerifyReport> {
    let n = instance.n();
    if t < 1 || t > n {
        return Err(invalid(format!("T={t} outside [1, {n}]")));
    }
    let table = value_table(instance)?;
    let monotone = monotone_in(&table, n);
    let submodular = submodular_in(&table, n);
    let mut report = VerifyReport {
        n,
        t,
        monotone,
        submodular,
        curvature: None,
        theorem1: None,
        lemma51: None,
        notes: Vec::new(),
    };
    let curvature = match total_curvature(instance) {
        Ok(c) => c,
        Err(Error::Degenerate(msg)) => {
            report.notes.push(msg);
            return Ok(report);
        }
        Err(e) => return Err(e),
    };
    report.curvature = Some(curvature.clone());
    if !(monotone && submodular) {
        report
            .notes
            .push("theorem checks skipped: instance is not monotone submodular".into());
        return Ok(report);
    }
    let alpha = effective_alpha(curvature)?;
    let trace = run_greedy(instance, t, policy)?;
    let opt = brute_force_opt(instance, t)?;
    match theorem_check(instance, t, &trace, &opt, alpha.clone()) {
        Ok(check) => report.theorem1 = Some(check),
        Err(Error::Degenerate(msg)) => {
            report.notes.push(msg);
            return Ok(report);
        }
        Err(e) => return Err(e),
    }
    let mut lemma_ok = true;
    for s_opt in &opt.optima {
        let slacks = lemma51_slacks_for(&trace, &opt.best_value, s_opt, &alpha, t)?;
        if slacks.iter().any(Value::below_zero_tol) {
            lemma_ok = false;
            report.notes.push(format!(
                "per-step inequality failed against optimum {s_opt}; this points to an implementation bug"
            ));
        }
    }
    report.lemma51 = Some(lemma_ok);
    Ok(report)
}
