//! The cardinality-constrained greedy algorithm and its lazy (CELF) variant.
//!
//! Both start from `S_0 = ∅` and at step `t` add an element `x ∉ S_{t-1}`
//! maximizing `f(S_{t-1} ∪ {x})`. Among maximizers the [`TiePolicy`] decides:
//! exact-mode values tie only when equal, float-mode values tie when within
//! [`FLOAT_TOL`] of the step maximum.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::instance::Instance;
use crate::scalar::{Mode, Value, FLOAT_TOL};
use crate::subset::{ElementId, SubsetMask};

/// How to choose among equally good candidates.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum TiePolicy {
    #[default]
    FirstIndex,
    LastIndex,
    /// Listed elements first in list order, then the rest by index.
    PreferListed(Vec<ElementId>),
}

impl TiePolicy {
    pub fn validate(&self, n: usize) -> Result<()> {
        if let TiePolicy::PreferListed(list) = self {
            let mut seen = vec![false; n];
            for e in list {
                if e.0 >= n {
                    return Err(invalid(format!("preferred element {} out of range", e.0)));
                }
                if std::mem::replace(&mut seen[e.0], true) {
                    return Err(invalid(format!("preferred element {} listed twice", e.0)));
                }
            }
        }
        Ok(())
    }

    /// Lower rank wins a tie.
    fn ranks(&self, n: usize) -> Vec<usize> {
        match self {
            TiePolicy::FirstIndex => (0..n).collect(),
            TiePolicy::LastIndex => (0..n).map(|i| n - 1 - i).collect(),
            TiePolicy::PreferListed(list) => {
                let mut ranks: Vec<usize> = (0..n).map(|i| list.len() + i).collect();
                for (pos, e) in list.iter().enumerate() {
                    ranks[e.0] = pos;
                }
                ranks
            }
        }
    }
}

/// Record of one greedy run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GreedyTrace {
    pub chosen: Vec<ElementId>,
    /// `f(S_0), …, f(S_T)`.
    pub prefix_values: Vec<Value>,
    /// `f(S_t) − f(S_{t-1})` for `t = 1..T`.
    pub gains: Vec<Value>,
    /// Per step, `f(S_{t-1} ∪ {x})` for every candidate `x`. Only the plain
    /// greedy fills this in.
    #[serde(skip)]
    pub snapshots: Vec<Vec<(ElementId, Value)>>,
}

impl GreedyTrace {
    pub fn final_value(&self) -> &Value {
        self.prefix_values
            .last()
            .expect("prefix values start with f(∅)")
    }

    pub fn solution(&self, n: usize) -> SubsetMask {
        SubsetMask::from_elements(n, self.chosen.iter().map(|e| e.0))
            .expect("chosen elements are in range")
    }

    /// Same chosen sequence, prefix values and gains.
    pub fn same_path(&self, other: &GreedyTrace) -> bool {
        self.chosen == other.chosen
            && self.prefix_values == other.prefix_values
            && self.gains == other.gains
    }
}

fn check_cardinality(instance: &Instance, t: usize) -> Result<()> {
    if t < 1 || t > instance.n() {
        return Err(invalid(format!("T={t} outside [1, {}]", instance.n())));
    }
    Ok(())
}

/// Runs the greedy algorithm for `t` steps.
pub fn run_greedy(instance: &Instance, t: usize, policy: &TiePolicy) -> Result<GreedyTrace> {
    check_cardinality(instance, t)?;
    policy.validate(instance.n())?;
    let n = instance.n();
    let ranks = policy.ranks(n);
    let monotone = instance.metadata().declared_monotone;

    let mut current = SubsetMask::empty(n);
    let mut current_value = Value::zero(instance.mode());
    let mut trace = GreedyTrace {
        chosen: Vec::with_capacity(t),
        prefix_values: vec![current_value.clone()],
        gains: Vec::with_capacity(t),
        snapshots: Vec::with_capacity(t),
    };

    for step in 1..=t {
        let candidates: Vec<(ElementId, Value)> = (0..n)
            .map(ElementId)
            .filter(|x| !current.contains(*x))
            .map(|x| (x, instance.eval_bits(current.bits() | 1 << x.0)))
            .collect();
        if monotone {
            for (x, v) in &candidates {
                let gain = v - &current_value;
                if gain.below_zero_tol() {
                    return Err(Error::MonotonicityViolation {
                        step,
                        element: x.0,
                        gain: gain.to_string(),
                    });
                }
            }
        }
        let best = candidates
            .iter()
            .map(|(_, v)| v)
            .max_by(|a, b| a.cmp_same(b))
            .expect("at least one candidate remains")
            .clone();
        let (pick, value) = candidates
            .iter()
            .filter(|(_, v)| ties_with_max(v, &best))
            .min_by_key(|(x, _)| ranks[x.0])
            .expect("the maximum is among the candidates")
            .clone();

        trace.gains.push(&value - &current_value);
        trace.prefix_values.push(value.clone());
        trace.chosen.push(pick);
        trace.snapshots.push(candidates);
        current = current.with(pick);
        current_value = value;
    }
    Ok(trace)
}

fn ties_with_max(v: &Value, max: &Value) -> bool {
    match (v, max) {
        (Value::Float(a), Value::Float(b)) => *a >= b - FLOAT_TOL,
        _ => v == max,
    }
}

#[derive(Debug)]
struct HeapEntry {
    bound: Value,
    rank: usize,
    element: ElementId,
    /// Step at which `bound` was computed.
    fresh_at: usize,
}

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for HeapEntry {}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HeapEntry {
    // max-heap: largest bound first, then lowest rank
    fn cmp(&self, other: &Self) -> Ordering {
        self.bound
            .cmp_same(&other.bound)
            .then_with(|| other.rank.cmp(&self.rank))
    }
}

/// Lazy greedy: keeps stale marginal gains as upper bounds and re-evaluates
/// only the candidates that could still win. Requires a declared-submodular
/// instance; a re-evaluated gain exceeding its stale bound is reported as a
/// submodularity violation.
pub fn run_lazy_greedy(instance: &Instance, t: usize, policy: &TiePolicy) -> Result<GreedyTrace> {
    check_cardinality(instance, t)?;
    policy.validate(instance.n())?;
    if !instance.metadata().declared_submodular {
        return Err(invalid(
            "lazy greedy requires an instance declared submodular",
        ));
    }
    let n = instance.n();
    let mode = instance.mode();
    let ranks = policy.ranks(n);
    let monotone = instance.metadata().declared_monotone;
    let tol = match mode {
        Mode::Exact => None,
        Mode::Float => Some(FLOAT_TOL),
    };

    let mut current = SubsetMask::empty(n);
    let mut current_value = Value::zero(mode);
    let mut heap: BinaryHeap<HeapEntry> = (0..n)
        .map(|i| HeapEntry {
            bound: instance.eval_bits(1 << i),
            rank: ranks[i],
            element: ElementId(i),
            fresh_at: 1,
        })
        .collect();
    let mut trace = GreedyTrace {
        chosen: Vec::with_capacity(t),
        prefix_values: vec![current_value.clone()],
        gains: Vec::with_capacity(t),
        snapshots: Vec::new(),
    };

    for step in 1..=t {
        let picked = loop {
            let top = heap.peek().expect("candidates remain while step <= n");
            if top.fresh_at != step {
                let mut entry = heap.pop().expect("peeked");
                refresh(
                    instance,
                    &mut entry,
                    current,
                    &current_value,
                    step,
                    monotone,
                )?;
                heap.push(entry);
                continue;
            }
            // Pull every entry whose bound is within the tie window of the
            // fresh maximum; stale ones among them must be refreshed first.
            let best = top.bound.clone();
            let mut window = Vec::new();
            while let Some(entry) = heap.peek() {
                if !in_window(&entry.bound, &best, tol) {
                    break;
                }
                window.push(heap.pop().expect("peeked"));
            }
            if window.iter().any(|e| e.fresh_at != step) {
                for mut entry in window {
                    if entry.fresh_at != step {
                        refresh(
                            instance,
                            &mut entry,
                            current,
                            &current_value,
                            step,
                            monotone,
                        )?;
                    }
                    heap.push(entry);
                }
                continue;
            }
            let winner = window
                .iter()
                .enumerate()
                .min_by_key(|(_, e)| e.rank)
                .map(|(i, _)| i)
                .expect("window holds the fresh top");
            let chosen = window.swap_remove(winner);
            heap.extend(window);
            break chosen;
        };

        current = current.with(picked.element);
        let value = instance.eval_bits(current.bits());
        trace.gains.push(&value - &current_value);
        trace.prefix_values.push(value.clone());
        trace.chosen.push(picked.element);
        current_value = value;
    }
    Ok(trace)
}

fn in_window(bound: &Value, best: &Value, tol: Option<f64>) -> bool {
    match (bound, best, tol) {
        (Value::Float(a), Value::Float(b), Some(tol)) => *a >= b - tol,
        _ => bound == best,
    }
}

fn refresh(
    instance: &Instance,
    entry: &mut HeapEntry,
    current: SubsetMask,
    current_value: &Value,
    step: usize,
    monotone: bool,
) -> Result<()> {
    let gain = instance.eval_bits(current.bits() | 1 << entry.element.0) - current_value;
    if monotone && gain.below_zero_tol() {
        return Err(Error::MonotonicityViolation {
            step,
            element: entry.element.0,
            gain: gain.to_string(),
        });
    }
    let increased = match (&gain, &entry.bound) {
        (Value::Float(g), Value::Float(b)) => *g > b + FLOAT_TOL,
        _ => gain > entry.bound,
    };
    if increased {
        return Err(Error::SubmodularityViolation {
            step,
            element: entry.element.0,
            bound: entry.bound.to_string(),
            gain: gain.to_string(),
        });
    }
    entry.bound = gain;
    entry.fresh_at = step;
    Ok(())
}

/// `a_t = (f(S_t) − f(S_{t-1})) / f(S_opt)`.
pub fn normalized_gains(trace: &GreedyTrace, opt_value: &Value) -> Result<Vec<Value>> {
    let nonpositive = match opt_value {
        Value::Exact(_) => opt_value.is_zero() || opt_value.is_negative(),
        Value::Float(x) => *x <= 0.0,
    };
    if nonpositive {
        return Err(Error::Degenerate(format!(
            "optimal value {opt_value} is not positive"
        )));
    }
    if let Some(g) = trace.gains.first() {
        if g.mode() != opt_value.mode() {
            return Err(Error::ModeMismatch(
                "trace and optimum use different scalar modes".into(),
            ));
        }
    }
    Ok(trace.gains.iter().map(|g| g / opt_value).collect())
}
