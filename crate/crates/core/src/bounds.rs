//! Closed-form greedy guarantees and an audit of the cardinality-only bound.
//!
//! With `T` the cardinality, `α ∈ (0, 1]` the total curvature and `m` the
//! overlap between greedy and optimal solutions:
//!
//! ```text
//! G_NWF(T)     = 1 - (1 - 1/T)^T
//! G_CC(T, α)   = (1/α)(1 - (1 - α/T)^T)
//! G(T, α, m)   = (1/α)(1 - (1 - αm/T)(1 - α/T)^(T-m))
//! G~(T, α, n)  = G(T, α, max{0, 2T - n})
//! ```
//!
//! Every formula is evaluated in the scalar mode of `α`: exactly for
//! rational `α`, in `f64` otherwise.

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::greedy::{run_greedy, TiePolicy};
use crate::instance::InstanceDoc;
use crate::instances::{tight_instance, TightFamilyParams};
use crate::scalar::{format_rat, serde_rat, Mode, Rat, Value};
use crate::verify::{brute_force_opt, overlap, BRUTE_FORCE_CLOSED_FORM_MAX_N};

fn check_alpha(alpha: &Value) -> Result<()> {
    let ok = match alpha {
        Value::Exact(a) => *a > Rat::zero() && *a <= Rat::one(),
        Value::Float(a) => *a > 0.0 && *a <= 1.0,
    };
    if ok {
        Ok(())
    } else {
        Err(invalid(format!(
            "alpha={alpha} outside (0, 1]; use g_limit_alpha_zero for the alpha -> 0 limit"
        )))
    }
}

/// `1 - (1 - 1/T)^T` in the requested mode.
pub fn g_nwf(t: usize, mode: Mode) -> Result<Value> {
    if t < 1 {
        return Err(invalid("T must be at least 1"));
    }
    g(t, &Value::one(mode), 0)
}

/// `(1/α)(1 - (1 - α/T)^T)`.
pub fn g_cc(t: usize, alpha: &Value) -> Result<Value> {
    if t < 1 {
        return Err(invalid("T must be at least 1"));
    }
    g(t, alpha, 0)
}

/// `(1/α)(1 - (1 - αm/T)(1 - α/T)^(T-m))`.
pub fn g(t: usize, alpha: &Value, m: usize) -> Result<Value> {
    if t < 1 {
        return Err(invalid("T must be at least 1"));
    }
    if m > t {
        return Err(invalid(format!("overlap m={m} exceeds T={t}")));
    }
    check_alpha(alpha)?;
    match alpha {
        Value::Exact(a) => {
            let tt = Rat::from_integer(t.into());
            let q = Rat::one() - a / &tt;
            let lead = Rat::one() - a * Rat::from_integer(m.into()) / &tt;
            let inner = Rat::one() - lead * num_traits::Pow::pow(&q, (t - m) as u32);
            Ok(Value::Exact(inner / a))
        }
        Value::Float(a) => Ok(Value::Float(g_f64(t as f64, *a, m as f64))),
    }
}

/// Float evaluation, also used for non-integer `T`. Goes through
/// `ln_1p`/`exp_m1` so small `α` keeps full relative precision.
fn g_f64(t: f64, alpha: f64, m: f64) -> f64 {
    let lead = 1.0 - alpha * m / t;
    let q = 1.0 - alpha / t;
    let product = if lead > 0.0 && q > 0.0 {
        -((-alpha * m / t).ln_1p() + (t - m) * (-alpha / t).ln_1p()).exp_m1()
    } else {
        1.0 - lead * q.powf(t - m)
    };
    product / alpha
}

/// `max{0, 2T - n}`: the smallest possible overlap of two `T`-subsets of an
/// `n`-set.
pub fn overlap_lower_bound(t: usize, n: usize) -> usize {
    (2 * t).saturating_sub(n)
}

/// `G(T, α, max{0, 2T - n})`.
pub fn g_tilde(t: usize, alpha: &Value, n: usize) -> Result<Value> {
    if t > n {
        return Err(invalid(format!("T={t} exceeds n={n}")));
    }
    g(t, alpha, overlap_lower_bound(t, n))
}

/// The `α → 0⁺` limit of `G(T, α, m)`, which is 1.
pub fn g_limit_alpha_zero(t: usize, m: usize) -> Result<Value> {
    if m > t {
        return Err(invalid(format!("overlap m={m} exceeds T={t}")));
    }
    Ok(Value::Exact(Rat::one()))
}

/// Parameters of one guarantee evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GuaranteeParams {
    #[serde(rename = "T")]
    pub t: usize,
    pub n: usize,
    pub alpha: Value,
    pub m: usize,
}

impl GuaranteeParams {
    pub fn new(t: usize, n: usize, alpha: Value, m: usize) -> Result<Self> {
        if t < 1 || t > n {
            return Err(invalid(format!("need 1 <= T <= n, got T={t}, n={n}")));
        }
        if m > t {
            return Err(invalid(format!("overlap m={m} exceeds T={t}")));
        }
        check_alpha(&alpha)?;
        Ok(Self { t, n, alpha, m })
    }
}

/// All four guarantees side by side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GuaranteeReport {
    pub g_nwf: Value,
    pub g_cc: Value,
    pub g: Value,
    pub g_tilde: Value,
    /// `g ≥ g_tilde ≥ g_cc ≥ g_nwf`.
    pub chain_ok: bool,
    pub notes: Vec<String>,
}

pub fn guarantee_report(params: &GuaranteeParams) -> Result<GuaranteeReport> {
    let GuaranteeParams { t, n, alpha, m } = params;
    let report_nwf = g_nwf(*t, alpha.mode())?;
    let report_cc = g_cc(*t, alpha)?;
    let report_g = g(*t, alpha, *m)?;
    let report_tilde = g_tilde(*t, alpha, *n)?;
    let chain_ok = report_g.ge_tol(&report_tilde)
        && report_tilde.ge_tol(&report_cc)
        && report_cc.ge_tol(&report_nwf);
    let mut notes = Vec::new();
    let lower = overlap_lower_bound(*t, *n);
    if *m < lower {
        notes.push(format!(
            "m={m} is below the overlap lower bound {lower}; no T-subsets of an {n}-set overlap this little"
        ));
    }
    if *m == *t {
        notes.push("m = T: greedy and optimal solutions coincide".into());
    }
    Ok(GuaranteeReport {
        g_nwf: report_nwf,
        g_cc: report_cc,
        g: report_g,
        g_tilde: report_tilde,
        chain_ok,
        notes,
    })
}

/// The two forms of the cardinality-only bound.
#[derive(Debug, Clone, PartialEq)]
pub struct CorollaryBound {
    /// `(1/α)(1 - (1 - α/⌊n/2⌋)^⌊n/2⌋)`, in `α`'s mode.
    pub floor_form: Value,
    /// `(1/α)(1 - (1 - 2α/n)^(n/2))`. The exponent is fractional for odd
    /// `n`, so this form is always a float.
    pub weak_form: f64,
}

pub fn corollary_bound(n: usize, alpha: &Value) -> Result<CorollaryBound> {
    if n < 2 {
        return Err(invalid(format!("corollary bound needs n >= 2, got {n}")));
    }
    check_alpha(alpha)?;
    let half = n / 2;
    let floor_form = g(half, alpha, 0)?;
    let a = alpha.to_f64();
    let weak_form = (1.0 - (1.0 - 2.0 * a / n as f64).powf(n as f64 / 2.0)) / a;
    Ok(CorollaryBound {
        floor_form,
        weak_form,
    })
}

/// Exhaustive minimum of `G~(T, α, n)` over `T = 1..n`; smallest `T` wins
/// ties.
pub fn min_gtilde_over_t(n: usize, alpha: &Value) -> Result<(usize, Value)> {
    if n < 1 {
        return Err(invalid("n must be at least 1"));
    }
    let mut best: Option<(usize, Value)> = None;
    for t in 1..=n {
        let v = g_tilde(t, alpha, n)?;
        let better = match &best {
            None => true,
            Some((_, b)) => v.cmp_same(b).is_lt(),
        };
        if better {
            best = Some((t, v));
        }
    }
    Ok(best.expect("n >= 1 gives at least one T"))
}

/// Grid probe of `G~` as a function of real `T ∈ [1, n]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuousProbe {
    pub grid_step: f64,
    pub t_min: f64,
    pub value_min: f64,
    pub value_at_half_n: f64,
    /// Whether the sampled minimum sits at `T = n/2` (within one grid step).
    pub min_at_half_n: bool,
}

pub fn probe_continuous_min(
    n: usize,
    alpha: f64,
    steps_per_unit: usize,
) -> Result<ContinuousProbe> {
    if n < 2 {
        return Err(invalid("continuous probe needs n >= 2"));
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(invalid(format!("alpha={alpha} outside (0, 1]")));
    }
    let steps_per_unit = steps_per_unit.max(1);
    let step = 1.0 / steps_per_unit as f64;
    let gt = |t: f64| g_f64(t, alpha, (2.0 * t - n as f64).max(0.0));
    let samples = (n - 1) * steps_per_unit;
    let (t_min, value_min) = (0..=samples)
        .map(|k| {
            let t = 1.0 + k as f64 * step;
            (t, gt(t))
        })
        .fold((f64::NAN, f64::INFINITY), |acc, (t, v)| {
            if v < acc.1 {
                (t, v)
            } else {
                acc
            }
        });
    let half = n as f64 / 2.0;
    Ok(ContinuousProbe {
        grid_step: step,
        t_min,
        value_min,
        value_at_half_n: gt(half.max(1.0)),
        min_at_half_n: (t_min - half).abs() <= step,
    })
}

/// A concrete instance realizing a ratio below the cardinality-only bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub instance: InstanceDoc,
    #[serde(rename = "T")]
    pub t: usize,
    pub convention: String,
    /// Brute-force optimum and greedy ratio, when `n` is small enough to check.
    pub verified_ratio: Option<Value>,
    pub overlap: Option<usize>,
    pub ratio_matches: Option<bool>,
}

/// Outcome of comparing the exhaustive minimum of `G~` with the cardinality-only bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub n: usize,
    #[serde(with = "serde_rat")]
    pub alpha: Rat,
    pub corollary_floor: Value,
    pub corollary_weak: f64,
    #[serde(rename = "min_T")]
    pub min_t: usize,
    pub min_value: Value,
    pub consistent: bool,
    pub witness_instance: Option<Witness>,
    pub continuous_probe: ContinuousProbe,
    pub notes: Vec<String>,
}

/// Compares `min_T G~(T, α, n)` with the floor form of the cardinality-only bound. A minimum
/// strictly below the bound is reported as a discrepancy together with a
/// tight-family witness, never raised as an error.
pub fn audit_corollary(n: usize, alpha: &Rat) -> Result<AuditReport> {
    let alpha_value = Value::Exact(alpha.clone());
    let bound = corollary_bound(n, &alpha_value)?;
    let (min_t, min_value) = min_gtilde_over_t(n, &alpha_value)?;
    let consistent = min_value.ge_tol(&bound.floor_form);
    let mut notes = Vec::new();

    let witness_instance = if consistent {
        None
    } else {
        notes.push(format!(
            "G~({min_t}, {}, {n}) = {min_value} is below the corollary bound {}",
            format_rat(alpha),
            bound.floor_form
        ));
        if 2 * min_t > n {
            Some(build_witness(n, min_t, alpha, &min_value)?)
        } else {
            notes.push("minimizing T is not above n/2; no closed-form witness".into());
            None
        }
    };

    let continuous_probe = probe_continuous_min(n, alpha_value.to_f64(), 1000)?;
    if !continuous_probe.min_at_half_n {
        notes.push(format!(
            "sampled continuous minimum at T={:.3}, not at n/2={}",
            continuous_probe.t_min,
            n as f64 / 2.0
        ));
    }

    Ok(AuditReport {
        n,
        alpha: alpha.clone(),
        corollary_floor: bound.floor_form,
        corollary_weak: bound.weak_form,
        min_t,
        min_value,
        consistent,
        witness_instance,
        continuous_probe,
        notes,
    })
}

fn build_witness(n: usize, t: usize, alpha: &Rat, expected: &Value) -> Result<Witness> {
    let params = TightFamilyParams::with_default_r(n, t, alpha.clone())?;
    let instance = tight_instance(&params)?;
    let mut witness = Witness {
        instance: instance.to_doc(),
        t,
        convention: params.convention_note().to_string(),
        verified_ratio: None,
        overlap: None,
        ratio_matches: None,
    };
    if n <= BRUTE_FORCE_CLOSED_FORM_MAX_N {
        let opt = brute_force_opt(&instance, t)?;
        let trace = run_greedy(&instance, t, &TiePolicy::FirstIndex)?;
        let ratio = trace.final_value() / &opt.best_value;
        let solution = trace.solution(n);
        witness.overlap = opt.optima.iter().map(|s| overlap(&solution, s)).min();
        witness.ratio_matches = Some(&ratio == expected);
        witness.verified_ratio = Some(ratio);
    }
    Ok(witness)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    fn ex(num: i64, den: i64) -> Value {
        Value::Exact(rat(num, den))
    }

    #[test]
    fn nwf_values() {
        assert_eq!(g_nwf(1, Mode::Exact).unwrap(), ex(1, 1));
        assert_eq!(g_nwf(2, Mode::Exact).unwrap(), ex(3, 4));
        assert!(g_nwf(100, Mode::Float).unwrap().to_f64() > 1.0 - (-1.0f64).exp());
        assert!(g_nwf(0, Mode::Exact).is_err());
    }

    #[test]
    fn cc_values() {
        for t in 1..8 {
            assert_eq!(g_cc(t, &ex(1, 1)).unwrap(), g_nwf(t, Mode::Exact).unwrap());
        }
        assert_eq!(g_cc(2, &ex(1, 2)).unwrap(), ex(7, 8));
        assert!(g_cc(2, &ex(0, 1)).is_err());
        assert!(g_cc(2, &ex(3, 2)).is_err());
    }

    #[test]
    fn g_values() {
        assert_eq!(g(4, &ex(1, 1), 2).unwrap(), ex(23, 32));
        assert_eq!(g(5, &ex(1, 3), 5).unwrap(), ex(1, 1));
        assert_eq!(g(5, &ex(1, 3), 0).unwrap(), g_cc(5, &ex(1, 3)).unwrap());
        assert!(g(3, &ex(1, 1), 4).is_err());
    }

    #[test]
    fn g_tilde_values() {
        assert_eq!(g_tilde(3, &ex(1, 1), 4).unwrap(), ex(7, 9));
        assert_eq!(g_tilde(2, &ex(1, 1), 4).unwrap(), ex(3, 4));
        assert_eq!(g_tilde(6, &ex(2, 5), 6).unwrap(), ex(1, 1));
        assert!(g_tilde(5, &ex(1, 1), 4).is_err());
    }

    #[test]
    fn overlap_bounds() {
        assert_eq!(overlap_lower_bound(2, 4), 0);
        assert_eq!(overlap_lower_bound(4, 7), 1);
        assert_eq!(overlap_lower_bound(9, 9), 9);
    }

    #[test]
    fn alpha_zero_limit() {
        assert_eq!(g_limit_alpha_zero(5, 0).unwrap(), ex(1, 1));
        assert_eq!(g_limit_alpha_zero(5, 5).unwrap(), ex(1, 1));
        let near = g(5, &Value::Float(1e-6), 2).unwrap().to_f64();
        assert!(1.0 - near <= 1e-6);
    }

    #[test]
    fn corollary_forms() {
        let b = corollary_bound(7, &ex(1, 1)).unwrap();
        assert_eq!(b.floor_form, ex(19, 27));
        let b = corollary_bound(4, &ex(1, 1)).unwrap();
        assert_eq!(b.floor_form, ex(3, 4));
        assert!((b.weak_form - 0.75).abs() < 1e-15);
        let b = corollary_bound(3, &ex(1, 1)).unwrap();
        assert_eq!(b.floor_form, ex(1, 1));
        assert!(b.floor_form.to_f64() >= b.weak_form);
        assert!(corollary_bound(1, &ex(1, 1)).is_err());
    }

    #[test]
    fn exhaustive_minimum() {
        assert_eq!(min_gtilde_over_t(2, &ex(1, 1)).unwrap(), (1, ex(1, 1)));
        assert_eq!(min_gtilde_over_t(3, &ex(1, 1)).unwrap(), (2, ex(3, 4)));
        assert_eq!(min_gtilde_over_t(7, &ex(1, 1)).unwrap(), (4, ex(175, 256)));
    }

    #[test]
    fn audit_outcomes() {
        let r = audit_corollary(4, &rat(1, 1)).unwrap();
        assert!(r.consistent);
        assert_eq!(r.min_value, ex(3, 4));
        assert!(r.witness_instance.is_none());

        let r = audit_corollary(3, &rat(1, 1)).unwrap();
        assert!(!r.consistent);
        assert_eq!(r.corollary_floor, ex(1, 1));
        assert_eq!((r.min_t, r.min_value.clone()), (2, ex(3, 4)));
        let w = r.witness_instance.unwrap();
        assert_eq!(w.verified_ratio, Some(ex(3, 4)));
        assert_eq!(w.ratio_matches, Some(true));

        let r = audit_corollary(7, &rat(1, 1)).unwrap();
        assert!(!r.consistent);
        assert_eq!(r.corollary_floor, ex(19, 27));
        assert_eq!(r.min_value, ex(175, 256));
        assert_eq!(
            r.witness_instance.unwrap().verified_ratio,
            Some(ex(175, 256))
        );
        assert!(!r.continuous_probe.min_at_half_n);
    }

    #[test]
    fn report_chain() {
        let p = GuaranteeParams::new(5, 7, ex(1, 2), 3).unwrap();
        let r = guarantee_report(&p).unwrap();
        assert!(r.chain_ok);
        assert!(r.notes.is_empty());
        let p = GuaranteeParams::new(5, 7, ex(1, 2), 0).unwrap();
        let r = guarantee_report(&p).unwrap();
        assert_eq!(r.notes.len(), 1);
    }
}
