//! Instance generators: the tight worst-case family and a zoo of standard
//! monotone submodular functions for randomized testing.
//!
//! The tight family lives on `X = {a_1..a_r, b_1..b_{n-r}}`, with the
//! a-elements at indices `0..r` so that first-index tie-breaking makes greedy
//! take `a_1, a_2, …` whenever an a-element ties with a b-element. With
//! `q = 1 - α/T` and a set holding `u` b-elements and the a-elements with
//! indices `i_1..i_s`:
//!
//! ```text
//! f(S) = u + (1 - α·u/T) · Σ_k q^(i_k - 1)
//! ```

use num_traits::{One, Pow, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::instance::Instance;
use crate::scalar::{rat, rat_int, serde_rat, Mode, Rat, Value};

/// Parameters of the tight family.
///
/// `t` is the cardinality the family is tuned for. The closed form uses `t`
/// as its `T` except when `t = n`, where it uses `n - r` so the instance keeps
/// curvature exactly `α` (see [`TightFamilyParams::family_t`]).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TightFamilyParams {
    pub n: usize,
    #[serde(rename = "T")]
    pub t: usize,
    #[serde(with = "serde_rat")]
    pub alpha: Rat,
    pub r: usize,
}

impl TightFamilyParams {
    pub fn new(n: usize, t: usize, alpha: Rat, r: usize) -> Result<Self> {
        if n < 2 {
            return Err(invalid(format!("tight family needs n >= 2, got {n}")));
        }
        if n > crate::subset::MAX_N {
            return Err(Error::ResourceLimit(format!("n={n} exceeds 63")));
        }
        if t < 1 || t > n {
            return Err(invalid(format!("T={t} outside [1, {n}]")));
        }
        if alpha <= Rat::zero() || alpha > Rat::one() {
            return Err(invalid(format!(
                "alpha={} outside (0, 1]",
                crate::scalar::format_rat(&alpha)
            )));
        }
        if r < 1 || r > n / 2 {
            return Err(invalid(format!("r={r} outside [1, {}]", n / 2)));
        }
        Ok(Self { n, t, alpha, r })
    }

    /// Parameters with `r = default_r(n, t)`.
    pub fn with_default_r(n: usize, t: usize, alpha: Rat) -> Result<Self> {
        if t < 1 || t > n {
            return Err(invalid(format!("T={t} outside [1, {n}]")));
        }
        Self::new(n, t, alpha, default_r(n, t))
    }

    /// The `T` used inside the closed form.
    pub fn family_t(&self) -> usize {
        if self.t == self.n {
            self.n - self.r
        } else {
            self.t
        }
    }

    /// Whether the b-count equals the family `T`, which is exactly when the
    /// total curvature equals `α`.
    pub fn realizes_curvature(&self) -> bool {
        self.n - self.r == self.family_t()
    }

    /// Whether `1 - α·u/T ≥ 0` for every reachable `u`, i.e. `α(n-r) ≤ T`.
    pub fn is_monotone(&self) -> bool {
        let lhs = &self.alpha * rat_int((self.n - self.r) as i64);
        lhs <= rat_int(self.family_t() as i64)
    }

    /// The regime covered by the explicit greedy run: `T > n/2`, `r = n - T`
    /// (or `T = n`).
    pub fn is_large_t_case(&self) -> bool {
        2 * self.t > self.n && (self.t == self.n || self.r == self.n - self.t)
    }

    /// Short note on which construction rule produced these parameters.
    pub fn convention_note(&self) -> &'static str {
        if self.t == self.n {
            "T = n: closed form uses T' = n - r so the instance keeps curvature alpha; ratio is 1"
        } else if 2 * self.t > self.n && self.r == self.n - self.t {
            "T > n/2 with r = n - T"
        } else {
            "omitted-case convention (T <= n/2 or nonstandard r): ratio validated by brute force only"
        }
    }
}

/// `n - T` when `T > n/2`, else `min(T, ⌊n/2⌋)`. For `T = n` the literal
/// `n - T = 0` is outside the family, so `1` is returned.
pub fn default_r(n: usize, t: usize) -> usize {
    if 2 * t > n {
        (n - t).max(1)
    } else {
        t.min(n / 2)
    }
}

/// Builds the exact-mode tight instance.
pub fn tight_instance(params: &TightFamilyParams) -> Result<Instance> {
    let checked = TightFamilyParams::new(params.n, params.t, params.alpha.clone(), params.r)?;
    Ok(Instance::tight(checked))
}

/// Predicted optimum, greedy value and ratio for the `T > n/2` case.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictedValues {
    #[serde(with = "serde_rat")]
    pub opt: Rat,
    #[serde(with = "serde_rat")]
    pub greedy: Rat,
    #[serde(with = "serde_rat")]
    pub ratio: Rat,
}

/// Closed-form values when `T > n/2` and `r = n - T`:
/// `opt = T`, `greedy = (T/α)(1 - (1 - αm/T)(1 - α/T)^(n-T))` with
/// `m = 2T - n`. For `T = n` greedy takes all of `X`, so both equal `f(X)`.
pub fn predicted_values(params: &TightFamilyParams) -> Result<PredictedValues> {
    let (n, t) = (params.n, params.t);
    if !params.is_large_t_case() {
        return Err(Error::Unsupported(format!(
            "closed-form greedy value is only available for T > n/2 with r = n - T (n={n}, T={t}, r={})",
            params.r
        )));
    }
    if t == n {
        let inst = tight_instance(params)?;
        let full = inst
            .evaluate(&inst.ground_set())?
            .as_rat()
            .cloned()
            .expect("tight instances are exact");
        return Ok(PredictedValues {
            opt: full.clone(),
            greedy: full,
            ratio: Rat::one(),
        });
    }
    let m = 2 * t - n;
    debug_assert_eq!(n - t, t - m);
    let tt = rat_int(t as i64);
    let alpha = &params.alpha;
    let q = Rat::one() - alpha / &tt;
    let overlap_factor = Rat::one() - alpha * rat_int(m as i64) / &tt;
    let greedy = &tt / alpha * (Rat::one() - overlap_factor * Pow::pow(&q, (n - t) as u32));
    let ratio = &greedy / &tt;
    Ok(PredictedValues {
        opt: tt,
        greedy,
        ratio,
    })
}

/// `Σ_{k=1}^{l} (1 - α/T)^(k-1)`, computed by summation and checked against
/// the closed form `(T/α)(1 - (1 - α/T)^l)`.
pub fn geometric_sum(l: usize, t: usize, alpha: &Rat) -> Result<Rat> {
    if t == 0 {
        return Err(invalid("T must be positive"));
    }
    if alpha.is_zero() {
        return Err(invalid("alpha must be nonzero"));
    }
    let tt = rat_int(t as i64);
    let q = Rat::one() - alpha / &tt;
    let mut term = Rat::one();
    let mut sum = Rat::zero();
    for _ in 0..l {
        sum += &term;
        term *= &q;
    }
    let closed = &tt / alpha * (Rat::one() - Pow::pow(&q, l as u32));
    if sum != closed {
        return Err(Error::Degenerate(format!(
            "geometric sum disagrees with its closed form for l={l}, T={t}"
        )));
    }
    Ok(sum)
}

/// Kinds of randomly generated zoo instances.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ZooKind {
    WeightedCoverage,
    ConcaveCardinality,
    Additive,
}

/// Recipe for a random zoo instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionZooSpec {
    pub kind: ZooKind,
    pub n: usize,
    pub mode: Mode,
    pub seed: u64,
    /// Coverage only: make every universe weight distinct by adding a
    /// per-item perturbation.
    #[serde(default)]
    pub distinct_weights: bool,
}

impl FunctionZooSpec {
    pub fn new(kind: ZooKind, n: usize, mode: Mode, seed: u64) -> Self {
        Self {
            kind,
            n,
            mode,
            seed,
            distinct_weights: false,
        }
    }
}

/// Random monotone submodular instance. Exact mode draws small rationals
/// (ties are common); float mode draws uniform reals.
pub fn make_zoo_instance(spec: &FunctionZooSpec) -> Result<Instance> {
    let n = spec.n;
    if n == 0 {
        return Err(invalid("zoo instances need n >= 1"));
    }
    if n > crate::subset::MAX_N {
        return Err(Error::ResourceLimit(format!("n={n} exceeds 63")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    match spec.kind {
        ZooKind::Additive => {
            let weights = (0..n).map(|_| draw_weight(&mut rng, spec.mode)).collect();
            Instance::additive(weights)
        }
        ZooKind::ConcaveCardinality => {
            let mut steps: Vec<Value> = (0..n)
                .map(|_| match spec.mode {
                    Mode::Exact => Value::Exact(rat_int(rng.gen_range(0..=10))),
                    Mode::Float => Value::Float(rng.gen_range(0.0..10.0)),
                })
                .collect();
            steps.sort_by(|a, b| b.cmp_same(a));
            // keep f from being identically zero
            if steps[0].is_zero() {
                steps[0] = Value::one(spec.mode);
            }
            let mut g = vec![Value::zero(spec.mode)];
            for step in steps {
                let next = g.last().expect("g starts non-empty") + &step;
                g.push(next);
            }
            Instance::concave_cardinality(g)
        }
        ZooKind::WeightedCoverage => {
            let universe = rng.gen_range(n..=2 * n);
            let mut weights: Vec<Value> = (0..universe)
                .map(|_| draw_weight(&mut rng, spec.mode))
                .collect();
            if spec.distinct_weights {
                let mut order: Vec<usize> = (0..universe).collect();
                order.shuffle(&mut rng);
                for (rank, &item) in order.iter().enumerate() {
                    let bump = match spec.mode {
                        Mode::Exact => Value::Exact(rat(rank as i64 + 1, 1 << 20)),
                        Mode::Float => Value::Float((rank as f64 + 1.0) * 1e-6),
                    };
                    weights[item] = &weights[item] + &bump;
                }
            }
            let density = rng.gen_range(0.15..0.5);
            let sets = (0..n)
                .map(|_| {
                    let mut set: Vec<usize> =
                        (0..universe).filter(|_| rng.gen_bool(density)).collect();
                    if set.is_empty() {
                        set.push(rng.gen_range(0..universe));
                    }
                    set
                })
                .collect();
            Instance::coverage(weights, sets)
        }
    }
}

fn draw_weight(rng: &mut ChaCha8Rng, mode: Mode) -> Value {
    match mode {
        Mode::Exact => Value::Exact(rat(rng.gen_range(1..=20), rng.gen_range(1..=4))),
        Mode::Float => Value::Float(rng.gen_range(0.5..10.0)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::subset::{ElementId, SubsetMask};

    fn params(n: usize, t: usize, a: Rat, r: usize) -> TightFamilyParams {
        TightFamilyParams::new(n, t, a, r).unwrap()
    }

    fn eval(inst: &Instance, elems: &[usize]) -> Rat {
        let s = SubsetMask::from_elements(inst.n(), elems.iter().copied()).unwrap();
        inst.evaluate(&s).unwrap().as_rat().unwrap().clone()
    }

    #[test]
    fn tight_values_small() {
        // n=4, T=3, r=1: a1 = 0, b1..b3 = 1..4
        let inst = tight_instance(&params(4, 3, rat(1, 1), 1)).unwrap();
        assert_eq!(eval(&inst, &[1, 2, 3]), rat(3, 1));
        assert_eq!(eval(&inst, &[0]), rat(1, 1));
        assert_eq!(eval(&inst, &[1]), rat(1, 1));
        assert_eq!(eval(&inst, &[0, 1]), rat(5, 3));
        assert_eq!(eval(&inst, &[]), rat(0, 1));

        let inst = tight_instance(&params(2, 1, rat(1, 1), 1)).unwrap();
        assert_eq!(eval(&inst, &[0, 1]), rat(1, 1));
    }

    #[test]
    fn tight_b_marginal() {
        // n=7, T=4, r=3: 1 - (1/4)(1 + 3/4 + 9/16) = 27/64
        let inst = tight_instance(&params(7, 4, rat(1, 1), 3)).unwrap();
        let s = SubsetMask::from_elements(7, [0, 1, 2]).unwrap();
        let gain = inst.marginal_gain(&s, ElementId(3)).unwrap();
        assert_eq!(gain, Value::Exact(rat(27, 64)));
    }

    #[test]
    fn tight_rejects_bad_r_and_alpha() {
        assert!(TightFamilyParams::new(4, 3, rat(1, 1), 0).is_err());
        assert!(TightFamilyParams::new(4, 3, rat(1, 1), 3).is_err());
        assert!(TightFamilyParams::new(4, 3, rat(2, 1), 1).is_err());
        assert!(TightFamilyParams::new(4, 3, rat(0, 1), 1).is_err());
        assert!(TightFamilyParams::new(4, 5, rat(1, 1), 1).is_err());
    }

    #[test]
    fn default_r_cases() {
        assert_eq!(default_r(7, 4), 3);
        assert_eq!(default_r(4, 2), 2);
        assert_eq!(default_r(2, 1), 1);
        assert_eq!(default_r(9, 3), 3);
        assert_eq!(default_r(5, 5), 1);
    }

    #[test]
    fn predicted_values_match_hand_results() {
        let p = predicted_values(&params(4, 3, rat(1, 1), 1)).unwrap();
        assert_eq!(
            (p.opt, p.greedy, p.ratio),
            (rat(3, 1), rat(7, 3), rat(7, 9))
        );
        let p = predicted_values(&params(7, 4, rat(1, 1), 3)).unwrap();
        assert_eq!(
            (p.opt, p.greedy, p.ratio),
            (rat(4, 1), rat(175, 64), rat(175, 256))
        );
        let p = predicted_values(&params(2, 2, rat(1, 2), 1)).unwrap();
        assert_eq!(p.ratio, rat(1, 1));
        assert_eq!(p.opt, p.greedy);
        assert!(matches!(
            predicted_values(&params(6, 3, rat(1, 1), 3)),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn geometric_sums() {
        assert_eq!(geometric_sum(0, 5, &rat(1, 2)).unwrap(), rat(0, 1));
        assert_eq!(geometric_sum(2, 2, &rat(1, 1)).unwrap(), rat(3, 2));
        assert_eq!(geometric_sum(3, 4, &rat(1, 2)).unwrap(), rat(169, 64));
    }

    #[test]
    fn zoo_instances_have_requested_shape() {
        for kind in [
            ZooKind::WeightedCoverage,
            ZooKind::ConcaveCardinality,
            ZooKind::Additive,
        ] {
            for mode in [Mode::Exact, Mode::Float] {
                let inst = make_zoo_instance(&FunctionZooSpec::new(kind, 6, mode, 7)).unwrap();
                assert_eq!(inst.n(), 6);
                assert_eq!(inst.mode(), mode);
                assert!(inst.metadata().declared_submodular);
            }
        }
        assert!(
            make_zoo_instance(&FunctionZooSpec::new(ZooKind::Additive, 0, Mode::Exact, 1)).is_err()
        );
    }

    #[test]
    fn zoo_is_deterministic_per_seed() {
        let spec = FunctionZooSpec::new(ZooKind::WeightedCoverage, 8, Mode::Float, 42);
        let a = make_zoo_instance(&spec).unwrap();
        let b = make_zoo_instance(&spec).unwrap();
        for bits in 0..256u64 {
            assert_eq!(a.eval_bits(bits), b.eval_bits(bits));
        }
    }
}
