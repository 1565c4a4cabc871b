//! Problem instances: a ground-set size plus a deterministic set-function
//! oracle with `f(∅) = 0`.

use std::fs;
use std::path::Path;

use num_traits::{One, Pow, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::instances::TightFamilyParams;
use crate::scalar::{common_mode, serde_rat, Mode, Rat, Value};
use crate::subset::{ElementId, SubsetMask, MAX_N};

/// Largest ground set stored as a full `2^n` table.
pub const MAX_TABLE_N: usize = 20;

/// The oracle family an instance belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InstanceKind {
    ExplicitTable,
    Coverage,
    ConcaveCardinality,
    Additive,
    TightFamily,
}

#[derive(Debug, Clone)]
enum Oracle {
    Table(Vec<Value>),
    Coverage {
        weights: Vec<Value>,
        sets: Vec<Vec<usize>>,
        // one universe bitset per ground element
        cover: Vec<Vec<u64>>,
    },
    Concave(Vec<Value>),
    Additive(Vec<Value>),
    Tight(TightOracle),
}

#[derive(Debug, Clone)]
struct TightOracle {
    params: TightFamilyParams,
    // (1 - α/T)^(i-1) for i = 1..r
    powers: Vec<Rat>,
    // α / T for the family parameter T
    slope: Rat,
}

/// Optional knowledge attached to an instance.
#[derive(Debug, Clone, Default)]
pub struct Metadata {
    /// Total curvature, when known by construction.
    pub known_curvature: Option<Value>,
    pub declared_monotone: bool,
    pub declared_submodular: bool,
}

/// An immutable problem instance.
#[derive(Debug, Clone)]
pub struct Instance {
    n: usize,
    mode: Mode,
    oracle: Oracle,
    meta: Metadata,
}

impl Instance {
    /// Explicit `2^n` table indexed by mask bits. Not declared monotone or
    /// submodular unless [`Instance::with_declarations`] says so.
    pub fn explicit_table(n: usize, values: Vec<Value>) -> Result<Self> {
        if n > MAX_TABLE_N {
            return Err(Error::ResourceLimit(format!(
                "explicit tables support n <= {MAX_TABLE_N}, got n={n}"
            )));
        }
        if values.len() != 1 << n {
            return Err(invalid(format!(
                "explicit table for n={n} needs {} values, got {}",
                1usize << n,
                values.len()
            )));
        }
        let mode = common_mode(&values)?.expect("table has at least one value");
        if !values[0].is_zero() {
            return Err(invalid("f(∅) must be 0"));
        }
        if values.iter().any(Value::is_negative) {
            return Err(invalid("set-function values must be nonnegative"));
        }
        Ok(Self {
            n,
            mode,
            oracle: Oracle::Table(values),
            meta: Metadata::default(),
        })
    }

    /// Weighted coverage: element `i` covers universe items `sets[i]`, and
    /// `f(S)` is the total weight of the covered items.
    pub fn coverage(weights: Vec<Value>, sets: Vec<Vec<usize>>) -> Result<Self> {
        let n = sets.len();
        check_n(n)?;
        let mode = mode_of(&weights)?;
        if weights.iter().any(Value::is_negative) {
            return Err(invalid("coverage weights must be nonnegative"));
        }
        let words = weights.len().div_ceil(64);
        let mut cover = Vec::with_capacity(n);
        for (i, set) in sets.iter().enumerate() {
            let mut bits = vec![0u64; words];
            for &item in set {
                if item >= weights.len() {
                    return Err(invalid(format!(
                        "set {i} references universe item {item} but only {} weights given",
                        weights.len()
                    )));
                }
                bits[item / 64] |= 1 << (item % 64);
            }
            cover.push(bits);
        }
        Ok(Self {
            n,
            mode,
            oracle: Oracle::Coverage {
                weights,
                sets,
                cover,
            },
            meta: Metadata {
                declared_monotone: true,
                declared_submodular: true,
                ..Default::default()
            },
        })
    }

    /// `f(S) = g(|S|)` with `g(0) = 0`, `g` nondecreasing with nonincreasing
    /// increments.
    pub fn concave_cardinality(g: Vec<Value>) -> Result<Self> {
        if g.is_empty() {
            return Err(invalid("concave-cardinality table needs g(0)"));
        }
        let n = g.len() - 1;
        check_n(n)?;
        let mode = mode_of(&g)?;
        if !g[0].is_zero() {
            return Err(invalid("g(0) must be 0"));
        }
        let steps: Vec<Value> = g.windows(2).map(|w| &w[1] - &w[0]).collect();
        if steps.iter().any(Value::below_zero_tol) {
            return Err(invalid("g must be nondecreasing"));
        }
        if steps.windows(2).any(|w| !w[0].ge_tol(&w[1])) {
            return Err(invalid("g must have nonincreasing increments"));
        }
        Ok(Self {
            n,
            mode,
            oracle: Oracle::Concave(g),
            meta: Metadata {
                declared_monotone: true,
                declared_submodular: true,
                ..Default::default()
            },
        })
    }

    /// Additive function with nonnegative weights; curvature 0.
    pub fn additive(weights: Vec<Value>) -> Result<Self> {
        let n = weights.len();
        check_n(n)?;
        let mode = mode_of(&weights)?;
        if weights.iter().any(Value::is_negative) {
            return Err(invalid("additive weights must be nonnegative"));
        }
        Ok(Self {
            n,
            mode,
            meta: Metadata {
                known_curvature: Some(Value::zero(mode)),
                declared_monotone: true,
                declared_submodular: true,
            },
            oracle: Oracle::Additive(weights),
        })
    }

    pub(crate) fn tight(params: TightFamilyParams) -> Self {
        let family_t = params.family_t();
        let slope = params.alpha.clone() / Rat::from_integer(family_t.into());
        let ratio = Rat::one() - &slope;
        let powers = (0..params.r).map(|i| Pow::pow(&ratio, i as u32)).collect();
        let known = params
            .realizes_curvature()
            .then(|| Value::Exact(params.alpha.clone()));
        let monotone = params.is_monotone();
        Self {
            n: params.n,
            mode: Mode::Exact,
            oracle: Oracle::Tight(TightOracle {
                params,
                powers,
                slope,
            }),
            meta: Metadata {
                known_curvature: known,
                declared_monotone: monotone,
                declared_submodular: true,
            },
        }
    }

    /// Overrides the monotone/submodular declarations.
    pub fn with_declarations(mut self, monotone: bool, submodular: bool) -> Self {
        self.meta.declared_monotone = monotone;
        self.meta.declared_submodular = submodular;
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn kind(&self) -> InstanceKind {
        match self.oracle {
            Oracle::Table(_) => InstanceKind::ExplicitTable,
            Oracle::Coverage { .. } => InstanceKind::Coverage,
            Oracle::Concave(_) => InstanceKind::ConcaveCardinality,
            Oracle::Additive(_) => InstanceKind::Additive,
            Oracle::Tight(_) => InstanceKind::TightFamily,
        }
    }

    pub fn metadata(&self) -> &Metadata {
        &self.meta
    }

    pub fn tight_params(&self) -> Option<&TightFamilyParams> {
        match &self.oracle {
            Oracle::Tight(t) => Some(&t.params),
            _ => None,
        }
    }

    pub fn ground_set(&self) -> SubsetMask {
        SubsetMask::full(self.n)
    }

    /// `f(S)`.
    pub fn evaluate(&self, s: &SubsetMask) -> Result<Value> {
        if self.n < 64 && s.bits() >> self.n != 0 {
            return Err(Error::InvalidMask {
                bits: s.bits(),
                n: self.n,
            });
        }
        Ok(self.eval_bits(s.bits()))
    }

    /// `f(S ∪ {x}) − f(S)`.
    pub fn marginal_gain(&self, s: &SubsetMask, x: ElementId) -> Result<Value> {
        if x.0 >= self.n {
            return Err(invalid(format!(
                "element {} out of range for n={}",
                x.0, self.n
            )));
        }
        if s.contains(x) {
            return Err(Error::ElementPresent(x.0));
        }
        let base = self.evaluate(s)?;
        Ok(self.eval_bits(s.bits() | 1 << x.0) - base)
    }

    /// Oracle call on raw bits already known to fit the ground set.
    pub(crate) fn eval_bits(&self, bits: u64) -> Value {
        match &self.oracle {
            Oracle::Table(values) => values[bits as usize].clone(),
            Oracle::Additive(weights) => sum_over(self.mode, bits, |i| &weights[i]),
            Oracle::Concave(g) => g[bits.count_ones() as usize].clone(),
            Oracle::Coverage { weights, cover, .. } => {
                let words = weights.len().div_ceil(64);
                let mut covered = vec![0u64; words];
                let mut rest = bits;
                while rest != 0 {
                    let i = rest.trailing_zeros() as usize;
                    rest &= rest - 1;
                    for (c, w) in covered.iter_mut().zip(&cover[i]) {
                        *c |= w;
                    }
                }
                let mut total = Value::zero(self.mode);
                for (w, word) in covered.iter().enumerate() {
                    let mut word = *word;
                    while word != 0 {
                        let j = word.trailing_zeros() as usize;
                        word &= word - 1;
                        total = total + &weights[w * 64 + j];
                    }
                }
                total
            }
            Oracle::Tight(t) => Value::Exact(t.eval(bits)),
        }
    }

    pub fn to_doc(&self) -> InstanceDoc {
        match &self.oracle {
            Oracle::Table(values) => InstanceDoc::ExplicitTable {
                n: self.n,
                values: values.clone(),
                monotone: Some(self.meta.declared_monotone),
                submodular: Some(self.meta.declared_submodular),
            },
            Oracle::Coverage { weights, sets, .. } => InstanceDoc::Coverage {
                n: self.n,
                weights: weights.clone(),
                sets: sets.clone(),
            },
            Oracle::Concave(g) => InstanceDoc::ConcaveCardinality {
                n: self.n,
                g: g.clone(),
            },
            Oracle::Additive(weights) => InstanceDoc::Additive {
                n: self.n,
                weights: weights.clone(),
            },
            Oracle::Tight(t) => InstanceDoc::TightFamily {
                n: t.params.n,
                t: t.params.t,
                alpha: t.params.alpha.clone(),
                r: t.params.r,
            },
        }
    }

    pub fn from_doc(doc: InstanceDoc) -> Result<Self> {
        let (declared_n, instance) = match doc {
            InstanceDoc::ExplicitTable {
                n,
                values,
                monotone,
                submodular,
            } => {
                let inst = Self::explicit_table(n, values)?;
                (
                    n,
                    inst.with_declarations(monotone.unwrap_or(false), submodular.unwrap_or(false)),
                )
            }
            InstanceDoc::Coverage { n, weights, sets } => {
                check_n(n)?;
                (n, Self::coverage(weights, sets)?)
            }
            InstanceDoc::ConcaveCardinality { n, g } => {
                check_n(n)?;
                (n, Self::concave_cardinality(g)?)
            }
            InstanceDoc::Additive { n, weights } => {
                check_n(n)?;
                (n, Self::additive(weights)?)
            }
            InstanceDoc::TightFamily { n, t, alpha, r } => {
                let params = TightFamilyParams::new(n, t, alpha, r)?;
                (n, crate::instances::tight_instance(&params)?)
            }
        };
        if instance.n != declared_n {
            return Err(invalid(format!(
                "declared n={declared_n} but the data describe n={}",
                instance.n
            )));
        }
        Ok(instance)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_doc()).expect("instance documents always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_doc(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_json() + "\n")?;
        Ok(())
    }
}

impl TightOracle {
    fn eval(&self, bits: u64) -> Rat {
        let r = self.params.r;
        let a_bits = bits & ((1u64 << r) - 1);
        let u = (bits >> r).count_ones();
        let mut head = Rat::zero();
        let mut rest = a_bits;
        while rest != 0 {
            let i = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            head += &self.powers[i];
        }
        let u = Rat::from_integer(u.into());
        let damping = Rat::one() - &self.slope * &u;
        u + damping * head
    }
}

fn check_n(n: usize) -> Result<()> {
    if n > MAX_N {
        return Err(Error::ResourceLimit(format!(
            "ground sets are limited to n <= {MAX_N}, got n={n}"
        )));
    }
    Ok(())
}

fn mode_of(values: &[Value]) -> Result<Mode> {
    Ok(common_mode(values)?.unwrap_or(Mode::Exact))
}

fn sum_over<'a>(mode: Mode, bits: u64, weight: impl Fn(usize) -> &'a Value) -> Value {
    let mut total = Value::zero(mode);
    let mut rest = bits;
    while rest != 0 {
        let i = rest.trailing_zeros() as usize;
        rest &= rest - 1;
        total = total + weight(i);
    }
    total
}

/// On-disk instance schema. Rationals are `"p/q"` strings; plain JSON
/// numbers select float mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InstanceDoc {
    ExplicitTable {
        n: usize,
        values: Vec<Value>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        monotone: Option<bool>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        submodular: Option<bool>,
    },
    Coverage {
        n: usize,
        weights: Vec<Value>,
        sets: Vec<Vec<usize>>,
    },
    Additive {
        n: usize,
        weights: Vec<Value>,
    },
    ConcaveCardinality {
        n: usize,
        g: Vec<Value>,
    },
    TightFamily {
        n: usize,
        #[serde(rename = "T")]
        t: usize,
        #[serde(with = "serde_rat")]
        alpha: Rat,
        r: usize,
    },
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    fn ex(v: i64) -> Value {
        Value::from_int(Mode::Exact, v)
    }

    pub(crate) fn c4() -> Instance {
        Instance::coverage(
            vec![ex(1); 4],
            vec![vec![0, 1, 2], vec![0, 1], vec![2, 3], vec![3]],
        )
        .unwrap()
    }

    #[test]
    fn coverage_values() {
        let inst = c4();
        let s = SubsetMask::from_elements(4, [0]).unwrap();
        assert_eq!(inst.evaluate(&s).unwrap(), ex(3));
        assert_eq!(inst.evaluate(&SubsetMask::empty(4)).unwrap(), ex(0));
        assert_eq!(inst.marginal_gain(&s, ElementId(2)).unwrap(), ex(1));
        assert_eq!(inst.evaluate(&inst.ground_set()).unwrap(), ex(4));
    }

    #[test]
    fn additive_marginal() {
        let inst = Instance::additive(vec![ex(5), ex(1), ex(2)]).unwrap();
        let s = SubsetMask::from_elements(3, [0]).unwrap();
        assert_eq!(inst.marginal_gain(&s, ElementId(2)).unwrap(), ex(2));
    }

    #[test]
    fn marginal_errors() {
        let inst = c4();
        let s = SubsetMask::from_elements(4, [1]).unwrap();
        assert!(matches!(
            inst.marginal_gain(&s, ElementId(1)),
            Err(Error::ElementPresent(1))
        ));
        let wide = SubsetMask::new(0b10000, 5).unwrap();
        assert!(matches!(
            inst.evaluate(&wide),
            Err(Error::InvalidMask { .. })
        ));
    }

    #[test]
    fn table_validation() {
        assert!(Instance::explicit_table(1, vec![ex(1), ex(1)]).is_err());
        assert!(Instance::explicit_table(1, vec![ex(0)]).is_err());
        let mixed = vec![ex(0), Value::Float(1.0)];
        assert!(matches!(
            Instance::explicit_table(1, mixed),
            Err(Error::ModeMismatch(_))
        ));
        assert!(matches!(
            Instance::explicit_table(30, vec![]),
            Err(Error::ResourceLimit(_))
        ));
    }

    #[test]
    fn concave_validation() {
        let g = |v: &[f64]| v.iter().map(|x| Value::Float(*x)).collect::<Vec<_>>();
        assert!(Instance::concave_cardinality(g(&[0.0, 1.0, 1.5, 1.75])).is_ok());
        assert!(Instance::concave_cardinality(g(&[0.0, 1.0, 2.5])).is_err());
        assert!(Instance::concave_cardinality(g(&[0.0, 1.0, 0.5])).is_err());
        assert!(Instance::concave_cardinality(g(&[0.5, 1.0])).is_err());
    }

    #[test]
    fn json_round_trip_preserves_values() {
        let inst = c4();
        let back = Instance::from_json(&inst.to_json()).unwrap();
        for bits in 0..16u64 {
            assert_eq!(inst.eval_bits(bits), back.eval_bits(bits));
        }
        let text = r#"{"kind":"additive","n":2,"weights":["1/3","2/3"]}"#;
        let inst = Instance::from_json(text).unwrap();
        assert_eq!(
            inst.evaluate(&inst.ground_set()).unwrap(),
            Value::Exact(rat(1, 1))
        );
    }

    #[test]
    fn json_rejects_inconsistent_n_and_unknown_kind() {
        let text = r#"{"kind":"additive","n":3,"weights":["1/3","2/3"]}"#;
        assert!(Instance::from_json(text).is_err());
        let text = r#"{"kind":"mystery","n":1}"#;
        assert!(Instance::from_json(text).is_err());
    }
}
