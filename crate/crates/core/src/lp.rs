//! The primal and dual LPs behind the guarantee, the closed-form dual
//! certificate, and a small exact simplex to cross-check both.

use std::collections::BTreeSet;

use num_traits::{One, Pow, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bounds::g;
use crate::error::{invalid, Error, Result};
use crate::scalar::{rat_int, serde_rat, serde_rat_vec, Rat, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    Min,
    Max,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RowSense {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">=")]
    Ge,
}

/// Dense LP over `x ≥ 0`. Every row shares one sense.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub sense: Sense,
    pub objective: Vec<Rat>,
    pub rows: Vec<Vec<Rat>>,
    pub rhs: Vec<Rat>,
    pub row_sense: RowSense,
}

impl LinearProgram {
    pub fn new(
        sense: Sense,
        objective: Vec<Rat>,
        rows: Vec<Vec<Rat>>,
        rhs: Vec<Rat>,
        row_sense: RowSense,
    ) -> Result<Self> {
        if rows.len() != rhs.len() {
            return Err(invalid(format!(
                "{} rows but {} right-hand sides",
                rows.len(),
                rhs.len()
            )));
        }
        if let Some(bad) = rows.iter().position(|r| r.len() != objective.len()) {
            return Err(invalid(format!(
                "row {bad} has {} coefficients, expected {}",
                rows[bad].len(),
                objective.len()
            )));
        }
        Ok(Self {
            sense,
            objective,
            rows,
            rhs,
            row_sense,
        })
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    /// Row activity `A x`.
    pub fn activity(&self, x: &[Rat]) -> Vec<Rat> {
        self.rows
            .iter()
            .map(|r| r.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn is_feasible(&self, x: &[Rat]) -> bool {
        x.len() == self.num_vars()
            && x.iter().all(|v| !v.is_negative())
            && self
                .activity(x)
                .iter()
                .zip(&self.rhs)
                .all(|(a, b)| match self.row_sense {
                    RowSense::Le => a <= b,
                    RowSense::Ge => a >= b,
                })
    }

    pub fn objective_at(&self, x: &[Rat]) -> Rat {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }
}

fn check_alpha(alpha: &Rat) -> Result<()> {
    if !alpha.is_positive() || *alpha > Rat::one() {
        return Err(invalid(format!(
            "alpha={} outside (0, 1]",
            crate::scalar::format_rat(alpha)
        )));
    }
    Ok(())
}

fn usize_rat(v: usize) -> Rat {
    rat_int(v as i64)
}

/// Minimise `Σ b_t` subject to, for `t = 1..T`,
/// `α·Σ_{i∈V_{t-1}∖U} b_i + Σ_{i∈U∩V_{t-1}} b_i + (T − |U∩V_{t-1}|)·b_t ≥ 1`
/// with `V_t = {1..t}`. Indices in `u` are 1-based.
pub fn build_primal(t: usize, alpha: &Rat, u: &BTreeSet<usize>) -> Result<LinearProgram> {
    check_alpha(alpha)?;
    if t == 0 {
        return Err(invalid("T must be at least 1"));
    }
    if let Some(bad) = u.iter().find(|&&i| i < 1 || i > t) {
        return Err(invalid(format!("index {bad} not in {{1..{t}}}")));
    }
    let mut rows = Vec::with_capacity(t);
    for row in 1..=t {
        let mut coeffs = vec![Rat::zero(); t];
        let mut common = 0;
        for i in 1..row {
            if u.contains(&i) {
                coeffs[i - 1] = Rat::one();
                common += 1;
            } else {
                coeffs[i - 1] = alpha.clone();
            }
        }
        coeffs[row - 1] = usize_rat(t - common);
        rows.push(coeffs);
    }
    LinearProgram::new(
        Sense::Min,
        vec![Rat::one(); t],
        rows,
        vec![Rat::one(); t],
        RowSense::Ge,
    )
}

/// Maximise `Σ c_t` subject to `T·c_t + α·Σ_{i>t} c_i ≤ 1` for `t ≤ T−m` and
/// `(2T−m+1−t)·c_t + Σ_{i>t} c_i ≤ 1` for `t > T−m`.
pub fn build_dual(t: usize, alpha: &Rat, m: usize) -> Result<LinearProgram> {
    check_alpha(alpha)?;
    if m >= t {
        return Err(invalid(format!("overlap m={m} must be below T={t}")));
    }
    let mut rows = Vec::with_capacity(t);
    for row in 1..=t {
        let mut coeffs = vec![Rat::zero(); t];
        let (diag, rest) = if row <= t - m {
            (usize_rat(t), alpha.clone())
        } else {
            (usize_rat(2 * t - m + 1 - row), Rat::one())
        };
        coeffs[row - 1] = diag;
        for c in coeffs.iter_mut().skip(row) {
            *c = rest.clone();
        }
        rows.push(coeffs);
    }
    LinearProgram::new(
        Sense::Max,
        vec![Rat::one(); t],
        rows,
        vec![Rat::one(); t],
        RowSense::Le,
    )
}

/// The closed-form dual vector together with its feasibility check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualCertificate {
    #[serde(rename = "T")]
    pub t: usize,
    pub m: usize,
    #[serde(with = "serde_rat")]
    pub alpha: Rat,
    #[serde(with = "serde_rat_vec")]
    pub c: Vec<Rat>,
    pub feasible: bool,
    #[serde(with = "serde_rat")]
    pub objective: Rat,
    /// `1 − (row activity)` for each dual row, in row order.
    #[serde(with = "serde_rat_vec")]
    pub row_slacks: Vec<Rat>,
}

impl DualCertificate {
    /// Rows `1..T−m` hold with equality.
    pub fn first_rows_tight(&self) -> bool {
        self.row_slacks[..self.t - self.m].iter().all(Zero::is_zero)
    }
}

/// `c_t = (1/T)(1−αm/T)(1−α/T)^{T−m−t}` for `t ≤ T−m`, and
/// `c_t = (T−m)/((2T−m+1−t)(2T−m−t))` otherwise.
pub fn dual_closed_form(t: usize, alpha: &Rat, m: usize) -> Result<DualCertificate> {
    let lp = build_dual(t, alpha, m)?;
    let tt = usize_rat(t);
    let q = Rat::one() - alpha / &tt;
    let lead = (Rat::one() - alpha * usize_rat(m) / &tt) / &tt;
    let c: Vec<Rat> = (1..=t)
        .map(|i| {
            if i <= t - m {
                &lead * Pow::pow(&q, (t - m - i) as u32)
            } else {
                let a = (2 * t - m + 1 - i) as i64;
                let b = (2 * t - m - i) as i64;
                Rat::new(((t - m) as i64).into(), (a * b).into())
            }
        })
        .collect();
    let row_slacks: Vec<Rat> = lp.activity(&c).iter().map(|a| Rat::one() - a).collect();
    let feasible = lp.is_feasible(&c);
    let objective = c.iter().sum();
    Ok(DualCertificate {
        t,
        m,
        alpha: alpha.clone(),
        c,
        feasible,
        objective,
        row_slacks,
    })
}

/// `(Σ_{i≤T−m} c_i, Σ_{i>T−m} c_i)`.
pub fn partial_sums(cert: &DualCertificate) -> (Rat, Rat) {
    let split = cert.t - cert.m;
    (cert.c[..split].iter().sum(), cert.c[split..].iter().sum())
}

/// `(1/α)(1−αm/T)(1−(1−α/T)^{T−m})`, the closed form of the head sum.
pub fn head_closed_form(t: usize, alpha: &Rat, m: usize) -> Result<Rat> {
    check_alpha(alpha)?;
    if m >= t {
        return Err(invalid(format!("overlap m={m} must be below T={t}")));
    }
    let tt = usize_rat(t);
    let q = Rat::one() - alpha / &tt;
    Ok(
        (Rat::one() - alpha * usize_rat(m) / &tt) * (Rat::one() - Pow::pow(&q, (t - m) as u32))
            / alpha,
    )
}

/// `m/T`, the closed form of the tail sum.
pub fn tail_closed_form(t: usize, m: usize) -> Rat {
    Rat::new((m as i64).into(), (t as i64).into())
}

/// Optimal value and vertex of an LP.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpSolution {
    #[serde(with = "serde_rat")]
    pub value: Rat,
    #[serde(with = "serde_rat_vec")]
    pub x: Vec<Rat>,
}

struct Tableau {
    a: Vec<Vec<Rat>>,
    rhs: Vec<Rat>,
    basis: Vec<usize>,
}

impl Tableau {
    fn pivot(&mut self, row: usize, col: usize) {
        let p = self.a[row][col].clone();
        for v in self.a[row].iter_mut() {
            *v /= &p;
        }
        self.rhs[row] /= &p;
        let pivot_row = self.a[row].clone();
        let pivot_rhs = self.rhs[row].clone();
        for i in 0..self.a.len() {
            if i == row || self.a[i][col].is_zero() {
                continue;
            }
            let factor = self.a[i][col].clone();
            for (v, pv) in self.a[i].iter_mut().zip(&pivot_row) {
                if !pv.is_zero() {
                    *v -= &factor * pv;
                }
            }
            self.rhs[i] -= &factor * &pivot_rhs;
        }
        self.basis[row] = col;
    }

    /// Minimises `cost · x` over the current basis with Bland's rule.
    /// Columns in `blocked` never enter.
    fn minimise(&mut self, cost: &[Rat], blocked: &[bool]) -> Result<()> {
        loop {
            let ncols = cost.len();
            let entering = (0..ncols).find(|&j| {
                if blocked[j] || self.basis.contains(&j) {
                    return false;
                }
                let reduced: Rat = cost[j].clone()
                    - self
                        .basis
                        .iter()
                        .enumerate()
                        .map(|(i, &b)| &cost[b] * &self.a[i][j])
                        .sum::<Rat>();
                reduced.is_negative()
            });
            let Some(col) = entering else {
                return Ok(());
            };
            let mut leave: Option<(usize, Rat)> = None;
            for i in 0..self.a.len() {
                if !self.a[i][col].is_positive() {
                    continue;
                }
                let ratio = &self.rhs[i] / &self.a[i][col];
                let better = match &leave {
                    None => true,
                    Some((r, best)) => {
                        ratio < *best || (ratio == *best && self.basis[i] < self.basis[*r])
                    }
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            let Some((row, _)) = leave else {
                return Err(Error::Unbounded);
            };
            self.pivot(row, col);
        }
    }
}

/// Two-phase simplex in exact rationals with Bland's rule, so pivoting is
/// deterministic and cannot cycle.
pub fn simplex_solve(lp: &LinearProgram) -> Result<LpSolution> {
    let nv = lp.num_vars();
    let nr = lp.rows.len();
    // columns: originals, one slack per row, then artificials
    let slack_sign = match lp.row_sense {
        RowSense::Le => Rat::one(),
        RowSense::Ge => -Rat::one(),
    };
    let mut a = Vec::with_capacity(nr);
    let mut rhs = Vec::with_capacity(nr);
    let mut needs_artificial = Vec::with_capacity(nr);
    for (i, row) in lp.rows.iter().enumerate() {
        let mut full: Vec<Rat> = row.clone();
        full.extend((0..nr).map(|k| {
            if k == i {
                slack_sign.clone()
            } else {
                Rat::zero()
            }
        }));
        let mut b = lp.rhs[i].clone();
        if b.is_negative() {
            full.iter_mut().for_each(|v| *v = -v.clone());
            b = -b;
        }
        needs_artificial.push(!full[nv + i].is_positive());
        a.push(full);
        rhs.push(b);
    }
    let n_art = needs_artificial.iter().filter(|&&x| x).count();
    let ncols = nv + nr + n_art;
    let mut basis = Vec::with_capacity(nr);
    let mut next_art = nv + nr;
    for (i, row) in a.iter_mut().enumerate() {
        row.resize(ncols, Rat::zero());
        if needs_artificial[i] {
            row[next_art] = Rat::one();
            basis.push(next_art);
            next_art += 1;
        } else {
            basis.push(nv + i);
        }
    }
    let mut tab = Tableau { a, rhs, basis };
    let is_art = |j: usize| j >= nv + nr;

    if n_art > 0 {
        let cost: Vec<Rat> = (0..ncols)
            .map(|j| if is_art(j) { Rat::one() } else { Rat::zero() })
            .collect();
        tab.minimise(&cost, &vec![false; ncols])?;
        let infeasibility: Rat = tab
            .basis
            .iter()
            .zip(&tab.rhs)
            .filter(|(b, _)| is_art(**b))
            .map(|(_, v)| v.clone())
            .sum();
        if infeasibility.is_positive() {
            return Err(Error::Infeasible);
        }
        // drive zero-level artificials out of the basis
        let mut i = 0;
        while i < tab.a.len() {
            if is_art(tab.basis[i]) {
                match (0..nv + nr).find(|&j| !tab.a[i][j].is_zero()) {
                    Some(j) => tab.pivot(i, j),
                    None => {
                        // redundant row
                        tab.a.remove(i);
                        tab.rhs.remove(i);
                        tab.basis.remove(i);
                        continue;
                    }
                }
            }
            i += 1;
        }
    }

    let mut cost: Vec<Rat> = vec![Rat::zero(); ncols];
    for (j, c) in lp.objective.iter().enumerate() {
        cost[j] = match lp.sense {
            Sense::Min => c.clone(),
            Sense::Max => -c.clone(),
        };
    }
    let blocked: Vec<bool> = (0..ncols).map(is_art).collect();
    tab.minimise(&cost, &blocked)?;

    let mut x = vec![Rat::zero(); nv];
    for (i, &b) in tab.basis.iter().enumerate() {
        if b < nv {
            x[b] = tab.rhs[i].clone();
        }
    }
    let value = lp.objective_at(&x);
    Ok(LpSolution { value, x })
}

/// Optimal value of the primal LP for the index set `u`.
pub fn b_value(t: usize, alpha: &Rat, u: &BTreeSet<usize>) -> Result<Rat> {
    Ok(simplex_solve(&build_primal(t, alpha, u)?)?.value)
}

/// `{lo..=hi}` as a set (empty when `lo > hi`).
pub fn index_range(lo: usize, hi: usize) -> BTreeSet<usize> {
    (lo..=hi).collect()
}

/// One comparison between two primal optima.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BComparison {
    pub u: Vec<usize>,
    pub reference: Vec<usize>,
    #[serde(with = "serde_rat")]
    pub b_u: Rat,
    #[serde(with = "serde_rat")]
    pub b_reference: Rat,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BMonotonicityReport {
    #[serde(rename = "T")]
    pub t: usize,
    #[serde(with = "serde_rat")]
    pub alpha: Rat,
    /// `B(U) ≥ B({T−|U∩V_{T−1}|..T})` for sampled `U` with `T ∉ U`.
    pub fact_i: Vec<BComparison>,
    /// `B({T−l..T}) ≥ B({T−l+1..T})` for `l = 1..T−1`.
    pub fact_ii: Vec<BComparison>,
    /// `B(U) = B(U∖{T})` for sampled `U` containing `T`.
    pub drop_last: Vec<BComparison>,
    pub violations: usize,
}

impl BMonotonicityReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// Largest `T` accepted by [`check_b_monotonicity`].
pub const B_CHECK_MAX_T: usize = 8;

fn compare(
    t: usize,
    alpha: &Rat,
    u: BTreeSet<usize>,
    reference: BTreeSet<usize>,
    equal: bool,
) -> Result<BComparison> {
    let b_u = b_value(t, alpha, &u)?;
    let b_reference = b_value(t, alpha, &reference)?;
    let holds = if equal {
        b_u == b_reference
    } else {
        b_u >= b_reference
    };
    Ok(BComparison {
        u: u.into_iter().collect(),
        reference: reference.into_iter().collect(),
        b_u,
        b_reference,
        holds,
    })
}

/// Checks the two monotonicity facts about the primal optimum `B(U)` on
/// seeded random index sets.
pub fn check_b_monotonicity(
    t: usize,
    alpha: &Rat,
    trials: usize,
    seed: u64,
) -> Result<BMonotonicityReport> {
    check_alpha(alpha)?;
    if t == 0 || t > B_CHECK_MAX_T {
        return Err(Error::ResourceLimit(format!(
            "monotonicity checks support 1 <= T <= {B_CHECK_MAX_T}, got T={t}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sample = |rng: &mut ChaCha8Rng| -> BTreeSet<usize> {
        (1..t).filter(|_| rng.gen_bool(0.5)).collect()
    };

    let mut fact_i = Vec::with_capacity(trials);
    let mut drop_last = Vec::with_capacity(trials);
    for _ in 0..trials {
        let u = sample(&mut rng);
        // |U ∩ V_{T-1}| = |U| since T ∉ U
        let reference = index_range(t - u.len(), t);
        fact_i.push(compare(t, alpha, u.clone(), reference, false)?);
        let mut with_last = u.clone();
        with_last.insert(t);
        drop_last.push(compare(t, alpha, with_last, u, true)?);
    }
    let fact_ii = (1..t)
        .map(|l| {
            compare(
                t,
                alpha,
                index_range(t - l, t),
                index_range(t - l + 1, t),
                false,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let violations = fact_i
        .iter()
        .chain(&fact_ii)
        .chain(&drop_last)
        .filter(|c| !c.holds)
        .count();
    Ok(BMonotonicityReport {
        t,
        alpha: alpha.clone(),
        fact_i,
        fact_ii,
        drop_last,
        violations,
    })
}

/// Everything the `lp-cert` command reports for one `(T, α, m)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    pub certificate: DualCertificate,
    pub row_feasible: Vec<bool>,
    pub first_rows_tight: bool,
    #[serde(with = "serde_rat")]
    pub head: Rat,
    #[serde(with = "serde_rat")]
    pub tail: Rat,
    pub head_matches_closed_form: bool,
    pub tail_matches_closed_form: bool,
    #[serde(with = "serde_rat")]
    pub g: Rat,
    pub objective_matches_g: bool,
    pub dual_simplex: LpSolution,
    pub primal_simplex: LpSolution,
    /// Primal optimum with `U = {T−m+1..T}` is at least the certificate
    /// objective.
    pub weak_duality: bool,
    /// Observation only: primal optimum equals the certificate objective.
    pub strong_duality_observed: bool,
}

impl CertificateReport {
    pub fn passed(&self) -> bool {
        self.certificate.feasible
            && self.first_rows_tight
            && self.head_matches_closed_form
            && self.tail_matches_closed_form
            && self.objective_matches_g
            && self.weak_duality
            && self.dual_simplex.value >= self.certificate.objective
    }
}

pub fn certificate_report(t: usize, alpha: &Rat, m: usize) -> Result<CertificateReport> {
    let certificate = dual_closed_form(t, alpha, m)?;
    let dual = build_dual(t, alpha, m)?;
    let row_feasible = certificate
        .row_slacks
        .iter()
        .map(|s| !s.is_negative())
        .collect();
    let (head, tail) = partial_sums(&certificate);
    let g_value = match g(t, &Value::Exact(alpha.clone()), m)? {
        Value::Exact(r) => r,
        Value::Float(_) => unreachable!("exact input yields exact output"),
    };
    let dual_simplex = simplex_solve(&dual)?;
    let primal_simplex = simplex_solve(&build_primal(t, alpha, &index_range(t - m + 1, t))?)?;
    Ok(CertificateReport {
        first_rows_tight: certificate.first_rows_tight(),
        head_matches_closed_form: head == head_closed_form(t, alpha, m)?,
        tail_matches_closed_form: tail == tail_closed_form(t, m),
        objective_matches_g: certificate.objective == g_value,
        weak_duality: primal_simplex.value >= certificate.objective,
        strong_duality_observed: primal_simplex.value == certificate.objective,
        row_feasible,
        head,
        tail,
        g: g_value,
        dual_simplex,
        primal_simplex,
        certificate,
    })
}
