//! Rate accounting, capacity-region constraints and exhaustive verifiers.
//!
//! Entropies and rates are measured in q-ary digits, so storage of `T`
//! symbols of `GF(q^m)` is `M = T * m` and the achieved rate of a block length
//! `R_k` is close to `R_k / T`.

use std::collections::HashMap;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dmuss::{AccessStructure, SchemeParams};
use crate::error::{Error, Result};
use crate::field::FieldElement;
use crate::pointfn::{Block, SecretVector};
use crate::protocol::{self, Demands, Placement, ProtocolConfig};

/// Subset constraints are enumerated in full, so the user count is capped.
pub const MAX_USERS: usize = 20;
pub const DEFAULT_BUDGET: u64 = 100_000_000;
const MAX_REGION_TUPLES: u128 = 1 << 20;

/// Entropy of a uniform point function on `[T]` with nonzero values in
/// `GF(q^m)^R`, in q-ary digits: `log_q(T) + log_q(q^(mR) - 1)`.
pub fn entropy_qary(domain: usize, q: u64, m: usize, rate: usize) -> f64 {
    let lnq = (q as f64).ln();
    let e = (m * rate) as f64;
    // log_q(q^e - 1) = e + log_q(1 - q^-e), stable for large e
    (domain as f64).ln() / lnq + e + (-(q as f64).powf(-e)).ln_1p() / lnq
}

/// Rate `entropy_qary / (T m)` achieved by block length `rate`.
pub fn achieved_rate(domain: usize, q: u64, m: usize, rate: usize) -> f64 {
    entropy_qary(domain, q, m, rate) / (domain * m) as f64
}

/// `R / T - achieved_rate`; vanishes like `1 / (T m)`.
pub fn rate_gap(domain: usize, q: u64, m: usize, rate: usize) -> f64 {
    rate as f64 / domain as f64 - achieved_rate(domain, q, m, rate)
}

/// A linear constraint on per-user rates. Bounds are set cardinalities; on
/// integer block lengths they apply as is, on normalized rates `R_k / T` they
/// apply after dividing by `T`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Constraint {
    /// `R_user <= |A_user \ A_other|`.
    Pairwise {
        user: usize,
        other: usize,
        bound: usize,
    },
    /// `sum of R_k over users <= |union of A_k over users|`.
    Union { users: Vec<usize>, bound: usize },
}

impl Constraint {
    pub fn users(&self) -> Vec<usize> {
        match self {
            Constraint::Pairwise { user, .. } => vec![*user],
            Constraint::Union { users, .. } => users.clone(),
        }
    }

    pub fn bound(&self) -> usize {
        match self {
            Constraint::Pairwise { bound, .. } | Constraint::Union { bound, .. } => *bound,
        }
    }

    pub fn lhs(&self, rates: &[usize]) -> usize {
        self.users().iter().map(|&k| rates[k - 1]).sum()
    }

    pub fn holds(&self, rates: &[usize]) -> bool {
        self.lhs(rates) <= self.bound()
    }

    pub fn holds_real(&self, rates: &[f64]) -> bool {
        self.users().iter().map(|&k| rates[k - 1]).sum::<f64>() <= self.bound() as f64
    }

    fn lhs_text(&self) -> String {
        self.users()
            .iter()
            .map(|k| format!("R_{k}"))
            .collect::<Vec<_>>()
            .join(" + ")
    }

    fn rhs_text(&self) -> String {
        match self {
            Constraint::Pairwise { user, other, .. } => format!("|A_{user} \\ A_{other}|"),
            Constraint::Union { users, .. } => format!(
                "|{}|",
                users
                    .iter()
                    .map(|k| format!("A_{k}"))
                    .collect::<Vec<_>>()
                    .join(" u ")
            ),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Constraint::Pairwise { .. } => "pairwise",
            Constraint::Union { .. } => "union",
        }
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} <= {} = {}",
            self.lhs_text(),
            self.rhs_text(),
            self.bound()
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    Nonpositive { user: usize, rate: usize },
    Exceeded { constraint: Constraint, lhs: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Nonpositive { user, rate } => {
                write!(f, "nonpositive rate: R_{user} = {rate} must be at least 1")
            }
            Violation::Exceeded { constraint, lhs } => write!(
                f,
                "{} constraint violated: {} = {lhs} exceeds {} = {}",
                constraint.kind(),
                constraint.lhs_text(),
                constraint.rhs_text(),
                constraint.bound()
            ),
        }
    }
}

fn check_user_count(access: &AccessStructure) -> Result<()> {
    if access.users() > MAX_USERS {
        return Err(Error::Capacity(format!(
            "{} users exceed the subset enumeration limit of {MAX_USERS}",
            access.users()
        )));
    }
    Ok(())
}

/// Every ordered-pair constraint followed by one union constraint for each
/// nonempty subset of users (subsets in increasing bitmask order).
fn constraint_family(access: &AccessStructure) -> Result<Vec<Constraint>> {
    check_user_count(access)?;
    let k = access.users();
    let mut out = Vec::new();
    for user in 1..=k {
        for other in (1..=k).filter(|&o| o != user) {
            out.push(Constraint::Pairwise {
                user,
                other,
                bound: access.difference(user, other).len(),
            });
        }
    }
    for mask in 1u32..(1u32 << k) {
        let users: Vec<usize> = (0..k)
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| i + 1)
            .collect();
        let bound = access.union_of(&users).len();
        out.push(Constraint::Union { users, bound });
    }
    Ok(out)
}

/// Upper bounds on the normalized rates `r_k`.
pub fn outer_bounds(access: &AccessStructure) -> Result<Vec<Constraint>> {
    constraint_family(access)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Feasibility {
    pub feasible: bool,
    pub violations: Vec<Violation>,
}

/// Whether the block lengths satisfy every pairwise and union constraint.
pub fn check_r_feasible(access: &AccessStructure, rates: &[usize]) -> Result<Feasibility> {
    if rates.len() != access.users() {
        return Err(Error::Usage(format!(
            "{} rates for {} users",
            rates.len(),
            access.users()
        )));
    }
    let mut violations: Vec<Violation> = rates
        .iter()
        .enumerate()
        .filter(|(_, &r)| r == 0)
        .map(|(i, &rate)| Violation::Nonpositive { user: i + 1, rate })
        .collect();
    for c in constraint_family(access)? {
        let lhs = c.lhs(rates);
        if lhs > c.bound() {
            violations.push(Violation::Exceeded { constraint: c, lhs });
        }
    }
    Ok(Feasibility {
        feasible: violations.is_empty(),
        violations,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UserRate {
    pub user: usize,
    pub rate: usize,
    /// Entropy of the point function in q-ary digits.
    pub entropy: f64,
    /// Storage per server in q-ary digits.
    pub storage: usize,
    pub achieved: f64,
    pub nominal: f64,
    pub gap: f64,
}

fn user_rates(rates: &[usize], domain: usize, q: u64, m: usize) -> Vec<UserRate> {
    rates
        .iter()
        .enumerate()
        .map(|(i, &r)| UserRate {
            user: i + 1,
            rate: r,
            entropy: entropy_qary(domain, q, m, r),
            storage: domain * m,
            achieved: achieved_rate(domain, q, m, r),
            nominal: r as f64 / domain as f64,
            gap: rate_gap(domain, q, m, r),
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintCheck {
    pub constraint: Constraint,
    pub lhs: usize,
    pub slack: i64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub users: Vec<UserRate>,
    pub constraints: Vec<ConstraintCheck>,
}

pub fn rate_report(
    access: &AccessStructure,
    rates: &[usize],
    domain: usize,
    q: u64,
    m: usize,
) -> Result<RateReport> {
    if rates.len() != access.users() {
        return Err(Error::Usage(format!(
            "{} rates for {} users",
            rates.len(),
            access.users()
        )));
    }
    let constraints = constraint_family(access)?
        .into_iter()
        .map(|c| {
            let lhs = c.lhs(rates);
            ConstraintCheck {
                slack: c.bound() as i64 - lhs as i64,
                holds: lhs <= c.bound(),
                lhs,
                constraint: c,
            }
        })
        .collect();
    Ok(RateReport {
        users: user_rates(rates, domain, q, m),
        constraints,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeasibleTuple {
    pub rates: Vec<usize>,
    pub maximal: bool,
    pub achieved: Vec<UserRate>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InnerRegion {
    pub constraints: Vec<Constraint>,
    /// Feasible tuples with every `R_k >= 1`, in lexicographic order.
    pub feasible: Vec<FeasibleTuple>,
    pub maximal: Vec<Vec<usize>>,
}

/// Integer block-length tuples meeting every constraint, found by
/// enumerating `1 <= R_k <= |A_k|`.
pub fn inner_bounds(
    access: &AccessStructure,
    domain: usize,
    q: u64,
    m: usize,
) -> Result<InnerRegion> {
    let constraints = constraint_family(access)?;
    let sizes: Vec<usize> = access.sets().iter().map(Vec::len).collect();
    let total = sizes
        .iter()
        .try_fold(1u128, |acc, &s| acc.checked_mul(s as u128))
        .filter(|&t| t <= MAX_REGION_TUPLES)
        .ok_or_else(|| {
            Error::Capacity(format!(
                "more than {MAX_REGION_TUPLES} candidate rate tuples to enumerate"
            ))
        })?;
    let mut tuples = Vec::new();
    for idx in 0..total as usize {
        let mut rest = idx;
        let mut r = vec![0; sizes.len()];
        for i in (0..sizes.len()).rev() {
            r[i] = rest % sizes[i] + 1;
            rest /= sizes[i];
        }
        if constraints.iter().all(|c| c.holds(&r)) {
            tuples.push(r);
        }
    }
    let feasible_set: std::collections::HashSet<&Vec<usize>> = tuples.iter().collect();
    let is_maximal = |r: &Vec<usize>| {
        (0..r.len()).all(|i| {
            let mut up = r.clone();
            up[i] += 1;
            !feasible_set.contains(&up)
        })
    };
    let feasible: Vec<FeasibleTuple> = tuples
        .iter()
        .map(|r| FeasibleTuple {
            rates: r.clone(),
            maximal: is_maximal(r),
            achieved: user_rates(r, domain, q, m),
        })
        .collect();
    let maximal = feasible
        .iter()
        .filter(|f| f.maximal)
        .map(|f| f.rates.clone())
        .collect();
    Ok(InnerRegion {
        constraints,
        feasible,
        maximal,
    })
}

/// Exact error count as a fraction of retrievals.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorrectnessReport {
    pub retrievals: u64,
    pub failures: u64,
    /// `failures / retrievals` as an exact fraction, `"0"` when error-free.
    pub error_probability: String,
    pub decoding_mismatches: u64,
    pub pass: bool,
}

fn fraction(num: u64, den: u64) -> String {
    if num == 0 {
        return "0".into();
    }
    let (mut a, mut b) = (num, den);
    while b != 0 {
        (a, b) = (b, a % b);
    }
    if den / a == 1 {
        format!("{}", num / a)
    } else {
        format!("{}/{}", num / a, den / a)
    }
}

/// Runs every demand tuple in `[T]^K` against one placement.
pub fn exhaustive_correctness(cfg: &ProtocolConfig, budget: u64) -> Result<CorrectnessReport> {
    let placement = protocol::placement(cfg)?;
    exhaustive_correctness_with(cfg, &placement, budget)
}

pub fn exhaustive_correctness_with(
    cfg: &ProtocolConfig,
    placement: &Placement,
    budget: u64,
) -> Result<CorrectnessReport> {
    let users = cfg.access.users() as u32;
    let needed = (cfg.domain as u128)
        .checked_pow(users)
        .and_then(|n| n.checked_mul(users as u128));
    match needed {
        Some(n) if n <= budget as u128 => {}
        _ => {
            return Err(Error::Capacity(format!(
                "exhaustive demands need {} retrievals, budget is {budget}",
                needed.map_or_else(|| "too many".to_string(), |n| n.to_string())
            )))
        }
    }
    let mut exhaustive = cfg.clone();
    exhaustive.demands = Demands::Exhaustive;
    let transcript = protocol::run_with_placement(&exhaustive, placement)?;
    let outcomes = transcript.rounds.iter().flat_map(|r| &r.outcomes);
    let (mut retrievals, mut failures, mut mismatches) = (0u64, 0u64, 0u64);
    for o in outcomes {
        retrievals += 1;
        failures += u64::from(!o.correct);
        mismatches += u64::from(!o.matches_decoding);
    }
    Ok(CorrectnessReport {
        retrievals,
        failures,
        error_probability: fraction(failures, retrievals),
        decoding_mismatches: mismatches,
        pass: failures == 0,
    })
}

/// Independence test of one user's secret against another user's view.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairPrivacy {
    pub user: usize,
    pub observer: usize,
    /// `I(W_user; G_{A_observer})` in q-ary digits; exactly 0 when independent.
    pub mutual_information: f64,
    /// Decided by integer counts: `c(w, g) * N == c(w) * c(g)` everywhere.
    pub independent: bool,
    pub secret_support: usize,
    pub observation_support: usize,
    pub joint_support: usize,
    /// Largest `I(W_user; responses to observer)` over the observer's demands.
    /// Informational only.
    pub response_mutual_information: f64,
    pub response_independent: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrivacyReport {
    pub states: u64,
    pub pairs: Vec<PairPrivacy>,
    pub pass: bool,
}

/// `(prod_k T (Q^R_k - 1)) * Q^(T * (nullity + fill))`, or `None` on overflow.
pub fn privacy_state_count(params: &SchemeParams, domain: usize) -> Option<u128> {
    let order = params.field().order() as u128;
    let mut states: u128 = 1;
    for &r in params.rates().as_slice() {
        let values = order.checked_pow(r as u32)?.checked_sub(1)?;
        states = states.checked_mul(values.checked_mul(domain as u128)?)?;
    }
    let free = (params.nullity() + params.fill_servers().len()) as u32;
    let noise = order.checked_pow(free.checked_mul(domain as u32)?)?;
    states.checked_mul(noise)
}

fn budget_error(params: &SchemeParams, domain: usize, budget: u64) -> Error {
    let needed = privacy_state_count(params, domain)
        .map_or_else(|| "more than 2^128".to_string(), |s| s.to_string());
    let smaller = (1..domain)
        .rev()
        .find(|&t| privacy_state_count(params, t).is_some_and(|s| s <= budget as u128));
    let hint = match smaller {
        Some(t) => format!("try T = {t}"),
        None => "use a smaller field, fewer servers or lower rates".to_string(),
    };
    Error::Capacity(format!(
        "exhaustive privacy check needs {needed} states, budget is {budget}; {hint}"
    ))
}

#[derive(Clone, Default)]
struct Table {
    joint: HashMap<(u32, u128), u64>,
    observed: HashMap<u128, u64>,
}

impl Table {
    fn add(&mut self, w: u32, g: u128) {
        *self.joint.entry((w, g)).or_default() += 1;
        *self.observed.entry(g).or_default() += 1;
    }

    fn merge(&mut self, other: Table) {
        for (k, v) in other.joint {
            *self.joint.entry(k).or_default() += v;
        }
        for (k, v) in other.observed {
            *self.observed.entry(k).or_default() += v;
        }
    }

    /// Exact independence verdict plus mutual information in base `q`.
    fn mutual_information(&self, q: u64) -> (f64, bool, usize) {
        let total: u64 = self.observed.values().sum();
        let mut secret: HashMap<u32, u64> = HashMap::new();
        for (&(w, _), &c) in &self.joint {
            *secret.entry(w).or_default() += c;
        }
        let mut entries: Vec<_> = self.joint.iter().map(|(&k, &c)| (k, c)).collect();
        entries.sort_unstable();
        let mut independent = true;
        let mut mi = 0.0;
        let n = total as f64;
        for ((w, g), c) in entries {
            let (cw, cg) = (secret[&w], self.observed[&g]);
            if c as u128 * total as u128 != cw as u128 * cg as u128 {
                independent = false;
            }
            mi += c as f64 / n * ((c as f64 * n) / (cw as f64 * cg as f64)).ln();
        }
        let mi = if independent {
            0.0
        } else {
            mi / (q as f64).ln()
        };
        (mi, independent, secret.len())
    }
}

struct PairPlan {
    user: usize,
    observer: usize,
    observer_servers: Vec<usize>,
    /// Per observer server, the multipliers applied to the stored symbol.
    response_coeffs: Vec<Vec<FieldElement>>,
}

/// Enumerates every secret tuple, every nullspace coefficient per coordinate
/// and every fill value, and tabulates each user's secret against each other
/// user's shares by integer counting.
pub fn exhaustive_privacy(
    params: &SchemeParams,
    domain: usize,
    budget: u64,
) -> Result<PrivacyReport> {
    let states = match privacy_state_count(params, domain) {
        Some(s) if s <= budget as u128 => s as u64,
        _ => return Err(budget_error(params, domain, budget)),
    };
    let field = params.field();
    let order = field.order();
    let access = params.access();
    let k_users = access.users();
    let n_servers = access.servers();

    // all point functions of each user, in (point, value index) order
    let functions: Vec<Vec<SecretVector>> = params
        .rates()
        .as_slice()
        .iter()
        .map(|&r| all_point_functions(params, domain, r))
        .collect::<Result<_>>()?;
    let zero_nu = vec![FieldElement::ZERO; params.nullity()];
    let zero_fill = vec![FieldElement::ZERO; params.fill_servers().len()];
    let zero_blocks: Vec<Block> = params
        .rates()
        .as_slice()
        .iter()
        .map(|&r| vec![FieldElement::ZERO; r])
        .collect();
    // contribution[k][f][t]: shares produced by user k's function f alone
    let mut contribution = Vec::with_capacity(k_users);
    for (k, funcs) in functions.iter().enumerate() {
        let mut per_fn = Vec::with_capacity(funcs.len());
        for sv in funcs {
            let mut per_t = Vec::with_capacity(domain);
            for t in 1..=domain {
                let mut blocks = zero_blocks.clone();
                blocks[k] = sv.block(t).to_vec();
                per_t.push(params.enc_coordinate_with(&blocks, &zero_nu, &zero_fill)?.g);
            }
            per_fn.push(per_t);
        }
        contribution.push(per_fn);
    }
    let free = params.nullity() + zero_fill.len();
    let patterns = (order as usize).pow(free as u32);
    let mut noise = Vec::with_capacity(patterns);
    for p in 0..patterns {
        let digits = digits_of(p as u128, order, free);
        noise.push(
            params
                .enc_coordinate_with(
                    &zero_blocks,
                    &digits[..params.nullity()],
                    &digits[params.nullity()..],
                )?
                .g,
        );
    }

    let mut plans = Vec::new();
    for user in 1..=k_users {
        for observer in (1..=k_users).filter(|&o| o != user) {
            let servers = access.set(observer).to_vec();
            let r_o = params.rates().get(observer);
            check_key_width(order, domain * servers.len())?;
            check_key_width(order, r_o * servers.len())?;
            let inv = params.inverse_vandermonde(observer);
            let response_coeffs = servers
                .iter()
                .enumerate()
                .map(|(pos, _)| {
                    let scale = field.neg(params.user(observer).alpha[pos]);
                    (0..r_o)
                        .map(|j| {
                            inv.map_or(FieldElement::ZERO, |m| field.mul(scale, m.get(j, pos)))
                        })
                        .collect()
                })
                .collect();
            plans.push(PairPlan {
                user,
                observer,
                observer_servers: servers,
                response_coeffs,
            });
        }
    }

    let counts: Vec<usize> = functions.iter().map(Vec::len).collect();
    let tuples: usize = counts.iter().product();
    let combos = patterns.pow(domain as u32);
    let empty = || -> Vec<(Table, Vec<Table>)> {
        plans
            .iter()
            .map(|_| (Table::default(), vec![Table::default(); domain]))
            .collect()
    };
    let tables = (0..tuples)
        .into_par_iter()
        .fold(empty, |mut acc, idx| {
            let choice = mixed_radix(idx, &counts);
            let base: Vec<Vec<FieldElement>> = (0..domain)
                .map(|t| {
                    (0..n_servers)
                        .map(|n| field.sum((0..k_users).map(|k| contribution[k][choice[k]][t][n])))
                        .collect()
                })
                .collect();
            let mut g = base.clone();
            for combo in 0..combos {
                let mut rest = combo;
                for t in 0..domain {
                    let p = rest % patterns;
                    rest /= patterns;
                    for n in 0..n_servers {
                        g[t][n] = field.add(base[t][n], noise[p][n]);
                    }
                }
                for (plan, (table, responses)) in plans.iter().zip(acc.iter_mut()) {
                    let w = choice[plan.user - 1] as u32;
                    let mut key = 0u128;
                    for row in &g {
                        for &n in &plan.observer_servers {
                            key = key * order as u128 + row[n - 1].index() as u128;
                        }
                    }
                    table.add(w, key);
                    for (v, rt) in responses.iter_mut().enumerate() {
                        let mut key = 0u128;
                        for (&n, coeffs) in plan.observer_servers.iter().zip(&plan.response_coeffs)
                        {
                            for &c in coeffs {
                                key =
                                    key * order as u128 + field.mul(c, g[v][n - 1]).index() as u128;
                            }
                        }
                        rt.add(w, key);
                    }
                }
            }
            acc
        })
        .reduce(empty, |mut a, b| {
            for ((ta, ra), (tb, rb)) in a.iter_mut().zip(b) {
                ta.merge(tb);
                for (x, y) in ra.iter_mut().zip(rb) {
                    x.merge(y);
                }
            }
            a
        });

    let q = field.q();
    let pairs: Vec<PairPrivacy> = plans
        .iter()
        .zip(&tables)
        .map(|(plan, (table, responses))| {
            let (mi, independent, secret_support) = table.mutual_information(q);
            let mut response_mi = 0.0f64;
            let mut response_independent = true;
            for rt in responses {
                let (m, ind, _) = rt.mutual_information(q);
                response_mi = response_mi.max(m);
                response_independent &= ind;
            }
            PairPrivacy {
                user: plan.user,
                observer: plan.observer,
                mutual_information: mi,
                independent,
                secret_support,
                observation_support: table.observed.len(),
                joint_support: table.joint.len(),
                response_mutual_information: response_mi,
                response_independent,
            }
        })
        .collect();
    let pass = pairs.iter().all(|p| p.independent);
    Ok(PrivacyReport {
        states,
        pairs,
        pass,
    })
}

fn check_key_width(order: u64, digits: usize) -> Result<()> {
    (order as u128)
        .checked_pow(digits as u32)
        .map(|_| ())
        .ok_or_else(|| Error::Capacity("observation too large to tabulate".into()))
}

fn digits_of(mut value: u128, base: u64, len: usize) -> Vec<FieldElement> {
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        out.push(FieldElement::from_raw((value % base as u128) as u64));
        value /= base as u128;
    }
    out
}

/// Digits of `idx` with the last position varying fastest.
fn mixed_radix(mut idx: usize, radices: &[usize]) -> Vec<usize> {
    let mut out = vec![0; radices.len()];
    for i in (0..radices.len()).rev() {
        out[i] = idx % radices[i];
        idx /= radices[i];
    }
    out
}

fn all_point_functions(
    params: &SchemeParams,
    domain: usize,
    rate: usize,
) -> Result<Vec<SecretVector>> {
    let field = params.field();
    let values = (field.order() as u128).pow(rate as u32);
    let mut out = Vec::new();
    for point in 1..=domain {
        for v in 1..values {
            let value = digits_of(v, field.order(), rate);
            out.push(
                crate::pointfn::PointFunction::new(field, domain, point, value)?.secret_vector(),
            );
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dmuss::{param_sample, param_sample_adversarial, RateVector};
    use crate::field::FieldCtx;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn acc(n: usize, sets: Vec<Vec<usize>>) -> AccessStructure {
        AccessStructure::new(n, sets).unwrap()
    }

    #[test]
    fn entropy_values() {
        assert!(entropy_qary(1, 2, 1, 1).abs() < 1e-12);
        let want = 3f64.log(7.0) + 6f64.log(7.0);
        assert!((entropy_qary(3, 7, 1, 1) - want).abs() < 1e-12);
        // large exponent stays finite and close to mR
        let e = entropy_qary(1, 11, 4, 5);
        assert!((e - 20.0).abs() < 1e-12);
    }

    #[test]
    fn entropy_matches_counting() {
        // uniform (X, Z) over T * (q^(mR) - 1) equally likely functions
        for (t, q, m, r) in [(3usize, 3u64, 1usize, 1usize), (2, 2, 2, 1), (4, 5, 1, 2)] {
            let count = t as f64 * ((q as f64).powi((m * r) as i32) - 1.0);
            let p = 1.0 / count;
            let h = -(0..count as usize)
                .map(|_| p * p.log(q as f64))
                .sum::<f64>();
            assert!((entropy_qary(t, q, m, r) - h).abs() < 1e-9);
        }
    }

    #[test]
    fn entropy_strictly_increasing() {
        for q in [2u64, 3, 7] {
            for r in 1..4 {
                for t in 1..8 {
                    assert!(entropy_qary(t + 1, q, 1, r) > entropy_qary(t, q, 1, r));
                    assert!(entropy_qary(t, q, 1, r + 1) > entropy_qary(t, q, 1, r));
                }
            }
        }
    }

    #[test]
    fn outer_bounds_example() {
        let a = acc(5, vec![vec![1, 2, 3], vec![3, 4, 5]]);
        let c = outer_bounds(&a).unwrap();
        assert!(c.contains(&Constraint::Pairwise {
            user: 1,
            other: 2,
            bound: 2
        }));
        assert!(c.contains(&Constraint::Pairwise {
            user: 2,
            other: 1,
            bound: 2
        }));
        assert!(c.contains(&Constraint::Union {
            users: vec![1, 2],
            bound: 5
        }));
        assert_eq!(c.len(), 2 + 3);

        let single = outer_bounds(&acc(1, vec![vec![1]])).unwrap();
        assert_eq!(
            single,
            vec![Constraint::Union {
                users: vec![1],
                bound: 1
            }]
        );

        let nested = outer_bounds(&acc(3, vec![vec![1], vec![1, 2]])).unwrap();
        assert!(nested.contains(&Constraint::Pairwise {
            user: 1,
            other: 2,
            bound: 0
        }));
    }

    #[test]
    fn too_many_users() {
        let sets = (0..21).map(|_| vec![1]).collect();
        assert!(matches!(
            outer_bounds(&acc(1, sets)),
            Err(Error::Capacity(_))
        ));
    }

    #[test]
    fn feasibility_examples() {
        let a = acc(5, vec![vec![1, 2, 3], vec![3, 4, 5]]);
        assert!(check_r_feasible(&a, &[2, 2]).unwrap().feasible);
        let bad = check_r_feasible(&a, &[3, 1]).unwrap();
        assert!(!bad.feasible);
        assert!(bad.violations.iter().any(|v| matches!(
            v,
            Violation::Exceeded {
                constraint: Constraint::Pairwise {
                    user: 1,
                    other: 2,
                    ..
                },
                lhs: 3
            }
        )));
        assert!(bad.violations[0]
            .to_string()
            .starts_with("pairwise constraint violated"));
        let zero = check_r_feasible(&a, &[0, 1]).unwrap();
        assert!(zero
            .violations
            .contains(&Violation::Nonpositive { user: 1, rate: 0 }));
    }

    #[test]
    fn inner_region_example() {
        let a = acc(5, vec![vec![1, 2, 3], vec![3, 4, 5]]);
        let region = inner_bounds(&a, 3, 7, 1).unwrap();
        assert_eq!(region.maximal, vec![vec![2, 2]]);
        assert_eq!(region.feasible.len(), 4);
        let single = inner_bounds(&acc(4, vec![vec![1, 2, 4]]), 2, 3, 1).unwrap();
        let rates: Vec<_> = single.feasible.iter().map(|f| f.rates.clone()).collect();
        assert_eq!(rates, vec![vec![1], vec![2], vec![3]]);
        let nested = inner_bounds(&acc(3, vec![vec![1], vec![1, 2]]), 2, 3, 1).unwrap();
        assert!(nested.feasible.is_empty());
    }

    #[test]
    fn gap_shrinks_with_extension_degree() {
        for t in 1..=4 {
            let gaps: Vec<f64> = (1..=4).map(|m| rate_gap(t, 7, m, 2).abs()).collect();
            assert!(gaps.windows(2).all(|w| w[1] < w[0]), "T={t}: {gaps:?}");
        }
    }

    #[test]
    fn fractions() {
        assert_eq!(fraction(0, 9), "0");
        assert_eq!(fraction(3, 9), "1/3");
        assert_eq!(fraction(4, 4), "1");
    }

    #[test]
    fn privacy_of_small_chain() {
        let f = FieldCtx::new(3, 1).unwrap();
        let a = acc(3, vec![vec![1, 2], vec![2, 3]]);
        let r = RateVector::new(&a, vec![1, 1]).unwrap();
        let p = param_sample(&f, &a, &r, &mut ChaCha20Rng::seed_from_u64(0), 64).unwrap();
        assert_eq!(privacy_state_count(&p, 2), Some(144));
        let report = exhaustive_privacy(&p, 2, DEFAULT_BUDGET).unwrap();
        assert_eq!(report.states, 144);
        assert!(report.pass);
        assert_eq!(report.pairs.len(), 2);
        assert!(report.pairs.iter().all(|p| p.mutual_information == 0.0));
        assert_eq!((report.pairs[0].user, report.pairs[0].observer), (1, 2));
    }

    #[test]
    fn privacy_negative_control() {
        let f = FieldCtx::new(3, 1).unwrap();
        let a = acc(3, vec![vec![1, 2], vec![2, 3]]);
        let r = RateVector::new(&a, vec![1, 1]).unwrap();
        let p =
            param_sample_adversarial(&f, &a, &r, &mut ChaCha20Rng::seed_from_u64(0), 64).unwrap();
        let report = exhaustive_privacy(&p, 2, DEFAULT_BUDGET).unwrap();
        assert!(!report.pass);
        assert!(report.pairs.iter().any(|p| p.mutual_information > 0.0));
    }

    #[test]
    fn privacy_single_user_is_vacuous() {
        let f = FieldCtx::new(3, 1).unwrap();
        let a = acc(2, vec![vec![1, 2]]);
        let r = RateVector::new(&a, vec![1]).unwrap();
        let p = param_sample(&f, &a, &r, &mut ChaCha20Rng::seed_from_u64(0), 64).unwrap();
        let report = exhaustive_privacy(&p, 2, DEFAULT_BUDGET).unwrap();
        assert!(report.pairs.is_empty() && report.pass);
    }

    #[test]
    fn privacy_budget() {
        let f = FieldCtx::new(3, 1).unwrap();
        let a = acc(3, vec![vec![1, 2], vec![2, 3]]);
        let r = RateVector::new(&a, vec![1, 1]).unwrap();
        let p = param_sample(&f, &a, &r, &mut ChaCha20Rng::seed_from_u64(0), 64).unwrap();
        match exhaustive_privacy(&p, 3, 200) {
            Err(Error::Capacity(msg)) => assert!(msg.contains("try T = 2"), "{msg}"),
            other => panic!("unexpected {other:?}"),
        }
    }
}
