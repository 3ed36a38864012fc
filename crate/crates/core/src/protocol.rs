//! The four-phase point function protocol as an in-memory simulation.
//!
//! A master encodes every user's point function coordinate by coordinate and
//! hands each server its column of shares. Users then send a demanded point to
//! their servers, each server answers with `R_k` symbols computed from the one
//! stored coordinate it was asked about, and the user adds the answers up.
//!
//! Message delivery is deterministic: user-major, then ascending server id.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::analysis::check_r_feasible;
use crate::dmuss::{
    param_sample, param_sample_adversarial, AccessStructure, RateVector, SchemeParams,
    ValidationReport, DEFAULT_MAX_RETRIES,
};
use crate::error::{Error, Result};
use crate::field::{FieldCtx, FieldElement};
use crate::linalg::{invert, vandermonde, Matrix};
use crate::pointfn::{Block, PointFunction};

/// RNG stream used for parameter sampling.
pub const STREAM_PARAMS: u64 = 1;
/// RNG stream used when point functions are drawn at random.
pub const STREAM_FUNCTIONS: u64 = 2;
const STREAM_COORDINATE_BASE: u64 = 1 << 32;

/// A ChaCha20 generator for `seed` on a named stream, so that each consumer of
/// randomness is unaffected by how much another one draws.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Per-coordinate encoding stream for 1-based coordinate `t`.
pub fn coordinate_rng(seed: u64, t: usize) -> ChaCha20Rng {
    stream_rng(seed, STREAM_COORDINATE_BASE + t as u64)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Demands {
    Explicit(Vec<usize>),
    /// Every demand tuple in `[1, T]^K`, in lexicographic order.
    Exhaustive,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RetrievalMode {
    /// Each server answers with rows of the full inverse Vandermonde matrix and
    /// the user sums every level over its whole access set.
    #[default]
    Full,
    /// Experimental: level `j` uses the inverse Vandermonde of the first
    /// `|A_k| - j` evaluation points only and sums over those servers. Only
    /// level 0 is guaranteed to decode.
    Peeling,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamPolicy {
    Validated,
    /// Debug only: skip the privacy check and pick a leaking gamma.
    Adversarial,
}

#[derive(Clone, Debug)]
pub struct ProtocolConfig {
    pub field: FieldCtx,
    pub domain: usize,
    pub access: AccessStructure,
    pub rates: Vec<usize>,
    pub seed: u64,
    pub functions: Vec<PointFunction>,
    pub demands: Demands,
    pub max_retries: usize,
    pub retrieval: RetrievalMode,
    pub policy: ParamPolicy,
}

impl ProtocolConfig {
    pub fn new(
        field: FieldCtx,
        domain: usize,
        access: AccessStructure,
        rates: Vec<usize>,
        seed: u64,
        functions: Vec<PointFunction>,
        demands: Demands,
    ) -> Result<Self> {
        let cfg = ProtocolConfig {
            field,
            domain,
            access,
            rates,
            seed,
            functions,
            demands,
            max_retries: DEFAULT_MAX_RETRIES,
            retrieval: RetrievalMode::Full,
            policy: ParamPolicy::Validated,
        };
        cfg.check()?;
        Ok(cfg)
    }

    /// Same as [`ProtocolConfig::new`] with point functions drawn from the
    /// functions stream of `seed`.
    pub fn with_random_functions(
        field: FieldCtx,
        domain: usize,
        access: AccessStructure,
        rates: Vec<usize>,
        seed: u64,
        demands: Demands,
    ) -> Result<Self> {
        let functions = random_functions(&field, domain, &rates, seed)?;
        Self::new(field, domain, access, rates, seed, functions, demands)
    }

    fn check(&self) -> Result<()> {
        if self.domain == 0 {
            return Err(Error::Usage("domain size T must be >= 1".into()));
        }
        let k = self.access.users();
        if self.rates.len() != k {
            return Err(Error::Usage(format!(
                "{} rates for {k} users",
                self.rates.len()
            )));
        }
        if self.functions.len() != k {
            return Err(Error::Usage(format!(
                "{} point functions for {k} users",
                self.functions.len()
            )));
        }
        for (i, f) in self.functions.iter().enumerate() {
            if f.domain() != self.domain {
                return Err(Error::Usage(format!(
                    "point function of user {} has domain {}, expected {}",
                    i + 1,
                    f.domain(),
                    self.domain
                )));
            }
            if f.block_len() != self.rates[i] {
                return Err(Error::Usage(format!(
                    "point function of user {} has block length {}, rate is {}",
                    i + 1,
                    f.block_len(),
                    self.rates[i]
                )));
            }
            for &z in f.value() {
                self.field.check(z)?;
            }
        }
        if let Demands::Explicit(v) = &self.demands {
            if v.len() != k {
                return Err(Error::Usage(format!("{} demands for {k} users", v.len())));
            }
            check_demands(v, self.domain)?;
        }
        Ok(())
    }

    pub fn demand_tuples(&self) -> Vec<Vec<usize>> {
        match &self.demands {
            Demands::Explicit(v) => vec![v.clone()],
            Demands::Exhaustive => all_demand_tuples(self.domain, self.access.users()),
        }
    }
}

fn check_demands(demands: &[usize], domain: usize) -> Result<()> {
    for (k, &v) in demands.iter().enumerate() {
        if v == 0 || v > domain {
            return Err(Error::Usage(format!(
                "demand {v} of user {} is outside [1, {domain}]",
                k + 1
            )));
        }
    }
    Ok(())
}

/// All tuples in `[1, domain]^users`, last user varying fastest.
pub fn all_demand_tuples(domain: usize, users: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..users {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (1..=domain).map(move |v| {
                    let mut p = prefix.clone();
                    p.push(v);
                    p
                })
            })
            .collect();
    }
    out
}

pub fn random_functions(
    field: &FieldCtx,
    domain: usize,
    rates: &[usize],
    seed: u64,
) -> Result<Vec<PointFunction>> {
    if domain == 0 {
        return Err(Error::Usage("domain size T must be >= 1".into()));
    }
    if let Some(k) = rates.iter().position(|&r| r == 0) {
        return Err(Error::Usage(format!("rate of user {} must be >= 1", k + 1)));
    }
    let mut rng = stream_rng(seed, STREAM_FUNCTIONS);
    Ok(rates
        .iter()
        .map(|&r| PointFunction::random(field, domain, r, &mut rng))
        .collect())
}

/// Read access to one server's stored coordinates.
pub trait SymbolSource {
    fn server(&self) -> usize;
    fn len(&self) -> usize;
    /// Stored share for 1-based coordinate `t`.
    fn symbol(&self, t: usize) -> Result<FieldElement>;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ServerStore {
    pub server: usize,
    pub g: Vec<FieldElement>,
}

impl SymbolSource for ServerStore {
    fn server(&self) -> usize {
        self.server
    }

    fn len(&self) -> usize {
        self.g.len()
    }

    fn symbol(&self, t: usize) -> Result<FieldElement> {
        if t == 0 || t > self.g.len() {
            return Err(Error::Usage(format!(
                "coordinate {t} outside [1, {}] on server {}",
                self.g.len(),
                self.server
            )));
        }
        Ok(self.g[t - 1])
    }
}

#[derive(Clone, Debug)]
pub struct Placement {
    pub params: SchemeParams,
    pub stores: Vec<ServerStore>,
}

impl Placement {
    /// Shares of every server at 1-based coordinate `t`.
    pub fn coordinate(&self, t: usize) -> crate::dmuss::CoordinateShares {
        crate::dmuss::CoordinateShares {
            g: self.stores.iter().map(|s| s.g[t - 1]).collect(),
        }
    }
}

pub fn sample_params(cfg: &ProtocolConfig) -> Result<SchemeParams> {
    let feasibility = check_r_feasible(&cfg.access, &cfg.rates)?;
    if !feasibility.feasible {
        return Err(Error::Infeasible(feasibility.violations));
    }
    let rates = RateVector::new(&cfg.access, cfg.rates.clone())?;
    let mut rng = stream_rng(cfg.seed, STREAM_PARAMS);
    match cfg.policy {
        ParamPolicy::Validated => {
            param_sample(&cfg.field, &cfg.access, &rates, &mut rng, cfg.max_retries)
        }
        ParamPolicy::Adversarial => {
            param_sample_adversarial(&cfg.field, &cfg.access, &rates, &mut rng, cfg.max_retries)
        }
    }
}

/// Master phase: sample parameters, then encode coordinate `t` of every
/// user's secret vector on its own RNG stream.
pub fn placement(cfg: &ProtocolConfig) -> Result<Placement> {
    cfg.check()?;
    let params = sample_params(cfg)?;
    let secrets: Vec<_> = cfg
        .functions
        .iter()
        .map(PointFunction::secret_vector)
        .collect();
    let n = cfg.access.servers();
    let mut stores: Vec<ServerStore> = (1..=n)
        .map(|server| ServerStore {
            server,
            g: Vec::with_capacity(cfg.domain),
        })
        .collect();
    for t in 1..=cfg.domain {
        let blocks: Vec<Block> = secrets.iter().map(|s| s.block(t).to_vec()).collect();
        let shares = params.enc_coordinate(&blocks, &mut coordinate_rng(cfg.seed, t))?;
        for (store, g) in stores.iter_mut().zip(shares.g) {
            store.g.push(g);
        }
    }
    Ok(Placement { params, stores })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DemandMessage {
    pub user: usize,
    pub server: usize,
    pub point: usize,
}

/// User `k` asks every server in its access set for point `point`.
pub fn demand(
    access: &AccessStructure,
    domain: usize,
    k: usize,
    point: usize,
) -> Result<Vec<DemandMessage>> {
    if point == 0 || point > domain {
        return Err(Error::Usage(format!(
            "demand {point} is outside [1, {domain}]"
        )));
    }
    Ok(access
        .set(k)
        .iter()
        .map(|&server| DemandMessage {
            user: k,
            server,
            point,
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Response {
    pub user: usize,
    pub server: usize,
    pub c: Block,
}

/// Server side: reads coordinate `point` once and returns
/// `c[j] = -alpha * I[j][pos] * G[point]` for `j < R_k`, where `I` is the
/// inverse Vandermonde matrix of user `k` and `pos` is the server's position
/// in `A_k`.
pub fn evaluate<S: SymbolSource + ?Sized>(
    params: &SchemeParams,
    k: usize,
    point: usize,
    store: &S,
) -> Result<Response> {
    evaluate_with(params, k, point, store, RetrievalMode::Full)
}

pub fn evaluate_with<S: SymbolSource + ?Sized>(
    params: &SchemeParams,
    k: usize,
    point: usize,
    store: &S,
    mode: RetrievalMode,
) -> Result<Response> {
    let server = store.server();
    let pos = params
        .access()
        .position(k, server)
        .ok_or(Error::AccessViolation { user: k, server })?;
    let coeffs = response_coefficients(params, k, pos, mode)?;
    let g = store.symbol(point)?;
    let f = params.field();
    Ok(Response {
        user: k,
        server,
        c: coeffs.iter().map(|&c| f.mul(c, g)).collect(),
    })
}

/// The `R_k` multipliers server `pos` applies to its symbol.
fn response_coefficients(
    params: &SchemeParams,
    k: usize,
    pos: usize,
    mode: RetrievalMode,
) -> Result<Vec<FieldElement>> {
    let f = params.field();
    let user = params.user(k);
    let scale = f.neg(user.alpha[pos]);
    let r_k = params.rates().get(k);
    match mode {
        RetrievalMode::Full => {
            let inv = params
                .inverse_vandermonde(k)
                .ok_or_else(|| Error::Usage(format!("user {k} has repeated evaluation points")))?;
            Ok((0..r_k).map(|j| f.mul(scale, inv.get(j, pos))).collect())
        }
        RetrievalMode::Peeling => (0..r_k)
            .map(|j| {
                let side = user.gamma.len() - j;
                if pos >= side {
                    return Ok(f.zero());
                }
                let inv = truncated_inverse(f, &user.gamma[..side])?;
                Ok(f.mul(scale, inv.get(0, pos)))
            })
            .collect(),
    }
}

fn truncated_inverse(field: &FieldCtx, gamma: &[FieldElement]) -> Result<Matrix> {
    invert(&vandermonde(field, gamma, gamma.len()))
}

/// User side: one response per server of `A_k`, in any order, summed level by
/// level.
pub fn retrieve(params: &SchemeParams, k: usize, responses: &[Response]) -> Result<Block> {
    let set = params.access().set(k);
    let mut seen = vec![false; set.len()];
    let r_k = params.rates().get(k);
    let f = params.field();
    let mut out = vec![f.zero(); r_k];
    for resp in responses {
        if resp.user != k {
            return Err(Error::Usage(format!(
                "response for user {} handed to user {k}",
                resp.user
            )));
        }
        let pos = params
            .access()
            .position(k, resp.server)
            .ok_or(Error::AccessViolation {
                user: k,
                server: resp.server,
            })?;
        if seen[pos] {
            return Err(Error::Usage(format!(
                "duplicate response from server {}",
                resp.server
            )));
        }
        seen[pos] = true;
        if resp.c.len() != r_k {
            return Err(Error::Usage(format!(
                "response from server {} has {} symbols, expected {r_k}",
                resp.server,
                resp.c.len()
            )));
        }
        for (o, &c) in out.iter_mut().zip(&resp.c) {
            *o = f.add(*o, c);
        }
    }
    if let Some(i) = seen.iter().position(|s| !s) {
        return Err(Error::Usage(format!(
            "user {k} is missing the response of server {}",
            set[i]
        )));
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserOutcome {
    pub user: usize,
    pub demand: usize,
    pub retrieved: Block,
    pub expected: Block,
    pub correct: bool,
    /// Whether the retrieved block equals direct decoding of the demanded
    /// coordinate from the user's shares.
    pub matches_decoding: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Round {
    pub demands: Vec<usize>,
    pub messages: Vec<DemandMessage>,
    pub responses: Vec<Response>,
    pub outcomes: Vec<UserOutcome>,
}

impl Round {
    pub fn all_correct(&self) -> bool {
        self.outcomes.iter().all(|o| o.correct)
    }
}

/// Demand, evaluation and retrieval for one demand tuple against an existing
/// placement.
pub fn execute_round(
    cfg: &ProtocolConfig,
    placement: &Placement,
    demands: &[usize],
) -> Result<Round> {
    if demands.len() != cfg.access.users() {
        return Err(Error::Usage(format!(
            "{} demands for {} users",
            demands.len(),
            cfg.access.users()
        )));
    }
    check_demands(demands, cfg.domain)?;
    let params = &placement.params;
    let mut messages = Vec::new();
    let mut responses = Vec::new();
    let mut outcomes = Vec::new();
    for (i, &v) in demands.iter().enumerate() {
        let k = i + 1;
        let sent = demand(&cfg.access, cfg.domain, k, v)?;
        let mut mine = Vec::with_capacity(sent.len());
        for msg in &sent {
            let store = &placement.stores[msg.server - 1];
            mine.push(evaluate_with(params, k, msg.point, store, cfg.retrieval)?);
        }
        let retrieved = retrieve(params, k, &mine)?;
        let expected = cfg.functions[i].eval(v)?;
        let decoded = params.dec_coordinate(k, &placement.coordinate(v))?;
        outcomes.push(UserOutcome {
            user: k,
            demand: v,
            correct: retrieved == expected,
            matches_decoding: retrieved == decoded,
            retrieved,
            expected,
        });
        messages.extend(sent);
        responses.extend(mine);
    }
    Ok(Round {
        demands: demands.to_vec(),
        messages,
        responses,
        outcomes,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserParamsRecord {
    pub user: usize,
    pub access_set: Vec<usize>,
    pub rate: usize,
    pub alpha: Vec<FieldElement>,
    pub gamma: Vec<FieldElement>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamsRecord {
    pub users: Vec<UserParamsRecord>,
    pub attempts: usize,
    pub nullity: usize,
    pub validation: ValidationReport,
}

impl ParamsRecord {
    pub fn from_params(params: &SchemeParams) -> Self {
        ParamsRecord {
            users: params
                .users()
                .iter()
                .enumerate()
                .map(|(i, u)| UserParamsRecord {
                    user: i + 1,
                    access_set: params.access().set(i + 1).to_vec(),
                    rate: params.rates().get(i + 1),
                    alpha: u.alpha.clone(),
                    gamma: u.gamma.clone(),
                })
                .collect(),
            attempts: params.attempts(),
            nullity: params.nullity(),
            validation: params.report().clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StorageRecord {
    /// Base-field symbols per server (`T`).
    pub symbols_per_server: usize,
    /// The same in q-ary digits (`T * m`), the memory size `M`.
    pub qary_digits_per_server: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transcript {
    pub seed: u64,
    pub params: ParamsRecord,
    pub functions: Vec<PointFunction>,
    pub storage: StorageRecord,
    pub stores: Vec<ServerStore>,
    pub rounds: Vec<Round>,
}

impl Transcript {
    pub fn all_correct(&self) -> bool {
        self.rounds.iter().all(Round::all_correct)
    }

    pub fn retrievals(&self) -> usize {
        self.rounds.iter().map(|r| r.outcomes.len()).sum()
    }
}

/// Placement followed by one round per demand tuple; an exhaustive
/// configuration reuses a single placement for all `T^K` tuples.
pub fn run(cfg: &ProtocolConfig) -> Result<Transcript> {
    let placement = placement(cfg)?;
    run_with_placement(cfg, &placement)
}

pub fn run_with_placement(cfg: &ProtocolConfig, placement: &Placement) -> Result<Transcript> {
    let rounds = cfg
        .demand_tuples()
        .iter()
        .map(|d| execute_round(cfg, placement, d))
        .collect::<Result<Vec<_>>>()?;
    Ok(Transcript {
        seed: cfg.seed,
        params: ParamsRecord::from_params(&placement.params),
        functions: cfg.functions.clone(),
        storage: StorageRecord {
            symbols_per_server: cfg.domain,
            qary_digits_per_server: cfg.domain * cfg.field.m(),
        },
        stores: placement.stores.clone(),
        rounds,
    })
}
