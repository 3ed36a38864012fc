//! Multi-user secret sharing over a general access structure.
//!
//! Each user `k` owns a polynomial of degree `|A_k| - 1` whose low `R_k`
//! coefficients are its secret symbols and whose remaining coefficients are
//! pads. Server `n` in `A_k` at position `i` must satisfy
//!
//! ```text
//! -alpha[k][i] * G_n = sum_j coeff[k][j] * gamma[k][i]^j
//! ```
//!
//! for every user that can read it, so a share is pinned down jointly by all
//! users sharing that server. All users' equations for one coordinate form a
//! single linear system over the shares and pads; encoding draws a uniform
//! point of its solution coset, decoding interpolates one user's polynomial.
//!
//! Unknowns are ordered shares first (ascending server id over the union of
//! access sets), then pads user-major and degree-ascending. Secrets are stacked
//! user-major. Equations are ordered user-major, then by server id.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{FieldCtx, FieldElement};
use crate::linalg::{invert, nullspace_basis, rank, vandermonde, Matrix, ParticularSolver};
use crate::pointfn::Block;

pub const DEFAULT_MAX_RETRIES: usize = 64;

/// Which servers each user can read. Users and servers are 1-based.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AccessStructure {
    servers: usize,
    sets: Vec<Vec<usize>>,
}

impl AccessStructure {
    pub fn new(servers: usize, sets: Vec<Vec<usize>>) -> Result<Self> {
        if sets.is_empty() {
            return Err(Error::Usage(
                "access structure needs at least one user".into(),
            ));
        }
        let mut sorted = Vec::with_capacity(sets.len());
        for (k, mut set) in sets.into_iter().enumerate() {
            if set.is_empty() {
                return Err(Error::Usage(format!(
                    "access set of user {} is empty",
                    k + 1
                )));
            }
            set.sort_unstable();
            if set.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::Usage(format!(
                    "access set of user {} lists a server twice",
                    k + 1
                )));
            }
            if let Some(&n) = set.iter().find(|&&n| n == 0 || n > servers) {
                return Err(Error::Usage(format!(
                    "server {n} in access set of user {} is outside [1, {servers}]",
                    k + 1
                )));
            }
            sorted.push(set);
        }
        Ok(AccessStructure {
            servers,
            sets: sorted,
        })
    }

    pub fn servers(&self) -> usize {
        self.servers
    }

    pub fn users(&self) -> usize {
        self.sets.len()
    }

    pub fn sets(&self) -> &[Vec<usize>] {
        &self.sets
    }

    /// Sorted access set of 1-based user `k`.
    pub fn set(&self, k: usize) -> &[usize] {
        &self.sets[k - 1]
    }

    /// 0-based position of server `n` within the sorted access set of user `k`.
    pub fn position(&self, k: usize, n: usize) -> Option<usize> {
        self.set(k).binary_search(&n).ok()
    }

    pub fn contains(&self, k: usize, n: usize) -> bool {
        self.position(k, n).is_some()
    }

    /// `A_k \ A_other`.
    pub fn difference(&self, k: usize, other: usize) -> Vec<usize> {
        let o = self.set(other);
        self.set(k)
            .iter()
            .copied()
            .filter(|n| o.binary_search(n).is_err())
            .collect()
    }

    /// Sorted union of the access sets of the given 1-based users.
    pub fn union_of(&self, users: &[usize]) -> Vec<usize> {
        let mut all: Vec<usize> = users
            .iter()
            .flat_map(|&k| self.set(k).iter().copied())
            .collect();
        all.sort_unstable();
        all.dedup();
        all
    }

    pub fn union(&self) -> Vec<usize> {
        self.union_of(&(1..=self.users()).collect::<Vec<_>>())
    }
}

/// Block lengths `R_k`, validated against an access structure.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RateVector(Vec<usize>);

impl RateVector {
    pub fn new(access: &AccessStructure, rates: Vec<usize>) -> Result<Self> {
        if rates.len() != access.users() {
            return Err(Error::Usage(format!(
                "{} rates for {} users",
                rates.len(),
                access.users()
            )));
        }
        for (k, &r) in rates.iter().enumerate() {
            if r == 0 {
                return Err(Error::Usage(format!("rate of user {} must be >= 1", k + 1)));
            }
            let size = access.set(k + 1).len();
            if r > size {
                return Err(Error::Usage(format!(
                    "rate {r} of user {} exceeds its access set size {size}",
                    k + 1
                )));
            }
        }
        Ok(RateVector(rates))
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    /// Rate of 1-based user `k`.
    pub fn get(&self, k: usize) -> usize {
        self.0[k - 1]
    }

    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }
}

/// Evaluation points for one user, aligned with its sorted access set.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserParams {
    pub alpha: Vec<FieldElement>,
    pub gamma: Vec<FieldElement>,
}

/// The per-coordinate linear system shared by encoding and validation.
#[derive(Clone, Debug)]
pub struct EncodingSystem {
    /// Coefficients of shares and pads, one row per (user, server) pair.
    pub matrix: Matrix,
    /// Maps the stacked secret symbols to the right-hand side.
    pub injection: Matrix,
    /// Servers appearing in some access set, ascending. Column `i` of the
    /// share block belongs to `union[i]`.
    pub union: Vec<usize>,
    /// First pad column of each user.
    pub pad_offsets: Vec<usize>,
    /// First stacked-secret index of each user.
    pub secret_offsets: Vec<usize>,
}

impl EncodingSystem {
    pub fn share_column(&self, server: usize) -> Option<usize> {
        self.union.binary_search(&server).ok()
    }

    pub fn unknowns(&self) -> usize {
        self.matrix.cols()
    }

    pub fn equations(&self) -> usize {
        self.matrix.rows()
    }
}

pub fn build_system(
    field: &FieldCtx,
    access: &AccessStructure,
    rates: &RateVector,
    users: &[UserParams],
) -> Result<EncodingSystem> {
    check_shapes(access, users)?;
    let union = access.union();
    let mut pad_offsets = Vec::with_capacity(access.users());
    let mut secret_offsets = Vec::with_capacity(access.users());
    let (mut pad_col, mut secret_col) = (union.len(), 0);
    for k in 1..=access.users() {
        pad_offsets.push(pad_col);
        secret_offsets.push(secret_col);
        pad_col += access.set(k).len() - rates.get(k);
        secret_col += rates.get(k);
    }
    let rows: usize = access.sets().iter().map(Vec::len).sum();
    let mut matrix = Matrix::zeros(field, rows, pad_col);
    let mut injection = Matrix::zeros(field, rows, secret_col);
    let mut row = 0;
    for k in 1..=access.users() {
        let p = &users[k - 1];
        let r_k = rates.get(k);
        for (i, &n) in access.set(k).iter().enumerate() {
            let g = union.binary_search(&n).expect("server is in the union");
            matrix.set(row, g, p.alpha[i]);
            let gamma = p.gamma[i];
            for j in 0..access.set(k).len() {
                let power = field.pow(gamma, j as u64);
                if j < r_k {
                    injection.set(row, secret_offsets[k - 1] + j, field.neg(power));
                } else {
                    matrix.set(row, pad_offsets[k - 1] + j - r_k, power);
                }
            }
            row += 1;
        }
    }
    Ok(EncodingSystem {
        matrix,
        injection,
        union,
        pad_offsets,
        secret_offsets,
    })
}

fn check_shapes(access: &AccessStructure, users: &[UserParams]) -> Result<()> {
    if users.len() != access.users() {
        return Err(Error::Usage(format!(
            "parameters for {} users, access structure has {}",
            users.len(),
            access.users()
        )));
    }
    for (k, p) in users.iter().enumerate() {
        let size = access.set(k + 1).len();
        if p.alpha.len() != size || p.gamma.len() != size {
            return Err(Error::Usage(format!(
                "user {} needs {size} alpha and gamma values",
                k + 1
            )));
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecodabilityVerdict {
    pub rank: usize,
    pub required_rank: usize,
    pub alpha_nonzero: bool,
    pub gamma_distinct: bool,
    pub pass: bool,
}

/// Whether the pad randomness hides user `user`'s secret from the shares
/// readable by `observer`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrivacyVerdict {
    pub user: usize,
    pub observer: usize,
    pub nullspace_rank: usize,
    pub combined_rank: usize,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub decodability: DecodabilityVerdict,
    pub privacy: Vec<PrivacyVerdict>,
}

impl ValidationReport {
    pub fn passes(&self) -> bool {
        self.decodability.pass && self.privacy.iter().all(|p| p.pass)
    }

    pub fn failed_privacy(&self) -> impl Iterator<Item = &PrivacyVerdict> {
        self.privacy.iter().filter(|p| !p.pass)
    }

    pub fn summary(&self) -> String {
        let d = &self.decodability;
        let mut parts = Vec::new();
        if d.pass {
            parts.push("decodability pass".to_string());
        } else {
            let mut why = Vec::new();
            if d.rank < d.required_rank {
                why.push(format!("rank {} < {}", d.rank, d.required_rank));
            }
            if !d.alpha_nonzero {
                why.push("zero alpha".into());
            }
            if !d.gamma_distinct {
                why.push("repeated gamma".into());
            }
            parts.push(format!("decodability fail ({})", why.join(", ")));
        }
        let failed: Vec<String> = self
            .failed_privacy()
            .map(|p| format!("({}, {})", p.user, p.observer))
            .collect();
        if failed.is_empty() {
            parts.push("privacy pass".into());
        } else {
            parts.push(format!("privacy fail for pairs {}", failed.join(" ")));
        }
        parts.join("; ")
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.summary())
    }
}

/// Shares `G_{1,t}, ..., G_{N,t}` of one coordinate, indexed by `server - 1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoordinateShares {
    pub g: Vec<FieldElement>,
}

impl CoordinateShares {
    pub fn get(&self, server: usize) -> FieldElement {
        self.g[server - 1]
    }
}

/// Evaluation points plus every derived matrix needed to encode and decode.
#[derive(Clone, Debug)]
pub struct SchemeParams {
    field: FieldCtx,
    access: AccessStructure,
    rates: RateVector,
    users: Vec<UserParams>,
    system: EncodingSystem,
    particular_map: Matrix,
    nullspace: Matrix,
    inverse_vandermonde: Vec<Option<Matrix>>,
    report: ValidationReport,
    attempts: usize,
}

impl SchemeParams {
    /// Assembles parameters and runs validation. Fails only on shape errors;
    /// the verdicts are available through [`SchemeParams::report`].
    pub fn from_parts(
        field: &FieldCtx,
        access: &AccessStructure,
        rates: &RateVector,
        users: Vec<UserParams>,
    ) -> Result<Self> {
        for p in &users {
            for &e in p.alpha.iter().chain(&p.gamma) {
                field.check(e)?;
            }
        }
        let system = build_system(field, access, rates, &users)?;
        let solver = ParticularSolver::new(&system.matrix);
        let particular_map = solver.map();
        let nullspace = nullspace_basis(&system.matrix);
        let inverse_vandermonde = users
            .iter()
            .map(|p| invert(&vandermonde(field, &p.gamma, p.gamma.len())).ok())
            .collect::<Vec<_>>();
        let mut params = SchemeParams {
            field: field.clone(),
            access: access.clone(),
            rates: rates.clone(),
            users,
            system,
            particular_map,
            nullspace,
            inverse_vandermonde,
            report: ValidationReport {
                decodability: DecodabilityVerdict {
                    rank: solver.rank(),
                    required_rank: 0,
                    alpha_nonzero: false,
                    gamma_distinct: false,
                    pass: false,
                },
                privacy: Vec::new(),
            },
            attempts: 1,
        };
        params.report = params.validate();
        Ok(params)
    }

    /// Decodability: the system has full row rank (every secret tuple is
    /// encodable) and every user's Vandermonde matrix is invertible.
    /// Privacy for `(k, observer)`: the image of user `k`'s secrets on the
    /// observer's shares lies in the column space of the pad randomness on
    /// those shares.
    fn validate(&self) -> ValidationReport {
        let required_rank = self.system.equations();
        let rank_sys = self.report.decodability.rank;
        let alpha_nonzero = self
            .users
            .iter()
            .all(|p| p.alpha.iter().all(|a| !a.is_zero()));
        let gamma_distinct = self.inverse_vandermonde.iter().all(Option::is_some);
        let decodability = DecodabilityVerdict {
            rank: rank_sys,
            required_rank,
            alpha_nonzero,
            gamma_distinct,
            pass: rank_sys == required_rank && alpha_nonzero && gamma_distinct,
        };
        let mut privacy = Vec::new();
        let k_users = self.access.users();
        for k in 1..=k_users {
            let secret_cols: Vec<usize> = (0..self.rates.get(k))
                .map(|j| self.system.secret_offsets[k - 1] + j)
                .collect();
            let secret_map = self
                .particular_map
                .mul(&self.system.injection.select_cols(&secret_cols))
                .expect("shapes agree");
            for observer in (1..=k_users).filter(|&o| o != k) {
                let rows: Vec<usize> = self
                    .access
                    .set(observer)
                    .iter()
                    .map(|&n| self.system.share_column(n).expect("in union"))
                    .collect();
                let pmap = secret_map.select_rows(&rows);
                let nmap = self.nullspace.select_rows(&rows);
                let nullspace_rank = rank(&nmap);
                let combined_rank = rank(&nmap.hstack(&pmap).expect("same rows"));
                privacy.push(PrivacyVerdict {
                    user: k,
                    observer,
                    nullspace_rank,
                    combined_rank,
                    pass: nullspace_rank == combined_rank,
                });
            }
        }
        ValidationReport {
            decodability,
            privacy,
        }
    }

    pub fn field(&self) -> &FieldCtx {
        &self.field
    }

    pub fn access(&self) -> &AccessStructure {
        &self.access
    }

    pub fn rates(&self) -> &RateVector {
        &self.rates
    }

    pub fn users(&self) -> &[UserParams] {
        &self.users
    }

    /// Parameters of 1-based user `k`.
    pub fn user(&self, k: usize) -> &UserParams {
        &self.users[k - 1]
    }

    pub fn system(&self) -> &EncodingSystem {
        &self.system
    }

    /// `unknowns x equations` matrix of the particular-solution map.
    pub fn particular_map(&self) -> &Matrix {
        &self.particular_map
    }

    /// Nullspace basis of the system, one column per degree of freedom.
    pub fn nullspace(&self) -> &Matrix {
        &self.nullspace
    }

    pub fn nullity(&self) -> usize {
        self.nullspace.cols()
    }

    /// Servers outside every access set; they receive independent uniform fill.
    pub fn fill_servers(&self) -> Vec<usize> {
        (1..=self.access.servers())
            .filter(|n| self.system.share_column(*n).is_none())
            .collect()
    }

    /// Full inverse Vandermonde on user `k`'s gamma, when it exists.
    pub fn inverse_vandermonde(&self, k: usize) -> Option<&Matrix> {
        self.inverse_vandermonde[k - 1].as_ref()
    }

    pub fn report(&self) -> &ValidationReport {
        &self.report
    }

    /// Number of samples drawn before these parameters were accepted.
    pub fn attempts(&self) -> usize {
        self.attempts
    }

    pub fn alpha(&self, k: usize, server: usize) -> Option<FieldElement> {
        self.access
            .position(k, server)
            .map(|i| self.users[k - 1].alpha[i])
    }

    fn require_decodable(&self) -> Result<()> {
        if self.report.decodability.pass {
            Ok(())
        } else {
            Err(Error::Usage(format!(
                "parameters are not valid for encoding: {}",
                self.report.summary()
            )))
        }
    }

    fn stack_secrets(&self, blocks: &[Block]) -> Result<Vec<FieldElement>> {
        if blocks.len() != self.access.users() {
            return Err(Error::Usage(format!(
                "{} blocks for {} users",
                blocks.len(),
                self.access.users()
            )));
        }
        let mut stacked = Vec::with_capacity(self.rates.total());
        for (k, b) in blocks.iter().enumerate() {
            if b.len() != self.rates.get(k + 1) {
                return Err(Error::Usage(format!(
                    "block of user {} has length {}, expected {}",
                    k + 1,
                    b.len(),
                    self.rates.get(k + 1)
                )));
            }
            for &e in b {
                self.field.check(e)?;
            }
            stacked.extend_from_slice(b);
        }
        Ok(stacked)
    }

    /// The full unknown vector (shares over the union, then pads) for the
    /// given secrets and nullspace coefficients.
    pub fn solve_unknowns(
        &self,
        blocks: &[Block],
        nu: &[FieldElement],
    ) -> Result<Vec<FieldElement>> {
        self.require_decodable()?;
        let stacked = self.stack_secrets(blocks)?;
        let rhs = self.system.injection.mul_vec(&stacked)?;
        let base = self.particular_map.mul_vec(&rhs)?;
        let noise = self.nullspace.mul_vec(nu)?;
        Ok(base
            .iter()
            .zip(&noise)
            .map(|(&a, &b)| self.field.add(a, b))
            .collect())
    }

    /// Deterministic encoding with explicit nullspace coefficients `nu` and
    /// fill values for [`SchemeParams::fill_servers`].
    pub fn enc_coordinate_with(
        &self,
        blocks: &[Block],
        nu: &[FieldElement],
        fill: &[FieldElement],
    ) -> Result<CoordinateShares> {
        let fill_servers = self.fill_servers();
        if fill.len() != fill_servers.len() {
            return Err(Error::Usage(format!(
                "{} fill values for {} unused servers",
                fill.len(),
                fill_servers.len()
            )));
        }
        let u = self.solve_unknowns(blocks, nu)?;
        let mut g = vec![FieldElement::ZERO; self.access.servers()];
        for (i, &n) in self.system.union.iter().enumerate() {
            g[n - 1] = u[i];
        }
        for (&n, &v) in fill_servers.iter().zip(fill) {
            self.field.check(v)?;
            g[n - 1] = v;
        }
        Ok(CoordinateShares { g })
    }

    /// Encodes one coordinate: draws the nullspace coefficients, then the fill
    /// for unused servers in ascending order.
    pub fn enc_coordinate<R: Rng + ?Sized>(
        &self,
        blocks: &[Block],
        rng: &mut R,
    ) -> Result<CoordinateShares> {
        self.require_decodable()?;
        let nu: Vec<FieldElement> = (0..self.nullity())
            .map(|_| self.field.sample(rng, false))
            .collect();
        let fill: Vec<FieldElement> = self
            .fill_servers()
            .iter()
            .map(|_| self.field.sample(rng, false))
            .collect();
        self.enc_coordinate_with(blocks, &nu, &fill)
    }

    /// All `|A_k|` polynomial coefficients of user `k` from its shares, given
    /// in access-set order.
    pub fn interpolate(&self, k: usize, shares: &[FieldElement]) -> Result<Vec<FieldElement>> {
        let set = self.access.set(k);
        if shares.len() != set.len() {
            return Err(Error::Usage(format!(
                "user {k} needs {} shares, got {}",
                set.len(),
                shares.len()
            )));
        }
        let inv = self
            .inverse_vandermonde(k)
            .ok_or_else(|| Error::Usage(format!("user {k} has repeated evaluation points")))?;
        let alpha = &self.users[k - 1].alpha;
        let s: Vec<FieldElement> = shares
            .iter()
            .zip(alpha)
            .map(|(&g, &a)| self.field.neg(self.field.mul(a, g)))
            .collect();
        inv.mul_vec(&s)
    }

    /// User `k`'s secret block from its shares, given in access-set order.
    pub fn dec(&self, k: usize, shares: &[FieldElement]) -> Result<Block> {
        let mut coeffs = self.interpolate(k, shares)?;
        coeffs.truncate(self.rates.get(k));
        Ok(coeffs)
    }

    pub fn dec_coordinate(&self, k: usize, shares: &CoordinateShares) -> Result<Block> {
        let view: Vec<FieldElement> = self.access.set(k).iter().map(|&n| shares.get(n)).collect();
        self.dec(k, &view)
    }

    /// Residual of every (user, server) equation for one coordinate; all zero
    /// for a consistent encoding.
    pub fn residuals(
        &self,
        blocks: &[Block],
        shares: &CoordinateShares,
    ) -> Result<Vec<FieldElement>> {
        let f = &self.field;
        let mut out = Vec::new();
        for k in 1..=self.access.users() {
            let set = self.access.set(k);
            let coeffs = self.interpolate_with_secret(k, &blocks[k - 1], shares)?;
            for (i, &n) in set.iter().enumerate() {
                let p = &self.users[k - 1];
                let eval = coeffs
                    .iter()
                    .enumerate()
                    .fold(FieldElement::ZERO, |acc, (j, &c)| {
                        f.add(acc, f.mul(c, f.pow(p.gamma[i], j as u64)))
                    });
                let lhs = f.neg(f.mul(p.alpha[i], shares.get(n)));
                out.push(f.sub(lhs, eval));
            }
        }
        Ok(out)
    }

    /// Polynomial coefficients with the secret part taken from `block` and the
    /// pad part from interpolation.
    fn interpolate_with_secret(
        &self,
        k: usize,
        block: &[FieldElement],
        shares: &CoordinateShares,
    ) -> Result<Vec<FieldElement>> {
        let view: Vec<FieldElement> = self.access.set(k).iter().map(|&n| shares.get(n)).collect();
        let mut coeffs = self.interpolate(k, &view)?;
        coeffs[..block.len()].copy_from_slice(block);
        Ok(coeffs)
    }
}

fn check_field_size(field: &FieldCtx, access: &AccessStructure) -> Result<()> {
    let largest = access.sets().iter().map(Vec::len).max().unwrap_or(0) as u64;
    if field.order() < largest + 1 {
        return Err(Error::Usage(format!(
            "field of order {} has fewer than {largest} distinct nonzero evaluation points",
            field.order()
        )));
    }
    Ok(())
}

fn sample_users<R: Rng + ?Sized>(
    field: &FieldCtx,
    access: &AccessStructure,
    rng: &mut R,
) -> Vec<UserParams> {
    access
        .sets()
        .iter()
        .map(|set| {
            let alpha = set.iter().map(|_| field.sample(rng, true)).collect();
            let mut gamma: Vec<FieldElement> = Vec::with_capacity(set.len());
            while gamma.len() < set.len() {
                let g = field.sample(rng, true);
                if !gamma.contains(&g) {
                    gamma.push(g);
                }
            }
            UserParams { alpha, gamma }
        })
        .collect()
}

/// Samples nonzero alphas and distinct nonzero gammas until the result passes
/// validation, trying at most `max_retries` times.
pub fn param_sample<R: Rng + ?Sized>(
    field: &FieldCtx,
    access: &AccessStructure,
    rates: &RateVector,
    rng: &mut R,
    max_retries: usize,
) -> Result<SchemeParams> {
    check_field_size(field, access)?;
    let mut last = None;
    for attempt in 1..=max_retries.max(1) {
        let users = sample_users(field, access, rng);
        let mut params = SchemeParams::from_parts(field, access, rates, users)?;
        if params.report.passes() {
            params.attempts = attempt;
            return Ok(params);
        }
        last = Some(params.report);
    }
    Err(Error::ParamSearchFailed {
        attempts: max_retries.max(1),
        report: Box::new(last.expect("at least one attempt")),
    })
}

/// Debug-only counterpart of [`param_sample`] that skips the privacy check
/// and forces one user's first evaluation point to zero, which exposes that
/// user's constant coefficient on its first server. Accepts the first sample
/// that is decodable but fails privacy (or any decodable sample when there is
/// a single user and privacy is vacuous).
pub fn param_sample_adversarial<R: Rng + ?Sized>(
    field: &FieldCtx,
    access: &AccessStructure,
    rates: &RateVector,
    rng: &mut R,
    max_retries: usize,
) -> Result<SchemeParams> {
    check_field_size(field, access)?;
    let mut last = None;
    for attempt in 1..=max_retries.max(1) {
        let mut users = sample_users(field, access, rng);
        let target = (attempt - 1) % users.len();
        users[target].gamma[0] = FieldElement::ZERO;
        let mut params = SchemeParams::from_parts(field, access, rates, users)?;
        let report = &params.report;
        if report.decodability.pass
            && (access.users() == 1 || report.failed_privacy().next().is_some())
        {
            params.attempts = attempt;
            return Ok(params);
        }
        last = Some(params.report);
    }
    Err(Error::ParamSearchFailed {
        attempts: max_retries.max(1),
        report: Box::new(last.expect("at least one attempt")),
    })
}
