//! Point functions and their lifting into a linear ambient space.
//!
//! A point function on `[1, T]` is zero everywhere except at one point `X`,
//! where it takes a nonzero block `Z` of `R` base-field symbols. [`embed`]
//! places such a function into `F^H` using a fixed set of weight-`d` indicator
//! vectors, and [`evaluate_selector`] is the degree-`d` polynomial that reads the
//! value back out: `evaluate_selector(x, embed(X, Z)) = Z * x[X]`.
//!
//! Points and domain positions are 1-based throughout, matching how demands are
//! expressed on the wire.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{FieldCtx, FieldElement};

/// A block of `R` base-field symbols, the range type of a point function.
pub type Block = Vec<FieldElement>;

pub fn zero_block(len: usize) -> Block {
    vec![FieldElement::ZERO; len]
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointFunction {
    domain: usize,
    point: usize,
    value: Block,
}

impl PointFunction {
    pub fn new(field: &FieldCtx, domain: usize, point: usize, value: Block) -> Result<Self> {
        if domain == 0 {
            return Err(Error::Usage(
                "point function domain must be nonempty".into(),
            ));
        }
        if point == 0 || point > domain {
            return Err(Error::Usage(format!(
                "point {point} outside domain [1, {domain}]"
            )));
        }
        if value.is_empty() {
            return Err(Error::Usage(
                "point function block length must be >= 1".into(),
            ));
        }
        for &v in &value {
            field.check(v)?;
        }
        if value.iter().all(|v| v.is_zero()) {
            return Err(Error::Usage("point function value must be nonzero".into()));
        }
        Ok(PointFunction {
            domain,
            point,
            value,
        })
    }

    /// Uniform point and uniform nonzero block.
    pub fn random<R: Rng + ?Sized>(
        field: &FieldCtx,
        domain: usize,
        block_len: usize,
        rng: &mut R,
    ) -> Self {
        let point = rng.gen_range(1..=domain);
        let value = loop {
            let v: Block = (0..block_len).map(|_| field.sample(rng, false)).collect();
            if v.iter().any(|e| !e.is_zero()) {
                break v;
            }
        };
        PointFunction {
            domain,
            point,
            value,
        }
    }

    pub fn domain(&self) -> usize {
        self.domain
    }

    pub fn point(&self) -> usize {
        self.point
    }

    pub fn value(&self) -> &[FieldElement] {
        &self.value
    }

    pub fn block_len(&self) -> usize {
        self.value.len()
    }

    pub fn eval(&self, v: usize) -> Result<Block> {
        if v == 0 || v > self.domain {
            return Err(Error::Usage(format!(
                "input {v} outside domain [1, {}]",
                self.domain
            )));
        }
        Ok(if v == self.point {
            self.value.clone()
        } else {
            zero_block(self.block_len())
        })
    }

    /// The one-hot vector of blocks with `Z` at position `X`.
    pub fn secret_vector(&self) -> SecretVector {
        let mut blocks = vec![zero_block(self.block_len()); self.domain];
        blocks[self.point - 1] = self.value.clone();
        SecretVector { blocks }
    }
}

/// `T` blocks, one per domain position.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SecretVector {
    blocks: Vec<Block>,
}

impl SecretVector {
    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    /// Block at 1-based position `t`.
    pub fn block(&self, t: usize) -> &[FieldElement] {
        &self.blocks[t - 1]
    }

    pub fn domain(&self) -> usize {
        self.blocks.len()
    }

    /// Recovers `(X, Z)` when exactly one block is nonzero.
    pub fn decode(&self) -> Option<(usize, Block)> {
        let mut nonzero = self
            .blocks
            .iter()
            .enumerate()
            .filter(|(_, b)| b.iter().any(|e| !e.is_zero()));
        let (i, b) = nonzero.next()?;
        if nonzero.next().is_some() {
            return None;
        }
        Some((i + 1, b.clone()))
    }
}

/// The fixed set of `T` weight-`d` indicator vectors of length `H`, in
/// lexicographic order of their supports.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MappingSpec {
    dim: usize,
    degree: usize,
    supports: Vec<Vec<usize>>,
}

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

pub fn build_mapping(domain: usize, dim: usize, degree: usize) -> Result<MappingSpec> {
    if degree == 0 || degree > dim {
        return Err(Error::Usage(format!(
            "degree {degree} must lie in [1, {dim}]"
        )));
    }
    if binomial(dim, degree) < domain as u128 {
        return Err(Error::Capacity(format!(
            "only {} weight-{degree} vectors of length {dim}, need {domain}",
            binomial(dim, degree)
        )));
    }
    let mut supports = Vec::with_capacity(domain);
    let mut comb: Vec<usize> = (0..degree).collect();
    while supports.len() < domain {
        supports.push(comb.clone());
        // advance to the next combination in lexicographic order
        let Some(i) = (0..degree).rev().find(|&i| comb[i] < dim - degree + i) else {
            break;
        };
        comb[i] += 1;
        for j in i + 1..degree {
            comb[j] = comb[j - 1] + 1;
        }
    }
    Ok(MappingSpec {
        dim,
        degree,
        supports,
    })
}

impl MappingSpec {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn domain(&self) -> usize {
        self.supports.len()
    }

    /// 1-based support of the indicator assigned to point `i`.
    pub fn support(&self, i: usize) -> Vec<usize> {
        self.supports[i - 1].iter().map(|&p| p + 1).collect()
    }

    /// The indicator vector assigned to 1-based point `i`.
    pub fn indicator(&self, i: usize) -> Vec<bool> {
        let mut v = vec![false; self.dim];
        for &p in &self.supports[i - 1] {
            v[p] = true;
        }
        v
    }
}

/// Lifts `(X, Z)` into `H` blocks: the indicator of `X` with each one read as
/// the block `(1, 0, ..., 0)`, and the one at the largest position replaced
/// by `Z`.
pub fn embed(
    field: &FieldCtx,
    point: usize,
    value: &[FieldElement],
    spec: &MappingSpec,
) -> Result<Vec<Block>> {
    if point == 0 || point > spec.domain() {
        return Err(Error::Usage(format!(
            "point {point} outside domain [1, {}]",
            spec.domain()
        )));
    }
    if value.is_empty() || value.iter().all(|v| v.is_zero()) {
        return Err(Error::Usage(
            "embedded value must be a nonzero block".into(),
        ));
    }
    if spec.degree > 1 && value.len() != 1 {
        return Err(Error::Usage(
            "degree >= 2 embeddings support scalar values only".into(),
        ));
    }
    for &v in value {
        field.check(v)?;
    }
    let r = value.len();
    let mut unit = zero_block(r);
    unit[0] = FieldElement::ONE;
    let support = &spec.supports[point - 1];
    let mut out = vec![zero_block(r); spec.dim];
    for &p in support {
        out[p] = unit.clone();
    }
    let last = *support.last().expect("degree >= 1");
    out[last] = value.to_vec();
    Ok(out)
}

/// `sum_{i in [T]} x_i * prod_l z_l^{indicator(i)_l}`, a polynomial of total
/// degree `d` in `z`. `x` has one coefficient per domain point, `z` one entry
/// per ambient coordinate.
pub fn evaluate_selector(
    field: &FieldCtx,
    x: &[FieldElement],
    z: &[FieldElement],
    spec: &MappingSpec,
) -> Result<FieldElement> {
    if x.len() != spec.domain() {
        return Err(Error::DimensionMismatch(format!(
            "coefficient vector has length {}, expected {}",
            x.len(),
            spec.domain()
        )));
    }
    if z.len() != spec.dim {
        return Err(Error::DimensionMismatch(format!(
            "argument vector has length {}, expected {}",
            z.len(),
            spec.dim
        )));
    }
    let mut acc = FieldElement::ZERO;
    for (xi, support) in x.iter().zip(&spec.supports) {
        if xi.is_zero() {
            continue;
        }
        let monomial = support
            .iter()
            .fold(FieldElement::ONE, |m, &l| field.mul(m, z[l]));
        acc = field.add(acc, field.mul(*xi, monomial));
    }
    Ok(acc)
}
