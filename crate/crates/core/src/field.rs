//! Arithmetic in GF(q^m).
//!
//! Elements are stored as their radix-q index: the coefficient of `x^0` is the
//! least significant digit. Index 0 is the zero element and index 1 is the
//! multiplicative identity, so `enumerate` walks the field in canonical order.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest field order accepted, so that every index fits a machine word.
pub const MAX_ORDER: u64 = 1 << 63;

/// Default upper bound on the number of elements `enumerate` will produce.
pub const DEFAULT_ENUMERATION_CAP: u64 = 1 << 20;

/// Largest degree supported by the stack buffers used for multiplication.
const MAX_DEGREE: usize = 64;

/// Built-in Conway polynomials for q <= 13, m <= 4, low-order coefficient first,
/// leading 1 omitted.
const CONWAY: &[(u64, usize, &[u64])] = &[
    (2, 1, &[1]),
    (2, 2, &[1, 1]),
    (2, 3, &[1, 1, 0]),
    (2, 4, &[1, 1, 0, 0]),
    (3, 1, &[1]),
    (3, 2, &[2, 2]),
    (3, 3, &[1, 2, 0]),
    (3, 4, &[2, 0, 0, 2]),
    (5, 1, &[3]),
    (5, 2, &[2, 4]),
    (5, 3, &[3, 3, 0]),
    (5, 4, &[2, 4, 4, 0]),
    (7, 1, &[4]),
    (7, 2, &[3, 6]),
    (7, 3, &[4, 0, 6]),
    (7, 4, &[3, 4, 5, 0]),
    (11, 1, &[9]),
    (11, 2, &[2, 7]),
    (11, 3, &[9, 2, 0]),
    (11, 4, &[2, 10, 8, 0]),
    (13, 1, &[11]),
    (13, 2, &[2, 12]),
    (13, 3, &[11, 2, 0]),
    (13, 4, &[2, 12, 3, 0]),
];

/// An element of GF(q^m), identified by its radix-q index.
#[derive(
    Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct FieldElement(u64);

impl FieldElement {
    pub const ZERO: FieldElement = FieldElement(0);
    pub const ONE: FieldElement = FieldElement(1);

    pub fn index(self) -> u64 {
        self.0
    }

    /// Wraps an index without a range check; callers must know the field.
    pub(crate) const fn from_raw(index: u64) -> Self {
        FieldElement(index)
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

struct Inner {
    q: u64,
    m: usize,
    /// Monic modulus, low-order coefficient first, length m + 1.
    modulus: Vec<u64>,
    order: u64,
}

/// Arithmetic context for GF(q^m). Cheap to clone.
#[derive(Clone)]
pub struct FieldCtx {
    inner: Arc<Inner>,
}

impl PartialEq for FieldCtx {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
            || (self.inner.q == other.inner.q && self.inner.modulus == other.inner.modulus)
    }
}

impl Eq for FieldCtx {}

impl fmt::Debug for FieldCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({}^{}) mod {:?}", self.q(), self.m(), self.modulus())
    }
}

impl FieldCtx {
    /// Field with the built-in modulus. Prime fields (m = 1) are always
    /// available; extensions need an entry in the Conway table.
    pub fn new(q: u64, m: usize) -> Result<Self> {
        if m == 1 {
            let tail = CONWAY
                .iter()
                .find(|(cq, cm, _)| *cq == q && *cm == 1)
                .map(|(_, _, t)| t.to_vec())
                .unwrap_or_else(|| vec![0]);
            let mut modulus = tail;
            modulus.push(1);
            return Self::with_modulus(q, 1, modulus);
        }
        let tail = CONWAY
            .iter()
            .find(|(cq, cm, _)| *cq == q && *cm == m)
            .map(|(_, _, t)| *t)
            .ok_or_else(|| {
                Error::InvalidField(format!(
                    "no built-in modulus for GF({q}^{m}); supply one explicitly"
                ))
            })?;
        let mut modulus = tail.to_vec();
        modulus.push(1);
        Self::with_modulus(q, m, modulus)
    }

    /// Field with an explicit monic modulus given low-order coefficient first
    /// (length m + 1, last entry 1).
    pub fn with_modulus(q: u64, m: usize, modulus: Vec<u64>) -> Result<Self> {
        if !is_prime(q) {
            return Err(Error::InvalidField(format!("{q} is not prime")));
        }
        if m == 0 || m >= MAX_DEGREE {
            return Err(Error::InvalidField(format!(
                "extension degree {m} out of range"
            )));
        }
        let order = checked_order(q, m)?;
        if modulus.len() != m + 1 {
            return Err(Error::InvalidField(format!(
                "modulus has {} coefficients, expected {}",
                modulus.len(),
                m + 1
            )));
        }
        if let Some(c) = modulus.iter().find(|&&c| c >= q) {
            return Err(Error::InvalidField(format!(
                "modulus coefficient {c} is not a residue mod {q}"
            )));
        }
        if modulus[m] != 1 {
            return Err(Error::InvalidField("modulus must be monic".into()));
        }
        if !is_irreducible(&modulus, q) {
            return Err(Error::InvalidField(format!(
                "modulus {modulus:?} is reducible over Z_{q}"
            )));
        }
        Ok(FieldCtx {
            inner: Arc::new(Inner {
                q,
                m,
                modulus,
                order,
            }),
        })
    }

    pub fn q(&self) -> u64 {
        self.inner.q
    }

    pub fn m(&self) -> usize {
        self.inner.m
    }

    pub fn order(&self) -> u64 {
        self.inner.order
    }

    pub fn modulus(&self) -> &[u64] {
        &self.inner.modulus
    }

    pub fn zero(&self) -> FieldElement {
        FieldElement::ZERO
    }

    pub fn one(&self) -> FieldElement {
        FieldElement::ONE
    }

    pub fn from_index(&self, index: u64) -> Result<FieldElement> {
        let e = FieldElement(index);
        self.check(e)?;
        Ok(e)
    }

    /// Element from its coefficient vector (x^0 first). Shorter vectors are
    /// zero-padded.
    pub fn element(&self, coeffs: &[u64]) -> Result<FieldElement> {
        if coeffs.len() > self.m() {
            return Err(Error::Usage(format!(
                "{} coefficients given for degree-{} extension",
                coeffs.len(),
                self.m()
            )));
        }
        let q = self.q();
        let mut index = 0u64;
        for &c in coeffs.iter().rev() {
            if c >= q {
                return Err(Error::Usage(format!("coefficient {c} is not below {q}")));
            }
            index = index * q + c;
        }
        Ok(FieldElement(index))
    }

    /// Reduces an arbitrary integer into the prime subfield.
    pub fn from_int(&self, v: i64) -> FieldElement {
        FieldElement(v.rem_euclid(self.q() as i64) as u64)
    }

    pub fn coeffs(&self, a: FieldElement) -> Vec<u64> {
        let mut buf = [0u64; MAX_DEGREE];
        self.decode(a, &mut buf);
        buf[..self.m()].to_vec()
    }

    pub fn check(&self, a: FieldElement) -> Result<()> {
        if a.0 < self.order() {
            Ok(())
        } else {
            Err(Error::ForeignElement {
                value: a.0,
                order: self.order(),
            })
        }
    }

    pub fn contains(&self, a: FieldElement) -> bool {
        a.0 < self.order()
    }

    fn decode(&self, a: FieldElement, out: &mut [u64; MAX_DEGREE]) {
        let q = self.q();
        let mut v = a.0;
        for slot in out.iter_mut().take(self.m()) {
            *slot = v % q;
            v /= q;
        }
    }

    fn encode(&self, digits: &[u64]) -> FieldElement {
        let q = self.q();
        FieldElement(digits.iter().rev().fold(0u64, |acc, &d| acc * q + d))
    }

    pub fn add(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        debug_assert!(self.contains(a) && self.contains(b));
        let q = self.q();
        if self.m() == 1 {
            return FieldElement(add_mod(a.0, b.0, q));
        }
        let (mut x, mut y) = ([0u64; MAX_DEGREE], [0u64; MAX_DEGREE]);
        self.decode(a, &mut x);
        self.decode(b, &mut y);
        for i in 0..self.m() {
            x[i] = add_mod(x[i], y[i], q);
        }
        self.encode(&x[..self.m()])
    }

    pub fn neg(&self, a: FieldElement) -> FieldElement {
        debug_assert!(self.contains(a));
        let q = self.q();
        if self.m() == 1 {
            return FieldElement((q - a.0) % q);
        }
        let mut x = [0u64; MAX_DEGREE];
        self.decode(a, &mut x);
        for d in x.iter_mut().take(self.m()) {
            *d = (q - *d) % q;
        }
        self.encode(&x[..self.m()])
    }

    pub fn sub(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        debug_assert!(self.contains(a) && self.contains(b));
        let q = self.q();
        let m = self.m();
        if m == 1 {
            return FieldElement(mul_mod(a.0, b.0, q));
        }
        if a.is_zero() || b.is_zero() {
            return FieldElement::ZERO;
        }
        let (mut x, mut y) = ([0u64; MAX_DEGREE], [0u64; MAX_DEGREE]);
        self.decode(a, &mut x);
        self.decode(b, &mut y);
        let mut prod = [0u64; 2 * MAX_DEGREE];
        for i in 0..m {
            if x[i] == 0 {
                continue;
            }
            for j in 0..m {
                prod[i + j] = add_mod(prod[i + j], mul_mod(x[i], y[j], q), q);
            }
        }
        let modulus = self.modulus();
        for i in (m..2 * m - 1).rev() {
            let c = prod[i];
            if c == 0 {
                continue;
            }
            for j in 0..m {
                let t = mul_mod(c, modulus[j], q);
                prod[i - m + j] = sub_mod(prod[i - m + j], t, q);
            }
            prod[i] = 0;
        }
        self.encode(&prod[..m])
    }

    /// Multiplicative inverse via the extended Euclidean algorithm on
    /// polynomials over Z_q.
    pub fn inv(&self, a: FieldElement) -> Result<FieldElement> {
        self.check(a)?;
        if a.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let q = self.q();
        if self.m() == 1 {
            return Ok(FieldElement(inv_mod(a.0, q)));
        }
        let poly = trim(self.coeffs(a));
        let inv = poly_inverse(&poly, self.modulus(), q)
            .expect("nonzero element of a field is invertible");
        let mut digits = inv;
        digits.resize(self.m(), 0);
        Ok(self.encode(&digits))
    }

    pub fn div(&self, a: FieldElement, b: FieldElement) -> Result<FieldElement> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// Square-and-multiply exponentiation with the convention 0^0 = 1.
    pub fn pow(&self, a: FieldElement, mut e: u64) -> FieldElement {
        let mut base = a;
        let mut acc = FieldElement::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    pub fn checked_add(&self, a: FieldElement, b: FieldElement) -> Result<FieldElement> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.add(a, b))
    }

    pub fn checked_mul(&self, a: FieldElement, b: FieldElement) -> Result<FieldElement> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.mul(a, b))
    }

    pub fn sum<I: IntoIterator<Item = FieldElement>>(&self, items: I) -> FieldElement {
        items
            .into_iter()
            .fold(FieldElement::ZERO, |acc, x| self.add(acc, x))
    }

    /// All elements in index order, subject to [`DEFAULT_ENUMERATION_CAP`].
    pub fn enumerate(&self) -> Result<Vec<FieldElement>> {
        self.enumerate_capped(DEFAULT_ENUMERATION_CAP)
    }

    pub fn enumerate_capped(&self, cap: u64) -> Result<Vec<FieldElement>> {
        if self.order() > cap {
            return Err(Error::Capacity(format!(
                "field of order {} exceeds enumeration cap {cap}",
                self.order()
            )));
        }
        Ok((0..self.order()).map(FieldElement).collect())
    }

    pub fn nonzero_elements(&self) -> Result<Vec<FieldElement>> {
        let mut all = self.enumerate()?;
        all.remove(0);
        Ok(all)
    }

    /// Uniform element, or uniform over the nonzero elements (by rejection).
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, nonzero: bool) -> FieldElement {
        loop {
            let e = FieldElement(rng.gen_range(0..self.order()));
            if !(nonzero && e.is_zero()) {
                return e;
            }
        }
    }
}

fn checked_order(q: u64, m: usize) -> Result<u64> {
    let mut order: u64 = 1;
    for _ in 0..m {
        order = order
            .checked_mul(q)
            .filter(|&o| o <= MAX_ORDER)
            .ok_or_else(|| Error::InvalidField(format!("GF({q}^{m}) exceeds 2^63 elements")))?;
    }
    Ok(order)
}

pub(crate) fn is_prime(q: u64) -> bool {
    if q < 2 {
        return false;
    }
    let mut d = 2u64;
    while d.saturating_mul(d) <= q {
        if q.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

#[inline]
fn add_mod(a: u64, b: u64, q: u64) -> u64 {
    let (s, overflow) = a.overflowing_add(b);
    if overflow || s >= q {
        s.wrapping_sub(q)
    } else {
        s
    }
}

#[inline]
fn sub_mod(a: u64, b: u64, q: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        a + (q - b)
    }
}

#[inline]
fn mul_mod(a: u64, b: u64, q: u64) -> u64 {
    ((a as u128 * b as u128) % q as u128) as u64
}

fn pow_mod(mut a: u64, mut e: u64, q: u64) -> u64 {
    let mut acc = 1 % q;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, a, q);
        }
        a = mul_mod(a, a, q);
        e >>= 1;
    }
    acc
}

fn inv_mod(a: u64, q: u64) -> u64 {
    pow_mod(a, q - 2, q)
}

// Dense polynomials over Z_q, low-order coefficient first, trimmed so that the
// last entry is nonzero (the zero polynomial is empty).

fn trim(mut p: Vec<u64>) -> Vec<u64> {
    while p.last() == Some(&0) {
        p.pop();
    }
    p
}

fn poly_sub(a: &[u64], b: &[u64], q: u64) -> Vec<u64> {
    let n = a.len().max(b.len());
    let out = (0..n)
        .map(|i| {
            sub_mod(
                a.get(i).copied().unwrap_or(0),
                b.get(i).copied().unwrap_or(0),
                q,
            )
        })
        .collect();
    trim(out)
}

fn poly_mul(a: &[u64], b: &[u64], q: u64) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = add_mod(out[i + j], mul_mod(x, y, q), q);
        }
    }
    trim(out)
}

/// Returns (quotient, remainder). `b` must be nonzero.
fn poly_divrem(a: &[u64], b: &[u64], q: u64) -> (Vec<u64>, Vec<u64>) {
    let b = trim(b.to_vec());
    let mut rem = trim(a.to_vec());
    if rem.len() < b.len() {
        return (Vec::new(), rem);
    }
    let lead_inv = inv_mod(*b.last().unwrap(), q);
    let mut quot = vec![0u64; rem.len() - b.len() + 1];
    while rem.len() >= b.len() && !rem.is_empty() {
        let shift = rem.len() - b.len();
        let c = mul_mod(*rem.last().unwrap(), lead_inv, q);
        quot[shift] = c;
        for (j, &bj) in b.iter().enumerate() {
            rem[shift + j] = sub_mod(rem[shift + j], mul_mod(c, bj, q), q);
        }
        rem = trim(rem);
    }
    (trim(quot), rem)
}

fn poly_mulmod(a: &[u64], b: &[u64], f: &[u64], q: u64) -> Vec<u64> {
    poly_divrem(&poly_mul(a, b, q), f, q).1
}

fn poly_powmod(a: &[u64], mut e: u64, f: &[u64], q: u64) -> Vec<u64> {
    let mut base = poly_divrem(a, f, q).1;
    let mut acc = vec![1u64];
    while e > 0 {
        if e & 1 == 1 {
            acc = poly_mulmod(&acc, &base, f, q);
        }
        base = poly_mulmod(&base, &base, f, q);
        e >>= 1;
    }
    acc
}

fn poly_gcd(a: &[u64], b: &[u64], q: u64) -> Vec<u64> {
    let (mut a, mut b) = (trim(a.to_vec()), trim(b.to_vec()));
    while !b.is_empty() {
        let r = poly_divrem(&a, &b, q).1;
        a = b;
        b = r;
    }
    a
}

/// Inverse of `a` modulo the irreducible `f`, or `None` when gcd(a, f) != 1.
fn poly_inverse(a: &[u64], f: &[u64], q: u64) -> Option<Vec<u64>> {
    let (mut r0, mut r1) = (trim(f.to_vec()), poly_divrem(a, f, q).1);
    let (mut s0, mut s1): (Vec<u64>, Vec<u64>) = (Vec::new(), vec![1]);
    while !r1.is_empty() {
        let (quot, rem) = poly_divrem(&r0, &r1, q);
        let s2 = poly_sub(&s0, &poly_mul(&quot, &s1, q), q);
        r0 = std::mem::replace(&mut r1, rem);
        s0 = std::mem::replace(&mut s1, s2);
    }
    if r0.len() != 1 {
        return None;
    }
    let c = inv_mod(r0[0], q);
    let inv: Vec<u64> = s0.iter().map(|&s| mul_mod(s, c, q)).collect();
    Some(poly_divrem(&inv, f, q).1)
}

/// Ben-Or irreducibility test: `f` of degree m is irreducible over Z_q iff
/// gcd(x^(q^i) - x, f) = 1 for every i <= m / 2.
pub(crate) fn is_irreducible(f: &[u64], q: u64) -> bool {
    let f = trim(f.to_vec());
    let m = f.len().saturating_sub(1);
    if m == 0 {
        return false;
    }
    if m == 1 {
        return true;
    }
    let x = vec![0u64, 1];
    let mut h = x.clone();
    for _ in 1..=m / 2 {
        h = poly_powmod(&h, q, &f, q);
        let g = poly_gcd(&f, &poly_sub(&h, &x, q), q);
        if g.len() > 1 {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn gf9() -> FieldCtx {
        FieldCtx::with_modulus(3, 2, vec![1, 0, 1]).unwrap()
    }

    fn x9(ctx: &FieldCtx) -> FieldElement {
        ctx.element(&[0, 1]).unwrap()
    }

    #[test]
    fn prime_field_add() {
        let f = FieldCtx::new(7, 1).unwrap();
        assert_eq!(f.add(FieldElement(3), FieldElement(5)), FieldElement(1));
        for a in f.enumerate().unwrap() {
            assert_eq!(f.add(a, f.zero()), a);
        }
    }

    #[test]
    fn extension_add_cancels() {
        let f = gf9();
        let x = x9(&f);
        let two_x = f.element(&[0, 2]).unwrap();
        assert_eq!(f.add(x, two_x), f.zero());
    }

    #[test]
    fn mul_examples() {
        let f7 = FieldCtx::new(7, 1).unwrap();
        assert_eq!(f7.mul(FieldElement(3), FieldElement(5)), FieldElement(1));
        let f = gf9();
        let x = x9(&f);
        assert_eq!(f.mul(x, x), FieldElement(2));
        for a in f.enumerate().unwrap() {
            assert_eq!(f.mul(a, f.zero()), f.zero());
        }
    }

    #[test]
    fn inv_examples() {
        let f7 = FieldCtx::new(7, 1).unwrap();
        assert_eq!(f7.inv(FieldElement(3)).unwrap(), FieldElement(5));
        assert_eq!(f7.inv(f7.one()).unwrap(), f7.one());
        assert!(matches!(f7.inv(f7.zero()), Err(Error::DivisionByZero)));
        let f = gf9();
        let x = x9(&f);
        assert_eq!(f.inv(x).unwrap(), f.element(&[0, 2]).unwrap());
    }

    #[test]
    fn pow_examples() {
        let f7 = FieldCtx::new(7, 1).unwrap();
        assert_eq!(f7.pow(FieldElement(3), 2), FieldElement(2));
        assert_eq!(f7.pow(FieldElement(3), 6), FieldElement(1));
        let mut acc = f7.one();
        for _ in 0..6 {
            acc = f7.mul(acc, FieldElement(3));
        }
        assert_eq!(acc, f7.one());
        for a in f7.enumerate().unwrap() {
            assert_eq!(f7.pow(a, 0), f7.one());
        }
    }

    #[test]
    fn enumerate_order() {
        let f3 = FieldCtx::new(3, 1).unwrap();
        assert_eq!(
            f3.enumerate().unwrap(),
            vec![FieldElement(0), FieldElement(1), FieldElement(2)]
        );
        let f4 = FieldCtx::new(2, 2).unwrap();
        let all = f4.enumerate().unwrap();
        assert_eq!(all.len(), 4);
        assert_eq!(&all[..2], &[f4.zero(), f4.one()]);
        let f7 = FieldCtx::new(7, 1).unwrap();
        let all = f7.enumerate().unwrap();
        let mut dedup = all.clone();
        dedup.dedup();
        assert_eq!(dedup.len(), 7);
    }

    #[test]
    fn enumerate_cap() {
        let f = FieldCtx::new(13, 4).unwrap();
        assert!(matches!(f.enumerate_capped(1000), Err(Error::Capacity(_))));
    }

    #[test]
    fn sample_determinism_and_nonzero() {
        let f = FieldCtx::new(3, 1).unwrap();
        let a = f.sample(&mut ChaCha20Rng::seed_from_u64(9), false);
        let b = f.sample(&mut ChaCha20Rng::seed_from_u64(9), false);
        assert_eq!(a, b);
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        for _ in 0..10_000 {
            assert!(!f.sample(&mut rng, true).is_zero());
        }
    }

    #[test]
    fn sample_is_roughly_uniform() {
        let f = FieldCtx::new(3, 1).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(2024);
        let draws = 30_000;
        let mut counts = [0u64; 3];
        for _ in 0..draws {
            counts[f.sample(&mut rng, false).index() as usize] += 1;
        }
        let expected = draws as f64 / 3.0;
        let chi2: f64 = counts
            .iter()
            .map(|&c| (c as f64 - expected).powi(2) / expected)
            .sum();
        // 2 degrees of freedom, p = 0.001 critical value.
        assert!(chi2 < 13.82, "chi-square {chi2}");
        for c in counts {
            assert!((c as f64 - expected).abs() / expected < 0.05);
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(FieldCtx::new(9, 1).is_err());
        assert!(FieldCtx::new(1, 1).is_err());
        // x^2 + 2 = (x + 1)(x + 2) over Z_3
        assert!(FieldCtx::with_modulus(3, 2, vec![2, 0, 1]).is_err());
        assert!(FieldCtx::with_modulus(3, 2, vec![1, 0, 2]).is_err());
        assert!(FieldCtx::new(17, 3).is_err());
        assert!(FieldCtx::new(2, 63).is_err());
        let f = FieldCtx::new(7, 1).unwrap();
        assert!(matches!(
            f.checked_add(FieldElement(3), FieldElement(7)),
            Err(Error::ForeignElement { .. })
        ));
    }

    #[test]
    fn coefficient_round_trip() {
        let f = FieldCtx::new(5, 3).unwrap();
        for a in f.enumerate().unwrap() {
            assert_eq!(f.element(&f.coeffs(a)).unwrap(), a);
        }
    }

    /// Schoolbook product of coefficient vectors reduced by the monic modulus.
    fn naive_mul(a: &[u64], b: &[u64], modulus: &[u64], q: u64) -> Vec<u64> {
        let m = modulus.len() - 1;
        let mut prod = vec![0u64; 2 * m];
        for (i, &x) in a.iter().enumerate() {
            for (j, &y) in b.iter().enumerate() {
                prod[i + j] = (prod[i + j] + x * y) % q;
            }
        }
        for d in (m..prod.len()).rev() {
            let lead = prod[d];
            for (i, &c) in modulus.iter().enumerate() {
                prod[d - m + i] = (prod[d - m + i] + q * q - lead * c % q) % q;
            }
        }
        prod.truncate(m);
        prod
    }

    /// Remainder of `f` modulo monic `g`, both low-first.
    fn naive_rem(f: &[u64], g: &[u64], q: u64) -> Vec<u64> {
        let mut r = f.to_vec();
        let dg = g.len() - 1;
        while r.len() > dg {
            let lead = *r.last().unwrap();
            let shift = r.len() - 1 - dg;
            for (i, &c) in g.iter().enumerate() {
                r[shift + i] = (r[shift + i] + q * q - lead * c % q) % q;
            }
            r.pop();
        }
        r
    }

    fn monic_polys(q: u64, degree: usize) -> Vec<Vec<u64>> {
        (0..q.pow(degree as u32))
            .map(|mut i| {
                let mut p: Vec<u64> = (0..degree)
                    .map(|_| {
                        let d = i % q;
                        i /= q;
                        d
                    })
                    .collect();
                p.push(1);
                p
            })
            .collect()
    }

    #[test]
    fn irreducibility_matches_factor_search() {
        for q in [2u64, 3, 5] {
            for degree in 1..=4usize {
                for f in monic_polys(q, degree) {
                    let has_factor = (1..=degree / 2).any(|d| {
                        monic_polys(q, d)
                            .iter()
                            .any(|g| naive_rem(&f, g, q).iter().all(|&c| c == 0))
                    });
                    assert_eq!(is_irreducible(&f, q), !has_factor, "q={q} f={f:?}");
                }
            }
        }
    }

    #[test]
    fn field_axioms_exhaustive() {
        for (q, m) in [(2u64, 1usize), (5, 1), (2, 2), (2, 3), (3, 2)] {
            let f = FieldCtx::new(q, m).unwrap();
            let all = f.enumerate().unwrap();
            for &a in &all {
                assert_eq!(f.add(a, f.zero()), a);
                assert_eq!(f.mul(a, f.one()), a);
                assert!(f.add(a, f.neg(a)).is_zero());
                for &b in &all {
                    assert_eq!(f.add(a, b), f.add(b, a));
                    assert_eq!(f.mul(a, b), f.mul(b, a));
                    let want = naive_mul(&f.coeffs(a), &f.coeffs(b), f.modulus(), q);
                    assert_eq!(f.coeffs(f.mul(a, b)), want);
                    for &c in &all {
                        assert_eq!(f.add(f.add(a, b), c), f.add(a, f.add(b, c)));
                        assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
                        assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
                    }
                }
            }
        }
    }

    #[test]
    fn inverse_matches_search() {
        for (q, m) in [(7u64, 1usize), (11, 1), (3, 3), (2, 4), (13, 2)] {
            let f = FieldCtx::new(q, m).unwrap();
            let nonzero = f.nonzero_elements().unwrap();
            for &a in &nonzero {
                let found = nonzero.iter().copied().find(|&b| f.mul(a, b) == f.one());
                assert_eq!(Some(f.inv(a).unwrap()), found);
            }
        }
    }

    #[test]
    fn multiplicative_group_order() {
        // every nonzero element satisfies a^(Q-1) = 1
        for (q, m) in [(3u64, 4usize), (11, 2), (2, 4)] {
            let f = FieldCtx::new(q, m).unwrap();
            for a in f.nonzero_elements().unwrap() {
                assert_eq!(f.pow(a, f.order() - 1), f.one());
            }
        }
    }
}
