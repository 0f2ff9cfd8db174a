//! Arithmetic in GF(2^k), `1 <= k <= 24`.
//!
//! Elements are bitmasks of polynomials over GF(2) reduced modulo the
//! lexicographically smallest irreducible polynomial of degree `k`. The hot
//! paths (Gaussian elimination in the Nichols engine) work on raw `u32`
//! masks through a [`Field`] context; [`FieldElement`] is the typed value
//! used at API boundaries.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest supported extension degree.
pub const MAX_K: u32 = 24;

/// Fields up to this size get log/antilog tables.
const TABLE_MAX_K: u32 = 16;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("extension degree {0} is outside 1..=24")]
    DegreeOutOfRange(u32),
    #[error("attempted to invert zero")]
    ZeroInverse,
    #[error("operands live in different fields ({0} vs {1})")]
    Mismatch(FieldSpec, FieldSpec),
    #[error("GF(2^{k}) has no element of order {order}")]
    NoSuchOrder { order: u64, k: u32 },
    #[error("mask {mask} does not fit in GF(2^{k})")]
    MaskOutOfRange { mask: u64, k: u32 },
    #[error("multiplicative orders in characteristic 2 are odd and positive, got {0}")]
    InvalidOrder(u64),
    #[error("modulus {modulus:#b} is not irreducible of degree {k}")]
    Reducible { modulus: u32, k: u32 },
    #[error("cannot parse field element `{0}` (expected int:<mask> or ord:<M>)")]
    Parse(String),
}

/// Extension degree and defining polynomial of a finite field of characteristic 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FieldSpec {
    pub k: u32,
    #[serde(rename = "modulus_mask")]
    pub modulus: u32,
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF(2^{}) mod {:#b}", self.k, self.modulus)
    }
}

impl FieldSpec {
    /// The field with the lexicographically smallest irreducible modulus of degree `k`.
    pub fn new(k: u32) -> Result<Self, FieldError> {
        if !(1..=MAX_K).contains(&k) {
            return Err(FieldError::DegreeOutOfRange(k));
        }
        let modulus = ((1u32 << k)..(1u32 << (k + 1)))
            .find(|&m| is_irreducible(m))
            .expect("irreducible polynomials exist in every degree");
        Ok(FieldSpec { k, modulus })
    }

    /// Validates a user-supplied modulus.
    pub fn with_modulus(k: u32, modulus: u32) -> Result<Self, FieldError> {
        if !(1..=MAX_K).contains(&k) {
            return Err(FieldError::DegreeOutOfRange(k));
        }
        if poly_degree(modulus) != Some(k) || !is_irreducible(modulus) {
            return Err(FieldError::Reducible { modulus, k });
        }
        Ok(FieldSpec { k, modulus })
    }

    pub fn size(&self) -> u64 {
        1u64 << self.k
    }

    /// Order of the multiplicative group, `2^k - 1` (always odd).
    pub fn group_order(&self) -> u64 {
        self.size() - 1
    }

    fn mul_slow(&self, a: u32, b: u32) -> u32 {
        clmul_mod(a, b, self.k, self.modulus)
    }
}

/// Degree of a nonzero polynomial given as a bitmask.
pub fn poly_degree(mask: u32) -> Option<u32> {
    if mask == 0 {
        None
    } else {
        Some(31 - mask.leading_zeros())
    }
}

fn poly_rem(mut a: u32, b: u32) -> u32 {
    let db = poly_degree(b).expect("division by the zero polynomial");
    while let Some(da) = poly_degree(a) {
        if da < db {
            break;
        }
        a ^= b << (da - db);
    }
    a
}

/// Trial division by every polynomial of degree at most half the degree of `mask`.
pub fn is_irreducible(mask: u32) -> bool {
    let Some(d) = poly_degree(mask) else {
        return false;
    };
    if d == 0 {
        return false;
    }
    for dd in 1..=d / 2 {
        for p in (1u32 << dd)..(1u32 << (dd + 1)) {
            if poly_rem(mask, p) == 0 {
                return false;
            }
        }
    }
    true
}

fn clmul_mod(mut a: u32, mut b: u32, k: u32, modulus: u32) -> u32 {
    let top = 1u32 << k;
    let mut r = 0u32;
    while b != 0 {
        if b & 1 == 1 {
            r ^= a;
        }
        b >>= 1;
        a <<= 1;
        if a & top != 0 {
            a ^= modulus;
        }
    }
    r
}

/// Prime factors of `n` (without multiplicity), ascending.
pub(crate) fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= n {
        if n % p == 0 {
            out.push(p);
            while n % p == 0 {
                n /= p;
            }
        }
        p += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

pub(crate) fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub fn lcm(a: u64, b: u64) -> u64 {
    if a == 0 || b == 0 {
        0
    } else {
        a / gcd(a, b) * b
    }
}

/// Least `k` with `order | 2^k - 1`, i.e. the multiplicative order of 2 modulo `order`.
pub fn smallest_k_containing_order(order: u64) -> Result<u32, FieldError> {
    if order == 0 || order % 2 == 0 {
        return Err(FieldError::InvalidOrder(order));
    }
    if order == 1 {
        return Ok(1);
    }
    let mut r = 2 % order;
    let mut k = 1u32;
    while r != 1 {
        r = r * 2 % order;
        k += 1;
    }
    Ok(k)
}

const FULL_TABLE_MAX_K: u32 = 8;

struct LogTables {
    log: Vec<u32>,
    exp: Vec<u32>,
    /// complete product table `full[a * size + b]` for small fields
    full: Option<Vec<u32>>,
}

/// Arithmetic context for one fixed GF(2^k). Cheap to clone.
#[derive(Clone)]
pub struct Field {
    spec: FieldSpec,
    tables: Option<Arc<LogTables>>,
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Field").field("spec", &self.spec).finish()
    }
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        self.spec == other.spec
    }
}

impl Eq for Field {}

impl Field {
    pub fn new(k: u32) -> Result<Self, FieldError> {
        Ok(Self::from_spec(FieldSpec::new(k)?))
    }

    pub fn gf2() -> Self {
        Self::new(1).expect("k = 1 is valid")
    }

    pub fn from_spec(spec: FieldSpec) -> Self {
        let mut field = Field { spec, tables: None };
        if spec.k <= TABLE_MAX_K {
            let q1 = spec.group_order() as usize;
            let g = field.primitive_element();
            let mut exp = vec![0u32; 2 * q1.max(1)];
            let mut log = vec![0u32; spec.size() as usize];
            let mut x = 1u32;
            for i in 0..q1 {
                exp[i] = x;
                exp[i + q1] = x;
                log[x as usize] = i as u32;
                x = spec.mul_slow(x, g);
            }
            let full = (spec.k <= FULL_TABLE_MAX_K).then(|| {
                let n = spec.size() as usize;
                let mut full = vec![0u32; n * n];
                for a in 1..n {
                    for b in 1..n {
                        full[a * n + b] = exp[(log[a] + log[b]) as usize];
                    }
                }
                full
            });
            field.tables = Some(Arc::new(LogTables { log, exp, full }));
        }
        field
    }

    pub fn spec(&self) -> FieldSpec {
        self.spec
    }

    pub fn k(&self) -> u32 {
        self.spec.k
    }

    pub fn size(&self) -> u64 {
        self.spec.size()
    }

    #[inline]
    pub fn zero(&self) -> u32 {
        0
    }

    #[inline]
    pub fn one(&self) -> u32 {
        1
    }

    #[inline]
    pub fn add(&self, a: u32, b: u32) -> u32 {
        a ^ b
    }

    #[inline]
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        if a == 0 || b == 0 {
            return 0;
        }
        if a == 1 {
            return b;
        }
        if b == 1 {
            return a;
        }
        match &self.tables {
            Some(t) => t.exp[(t.log[a as usize] + t.log[b as usize]) as usize],
            None => self.spec.mul_slow(a, b),
        }
    }

    /// Products `c * b` for every `b`, indexed by `b`, when the field is small.
    #[inline]
    pub(crate) fn mul_row(&self, c: u32) -> Option<&[u32]> {
        let t = self.tables.as_ref()?;
        let full = t.full.as_ref()?;
        let n = self.spec.size() as usize;
        Some(&full[c as usize * n..(c as usize + 1) * n])
    }

    pub fn inv(&self, a: u32) -> Result<u32, FieldError> {
        if a == 0 {
            return Err(FieldError::ZeroInverse);
        }
        Ok(self.inv_nonzero(a))
    }

    #[inline]
    pub(crate) fn inv_nonzero(&self, a: u32) -> u32 {
        debug_assert!(a != 0);
        match &self.tables {
            Some(t) => {
                let q1 = self.spec.group_order() as u32;
                let l = t.log[a as usize];
                t.exp[((q1 - l) % q1) as usize]
            }
            None => self.pow(a, self.spec.group_order() - 1),
        }
    }

    pub fn pow(&self, a: u32, mut e: u64) -> u32 {
        let mut base = a;
        let mut acc = 1u32;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// `a^e` for a possibly negative exponent; `a` must be nonzero when `e < 0`.
    pub fn pow_signed(&self, a: u32, e: i64) -> u32 {
        if e >= 0 {
            self.pow(a, e as u64)
        } else {
            self.pow(self.inv_nonzero(a), e.unsigned_abs())
        }
    }

    pub fn contains(&self, mask: u32) -> bool {
        (mask as u64) < self.size()
    }

    /// Multiplicative order of a nonzero element.
    pub fn order(&self, a: u32) -> Result<u64, FieldError> {
        if a == 0 {
            return Err(FieldError::ZeroInverse);
        }
        let mut n = self.spec.group_order();
        for p in prime_factors(n) {
            while n % p == 0 && self.pow(a, n / p) == 1 {
                n /= p;
            }
        }
        Ok(n)
    }

    fn primitive_element(&self) -> u32 {
        let n = self.spec.group_order();
        if n == 1 {
            return 1;
        }
        let primes = prime_factors(n);
        (2..self.size() as u32)
            .find(|&g| primes.iter().all(|&p| pow_slow(&self.spec, g, n / p) != 1))
            .expect("the multiplicative group of a finite field is cyclic")
    }

    /// The element of exact multiplicative order `order` with the smallest mask.
    pub fn element_of_order(&self, order: u64) -> Result<u32, FieldError> {
        let n = self.spec.group_order();
        if order == 0 || n % order != 0 {
            return Err(FieldError::NoSuchOrder { order, k: self.spec.k });
        }
        let g = self.primitive_element();
        let h = self.pow(g, n / order);
        // the elements of order `order` are exactly h^j with gcd(j, order) = 1
        let mut best = u32::MAX;
        let mut x = 1u32;
        for j in 0..order {
            if gcd(j, order) == 1 {
                best = best.min(x);
            }
            x = self.mul(x, h);
        }
        Ok(best)
    }

    pub fn element(&self, mask: u32) -> Result<FieldElement, FieldError> {
        FieldElement::new(self.spec, mask)
    }

    /// Parses `int:<mask>` or `ord:<M>`.
    pub fn parse_element(&self, text: &str) -> Result<FieldElement, FieldError> {
        match text.trim().parse::<ElementCode>()? {
            ElementCode::Mask(m) => {
                let mask = u32::try_from(m)
                    .ok()
                    .filter(|&m| self.contains(m))
                    .ok_or(FieldError::MaskOutOfRange { mask: m, k: self.k() })?;
                self.element(mask)
            }
            ElementCode::Order(m) => {
                let mask = self.element_of_order(m)?;
                self.element(mask)
            }
        }
    }
}

fn pow_slow(spec: &FieldSpec, a: u32, mut e: u64) -> u32 {
    let mut base = a;
    let mut acc = 1u32;
    while e > 0 {
        if e & 1 == 1 {
            acc = spec.mul_slow(acc, base);
        }
        base = spec.mul_slow(base, base);
        e >>= 1;
    }
    acc
}

/// Field-independent text code of an element: `int:<mask>` or `ord:<M>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElementCode {
    Mask(u64),
    Order(u64),
}

impl FromStr for ElementCode {
    type Err = FieldError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let err = || FieldError::Parse(s.to_string());
        if let Some(rest) = s.strip_prefix("int:") {
            rest.parse().map(ElementCode::Mask).map_err(|_| err())
        } else if let Some(rest) = s.strip_prefix("ord:") {
            rest.parse().map(ElementCode::Order).map_err(|_| err())
        } else {
            Err(err())
        }
    }
}

impl fmt::Display for ElementCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ElementCode::Mask(m) => write!(f, "int:{m}"),
            ElementCode::Order(m) => write!(f, "ord:{m}"),
        }
    }
}

/// An element of GF(2^k) tagged with its field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldElement {
    mask: u32,
    spec: FieldSpec,
}

impl FieldElement {
    pub fn new(spec: FieldSpec, mask: u32) -> Result<Self, FieldError> {
        if (mask as u64) >= spec.size() {
            return Err(FieldError::MaskOutOfRange { mask: mask as u64, k: spec.k });
        }
        Ok(FieldElement { mask, spec })
    }

    pub fn zero(spec: FieldSpec) -> Self {
        FieldElement { mask: 0, spec }
    }

    pub fn one(spec: FieldSpec) -> Self {
        FieldElement { mask: 1, spec }
    }

    pub fn mask(&self) -> u32 {
        self.mask
    }

    pub fn spec(&self) -> FieldSpec {
        self.spec
    }

    pub fn is_zero(&self) -> bool {
        self.mask == 0
    }

    fn same_field(&self, other: &Self) -> Result<(), FieldError> {
        if self.spec != other.spec {
            return Err(FieldError::Mismatch(self.spec, other.spec));
        }
        Ok(())
    }

    pub fn checked_add(self, other: Self) -> Result<Self, FieldError> {
        self.same_field(&other)?;
        Ok(FieldElement { mask: self.mask ^ other.mask, spec: self.spec })
    }

    pub fn checked_mul(self, other: Self) -> Result<Self, FieldError> {
        self.same_field(&other)?;
        Ok(FieldElement { mask: self.spec.mul_slow(self.mask, other.mask), spec: self.spec })
    }

    pub fn inv(self) -> Result<Self, FieldError> {
        if self.mask == 0 {
            return Err(FieldError::ZeroInverse);
        }
        Ok(self.pow(self.spec.group_order() - 1))
    }

    pub fn pow(self, e: u64) -> Self {
        FieldElement { mask: pow_slow(&self.spec, self.mask, e), spec: self.spec }
    }

    /// Frobenius `e -> e^2`.
    pub fn square(self) -> Self {
        self.pow(2)
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "int:{}", self.mask)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Independent irreducibility oracle: a degree-k polynomial is irreducible
    /// iff it has no root-free factorisation, checked by multiplying every pair
    /// of lower-degree polynomials.
    fn reducible_by_products(mask: u32) -> bool {
        let d = poly_degree(mask).unwrap();
        let plain_mul = |a: u32, b: u32| {
            let mut r = 0u32;
            for i in 0..16 {
                if (b >> i) & 1 == 1 {
                    r ^= a << i;
                }
            }
            r
        };
        for a in 2u32..(1 << d) {
            for b in 2u32..(1 << d) {
                if plain_mul(a, b) == mask {
                    return true;
                }
            }
        }
        false
    }

    #[test]
    fn smallest_moduli() {
        assert_eq!(FieldSpec::new(1).unwrap().modulus, 0b10);
        for k in 2..=5 {
            let expected = ((1u32 << k)..(1u32 << (k + 1)))
                .find(|&m| !reducible_by_products(m))
                .unwrap();
            assert_eq!(FieldSpec::new(k).unwrap().modulus, expected, "k = {k}");
        }
        assert_eq!(FieldSpec::new(2).unwrap().modulus, 0b111);
        assert_eq!(FieldSpec::new(3).unwrap().modulus, 0b1011);
    }

    #[test]
    fn degree_range() {
        assert_eq!(FieldSpec::new(0), Err(FieldError::DegreeOutOfRange(0)));
        assert_eq!(FieldSpec::new(25), Err(FieldError::DegreeOutOfRange(25)));
        assert!(FieldSpec::new(24).is_ok());
    }

    #[test]
    fn gf4_examples() {
        let f = Field::new(2).unwrap();
        let x = f.element(0b10).unwrap();
        assert!(x.checked_add(x).unwrap().is_zero());
        assert_eq!(x.checked_mul(x).unwrap().mask(), 0b11);
        assert_eq!(f.mul(0b10, 0b10), 0b11);
        let g2 = Field::gf2();
        assert_eq!(g2.inv(1), Ok(1));
        assert_eq!(g2.inv(0), Err(FieldError::ZeroInverse));
    }

    #[test]
    fn mismatch_is_reported() {
        let a = Field::new(2).unwrap().element(1).unwrap();
        let b = Field::new(3).unwrap().element(1).unwrap();
        assert!(matches!(a.checked_add(b), Err(FieldError::Mismatch(..))));
        assert!(matches!(a.checked_mul(b), Err(FieldError::Mismatch(..))));
    }

    /// Orders by enumerating powers.
    fn order_by_enumeration(f: &Field, a: u32) -> u64 {
        let mut x = a;
        let mut n = 1;
        while x != 1 {
            x = f.mul(x, a);
            n += 1;
        }
        n
    }

    #[test]
    fn element_of_order_examples() {
        let gf2 = Field::gf2();
        assert_eq!(gf2.element_of_order(1), Ok(1));
        let gf4 = Field::new(2).unwrap();
        assert_eq!(gf4.element_of_order(3), Ok(0b10));
        assert_eq!(order_by_enumeration(&gf4, 0b10), 3);
        assert_eq!(gf4.element_of_order(2), Err(FieldError::NoSuchOrder { order: 2, k: 2 }));
        for k in 1..=8 {
            let f = Field::new(k).unwrap();
            let n = f.spec().group_order();
            for m in 1..=n {
                if n % m != 0 {
                    continue;
                }
                let e = f.element_of_order(m).unwrap();
                assert_eq!(order_by_enumeration(&f, e), m);
                let smallest = (1..f.size() as u32)
                    .find(|&x| order_by_enumeration(&f, x) == m)
                    .unwrap();
                assert_eq!(e, smallest);
            }
        }
    }

    #[test]
    fn smallest_k_examples() {
        assert_eq!(smallest_k_containing_order(1), Ok(1));
        assert_eq!(smallest_k_containing_order(3), Ok(2));
        assert_eq!(smallest_k_containing_order(7), Ok(3));
        assert_eq!(smallest_k_containing_order(5), Ok(4));
        assert_eq!(smallest_k_containing_order(15), Ok(4));
        assert_eq!(smallest_k_containing_order(21), Ok(6));
        assert!(smallest_k_containing_order(4).is_err());
    }

    #[test]
    fn exhaustive_axioms_small_fields() {
        for k in 1..=4 {
            let f = Field::new(k).unwrap();
            let q = f.size() as u32;
            for a in 0..q {
                assert_eq!(f.add(a, a), 0);
                if a != 0 {
                    assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
                    assert_eq!(f.pow(a, f.spec().group_order()), 1);
                    assert_eq!(f.order(a).unwrap() % 2, 1);
                }
                for b in 0..q {
                    assert_eq!(f.mul(a, b), f.mul(b, a));
                    assert_eq!(f.mul(a, b), f.spec().mul_slow(a, b));
                    for c in 0..q {
                        assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
                        assert_eq!(f.mul(a, f.mul(b, c)), f.mul(f.mul(a, b), c));
                    }
                }
            }
            // Frobenius is a bijection
            let mut squares: Vec<u32> = (0..q).map(|a| f.mul(a, a)).collect();
            squares.sort_unstable();
            assert_eq!(squares, (0..q).collect::<Vec<_>>());
        }
    }

    #[test]
    fn parse_codes() {
        let f = Field::new(2).unwrap();
        assert_eq!(f.parse_element("int:3").unwrap().mask(), 3);
        assert_eq!(f.parse_element("ord:3").unwrap().mask(), 2);
        assert!(f.parse_element("int:4").is_err());
        assert!(f.parse_element("3").is_err());
        assert!(f.parse_element("ord:5").is_err());
        assert_eq!("ord:7".parse::<ElementCode>(), Ok(ElementCode::Order(7)));
        assert_eq!(ElementCode::Mask(5).to_string(), "int:5");
    }

    proptest! {
        #[test]
        fn random_axioms(k in 5u32..=24, a in any::<u32>(), b in any::<u32>(), c in any::<u32>()) {
            let f = Field::new(k).unwrap();
            let m = (1u32 << k) - 1;
            let (a, b, c) = (a & m, b & m, c & m);
            prop_assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
            prop_assert_eq!(f.mul(a, f.mul(b, c)), f.mul(f.mul(a, b), c));
            prop_assert_eq!(f.mul(a, b), f.mul(b, a));
            // Frobenius is additive
            prop_assert_eq!(f.mul(f.add(a, b), f.add(a, b)), f.add(f.mul(a, a), f.mul(b, b)));
            if a != 0 {
                prop_assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
            }
        }

        #[test]
        fn element_of_order_is_exact(k in 1u32..=12, pick in any::<u64>()) {
            let f = Field::new(k).unwrap();
            let n = f.spec().group_order();
            let divisors: Vec<u64> = (1..=n).filter(|d| n % d == 0).collect();
            let m = divisors[(pick % divisors.len() as u64) as usize];
            let e = f.element_of_order(m).unwrap();
            prop_assert_eq!(f.pow(e, m), 1);
            for p in prime_factors(m) {
                prop_assert_ne!(f.pow(e, m / p), 1);
            }
        }
    }
}
