//! Sparse exterior algebra over the complex rationals.
//!
//! A basis monomial is a set of generators, stored as a `u128` bitmask and
//! always kept in ascending generator order; products reorder by counting
//! transpositions.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::GhostError;
use crate::phasespace::{Coeff, EvalRing};

/// Complex number with exact rational parts.
pub type CRational = Complex<BigRational>;

/// Largest supported number of generators.
pub const MAX_GENERATORS: u32 = 128;

pub fn c_real(r: BigRational) -> CRational {
    Complex::new(r, BigRational::zero())
}

pub fn c_int(n: i64) -> CRational {
    c_real(BigRational::from_integer(BigInt::from(n)))
}

/// The imaginary unit.
pub fn c_i() -> CRational {
    Complex::new(BigRational::zero(), BigRational::one())
}

/// An element of the exterior algebra on `generators` generators.
///
/// Elements built without reference to an algebra (scalars from
/// [`EvalRing`]) carry `generators == 0` and combine with any algebra.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GrassmannElement {
    generators: u32,
    terms: BTreeMap<u128, CRational>,
}

/// Sign of `mono(a) · mono(b)` brought to ascending order; `None` when the
/// monomials share a generator.
fn merge_sign(a: u128, b: u128) -> Option<bool> {
    if a & b != 0 {
        return None;
    }
    let mut swaps = 0u32;
    let mut rest = b;
    while rest != 0 {
        let j = rest.trailing_zeros();
        rest &= rest - 1;
        swaps += if j == 127 { 0 } else { (a >> (j + 1)).count_ones() };
    }
    Some(swaps % 2 == 1)
}

impl GrassmannElement {
    pub fn zero(generators: u32) -> Self {
        assert!(generators <= MAX_GENERATORS, "at most {MAX_GENERATORS} generators");
        Self { generators, terms: BTreeMap::new() }
    }

    pub fn scalar(generators: u32, c: CRational) -> Self {
        let mut e = Self::zero(generators);
        if !c.is_zero() {
            e.terms.insert(0, c);
        }
        e
    }

    pub fn one(generators: u32) -> Self {
        Self::scalar(generators, c_int(1))
    }

    /// The generator `g_index`.
    pub fn generator(generators: u32, index: u32) -> Self {
        assert!(index < generators, "generator {index} outside algebra of size {generators}");
        let mut e = Self::zero(generators);
        e.terms.insert(1u128 << index, c_int(1));
        e
    }

    pub fn generators(&self) -> u32 {
        self.generators
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (u128, &CRational)> {
        self.terms.iter().map(|(&m, c)| (m, c))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, mask: u128) -> CRational {
        self.terms.get(&mask).cloned().unwrap_or_else(Complex::zero)
    }

    /// The coefficient of the empty monomial.
    pub fn body(&self) -> CRational {
        self.coefficient(0)
    }

    /// True when every monomial has even degree.
    pub fn is_even(&self) -> bool {
        self.terms.keys().all(|m| m.count_ones() % 2 == 0)
    }

    /// Highest monomial degree present (0 for scalars and zero).
    pub fn max_degree(&self) -> u32 {
        self.terms.keys().map(|m| m.count_ones()).max().unwrap_or(0)
    }

    fn algebra_with(&self, other: &Self) -> Result<u32, GhostError> {
        match (self.generators, other.generators) {
            (a, b) if a == b => Ok(a),
            (0, b) if self.terms.keys().all(|&m| m == 0) => Ok(b),
            (a, 0) if other.terms.keys().all(|&m| m == 0) => Ok(a),
            (a, b) => Err(GhostError::MismatchedAlgebra(a, b)),
        }
    }

    fn insert(&mut self, mask: u128, c: CRational) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(mask).or_insert_with(Complex::zero);
        *slot = &*slot + &c;
        if slot.is_zero() {
            self.terms.remove(&mask);
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self, GhostError> {
        let mut out = Self { generators: self.algebra_with(other)?, terms: self.terms.clone() };
        for (&m, c) in &other.terms {
            out.insert(m, c.clone());
        }
        Ok(out)
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self, GhostError> {
        let mut out = Self::zero(self.algebra_with(other)?);
        for (&ma, ca) in &self.terms {
            for (&mb, cb) in &other.terms {
                if let Some(negative) = merge_sign(ma, mb) {
                    let c = ca * cb;
                    out.insert(ma | mb, if negative { -c } else { c });
                }
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: &CRational) -> Self {
        let mut out = Self::zero(self.generators);
        for (&m, v) in &self.terms {
            out.insert(m, v * c);
        }
        out
    }

    /// Berezin integral `∫ dθ̄ dθ`, normalised so that `∫ dθ̄ dθ θ̄θ = 1`.
    pub fn berezin(&self, theta_bar: u32, theta: u32) -> Self {
        assert_ne!(theta_bar, theta, "distinct integration generators");
        let pair_mask = (1u128 << theta_bar) | (1u128 << theta);
        let pair_negative = theta_bar > theta;
        let mut out = Self::zero(self.generators);
        for (&m, c) in &self.terms {
            if m & pair_mask != pair_mask {
                continue;
            }
            let rest = m & !pair_mask;
            // θ̄θ·rest in ascending order equals ±m; read off the coefficient of θ̄θ·rest.
            let negative = merge_sign(pair_mask, rest).expect("disjoint") ^ pair_negative;
            out.insert(rest, if negative { -c.clone() } else { c.clone() });
        }
        out
    }
}

impl EvalRing for GrassmannElement {
    fn zero() -> Self {
        Self::zero(0)
    }
    fn one() -> Self {
        Self::one(0)
    }
    fn add(&self, other: &Self) -> Self {
        self.try_add(other).expect("elements of one algebra")
    }
    fn mul(&self, other: &Self) -> Self {
        self.try_mul(other).expect("elements of one algebra")
    }
    fn from_coeff(c: &Coeff) -> Option<Self> {
        c.as_rational().map(|r| Self::scalar(0, c_real(r.clone())))
    }
}

/// Panics when the operands belong to different algebras; use
/// [`GrassmannElement::try_add`] for a fallible variant.
impl Add for &GrassmannElement {
    type Output = GrassmannElement;
    fn add(self, rhs: Self) -> GrassmannElement {
        self.try_add(rhs).expect("elements of one algebra")
    }
}

impl Sub for &GrassmannElement {
    type Output = GrassmannElement;
    fn sub(self, rhs: Self) -> GrassmannElement {
        self.try_add(&-rhs).expect("elements of one algebra")
    }
}

/// Panics when the operands belong to different algebras; use
/// [`GrassmannElement::try_mul`] for a fallible variant.
impl Mul for &GrassmannElement {
    type Output = GrassmannElement;
    fn mul(self, rhs: Self) -> GrassmannElement {
        self.try_mul(rhs).expect("elements of one algebra")
    }
}

impl Neg for &GrassmannElement {
    type Output = GrassmannElement;
    fn neg(self) -> GrassmannElement {
        GrassmannElement {
            generators: self.generators,
            terms: self.terms.iter().map(|(&m, c)| (m, -c.clone())).collect(),
        }
    }
}

fn fmt_complex(c: &CRational) -> String {
    match (c.re.is_zero(), c.im.is_zero()) {
        (_, true) => c.re.to_string(),
        (true, false) => format!("{}i", c.im),
        (false, false) => format!("({} + {}i)", c.re, c.im),
    }
}

impl fmt::Display for GrassmannElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(&m, c)| {
                let gens: Vec<String> = (0..128).filter(|i| m >> i & 1 == 1).map(|i| format!("g{i}")).collect();
                if gens.is_empty() {
                    fmt_complex(c)
                } else {
                    format!("{}*{}", fmt_complex(c), gens.join("*"))
                }
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}
