//! Canonical sums of `coefficient × monomial × exp(linear form)` terms.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::coeff::Coeff;
use super::PhaseSpaceError;

/// Key of one stored term: integer exponents per symbol plus the rational
/// weights of the exponential factor. Both maps omit zero entries.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TermKey {
    pub mono: BTreeMap<String, i32>,
    pub exp: BTreeMap<String, BigRational>,
}

impl TermKey {
    fn merge(&self, other: &TermKey) -> TermKey {
        let mut mono = self.mono.clone();
        for (s, e) in &other.mono {
            let slot = mono.entry(s.clone()).or_insert(0);
            *slot += e;
            if *slot == 0 {
                mono.remove(s);
            }
        }
        let mut exp = self.exp.clone();
        for (s, w) in &other.exp {
            let slot = exp.entry(s.clone()).or_insert_with(BigRational::zero);
            *slot += w;
            if slot.is_zero() {
                exp.remove(s);
            }
        }
        TermKey { mono, exp }
    }

    pub fn is_constant(&self) -> bool {
        self.mono.is_empty() && self.exp.is_empty()
    }
}

/// Exact phase-space function. Immutable value type; all operations return
/// new expressions in merged canonical form.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct SymExpr {
    terms: BTreeMap<TermKey, Coeff>,
}

impl SymExpr {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(Coeff::one())
    }

    pub fn constant(c: Coeff) -> Self {
        Self::from_term(TermKey::default(), c)
    }

    pub fn int(n: i64) -> Self {
        Self::constant(Coeff::from_int(n))
    }

    pub fn rational(num: i64, den: i64) -> Self {
        Self::constant(Coeff::from_ratio(num, den))
    }

    pub fn symbol(name: &str) -> Self {
        let mut key = TermKey::default();
        key.mono.insert(name.to_string(), 1);
        Self::from_term(key, Coeff::one())
    }

    /// `exp(Σ w_s s)` for the given rational weights.
    pub fn exp_linear(weights: BTreeMap<String, BigRational>) -> Self {
        let exp = weights.into_iter().filter(|(_, w)| !w.is_zero()).collect();
        Self::from_term(TermKey { mono: BTreeMap::new(), exp }, Coeff::one())
    }

    pub fn from_term(key: TermKey, c: Coeff) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(key, c);
        }
        Self { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&TermKey, &Coeff)> {
        self.terms.iter()
    }

    /// The value when the expression has no symbol dependence.
    pub fn as_constant(&self) -> Option<Coeff> {
        match self.terms.len() {
            0 => Some(Coeff::zero()),
            1 => {
                let (k, c) = self.terms.iter().next()?;
                k.is_constant().then(|| c.clone())
            }
            _ => None,
        }
    }

    /// Every symbol appearing anywhere in the expression.
    pub fn symbols(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for key in self.terms.keys() {
            out.extend(key.mono.keys().cloned());
            out.extend(key.exp.keys().cloned());
        }
        out
    }

    pub fn depends_on(&self, sym: &str) -> bool {
        self.terms.keys().any(|k| k.mono.contains_key(sym) || k.exp.contains_key(sym))
    }

    fn insert(&mut self, key: TermKey, c: Coeff) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&key) {
            Some(slot) => {
                *slot += &c;
                if slot.is_zero() {
                    self.terms.remove(&key);
                }
            }
            None => {
                self.terms.insert(key, c);
            }
        }
    }

    pub fn scale(&self, c: &Coeff) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Self { terms: self.terms.iter().map(|(k, v)| (k.clone(), v * c)).collect() }
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    /// Exact partial derivative.
    pub fn differentiate(&self, sym: &str) -> Self {
        let mut out = Self::zero();
        for (key, c) in &self.terms {
            if let Some(&e) = key.mono.get(sym) {
                let mut k = key.clone();
                if e == 1 {
                    k.mono.remove(sym);
                } else {
                    k.mono.insert(sym.to_string(), e - 1);
                }
                out.insert(k, c * &Coeff::from_int(e as i64));
            }
            if let Some(w) = key.exp.get(sym) {
                out.insert(key.clone(), c * &Coeff::from_rational(w.clone()));
            }
        }
        out
    }

    /// Largest power of `sym` among the terms; `None` when `sym` sits inside
    /// an exponential or carries a negative power.
    pub fn polynomial_degree(&self, sym: &str) -> Option<u32> {
        let mut deg = 0u32;
        for key in self.terms.keys() {
            if key.exp.contains_key(sym) {
                return None;
            }
            let e = key.mono.get(sym).copied().unwrap_or(0);
            if e < 0 {
                return None;
            }
            deg = deg.max(e as u32);
        }
        Some(deg)
    }

    /// Coefficients `[c₀, c₁, …]` of the expansion in powers of `sym`.
    pub fn coefficients_in(&self, sym: &str) -> Option<Vec<SymExpr>> {
        let deg = self.polynomial_degree(sym)? as usize;
        let mut out = vec![Self::zero(); deg + 1];
        for (key, c) in &self.terms {
            let e = key.mono.get(sym).copied().unwrap_or(0) as usize;
            let mut k = key.clone();
            k.mono.remove(sym);
            out[e].insert(k, c.clone());
        }
        Some(out)
    }

    /// Rational weights when the expression is a homogeneous linear form
    /// `Σ r_s s` (rational coefficients, no constant, no exponentials).
    pub fn as_linear_form(&self) -> Option<BTreeMap<String, BigRational>> {
        let mut out = BTreeMap::new();
        for (key, c) in &self.terms {
            if !key.exp.is_empty() || key.mono.len() != 1 {
                return None;
            }
            let (s, &e) = key.mono.iter().next()?;
            if e != 1 {
                return None;
            }
            out.insert(s.clone(), c.as_rational()?.clone());
        }
        Some(out)
    }

    /// Inverse of a single-term expression with no exponential part,
    /// flipping the sign of every exponent.
    pub fn invert_single_term(&self) -> Option<Self> {
        if self.terms.len() != 1 {
            return None;
        }
        let (key, c) = self.terms.iter().next()?;
        let inv = c.inverse()?;
        let mono = key.mono.iter().map(|(s, e)| (s.clone(), -e)).collect();
        let exp = key.exp.iter().map(|(s, w)| (s.clone(), -w.clone())).collect();
        Some(Self::from_term(TermKey { mono, exp }, inv))
    }

    /// Exact division by a single-term divisor. Succeeds when the quotient
    /// keeps every exponent of a symbol rejected by `allow_negative`
    /// nonnegative.
    pub fn exact_div(&self, divisor: &SymExpr, allow_negative: impl Fn(&str) -> bool) -> Option<Self> {
        let inv = divisor.invert_single_term()?;
        let q = self * &inv;
        let ok = q
            .terms
            .keys()
            .all(|k| k.mono.iter().all(|(s, &e)| e >= 0 || allow_negative(s)));
        ok.then_some(q)
    }

    /// Simultaneous substitution `s ↦ bindings[s]`.
    ///
    /// Symbols inside exponentials may only be replaced by homogeneous
    /// linear forms with rational coefficients (or zero), so the result
    /// stays in the polynomial × exp(linear) class.
    pub fn substitute(&self, bindings: &BTreeMap<String, SymExpr>) -> Result<Self, PhaseSpaceError> {
        if bindings.is_empty() {
            return Ok(self.clone());
        }
        let mut powers: HashMap<(&str, i32), SymExpr> = HashMap::new();
        let mut linear: HashMap<&str, BTreeMap<String, BigRational>> = HashMap::new();
        let mut out = Self::zero();
        for (key, c) in &self.terms {
            let mut rest = TermKey::default();
            let mut acc = Self::constant(c.clone());
            for (s, &e) in &key.mono {
                match bindings.get(s) {
                    Some(b) => {
                        if !powers.contains_key(&(s.as_str(), e)) {
                            let p = if e >= 0 {
                                b.pow(e as u32)
                            } else {
                                b.invert_single_term()
                                    .ok_or_else(|| PhaseSpaceError::NonInvertible(s.clone()))?
                                    .pow((-e) as u32)
                            };
                            powers.insert((s.as_str(), e), p);
                        }
                        acc = &acc * &powers[&(s.as_str(), e)];
                    }
                    None => {
                        rest.mono.insert(s.clone(), e);
                    }
                }
            }
            for (s, w) in &key.exp {
                match bindings.get(s) {
                    Some(b) => {
                        if !linear.contains_key(s.as_str()) {
                            let form = b
                                .as_linear_form()
                                .ok_or_else(|| PhaseSpaceError::NonAffineExponent(s.clone(), b.to_string()))?;
                            linear.insert(s.as_str(), form);
                        }
                        for (t, r) in &linear[s.as_str()] {
                            let slot = rest.exp.entry(t.clone()).or_insert_with(BigRational::zero);
                            *slot += w * r;
                        }
                    }
                    None => {
                        let slot = rest.exp.entry(s.clone()).or_insert_with(BigRational::zero);
                        *slot += w;
                    }
                }
            }
            rest.exp.retain(|_, w| !w.is_zero());
            acc = &acc * &Self::from_term(rest, Coeff::one());
            out += &acc;
        }
        Ok(out)
    }

    /// Floating-point value at a point; every symbol must be bound.
    pub fn evaluate(&self, point: &BTreeMap<String, f64>) -> Result<f64, PhaseSpaceError> {
        let lookup = |s: &String| point.get(s).copied().ok_or_else(|| PhaseSpaceError::Unbound(s.clone()));
        let mut total = 0.0;
        for (key, c) in &self.terms {
            let mut v = 1.0;
            for (s, &e) in &key.mono {
                v *= lookup(s)?.powi(e);
            }
            let mut arg = 0.0;
            for (s, w) in &key.exp {
                arg += w.to_f64().unwrap_or(f64::NAN) * lookup(s)?;
            }
            if arg != 0.0 {
                v *= arg.exp();
            }
            total += c.to_f64() * v;
        }
        Ok(total)
    }

    /// Evaluate in any commutative ring. Exponential factors are rejected.
    pub fn eval_in<R: EvalRing>(&self, value: impl Fn(&str) -> Option<R>) -> Result<R, PhaseSpaceError> {
        let mut total = R::zero();
        let mut cache: HashMap<(&str, i32), R> = HashMap::new();
        for (key, c) in &self.terms {
            if !key.exp.is_empty() {
                return Err(PhaseSpaceError::Transcendental(self.to_string()));
            }
            let mut v = R::from_coeff(c).ok_or_else(|| PhaseSpaceError::Unrepresentable(c.to_string()))?;
            for (s, &e) in &key.mono {
                if e < 0 {
                    return Err(PhaseSpaceError::NonInvertible(s.clone()));
                }
                if !cache.contains_key(&(s.as_str(), e)) {
                    let base = value(s).ok_or_else(|| PhaseSpaceError::Unbound(s.clone()))?;
                    let mut p = R::one();
                    for _ in 0..e {
                        p = p.mul(&base);
                    }
                    cache.insert((s.as_str(), e), p);
                }
                v = v.mul(&cache[&(s.as_str(), e)]);
            }
            total = total.add(&v);
        }
        Ok(total)
    }

    /// Exact value at a rational point (polynomial expressions only).
    pub fn evaluate_exact(&self, point: &BTreeMap<String, BigRational>) -> Result<Coeff, PhaseSpaceError> {
        self.eval_in(|s| point.get(s).map(|r| Coeff::from_rational(r.clone())))
    }
}

/// Minimal commutative ring interface used by [`SymExpr::eval_in`].
pub trait EvalRing: Clone {
    fn zero() -> Self;
    fn one() -> Self;
    fn add(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn from_coeff(c: &Coeff) -> Option<Self>;
}

impl EvalRing for Coeff {
    fn zero() -> Self {
        Coeff::zero()
    }
    fn one() -> Self {
        Coeff::one()
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn from_coeff(c: &Coeff) -> Option<Self> {
        Some(c.clone())
    }
}

impl AddAssign<&SymExpr> for SymExpr {
    fn add_assign(&mut self, rhs: &SymExpr) {
        for (k, c) in &rhs.terms {
            self.insert(k.clone(), c.clone());
        }
    }
}

impl SubAssign<&SymExpr> for SymExpr {
    fn sub_assign(&mut self, rhs: &SymExpr) {
        for (k, c) in &rhs.terms {
            self.insert(k.clone(), -c);
        }
    }
}

impl Add for &SymExpr {
    type Output = SymExpr;
    fn add(self, rhs: &SymExpr) -> SymExpr {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Add for SymExpr {
    type Output = SymExpr;
    fn add(mut self, rhs: SymExpr) -> SymExpr {
        self += &rhs;
        self
    }
}

impl Sub for &SymExpr {
    type Output = SymExpr;
    fn sub(self, rhs: &SymExpr) -> SymExpr {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl Sub for SymExpr {
    type Output = SymExpr;
    fn sub(mut self, rhs: SymExpr) -> SymExpr {
        self -= &rhs;
        self
    }
}

impl Mul for &SymExpr {
    type Output = SymExpr;
    fn mul(self, rhs: &SymExpr) -> SymExpr {
        let mut out = SymExpr::zero();
        for (ka, ca) in &self.terms {
            for (kb, cb) in &rhs.terms {
                out.insert(ka.merge(kb), ca * cb);
            }
        }
        out
    }
}

impl Mul for SymExpr {
    type Output = SymExpr;
    fn mul(self, rhs: SymExpr) -> SymExpr {
        &self * &rhs
    }
}

impl Neg for &SymExpr {
    type Output = SymExpr;
    fn neg(self) -> SymExpr {
        SymExpr { terms: self.terms.iter().map(|(k, c)| (k.clone(), -c)).collect() }
    }
}

impl Neg for SymExpr {
    type Output = SymExpr;
    fn neg(self) -> SymExpr {
        -&self
    }
}

fn fmt_weight(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn fmt_linear(form: &BTreeMap<String, BigRational>) -> String {
    let mut out = String::new();
    for (i, (s, w)) in form.iter().enumerate() {
        let neg = w.is_negative();
        let mag = w.abs();
        if i == 0 {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        if !mag.is_one() {
            out.push_str(&fmt_weight(&mag));
            out.push('*');
        }
        out.push_str(s);
    }
    out
}

/// Render one term with a nonnegative-leading coefficient.
fn fmt_term(key: &TermKey, c: &Coeff) -> String {
    let mut factors: Vec<String> = Vec::new();
    let mut divisors: Vec<String> = Vec::new();
    // Case-insensitive factor order reads more naturally: `a1*Pbar^2`.
    let mut mono: Vec<(&String, &i32)> = key.mono.iter().collect();
    mono.sort_by_key(|(s, _)| (s.to_lowercase(), s.to_string()));
    for (s, &e) in mono {
        match e {
            1 => factors.push(s.clone()),
            -1 => divisors.push(s.clone()),
            e if e > 0 => factors.push(format!("{s}^{e}")),
            e => divisors.push(format!("{s}^{}", -e)),
        }
    }
    if !key.exp.is_empty() {
        factors.push(format!("exp({})", fmt_linear(&key.exp)));
    }
    let mut out = if factors.is_empty() {
        c.to_string()
    } else {
        format!("{}{}", c.prefix(true), factors.join("*"))
    };
    for d in divisors {
        out.push('/');
        out.push_str(&d);
    }
    out
}

impl fmt::Display for SymExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (key, c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative_leading();
            let mag = if neg { -c } else { c.clone() };
            if i == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, "{}", if neg { " - " } else { " + " })?;
            }
            write!(f, "{}", fmt_term(key, &mag))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(name: &str) -> SymExpr {
        SymExpr::symbol(name)
    }

    #[test]
    fn cancellation_yields_empty_term_set() {
        let e = &(&s("y") - &s("y")) + &SymExpr::zero();
        assert!(e.is_zero());
        assert_eq!(e.to_string(), "0");
    }

    #[test]
    fn derivative_of_sum_of_squares() {
        let e = &s("x").pow(2) + &s("y").pow(2);
        assert_eq!(e.differentiate("x"), &SymExpr::int(2) * &s("x"));
        assert!(s("p_x").differentiate("x").is_zero());
    }

    #[test]
    fn derivative_through_exponential() {
        let mut w = BTreeMap::new();
        w.insert("y".to_string(), BigRational::from_integer((-2).into()));
        let e = &s("z").pow(2) * &SymExpr::exp_linear(w);
        let d = e.differentiate("y");
        assert_eq!(d, e.scale(&Coeff::from_int(-2)));
    }

    #[test]
    fn substitution_is_simultaneous() {
        let e = &s("x") * &s("p_y");
        let mut b = BTreeMap::new();
        b.insert("x".to_string(), SymExpr::zero());
        assert!(e.substitute(&b).unwrap().is_zero());
        // swap x <-> y in one pass
        let e = &s("x") - &(&SymExpr::int(2) * &s("y"));
        let mut b = BTreeMap::new();
        b.insert("x".to_string(), s("y"));
        b.insert("y".to_string(), s("x"));
        assert_eq!(e.substitute(&b).unwrap(), &s("y") - &(&SymExpr::int(2) * &s("x")));
    }

    #[test]
    fn exponent_substitution_requires_linear_binding() {
        let mut w = BTreeMap::new();
        w.insert("y".to_string(), BigRational::one());
        let e = SymExpr::exp_linear(w);
        let mut b = BTreeMap::new();
        b.insert("y".to_string(), s("y").pow(2));
        assert!(matches!(e.substitute(&b), Err(PhaseSpaceError::NonAffineExponent(..))));
        b.insert("y".to_string(), &s("u") - &s("v"));
        let r = e.substitute(&b).unwrap();
        assert!(r.depends_on("u") && r.depends_on("v"));
        b.insert("y".to_string(), SymExpr::zero());
        assert_eq!(e.substitute(&b).unwrap(), SymExpr::one());
    }

    #[test]
    fn evaluation() {
        let e = &s("x").pow(2) + &s("y").pow(2);
        let pt: BTreeMap<String, f64> = [("x".to_string(), 3.0), ("y".to_string(), 4.0)].into();
        assert_eq!(e.evaluate(&pt).unwrap(), 25.0);
        assert!(matches!(s("q").evaluate(&pt), Err(PhaseSpaceError::Unbound(_))));
    }

    #[test]
    fn exact_division_by_monomial() {
        let num = &(&s("a1") * &s("P").pow(2)) * &SymExpr::int(-1);
        let q = num.exact_div(&s("P"), |_| false).unwrap();
        assert_eq!(q, -(&s("a1") * &s("P")));
        assert!(s("a1").exact_div(&s("P"), |_| false).is_none());
        assert!(s("a1").exact_div(&s("d"), |n| n == "d").is_some());
    }
}
