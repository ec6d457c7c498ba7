//! Exact coefficients in the quadratic field Q(√2).
//!
//! Every coefficient that shows up in the built-in reductions is rational
//! except for the `1/√2` normalisations of the Rössler canonical map, so the
//! field Q(√2) is the smallest one closed under everything we need while
//! keeping zero-testing exact.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// `rat + irr·√2` with exact rational parts.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Coeff {
    rat: BigRational,
    irr: BigRational,
}

impl Coeff {
    pub fn new(rat: BigRational, irr: BigRational) -> Self {
        Self { rat, irr }
    }

    pub fn from_rational(rat: BigRational) -> Self {
        Self { rat, irr: BigRational::zero() }
    }

    pub fn from_int(n: i64) -> Self {
        Self::from_rational(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn from_ratio(num: i64, den: i64) -> Self {
        Self::from_rational(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    /// √2 itself.
    pub fn sqrt2() -> Self {
        Self { rat: BigRational::zero(), irr: BigRational::one() }
    }

    pub fn zero() -> Self {
        Self::from_int(0)
    }

    pub fn one() -> Self {
        Self::from_int(1)
    }

    pub fn is_zero(&self) -> bool {
        self.rat.is_zero() && self.irr.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.rat.is_one() && self.irr.is_zero()
    }

    pub fn rational_part(&self) -> &BigRational {
        &self.rat
    }

    pub fn sqrt2_part(&self) -> &BigRational {
        &self.irr
    }

    /// `Some(r)` when the coefficient has no √2 component.
    pub fn as_rational(&self) -> Option<&BigRational> {
        self.irr.is_zero().then_some(&self.rat)
    }

    /// Multiplicative inverse via the field conjugate; `None` for zero.
    pub fn inverse(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let two = BigRational::from_integer(BigInt::from(2));
        let norm = &self.rat * &self.rat - &two * &self.irr * &self.irr;
        // norm vanishes only for zero because √2 is irrational
        Some(Self { rat: &self.rat / &norm, irr: -(&self.irr / &norm) })
    }

    pub fn pow(&self, exp: i32) -> Option<Self> {
        let base = if exp < 0 { self.inverse()? } else { self.clone() };
        let mut acc = Self::one();
        for _ in 0..exp.unsigned_abs() {
            acc = &acc * &base;
        }
        Some(acc)
    }

    pub fn to_f64(&self) -> f64 {
        let r = self.rat.to_f64().unwrap_or(f64::NAN);
        let i = self.irr.to_f64().unwrap_or(f64::NAN);
        r + i * std::f64::consts::SQRT_2
    }

    /// Sign of the real number represented (exact).
    pub fn signum(&self) -> Ordering {
        let a = &self.rat;
        let b = &self.irr;
        match (a.signum().to_i32().unwrap_or(0), b.signum().to_i32().unwrap_or(0)) {
            (0, s) | (s, 0) => s.cmp(&0),
            (sa, sb) if sa == sb => sa.cmp(&0),
            (sa, _) => {
                // opposite signs: compare a² with 2b²
                let two = BigRational::from_integer(BigInt::from(2));
                match (a * a).cmp(&(two * b * b)) {
                    Ordering::Greater => sa.cmp(&0),
                    Ordering::Less => (-sa).cmp(&0),
                    Ordering::Equal => Ordering::Equal,
                }
            }
        }
    }

    /// Exact square root when `r` or `r/2` is the square of a rational.
    pub fn sqrt_of_rational(r: &BigRational) -> Option<Self> {
        if r.is_negative() {
            return None;
        }
        if let Some(s) = rational_sqrt(r) {
            return Some(Self::from_rational(s));
        }
        let half = r / BigRational::from_integer(BigInt::from(2));
        rational_sqrt(&half).map(|s| Self { rat: BigRational::zero(), irr: s })
    }

    /// True when this coefficient is "simple" enough to print without brackets.
    fn is_atomic(&self) -> bool {
        self.irr.is_zero() || self.rat.is_zero()
    }
}

fn rational_sqrt(r: &BigRational) -> Option<BigRational> {
    let n = r.numer().sqrt();
    let d = r.denom().sqrt();
    (&n * &n == *r.numer() && &d * &d == *r.denom()).then(|| BigRational::new(n, d))
}

fn fmt_rational(r: &BigRational, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if r.denom().is_one() {
        write!(f, "{}", r.numer())
    } else {
        write!(f, "{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for Coeff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.irr.is_zero() {
            return fmt_rational(&self.rat, f);
        }
        let irr_part = |f: &mut fmt::Formatter<'_>, v: &BigRational| -> fmt::Result {
            if v.is_one() {
                write!(f, "sqrt(2)")
            } else if (-v).is_one() {
                write!(f, "-sqrt(2)")
            } else {
                fmt_rational(v, f)?;
                write!(f, "*sqrt(2)")
            }
        };
        if self.rat.is_zero() {
            return irr_part(f, &self.irr);
        }
        write!(f, "(")?;
        fmt_rational(&self.rat, f)?;
        if self.irr.is_positive() {
            write!(f, " + ")?;
            irr_part(f, &self.irr)?;
        } else {
            write!(f, " - ")?;
            irr_part(f, &-self.irr.clone())?;
        }
        write!(f, ")")
    }
}

impl Coeff {
    /// Render as a multiplicative prefix: `""` for 1, `"-"` for −1, else the
    /// value followed by `*` when `followed` is set.
    pub(crate) fn prefix(&self, followed: bool) -> String {
        if followed && self.is_one() {
            return String::new();
        }
        if followed && (-self.clone()).is_one() {
            return "-".to_string();
        }
        let body = if self.is_atomic() { self.to_string() } else { format!("{self}") };
        if followed {
            format!("{body}*")
        } else {
            body
        }
    }

    pub(crate) fn is_negative_leading(&self) -> bool {
        if self.rat.is_zero() {
            self.irr.is_negative()
        } else {
            self.is_atomic() && self.rat.is_negative()
        }
    }
}

impl From<i64> for Coeff {
    fn from(n: i64) -> Self {
        Self::from_int(n)
    }
}

impl From<BigRational> for Coeff {
    fn from(r: BigRational) -> Self {
        Self::from_rational(r)
    }
}

impl Add for &Coeff {
    type Output = Coeff;
    fn add(self, rhs: &Coeff) -> Coeff {
        Coeff { rat: &self.rat + &rhs.rat, irr: &self.irr + &rhs.irr }
    }
}

impl Add for Coeff {
    type Output = Coeff;
    fn add(self, rhs: Coeff) -> Coeff {
        &self + &rhs
    }
}

impl AddAssign<&Coeff> for Coeff {
    fn add_assign(&mut self, rhs: &Coeff) {
        self.rat += &rhs.rat;
        self.irr += &rhs.irr;
    }
}

impl Sub for &Coeff {
    type Output = Coeff;
    fn sub(self, rhs: &Coeff) -> Coeff {
        Coeff { rat: &self.rat - &rhs.rat, irr: &self.irr - &rhs.irr }
    }
}

impl Sub for Coeff {
    type Output = Coeff;
    fn sub(self, rhs: Coeff) -> Coeff {
        &self - &rhs
    }
}

impl SubAssign<&Coeff> for Coeff {
    fn sub_assign(&mut self, rhs: &Coeff) {
        self.rat -= &rhs.rat;
        self.irr -= &rhs.irr;
    }
}

impl Mul for &Coeff {
    type Output = Coeff;
    fn mul(self, rhs: &Coeff) -> Coeff {
        let two = BigRational::from_integer(BigInt::from(2));
        Coeff {
            rat: &self.rat * &rhs.rat + two * &self.irr * &rhs.irr,
            irr: &self.rat * &rhs.irr + &self.irr * &rhs.rat,
        }
    }
}

impl Mul for Coeff {
    type Output = Coeff;
    fn mul(self, rhs: Coeff) -> Coeff {
        &self * &rhs
    }
}

impl MulAssign<&Coeff> for Coeff {
    fn mul_assign(&mut self, rhs: &Coeff) {
        *self = &*self * rhs;
    }
}

impl Div for &Coeff {
    type Output = Coeff;
    /// Panics on division by zero; callers check invertibility first.
    fn div(self, rhs: &Coeff) -> Coeff {
        self * &rhs.inverse().expect("division by zero coefficient")
    }
}

impl Neg for Coeff {
    type Output = Coeff;
    fn neg(self) -> Coeff {
        Coeff { rat: -self.rat, irr: -self.irr }
    }
}

impl Neg for &Coeff {
    type Output = Coeff;
    fn neg(self) -> Coeff {
        -self.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt2_squares_to_two() {
        let s = Coeff::sqrt2();
        assert_eq!(&s * &s, Coeff::from_int(2));
    }

    #[test]
    fn inverse_roundtrip() {
        let a = Coeff::new(BigRational::from_integer(3.into()), BigRational::new((-1).into(), 2.into()));
        let inv = a.inverse().unwrap();
        assert!((&a * &inv).is_one());
        assert!(Coeff::zero().inverse().is_none());
    }

    #[test]
    fn exact_sqrt_detects_sqrt2_multiples() {
        let eight = BigRational::from_integer(8.into());
        assert_eq!(Coeff::sqrt_of_rational(&eight).unwrap(), &Coeff::from_int(2) * &Coeff::sqrt2());
        let quarter = BigRational::new(1.into(), 4.into());
        assert_eq!(Coeff::sqrt_of_rational(&quarter).unwrap(), Coeff::from_ratio(1, 2));
        assert!(Coeff::sqrt_of_rational(&BigRational::from_integer(3.into())).is_none());
    }

    #[test]
    fn signum_handles_mixed_signs() {
        // 1 - √2 < 0, 3 - 2√2 > 0
        let a = Coeff::new(BigRational::one(), -BigRational::one());
        assert_eq!(a.signum(), Ordering::Less);
        let b = Coeff::new(BigRational::from_integer(3.into()), BigRational::from_integer((-2).into()));
        assert_eq!(b.signum(), Ordering::Greater);
    }

    #[test]
    fn display_forms() {
        assert_eq!(Coeff::from_ratio(-3, 4).to_string(), "-3/4");
        assert_eq!(Coeff::sqrt2().to_string(), "sqrt(2)");
        let mixed = &Coeff::one() + &(&Coeff::from_int(-2) * &Coeff::sqrt2());
        assert_eq!(mixed.to_string(), "(1 - 2*sqrt(2))");
    }
}
