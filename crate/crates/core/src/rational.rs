//! Exact rationals with an `i64` fast path, and time bounds with `+inf`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::{BigRational, Ratio};
use num_traits::{CheckedAdd, CheckedDiv, CheckedMul, CheckedSub, Signed, ToPrimitive, Zero};

/// Exact rational number.
///
/// Values that fit in `i64` numerator/denominator are always stored in the
/// small representation, so derived equality and hashing are canonical.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Rational(Repr);

#[derive(Clone, PartialEq, Eq, Hash)]
enum Repr {
    Small(Ratio<i64>),
    Big(Box<BigRational>),
}

impl Rational {
    pub fn zero() -> Self {
        Rational(Repr::Small(Ratio::from_integer(0)))
    }

    pub fn one() -> Self {
        Self::int(1)
    }

    pub fn int(n: i64) -> Self {
        Self::small(Ratio::from_integer(n))
    }

    /// `num/den`; panics when `den == 0`.
    pub fn new(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Self::from_big(BigRational::new(num.into(), den.into()))
    }

    fn small(r: Ratio<i64>) -> Self {
        // i64::MIN cannot be negated safely, keep it out of the fast path
        if *r.numer() == i64::MIN || *r.denom() == i64::MIN {
            return Self::from_big(BigRational::new_raw(
                BigInt::from(*r.numer()),
                BigInt::from(*r.denom()),
            ));
        }
        Rational(Repr::Small(r))
    }

    pub fn from_big(b: BigRational) -> Self {
        match (b.numer().to_i64(), b.denom().to_i64()) {
            (Some(n), Some(d)) if n != i64::MIN && d != i64::MIN => {
                Rational(Repr::Small(Ratio::new_raw(n, d)))
            }
            _ => Rational(Repr::Big(Box::new(b))),
        }
    }

    pub fn to_big(&self) -> BigRational {
        match &self.0 {
            Repr::Small(r) => {
                BigRational::new_raw(BigInt::from(*r.numer()), BigInt::from(*r.denom()))
            }
            Repr::Big(b) => (**b).clone(),
        }
    }

    pub fn numer(&self) -> BigInt {
        match &self.0 {
            Repr::Small(r) => (*r.numer()).into(),
            Repr::Big(b) => b.numer().clone(),
        }
    }

    pub fn denom(&self) -> BigInt {
        match &self.0 {
            Repr::Small(r) => (*r.denom()).into(),
            Repr::Big(b) => b.denom().clone(),
        }
    }

    /// Numerator and denominator when both fit in `i64`.
    pub fn as_small(&self) -> Option<(i64, i64)> {
        match &self.0 {
            Repr::Small(r) => Some((*r.numer(), *r.denom())),
            Repr::Big(_) => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(&self.0, Repr::Small(r) if r.is_zero())
    }

    pub fn is_integer(&self) -> bool {
        match &self.0 {
            Repr::Small(r) => *r.denom() == 1,
            Repr::Big(b) => b.is_integer(),
        }
    }

    pub fn signum(&self) -> i32 {
        match &self.0 {
            Repr::Small(r) => r.numer().signum() as i32,
            Repr::Big(b) => {
                if b.is_positive() {
                    1
                } else if b.is_negative() {
                    -1
                } else {
                    0
                }
            }
        }
    }

    pub fn is_negative(&self) -> bool {
        self.signum() < 0
    }

    pub fn is_positive(&self) -> bool {
        self.signum() > 0
    }

    pub fn abs(&self) -> Self {
        if self.is_negative() {
            -self
        } else {
            self.clone()
        }
    }

    pub fn floor(&self) -> Self {
        match &self.0 {
            Repr::Small(r) => Self::small(r.floor()),
            Repr::Big(b) => Self::from_big(b.floor()),
        }
    }

    pub fn ceil(&self) -> Self {
        match &self.0 {
            Repr::Small(r) => Self::small(r.ceil()),
            Repr::Big(b) => Self::from_big(b.ceil()),
        }
    }

    pub fn min(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    pub fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    pub fn checked_div(&self, other: &Self) -> Option<Self> {
        if other.is_zero() {
            None
        } else {
            Some(self / other)
        }
    }

    pub fn recip(&self) -> Option<Self> {
        Self::one().checked_div(self)
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    pub fn to_f64(&self) -> f64 {
        match &self.0 {
            Repr::Small(r) => *r.numer() as f64 / *r.denom() as f64,
            Repr::Big(b) => b.to_f64().unwrap_or(f64::NAN),
        }
    }

    /// Exact value of a finite float.
    pub fn from_f64(f: f64) -> Option<Self> {
        BigRational::from_float(f).map(Self::from_big)
    }

    /// Decimal rendering with `digits` fractional digits, rounded to nearest.
    pub fn to_decimal(&self, digits: usize) -> String {
        let scale = BigInt::from(10u32).pow(digits as u32);
        let scaled = self.to_big() * BigRational::from_integer(scale.clone());
        let rounded = scaled.round().to_integer();
        let neg = rounded.is_negative();
        let (int, frac) = rounded.abs().div_rem(&scale);
        let mut s = String::new();
        if neg {
            s.push('-');
        }
        s.push_str(&int.to_string());
        if digits > 0 {
            let f = frac.to_string();
            s.push('.');
            for _ in f.len()..digits {
                s.push('0');
            }
            s.push_str(&f);
        }
        s
    }
}

impl Default for Rational {
    fn default() -> Self {
        Self::zero()
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Self::int(n)
    }
}

impl From<i32> for Rational {
    fn from(n: i32) -> Self {
        Self::int(n as i64)
    }
}

impl From<u32> for Rational {
    fn from(n: u32) -> Self {
        Self::int(n as i64)
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $checked:ident) => {
        impl<'a> $tr<&'a Rational> for &'a Rational {
            type Output = Rational;
            fn $m(self, rhs: &'a Rational) -> Rational {
                if let (Repr::Small(a), Repr::Small(b)) = (&self.0, &rhs.0) {
                    if let Some(r) = a.$checked(b) {
                        return Rational::small(r);
                    }
                }
                Rational::from_big(self.to_big().$m(rhs.to_big()))
            }
        }
        impl $tr<Rational> for Rational {
            type Output = Rational;
            fn $m(self, rhs: Rational) -> Rational {
                (&self).$m(&rhs)
            }
        }
        impl<'a> $tr<&'a Rational> for Rational {
            type Output = Rational;
            fn $m(self, rhs: &'a Rational) -> Rational {
                (&self).$m(rhs)
            }
        }
        impl<'a> $tr<Rational> for &'a Rational {
            type Output = Rational;
            fn $m(self, rhs: Rational) -> Rational {
                self.$m(&rhs)
            }
        }
    };
}

binop!(Add, add, checked_add);
binop!(Sub, sub, checked_sub);
binop!(Mul, mul, checked_mul);
binop!(Div, div, checked_div);

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        match &self.0 {
            Repr::Small(r) => Rational::small(-r),
            Repr::Big(b) => Rational::from_big(-(**b).clone()),
        }
    }
}

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        -&self
    }
}

impl Ord for Rational {
    fn cmp(&self, other: &Self) -> Ordering {
        match (&self.0, &other.0) {
            (Repr::Small(a), Repr::Small(b)) => {
                let l = *a.numer() as i128 * *b.denom() as i128;
                let r = *b.numer() as i128 * *a.denom() as i128;
                l.cmp(&r)
            }
            _ => self.to_big().cmp(&other.to_big()),
        }
    }
}

impl PartialOrd for Rational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0 {
            Repr::Small(r) if *r.denom() == 1 => write!(f, "{}", r.numer()),
            Repr::Small(r) => write!(f, "{}/{}", r.numer(), r.denom()),
            Repr::Big(b) if b.is_integer() => write!(f, "{}", b.numer()),
            Repr::Big(b) => write!(f, "{}/{}", b.numer(), b.denom()),
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid rational literal `{0}`")]
pub struct ParseRationalError(pub String);

impl FromStr for Rational {
    type Err = ParseRationalError;

    /// Accepts `a`, `a/b` and finite decimals such as `-1.25`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseRationalError(s.to_string());
        let t = s.trim();
        if let Some((n, d)) = t.split_once('/') {
            let n: BigInt = n.trim().parse().map_err(|_| err())?;
            let d: BigInt = d.trim().parse().map_err(|_| err())?;
            if d.is_zero() {
                return Err(err());
            }
            return Ok(Self::from_big(BigRational::new(n, d)));
        }
        let (neg, body) = match t.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, t.strip_prefix('+').unwrap_or(t)),
        };
        let (ip, fp) = body.split_once('.').unwrap_or((body, ""));
        if (ip.is_empty() && fp.is_empty())
            || !ip.bytes().all(|b| b.is_ascii_digit())
            || !fp.bytes().all(|b| b.is_ascii_digit())
        {
            return Err(err());
        }
        let digits = format!("{}{}", if ip.is_empty() { "0" } else { ip }, fp);
        let mut num: BigInt = digits.parse().map_err(|_| err())?;
        if neg {
            num = -num;
        }
        let den = BigInt::from(10u32).pow(fp.len() as u32);
        Ok(Self::from_big(BigRational::new(num, den)))
    }
}

impl serde::Serialize for Rational {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("Rational", 2)?;
        match self.as_small() {
            Some((n, d)) => {
                st.serialize_field("num", &n)?;
                st.serialize_field("den", &d)?;
            }
            None => {
                st.serialize_field("num", &self.numer().to_string())?;
                st.serialize_field("den", &self.denom().to_string())?;
            }
        }
        st.end()
    }
}

impl<'de> serde::Deserialize<'de> for Rational {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let v = serde_json::Value::deserialize(d)?;
        let part = |k: &str| -> Result<BigInt, D::Error> {
            match v.get(k) {
                Some(serde_json::Value::Number(n)) => n
                    .as_i64()
                    .map(BigInt::from)
                    .ok_or_else(|| D::Error::custom("non-integer rational part")),
                Some(serde_json::Value::String(s)) => {
                    s.parse().map_err(|_| D::Error::custom("bad rational part"))
                }
                _ => Err(D::Error::custom(format!("missing `{k}`"))),
            }
        };
        let (n, den) = (part("num")?, part("den")?);
        if den.is_zero() {
            return Err(D::Error::custom("zero denominator"));
        }
        Ok(Rational::from_big(BigRational::new(n, den)))
    }
}

/// A rational bound or `+inf`. `Infinite` orders above every finite value.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TimeBound {
    Finite(Rational),
    Infinite,
}

impl TimeBound {
    pub fn zero() -> Self {
        TimeBound::Finite(Rational::zero())
    }

    pub fn finite(&self) -> Option<&Rational> {
        match self {
            TimeBound::Finite(r) => Some(r),
            TimeBound::Infinite => None,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, TimeBound::Infinite)
    }

    pub fn add(&self, other: &TimeBound) -> TimeBound {
        match (self, other) {
            (TimeBound::Finite(a), TimeBound::Finite(b)) => TimeBound::Finite(a + b),
            _ => TimeBound::Infinite,
        }
    }

    pub fn add_r(&self, r: &Rational) -> TimeBound {
        match self {
            TimeBound::Finite(a) => TimeBound::Finite(a + r),
            TimeBound::Infinite => TimeBound::Infinite,
        }
    }

    pub fn sub_r(&self, r: &Rational) -> TimeBound {
        match self {
            TimeBound::Finite(a) => TimeBound::Finite(a - r),
            TimeBound::Infinite => TimeBound::Infinite,
        }
    }
}

impl From<Rational> for TimeBound {
    fn from(r: Rational) -> Self {
        TimeBound::Finite(r)
    }
}

impl From<i64> for TimeBound {
    fn from(n: i64) -> Self {
        TimeBound::Finite(Rational::int(n))
    }
}

impl fmt::Display for TimeBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TimeBound::Finite(r) => write!(f, "{r}"),
            TimeBound::Infinite => write!(f, "inf"),
        }
    }
}

impl fmt::Debug for TimeBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for TimeBound {
    type Err = ParseRationalError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.trim() == "inf" {
            Ok(TimeBound::Infinite)
        } else {
            s.parse().map(TimeBound::Finite)
        }
    }
}

impl serde::Serialize for TimeBound {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            TimeBound::Finite(r) => r.serialize(s),
            TimeBound::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> serde::Deserialize<'de> for TimeBound {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let v = serde_json::Value::deserialize(d)?;
        if v.as_str() == Some("inf") {
            return Ok(TimeBound::Infinite);
        }
        Rational::deserialize(v)
            .map(TimeBound::Finite)
            .map_err(D::Error::custom)
    }
}

/// `Rational` from a `num/den` literal, for tests and builders.
pub fn q(num: i64, den: i64) -> Rational {
    Rational::new(num, den)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_forms() {
        assert_eq!("3/6".parse::<Rational>().unwrap(), q(1, 2));
        assert_eq!("-1.25".parse::<Rational>().unwrap(), q(-5, 4));
        assert_eq!(".5".parse::<Rational>().unwrap(), q(1, 2));
        assert_eq!("42".parse::<Rational>().unwrap(), Rational::int(42));
        assert!("1/0".parse::<Rational>().is_err());
        assert!("1e3".parse::<Rational>().is_err());
    }

    #[test]
    fn overflow_falls_back_to_big() {
        let big = Rational::int(i64::MAX);
        let s = &big + &big;
        assert_eq!(s.to_string(), "18446744073709551614");
        let back = &s - &big;
        assert_eq!(back, big);
        assert!(back.as_small().is_some());
        assert!(s > big);
        assert_eq!(
            -Rational::int(i64::MIN + 1) + Rational::one(),
            Rational::from_big(BigRational::from_integer(BigInt::from(i64::MAX) + 1))
        );
    }

    #[test]
    fn ordering_and_display() {
        assert!(q(1, 3) < q(1, 2));
        assert!(q(-1, 2) < Rational::zero());
        assert_eq!(q(9, 4).to_string(), "9/4");
        assert!(TimeBound::Infinite > TimeBound::Finite(Rational::int(1_000_000)));
        assert_eq!(q(1, 8).to_decimal(4), "0.1250");
        assert_eq!(q(-2, 3).to_decimal(2), "-0.67");
    }

    #[test]
    fn json_shape() {
        assert_eq!(
            serde_json::to_string(&q(9, 4)).unwrap(),
            r#"{"num":9,"den":4}"#
        );
        assert_eq!(
            serde_json::to_string(&TimeBound::Infinite).unwrap(),
            r#""inf""#
        );
        let r: Rational = serde_json::from_str(r#"{"num":1,"den":8}"#).unwrap();
        assert_eq!(r, q(1, 8));
    }
}
