use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::{BigInt, Sign};
use num_traits::{One, Signed, ToPrimitive};

use crate::error::Error;

/// Exact signed integer.
///
/// Values that fit in an `i64` are kept inline; anything larger spills to a
/// heap-allocated [`BigInt`]. The representation is always normalized, so two
/// equal integers compare equal regardless of how they were produced.
#[derive(Clone)]
pub struct Value(Repr);

#[derive(Clone)]
enum Repr {
    Small(i64),
    Big(BigInt),
}

impl Value {
    pub const fn small(v: i64) -> Self {
        Value(Repr::Small(v))
    }

    pub fn zero() -> Self {
        Value::small(0)
    }

    pub fn one() -> Self {
        Value::small(1)
    }

    fn from_big(b: BigInt) -> Self {
        match b.to_i64() {
            Some(v) => Value(Repr::Small(v)),
            None => Value(Repr::Big(b)),
        }
    }

    pub fn to_bigint(&self) -> BigInt {
        match &self.0 {
            Repr::Small(v) => BigInt::from(*v),
            Repr::Big(b) => b.clone(),
        }
    }

    pub fn to_i64(&self) -> Option<i64> {
        match &self.0 {
            Repr::Small(v) => Some(*v),
            Repr::Big(_) => None,
        }
    }

    pub fn to_u64(&self) -> Option<u64> {
        match &self.0 {
            Repr::Small(v) => u64::try_from(*v).ok(),
            Repr::Big(b) => b.to_u64(),
        }
    }

    pub fn to_usize(&self) -> Option<usize> {
        self.to_u64().and_then(|v| usize::try_from(v).ok())
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.0, Repr::Small(0))
    }

    pub fn is_positive(&self) -> bool {
        match &self.0 {
            Repr::Small(v) => *v > 0,
            Repr::Big(b) => b.is_positive(),
        }
    }

    pub fn is_negative(&self) -> bool {
        match &self.0 {
            Repr::Small(v) => *v < 0,
            Repr::Big(b) => b.is_negative(),
        }
    }

    pub fn signum(&self) -> i32 {
        if self.is_positive() {
            1
        } else if self.is_negative() {
            -1
        } else {
            0
        }
    }

    pub fn abs(&self) -> Value {
        if self.is_negative() {
            -self
        } else {
            self.clone()
        }
    }

    /// Number of binary digits of `|self|`, with the convention that zero
    /// has length 1.
    pub fn bit_length(&self) -> u64 {
        let bits = match &self.0 {
            Repr::Small(v) => 64 - u64::from(v.unsigned_abs().leading_zeros()),
            Repr::Big(b) => b.bits(),
        };
        bits.max(1)
    }

    /// `2^exp`.
    pub fn pow2(exp: u64) -> Value {
        if exp < 63 {
            Value::small(1i64 << exp)
        } else {
            Value::from_big(BigInt::one() << exp)
        }
    }

    pub fn pow(&self, exp: u32) -> Value {
        match &self.0 {
            Repr::Small(v) => match v.checked_pow(exp) {
                Some(r) => Value::small(r),
                None => Value::from_big(num_traits::pow(BigInt::from(*v), exp as usize)),
            },
            Repr::Big(b) => Value::from_big(num_traits::pow(b.clone(), exp as usize)),
        }
    }

    /// Floor division and remainder by a positive divisor.
    pub fn div_rem_floor(&self, divisor: &Value) -> Option<(Value, Value)> {
        use num_integer::Integer;
        if !divisor.is_positive() {
            return None;
        }
        let (q, r) = self.to_bigint().div_mod_floor(&divisor.to_bigint());
        Some((Value::from_big(q), Value::from_big(r)))
    }

    /// Parses a decimal or `0b`-prefixed binary literal with an optional
    /// leading minus sign.
    pub fn parse_literal(text: &str) -> Result<Value, Error> {
        let bad = || Error::InvalidLiteral(text.to_string());
        let (negative, body) = match text.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, text),
        };
        let (radix, digits) = match body.strip_prefix("0b").or_else(|| body.strip_prefix("0B")) {
            Some(rest) => (2, rest),
            None => (10, body),
        };
        if digits.is_empty() || !digits.chars().all(|c| c.is_digit(radix)) {
            return Err(bad());
        }
        let magnitude = BigInt::parse_bytes(digits.as_bytes(), radix).ok_or_else(bad)?;
        let v = Value::from_big(magnitude);
        Ok(if negative { -v } else { v })
    }
}

impl Default for Value {
    fn default() -> Self {
        Value::zero()
    }
}

impl From<i64> for Value {
    fn from(v: i64) -> Self {
        Value::small(v)
    }
}

impl From<i32> for Value {
    fn from(v: i32) -> Self {
        Value::small(i64::from(v))
    }
}

impl From<u64> for Value {
    fn from(v: u64) -> Self {
        match i64::try_from(v) {
            Ok(s) => Value::small(s),
            Err(_) => Value(Repr::Big(BigInt::from(v))),
        }
    }
}

impl From<usize> for Value {
    fn from(v: usize) -> Self {
        Value::from(v as u64)
    }
}

impl From<BigInt> for Value {
    fn from(b: BigInt) -> Self {
        Value::from_big(b)
    }
}

impl From<&Value> for BigInt {
    fn from(v: &Value) -> Self {
        v.to_bigint()
    }
}

impl PartialEq for Value {
    fn eq(&self, other: &Self) -> bool {
        match (&self.0, &other.0) {
            (Repr::Small(a), Repr::Small(b)) => a == b,
            (Repr::Big(a), Repr::Big(b)) => a == b,
            // normalized: a Big never equals a Small
            _ => false,
        }
    }
}

impl Eq for Value {}

impl Hash for Value {
    fn hash<H: Hasher>(&self, state: &mut H) {
        match &self.0 {
            Repr::Small(v) => {
                0u8.hash(state);
                v.hash(state)
            }
            Repr::Big(b) => {
                1u8.hash(state);
                b.hash(state)
            }
        }
    }
}

impl Ord for Value {
    fn cmp(&self, other: &Self) -> Ordering {
        match (&self.0, &other.0) {
            (Repr::Small(a), Repr::Small(b)) => a.cmp(b),
            (Repr::Big(a), Repr::Big(b)) => a.cmp(b),
            (Repr::Small(_), Repr::Big(b)) => {
                if b.sign() == Sign::Minus {
                    Ordering::Greater
                } else {
                    Ordering::Less
                }
            }
            (Repr::Big(a), Repr::Small(_)) => {
                if a.sign() == Sign::Minus {
                    Ordering::Less
                } else {
                    Ordering::Greater
                }
            }
        }
    }
}

impl PartialOrd for Value {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0 {
            Repr::Small(v) => write!(f, "{v}"),
            Repr::Big(b) => write!(f, "{b}"),
        }
    }
}

impl fmt::Debug for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Value {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Value::parse_literal(s.trim())
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $checked:ident, $op:tt) => {
        impl<'a> $trait<&'a Value> for &'a Value {
            type Output = Value;
            fn $method(self, rhs: &'a Value) -> Value {
                if let (Repr::Small(a), Repr::Small(b)) = (&self.0, &rhs.0) {
                    if let Some(r) = a.$checked(*b) {
                        return Value::small(r);
                    }
                }
                Value::from_big(self.to_bigint() $op rhs.to_bigint())
            }
        }

        impl $trait<Value> for Value {
            type Output = Value;
            fn $method(self, rhs: Value) -> Value {
                (&self).$method(&rhs)
            }
        }

        impl<'a> $trait<&'a Value> for Value {
            type Output = Value;
            fn $method(self, rhs: &'a Value) -> Value {
                (&self).$method(rhs)
            }
        }

        impl<'a> $trait<Value> for &'a Value {
            type Output = Value;
            fn $method(self, rhs: Value) -> Value {
                self.$method(&rhs)
            }
        }
    };
}

binop!(Add, add, checked_add, +);
binop!(Sub, sub, checked_sub, -);
binop!(Mul, mul, checked_mul, *);

impl AddAssign<&Value> for Value {
    fn add_assign(&mut self, rhs: &Value) {
        *self = &*self + rhs;
    }
}

impl SubAssign<&Value> for Value {
    fn sub_assign(&mut self, rhs: &Value) {
        *self = &*self - rhs;
    }
}

impl Neg for &Value {
    type Output = Value;
    fn neg(self) -> Value {
        match &self.0 {
            Repr::Small(v) => match v.checked_neg() {
                Some(r) => Value::small(r),
                None => Value::from_big(-BigInt::from(*v)),
            },
            Repr::Big(b) => Value::from_big(-b.clone()),
        }
    }
}

impl Neg for Value {
    type Output = Value;
    fn neg(self) -> Value {
        -&self
    }
}

impl std::iter::Sum for Value {
    fn sum<I: Iterator<Item = Value>>(iter: I) -> Value {
        iter.fold(Value::zero(), |acc, v| acc + v)
    }
}

impl std::iter::Product for Value {
    fn product<I: Iterator<Item = Value>>(iter: I) -> Value {
        iter.fold(Value::one(), |acc, v| acc * v)
    }
}

impl serde::Serialize for Value {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}
