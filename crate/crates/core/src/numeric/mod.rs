//! Exact integers, fixed-arity vectors of them, name-to-value bindings, and
//! the basic function alphabet used throughout the engine (`sg`, its
//! complement, the arithmetic conditional and the binary length).

mod value;

use std::collections::BTreeMap;
use std::fmt;
use std::ops::Index;

pub use value::Value;

use crate::error::{Error, Result};

/// `1` if `x > 0`, else `0`.
pub fn sg(x: &Value) -> Value {
    if x.is_positive() {
        Value::one()
    } else {
        Value::zero()
    }
}

/// `1` iff `x = 0`, computed as `(1 - sg(x)) * (1 - sg(-x))`.
pub fn cosg(x: &Value) -> Value {
    let one = Value::one();
    (&one - sg(x)) * (&one - sg(&-x))
}

/// `y` when `x = 0`, `z` otherwise, computed as `z + cosg(x) * (y - z)`.
pub fn cond(x: &Value, y: &Value, z: &Value) -> Value {
    z + cosg(x) * (y - z)
}

/// Binary length of `|x|`; `length(0) = 1`.
pub fn length(x: &Value) -> Value {
    Value::from(x.bit_length())
}

/// An ordered tuple of values with an arity fixed at construction.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct ValueVector(Vec<Value>);

impl ValueVector {
    pub fn new(components: Vec<Value>) -> Self {
        ValueVector(components)
    }

    pub fn zeros(arity: usize) -> Self {
        ValueVector(vec![Value::zero(); arity])
    }

    pub fn scalar(v: Value) -> Self {
        ValueVector(vec![v])
    }

    pub fn arity(&self) -> usize {
        self.0.len()
    }

    pub fn components(&self) -> &[Value] {
        &self.0
    }

    pub fn into_components(self) -> Vec<Value> {
        self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Value> {
        self.0.iter()
    }

    /// The single component of a 1-vector.
    pub fn as_scalar(&self) -> Result<&Value> {
        match self.0.as_slice() {
            [v] => Ok(v),
            _ => Err(Error::ArityMismatch {
                expected: 1,
                found: self.arity(),
            }),
        }
    }

    fn check_arity(&self, other: &ValueVector) -> Result<()> {
        if self.arity() != other.arity() {
            return Err(Error::ArityMismatch {
                expected: self.arity(),
                found: other.arity(),
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &ValueVector) -> Result<ValueVector> {
        self.check_arity(other)?;
        Ok(self.zip_with(other, |a, b| a + b))
    }

    pub fn sub(&self, other: &ValueVector) -> Result<ValueVector> {
        self.check_arity(other)?;
        Ok(self.zip_with(other, |a, b| a - b))
    }

    pub fn scale(&self, k: &Value) -> ValueVector {
        ValueVector(self.0.iter().map(|v| v * k).collect())
    }

    fn zip_with(&self, other: &ValueVector, f: impl Fn(&Value, &Value) -> Value) -> ValueVector {
        ValueVector(self.0.iter().zip(&other.0).map(|(a, b)| f(a, b)).collect())
    }

    /// Per-component binary lengths.
    pub fn bit_lengths(&self) -> Vec<u64> {
        self.0.iter().map(Value::bit_length).collect()
    }

    /// Sup-norm length: the largest component length (1 for the empty vector).
    pub fn max_bit_length(&self) -> u64 {
        self.0.iter().map(Value::bit_length).max().unwrap_or(1)
    }
}

impl Index<usize> for ValueVector {
    type Output = Value;
    fn index(&self, i: usize) -> &Value {
        &self.0[i]
    }
}

impl From<Vec<Value>> for ValueVector {
    fn from(v: Vec<Value>) -> Self {
        ValueVector(v)
    }
}

impl FromIterator<Value> for ValueVector {
    fn from_iter<I: IntoIterator<Item = Value>>(iter: I) -> Self {
        ValueVector(iter.into_iter().collect())
    }
}

impl<'a> IntoIterator for &'a ValueVector {
    type Item = &'a Value;
    type IntoIter = std::slice::Iter<'a, Value>;
    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

impl fmt::Debug for ValueVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.0).finish()
    }
}

impl fmt::Display for ValueVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Bindings from term names to values. Looking up an unbound name is an
/// error.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Valuation {
    bindings: BTreeMap<String, Value>,
}

impl Valuation {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn bind(mut self, name: impl Into<String>, value: impl Into<Value>) -> Self {
        self.set(name, value);
        self
    }

    pub fn set(&mut self, name: impl Into<String>, value: impl Into<Value>) {
        self.bindings.insert(name.into(), value.into());
    }

    pub fn get(&self, name: &str) -> Result<&Value> {
        self.bindings
            .get(name)
            .ok_or_else(|| Error::UnboundTerm(name.to_string()))
    }

    pub fn contains(&self, name: &str) -> bool {
        self.bindings.contains_key(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Value)> {
        self.bindings.iter().map(|(k, v)| (k.as_str(), v))
    }
}

impl<K: Into<String>, V: Into<Value>> FromIterator<(K, V)> for Valuation {
    fn from_iter<I: IntoIterator<Item = (K, V)>>(iter: I) -> Self {
        let mut env = Valuation::new();
        for (k, v) in iter {
            env.set(k, v);
        }
        env
    }
}
