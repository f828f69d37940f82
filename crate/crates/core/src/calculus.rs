//! Discrete calculus over exact integers: forward differences, discrete
//! integrals, falling powers and falling exponentials.
//!
//! Sequences are any `Fn(&Value, &Valuation) -> Result<ValueVector>`; the
//! valuation carries the parameters held fixed while differencing in the
//! index.

use crate::error::{Error, Result};
use crate::numeric::{Valuation, Value, ValueVector};

/// A (possibly vector-valued) function of one integer index and fixed
/// parameters.
pub trait Sequence {
    fn at(&self, x: &Value, env: &Valuation) -> Result<ValueVector>;
}

impl<F> Sequence for F
where
    F: Fn(&Value, &Valuation) -> Result<ValueVector>,
{
    fn at(&self, x: &Value, env: &Valuation) -> Result<ValueVector> {
        self(x, env)
    }
}

/// A function of two integer indices, the first being the one we
/// differentiate along.
pub trait Sequence2 {
    fn at(&self, x: &Value, t: &Value, env: &Valuation) -> Result<ValueVector>;
}

impl<F> Sequence2 for F
where
    F: Fn(&Value, &Value, &Valuation) -> Result<ValueVector>,
{
    fn at(&self, x: &Value, t: &Value, env: &Valuation) -> Result<ValueVector> {
        self(x, t, env)
    }
}

/// Lifts a plain scalar function of the index into a [`Sequence`].
pub fn scalar_seq(
    f: impl Fn(&Value) -> Value,
) -> impl Fn(&Value, &Valuation) -> Result<ValueVector> {
    move |x, _| Ok(ValueVector::scalar(f(x)))
}

fn require_non_negative(what: &'static str, v: &Value) -> Result<()> {
    if v.is_negative() {
        return Err(Error::NegativeArgument {
            what,
            value: v.clone(),
        });
    }
    Ok(())
}

/// `f(x + 1) - f(x)`, componentwise.
pub fn derivative<S: Sequence + ?Sized>(f: &S, x: &Value, env: &Valuation) -> Result<ValueVector> {
    require_non_negative("derivative index", x)?;
    let next = f.at(&(x + Value::one()), env)?;
    next.sub(&f.at(x, env)?)
}

/// `sum_{x=a}^{b-1} f(x)`, zero when `a = b` and `-integral(f, b, a)` when
/// `a > b`.
///
/// An empty range still evaluates `f(a)` once to learn the arity of the zero
/// it returns.
pub fn integral<S: Sequence + ?Sized>(
    f: &S,
    a: &Value,
    b: &Value,
    env: &Valuation,
) -> Result<ValueVector> {
    if a > b {
        let forward = integral(f, b, a, env)?;
        return Ok(forward.scale(&Value::from(-1)));
    }
    if a == b {
        return Ok(ValueVector::zeros(f.at(a, env)?.arity()));
    }
    let mut x = a.clone();
    let mut acc = f.at(&x, env)?;
    x += &Value::one();
    while &x < b {
        acc = acc.add(&f.at(&x, env)?)?;
        x += &Value::one();
    }
    Ok(acc)
}

/// `x (x-1) ... (x-m+1)`; the empty product for `m = 0` is 1.
pub fn falling_power(x: &Value, m: &Value) -> Result<Value> {
    require_non_negative("falling power exponent", m)?;
    // a factor (x - x) = 0 occurs once m exceeds a non-negative x
    if !x.is_negative() && m > x {
        return Ok(Value::zero());
    }
    let count = m
        .to_u64()
        .ok_or_else(|| Error::InvalidInput(format!("falling power exponent {m} is too large")))?;
    let mut acc = Value::one();
    let mut factor = x.clone();
    for _ in 0..count {
        acc = &acc * &factor;
        factor -= &Value::one();
    }
    Ok(acc)
}

/// `prod_{t=0}^{x-1} (1 + U'(t))` for a scalar sequence `U`; 1 when `x = 0`.
///
/// Each `U(t)` is evaluated once. The product stops early at a zero factor.
pub fn falling_exponential<S: Sequence + ?Sized>(
    u: &S,
    x: &Value,
    env: &Valuation,
) -> Result<Value> {
    require_non_negative("falling exponential index", x)?;
    let mut acc = Value::one();
    let mut t = Value::zero();
    let mut prev = u.at(&t, env)?.as_scalar()?.clone();
    while &t < x {
        t += &Value::one();
        let cur = u.at(&t, env)?.as_scalar()?.clone();
        let factor = Value::one() + (&cur - &prev);
        if factor.is_zero() {
            return Ok(Value::zero());
        }
        acc = &acc * &factor;
        prev = cur;
    }
    Ok(acc)
}

/// Derivative in `x` of `F(x) = integral(f(x, .), a(x), b(x))`, evaluated
/// through the three-term expansion: the integral of the partial difference
/// in `x`, plus the two boundary corrections
/// `integral(f(x+1, a(x+1) + t), 0, -a'(x))` and
/// `integral(f(x+1, b(x) + t), 0, b'(x))`.
pub fn integral_param_derivative<F, A, B>(
    f: &F,
    a: &A,
    b: &B,
    x: &Value,
    env: &Valuation,
) -> Result<ValueVector>
where
    F: Sequence2 + ?Sized,
    A: Sequence + ?Sized,
    B: Sequence + ?Sized,
{
    require_non_negative("derivative index", x)?;
    let x1 = x + Value::one();
    let ax = a.at(x, env)?.as_scalar()?.clone();
    let ax1 = a.at(&x1, env)?.as_scalar()?.clone();
    let bx = b.at(x, env)?.as_scalar()?.clone();
    let bx1 = b.at(&x1, env)?.as_scalar()?.clone();

    let partial = |t: &Value, env: &Valuation| f.at(&x1, t, env)?.sub(&f.at(x, t, env)?);
    let lower = |t: &Value, env: &Valuation| f.at(&x1, &(&ax1 + t), env);
    let upper = |t: &Value, env: &Valuation| f.at(&x1, &(&bx + t), env);

    let zero = Value::zero();
    let body = integral(&partial, &ax, &bx, env)?;
    let low = integral(&lower, &zero, &(&ax - &ax1), env)?;
    let high = integral(&upper, &zero, &(&bx1 - &bx), env)?;
    body.add(&low)?.add(&high)
}
