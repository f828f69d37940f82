use crate::error::{Error, Result};
use crate::numeric::{Valuation, Value, ValueVector};

pub type InitFn = Box<dyn Fn(&Valuation) -> Result<ValueVector> + Send + Sync>;
pub type StepFn = Box<dyn Fn(&ValueVector, &Value, &Valuation) -> Result<ValueVector> + Send + Sync>;

/// `f(0, y) = g(y)` and `f(x+1, y) = f(x, y) + h(f(x, y), x, y)`.
pub struct Ivp {
    dim: usize,
    g: InitFn,
    h: StepFn,
}

impl Ivp {
    pub fn new(dim: usize, g: InitFn, h: StepFn) -> Self {
        Ivp { dim, g, h }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn checked(&self, v: ValueVector) -> Result<ValueVector> {
        if v.arity() != self.dim {
            return Err(Error::ArityMismatch {
                expected: self.dim,
                found: v.arity(),
            });
        }
        Ok(v)
    }
}

/// The solution at `x`, by `x` forward steps.
pub fn iterate_ivp(p: &Ivp, x: &Value, y: &Valuation) -> Result<ValueVector> {
    if x.is_negative() {
        return Err(Error::NegativeArgument {
            what: "evaluation index",
            value: x.clone(),
        });
    }
    let mut f = p.checked((p.g)(y)?)?;
    let mut t = Value::zero();
    while &t < x {
        let d = p.checked((p.h)(&f, &t, y)?)?;
        f = f.add(&d)?;
        t += &Value::one();
    }
    Ok(f)
}
