//! Expressions with term names resolved to slot indices, for evaluating the
//! same right-hand side many times without map lookups.

use crate::error::{Error, Result};
use crate::numeric::{self, Value};

use super::ast::Expr;

/// An ordered list of term names; the position of a name is its slot.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Scope {
    names: Vec<String>,
}

impl Scope {
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Self {
        Scope {
            names: names.into_iter().map(Into::into).collect(),
        }
    }

    pub fn push(&mut self, name: impl Into<String>) -> usize {
        self.names.push(name.into());
        self.names.len() - 1
    }

    pub fn slot(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BoundExpr {
    Const(Value),
    Slot(usize),
    Add(Box<BoundExpr>, Box<BoundExpr>),
    Sub(Box<BoundExpr>, Box<BoundExpr>),
    Mul(Box<BoundExpr>, Box<BoundExpr>),
    Sg(Box<BoundExpr>),
}

impl BoundExpr {
    /// Resolves every term against `scope`. Constant subtrees are folded,
    /// and so is any product with a literal zero factor.
    pub fn bind(e: &Expr, scope: &Scope) -> Result<BoundExpr> {
        use BoundExpr as B;
        let pair = |a: &Expr, b: &Expr| -> Result<(BoundExpr, BoundExpr)> {
            Ok((Self::bind(a, scope)?, Self::bind(b, scope)?))
        };
        Ok(match e {
            Expr::Const(v) => B::Const(v.clone()),
            Expr::Term(n) => B::Slot(scope.slot(n).ok_or_else(|| Error::UnboundTerm(n.clone()))?),
            Expr::Add(a, b) => match pair(a, b)? {
                (B::Const(x), B::Const(y)) => B::Const(x + y),
                (B::Const(z), o) | (o, B::Const(z)) if z.is_zero() => o,
                (x, y) => B::Add(Box::new(x), Box::new(y)),
            },
            Expr::Sub(a, b) => match pair(a, b)? {
                (B::Const(x), B::Const(y)) => B::Const(x - y),
                (o, B::Const(z)) if z.is_zero() => o,
                (x, y) => B::Sub(Box::new(x), Box::new(y)),
            },
            Expr::Mul(a, b) => match pair(a, b)? {
                (B::Const(x), B::Const(y)) => B::Const(x * y),
                (B::Const(z), _) | (_, B::Const(z)) if z.is_zero() => B::Const(Value::zero()),
                (B::Const(z), o) | (o, B::Const(z)) if z == Value::one() => o,
                (x, y) => B::Mul(Box::new(x), Box::new(y)),
            },
            Expr::Sg(a) => match Self::bind(a, scope)? {
                B::Const(x) => B::Const(numeric::sg(&x)),
                o => B::Sg(Box::new(o)),
            },
        })
    }

    pub fn eval(&self, slots: &[Value]) -> Value {
        match self {
            BoundExpr::Const(v) => v.clone(),
            BoundExpr::Slot(i) => slots[*i].clone(),
            BoundExpr::Add(a, b) => a.eval(slots) + b.eval(slots),
            BoundExpr::Sub(a, b) => a.eval(slots) - b.eval(slots),
            BoundExpr::Mul(a, b) => a.eval(slots) * b.eval(slots),
            BoundExpr::Sg(a) => {
                if a.eval(slots).is_positive() {
                    Value::one()
                } else {
                    Value::zero()
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, BoundExpr::Const(v) if v.is_zero())
    }
}
