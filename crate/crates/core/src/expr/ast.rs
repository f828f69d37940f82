use std::collections::BTreeSet;
use std::fmt;
use std::ops;

use crate::error::{Error, Result};
use crate::numeric::{self, Valuation, Value};

/// An sg-polynomial expression: integer constants and named terms combined
/// with `+`, `-`, `*` and the sign function.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Expr {
    Const(Value),
    Term(String),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Sg(Box<Expr>),
}

impl Expr {
    pub fn constant(v: impl Into<Value>) -> Expr {
        Expr::Const(v.into())
    }

    pub fn term(name: impl Into<String>) -> Expr {
        Expr::Term(name.into())
    }

    pub fn sg(e: Expr) -> Expr {
        Expr::Sg(Box::new(e))
    }

    /// `(1 - sg(e)) * (1 - sg(-1 * e))`: 1 exactly when `e = 0`.
    pub fn cosg(e: Expr) -> Expr {
        let neg = Expr::constant(-1) * e.clone();
        (Expr::constant(1) - Expr::sg(e)) * (Expr::constant(1) - Expr::sg(neg))
    }

    /// `z + cosg(x) * (y - z)`: `y` when `x = 0`, `z` otherwise.
    pub fn cond(x: Expr, y: Expr, z: Expr) -> Expr {
        z.clone() + Expr::cosg(x) * (y - z)
    }

    pub fn is_const(&self) -> bool {
        matches!(self, Expr::Const(_))
    }

    /// Evaluates exactly; every term must be bound in `env`.
    pub fn eval(&self, env: &Valuation) -> Result<Value> {
        Ok(match self {
            Expr::Const(v) => v.clone(),
            Expr::Term(name) => env.get(name)?.clone(),
            Expr::Add(a, b) => a.eval(env)? + b.eval(env)?,
            Expr::Sub(a, b) => a.eval(env)? - b.eval(env)?,
            Expr::Mul(a, b) => {
                let left = a.eval(env)?;
                // still evaluate the right side so unbound terms are reported
                let right = b.eval(env)?;
                left * right
            }
            Expr::Sg(e) => numeric::sg(&e.eval(env)?),
        })
    }

    /// Names of all terms occurring in the expression.
    pub fn terms(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_terms(&mut out);
        out
    }

    fn collect_terms(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Const(_) => {}
            Expr::Term(n) => {
                out.insert(n.clone());
            }
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => {
                a.collect_terms(out);
                b.collect_terms(out);
            }
            Expr::Sg(e) => e.collect_terms(out),
        }
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        match self {
            Expr::Const(_) | Expr::Term(_) => 1,
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => 1 + a.size() + b.size(),
            Expr::Sg(e) => 1 + e.size(),
        }
    }

    /// Replaces every occurrence of term `name` by `with`.
    pub fn substitute(&self, name: &str, with: &Expr) -> Expr {
        match self {
            Expr::Term(n) if n == name => with.clone(),
            Expr::Const(_) | Expr::Term(_) => self.clone(),
            Expr::Add(a, b) => a.substitute(name, with) + b.substitute(name, with),
            Expr::Sub(a, b) => a.substitute(name, with) - b.substitute(name, with),
            Expr::Mul(a, b) => a.substitute(name, with) * b.substitute(name, with),
            Expr::Sg(e) => Expr::sg(e.substitute(name, with)),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) => 2,
            _ => 3,
        }
    }
}

impl ops::Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        Expr::Add(Box::new(self), Box::new(rhs))
    }
}

impl ops::Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        Expr::Sub(Box::new(self), Box::new(rhs))
    }
}

impl ops::Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::Mul(Box::new(self), Box::new(rhs))
    }
}

fn write_operand(f: &mut fmt::Formatter<'_>, e: &Expr, parens: bool) -> fmt::Result {
    if parens {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

/// Renders in the grammar accepted by [`crate::expr::parse`], with the
/// minimum parentheses needed to reproduce the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(v) => write!(f, "{v}"),
            Expr::Term(n) => f.write_str(n),
            Expr::Sg(e) => write!(f, "sg({e})"),
            Expr::Add(a, b) | Expr::Sub(a, b) => {
                let op = if matches!(self, Expr::Add(..)) { "+" } else { "-" };
                write_operand(f, a, false)?;
                write!(f, " {op} ")?;
                write_operand(f, b, b.precedence() <= 1)
            }
            Expr::Mul(a, b) => {
                write_operand(f, a, a.precedence() <= 1)?;
                f.write_str(" * ")?;
                write_operand(f, b, b.precedence() <= 2)
            }
        }
    }
}

/// A rectangular arrangement of expressions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExprMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Expr>,
}

impl ExprMatrix {
    pub fn from_rows(rows: Vec<Vec<Expr>>) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::InvalidInput("matrix rows have different lengths".into()));
        }
        let n = rows.len();
        Ok(ExprMatrix {
            rows: n,
            cols,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn filled(rows: usize, cols: usize, e: Expr) -> Self {
        ExprMatrix {
            rows,
            cols,
            data: vec![e; rows * cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Expr {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, e: Expr) {
        self.data[i * self.cols + j] = e;
    }

    pub fn row(&self, i: usize) -> &[Expr] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn entries(&self) -> impl Iterator<Item = &Expr> {
        self.data.iter()
    }
}
