//! Linear systems `f' = A f + B` and their closed-form solution
//!
//! `f(x) = sum_{u=-1}^{x-1} (prod_{t=u+1}^{x-1} (I + A(t))) B(u)` with
//! `B(-1) = G`, the product ordered with the highest index on the left.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::expr::{degree, Expr, ExprMatrix};
use crate::numeric::{Valuation, Value, ValueVector};

use super::ivp::Ivp;
use super::problem::{f_name, h_name};

pub type AuxClosure = Arc<dyn Fn(&Value, &Valuation) -> Result<Value> + Send + Sync>;

/// `f(0, y) = G(y)`, `f(x+1, y) = f(x, y) + A(x, y) f(x, y) + B(x, y)`.
///
/// `G` is written over the parameter names of `y`; `A` and `B` may also
/// use `x`, the components `f.i` (only under `sg`), and auxiliary
/// functions `h.<name>` of `x` and `y`.
#[derive(Clone)]
pub struct LinearOdeSystem {
    g: Vec<Expr>,
    a: ExprMatrix,
    b: Vec<Expr>,
    aux: Vec<(String, AuxClosure)>,
}

impl fmt::Debug for LinearOdeSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |v: &[Expr]| v.iter().map(ToString::to_string).collect::<Vec<_>>();
        f.debug_struct("LinearOdeSystem")
            .field("g", &show(&self.g))
            .field(
                "a",
                &(0..self.a.rows()).map(|i| show(self.a.row(i))).collect::<Vec<_>>(),
            )
            .field("b", &show(&self.b))
            .finish()
    }
}

type Matrix = Vec<Vec<Value>>;

fn identity(d: usize) -> Matrix {
    (0..d)
        .map(|i| (0..d).map(|j| if i == j { Value::one() } else { Value::zero() }).collect())
        .collect()
}

fn mat_mul(p: &Matrix, q: &Matrix) -> Matrix {
    let d = q.len();
    p.iter()
        .map(|row| {
            (0..d)
                .map(|j| row.iter().zip(q).map(|(a, qr)| a * &qr[j]).sum())
                .collect()
        })
        .collect()
}

fn mat_vec(p: &Matrix, v: &[Value]) -> Vec<Value> {
    p.iter()
        .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
        .collect()
}

/// `I + A`.
fn shifted(a: &Matrix) -> Matrix {
    let mut m = a.clone();
    for (i, row) in m.iter_mut().enumerate() {
        row[i] += &Value::one();
    }
    m
}

impl LinearOdeSystem {
    /// Checks shapes and that `A`, `B` are essentially constant in every
    /// component.
    pub fn new(g: Vec<Expr>, a: ExprMatrix, b: Vec<Expr>) -> Result<Self> {
        let d = g.len();
        if d == 0 || a.rows() != d || a.cols() != d || b.len() != d {
            return Err(Error::InvalidProblem(format!(
                "linear system needs a {d}x{d} matrix and {d} affine terms"
            )));
        }
        for (entry, e) in a.entries().chain(&b).enumerate() {
            for i in 0..d {
                let name = f_name(i);
                let deg = degree(e, &name);
                if deg > 0 {
                    return Err(Error::NotEssentiallyLinear {
                        entry,
                        term: name,
                        degree: deg + 1,
                        witness: e.to_string(),
                    });
                }
            }
        }
        Ok(LinearOdeSystem {
            g,
            a,
            b,
            aux: Vec::new(),
        })
    }

    /// Adds an auxiliary function, referenced as `h.<name>`.
    pub fn with_aux(mut self, name: impl Into<String>, h: AuxClosure) -> Self {
        self.aux.push((name.into(), h));
        self
    }

    pub fn dim(&self) -> usize {
        self.g.len()
    }

    pub fn a(&self) -> &ExprMatrix {
        &self.a
    }

    pub fn b(&self) -> &[Expr] {
        &self.b
    }

    /// Whether `A` or `B` read the solution at all (necessarily under `sg`).
    pub fn depends_on_f(&self) -> bool {
        let names: Vec<String> = (0..self.dim()).map(f_name).collect();
        self.a
            .entries()
            .chain(&self.b)
            .any(|e| e.terms().iter().any(|t| names.contains(t)))
    }

    pub fn initial(&self, y: &Valuation) -> Result<ValueVector> {
        self.g.iter().map(|e| e.eval(y)).collect()
    }

    fn env_at(&self, t: &Value, f: Option<&ValueVector>, y: &Valuation) -> Result<Valuation> {
        let mut env = y.clone();
        env.set("x", t.clone());
        if let Some(f) = f {
            for (i, v) in f.iter().enumerate() {
                env.set(f_name(i), v.clone());
            }
        }
        for (name, h) in &self.aux {
            env.set(h_name(name), h(t, y)?);
        }
        Ok(env)
    }

    /// `A(t)` and `B(t)`, evaluated with `f(t)` when given.
    pub fn coefficients(
        &self,
        t: &Value,
        f: Option<&ValueVector>,
        y: &Valuation,
    ) -> Result<(Matrix, Vec<Value>)> {
        let env = self.env_at(t, f, y)?;
        let d = self.dim();
        let a = (0..d)
            .map(|i| self.a.row(i).iter().map(|e| e.eval(&env)).collect())
            .collect::<Result<Matrix>>()?;
        let b = self.b.iter().map(|e| e.eval(&env)).collect::<Result<Vec<_>>>()?;
        Ok((a, b))
    }

    /// The system as an IVP with `h(f, x, y) = A f + B`.
    pub fn to_ivp(&self) -> Ivp {
        let g = self.clone();
        let h = self.clone();
        Ivp::new(
            self.dim(),
            Box::new(move |y| g.initial(y)),
            Box::new(move |f, t, y| {
                let (a, b) = h.coefficients(t, Some(f), y)?;
                Ok(mat_vec(&a, f.components())
                    .into_iter()
                    .zip(b)
                    .map(|(af, b)| af + b)
                    .collect())
            }),
        )
    }
}

/// Sum of the closed form over `u = -1 .. n-1` for coefficient tables
/// `a[t]`, `b[t]` (`t < n`) and initial vector `g`.
fn closed_form(g: &[Value], a: &[Matrix], b: &[Vec<Value>], n: usize) -> Vec<Value> {
    let d = g.len();
    let mut acc = vec![Value::zero(); d];
    // suffix product (I + A(n-1)) ... (I + A(u+1)), built going down
    let mut prod = identity(d);
    for u in (-1..n as i64).rev() {
        let term = if u < 0 { g } else { &b[u as usize][..] };
        for (s, v) in acc.iter_mut().zip(mat_vec(&prod, term)) {
            *s += &v;
        }
        if u >= 0 {
            prod = mat_mul(&prod, &shifted(&a[u as usize]));
        }
    }
    acc
}

/// Evaluates the closed form at `x`. When `A` or `B` read the solution,
/// `f(t)` is produced for every `t < x` first, each through the closed form
/// over the coefficients already known.
pub fn solve_linear_closed(s: &LinearOdeSystem, x: &Value, y: &Valuation) -> Result<ValueVector> {
    if x.is_negative() {
        return Err(Error::NegativeArgument {
            what: "evaluation index",
            value: x.clone(),
        });
    }
    let n = x
        .to_usize()
        .ok_or_else(|| Error::InvalidInput(format!("index {x} is too large")))?;
    let g = s.initial(y)?.into_components();
    let mut a = Vec::with_capacity(n);
    let mut b = Vec::with_capacity(n);
    if !s.depends_on_f() {
        for t in 0..n {
            let (at, bt) = s.coefficients(&Value::from(t), None, y)?;
            a.push(at);
            b.push(bt);
        }
        return Ok(closed_form(&g, &a, &b, n).into());
    }
    let mut f = ValueVector::new(g.clone());
    for t in 0..n {
        let (at, bt) = s.coefficients(&Value::from(t), Some(&f), y)?;
        a.push(at);
        b.push(bt);
        f = closed_form(&g, &a, &b, t + 1).into();
    }
    Ok(f)
}
