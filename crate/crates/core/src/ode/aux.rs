//! Auxiliary functions: the `h` slots, initial conditions and drivers of a
//! problem. Unlike right-hand sides they may use the binary length, powers
//! of two and nested problems.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Location, Result};
use crate::expr::lexer::{tokenize, Cursor, Tok};
use crate::numeric::{self, Value};

use super::eval::Evaluator;
use super::file::OdeFile;

/// A function of the index `x` and the parameters `y`.
pub trait AuxFn: Send + Sync {
    fn eval(&self, x: &Value, y: &[Value], ev: &Evaluator) -> Result<Value>;

    /// Source text in the problem-file language, when there is one.
    fn render(&self) -> Option<String> {
        None
    }
}

struct FnAux<F>(F);

impl<F> AuxFn for FnAux<F>
where
    F: Fn(&Value, &[Value]) -> Result<Value> + Send + Sync,
{
    fn eval(&self, x: &Value, y: &[Value], _: &Evaluator) -> Result<Value> {
        (self.0)(x, y)
    }
}

/// Wraps a closure as an auxiliary function.
pub fn aux_fn<F>(f: F) -> Arc<dyn AuxFn>
where
    F: Fn(&Value, &[Value]) -> Result<Value> + Send + Sync + 'static,
{
    Arc::new(FnAux(f))
}

/// The constant function.
pub fn constant(v: impl Into<Value>) -> Arc<dyn AuxFn> {
    Arc::new(AuxDef::new(AuxExpr::Const(v.into())))
}

/// `2^e`, or 0 for a negative exponent.
pub fn pow2_of(e: &Value) -> Result<Value> {
    if e.is_negative() {
        return Ok(Value::zero());
    }
    match e.to_u64() {
        Some(n) if n <= MAX_POW2 => Ok(Value::pow2(n)),
        _ => Err(Error::InvalidInput(format!("pow2 exponent {e} is too large"))),
    }
}

const MAX_POW2: u64 = 1 << 32;

/// Call of a nested problem file from an auxiliary expression.
#[derive(Clone)]
pub struct OdeCall {
    pub path: String,
    pub file: Arc<OdeFile>,
    pub args: Vec<AuxExpr>,
    pub index: Option<usize>,
}

/// Expression of the auxiliary language. Variables are resolved to
/// positions in an environment slice when parsed.
#[derive(Clone)]
pub enum AuxExpr {
    Const(Value),
    Var { slot: usize, name: String },
    Add(Box<AuxExpr>, Box<AuxExpr>),
    Sub(Box<AuxExpr>, Box<AuxExpr>),
    Mul(Box<AuxExpr>, Box<AuxExpr>),
    Sg(Box<AuxExpr>),
    Len(Box<AuxExpr>),
    Pow2(Box<AuxExpr>),
    Ode(Box<OdeCall>),
}

impl AuxExpr {
    pub fn var(slot: usize, name: impl Into<String>) -> AuxExpr {
        AuxExpr::Var {
            slot,
            name: name.into(),
        }
    }

    pub fn eval(&self, env: &[Value], ev: &Evaluator) -> Result<Value> {
        Ok(match self {
            AuxExpr::Const(v) => v.clone(),
            AuxExpr::Var { slot, .. } => env[*slot].clone(),
            AuxExpr::Add(a, b) => a.eval(env, ev)? + b.eval(env, ev)?,
            AuxExpr::Sub(a, b) => a.eval(env, ev)? - b.eval(env, ev)?,
            AuxExpr::Mul(a, b) => a.eval(env, ev)? * b.eval(env, ev)?,
            AuxExpr::Sg(a) => numeric::sg(&a.eval(env, ev)?),
            AuxExpr::Len(a) => numeric::length(&a.eval(env, ev)?),
            AuxExpr::Pow2(a) => pow2_of(&a.eval(env, ev)?)?,
            AuxExpr::Ode(call) => {
                let args = call
                    .args
                    .iter()
                    .map(|a| a.eval(env, ev))
                    .collect::<Result<Vec<_>>>()?;
                let out = call.file.evaluate(ev, &args)?;
                match call.index {
                    Some(k) if k < out.arity() => out[k].clone(),
                    Some(k) => {
                        return Err(Error::InvalidProblem(format!(
                            "`{}` has no output component {k}",
                            call.path
                        )))
                    }
                    None => out.as_scalar()?.clone(),
                }
            }
        })
    }

    fn precedence(&self) -> u8 {
        match self {
            AuxExpr::Add(..) | AuxExpr::Sub(..) => 1,
            AuxExpr::Mul(..) => 2,
            _ => 3,
        }
    }
}

impl fmt::Display for AuxExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let paren = |f: &mut fmt::Formatter<'_>, e: &AuxExpr, p: bool| {
            if p {
                write!(f, "({e})")
            } else {
                write!(f, "{e}")
            }
        };
        match self {
            AuxExpr::Const(v) => write!(f, "{v}"),
            AuxExpr::Var { name, .. } => f.write_str(name),
            AuxExpr::Add(a, b) | AuxExpr::Sub(a, b) => {
                paren(f, a, false)?;
                f.write_str(if matches!(self, AuxExpr::Add(..)) { " + " } else { " - " })?;
                paren(f, b, b.precedence() <= 1)
            }
            AuxExpr::Mul(a, b) => {
                paren(f, a, a.precedence() <= 1)?;
                f.write_str(" * ")?;
                paren(f, b, b.precedence() <= 2)
            }
            AuxExpr::Sg(a) => write!(f, "sg({a})"),
            AuxExpr::Len(a) => write!(f, "len({a})"),
            AuxExpr::Pow2(a) => write!(f, "pow2({a})"),
            AuxExpr::Ode(call) => {
                write!(f, "ode(\"{}\"", call.path)?;
                for a in &call.args {
                    write!(f, ", {a}")?;
                }
                f.write_str(")")?;
                if let Some(k) = call.index {
                    write!(f, "[{k}]")?;
                }
                Ok(())
            }
        }
    }
}

impl fmt::Debug for AuxExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "AuxExpr({self})")
    }
}

/// An auxiliary expression over `x` (slot 0) and `y.k` (slot `k + 1`).
pub struct AuxDef {
    expr: AuxExpr,
}

impl AuxDef {
    pub fn new(expr: AuxExpr) -> Self {
        AuxDef { expr }
    }

    pub fn expr(&self) -> &AuxExpr {
        &self.expr
    }

    /// Parses `text` with `x` and `y.0 .. y.{params-1}` in scope.
    pub fn parse(
        text: &str,
        params: usize,
        origin: Location,
        loader: &dyn Fn(&str) -> Result<Arc<OdeFile>>,
    ) -> Result<AuxDef> {
        let resolve = |name: &str| -> Option<usize> {
            if name == "x" {
                return Some(0);
            }
            let k: usize = name.strip_prefix("y.")?.parse().ok()?;
            (k < params).then_some(k + 1)
        };
        Ok(AuxDef::new(parse_aux_at(text, origin, &resolve, loader)?))
    }
}

impl AuxFn for AuxDef {
    fn eval(&self, x: &Value, y: &[Value], ev: &Evaluator) -> Result<Value> {
        let mut env = Vec::with_capacity(y.len() + 1);
        env.push(x.clone());
        env.extend_from_slice(y);
        self.expr.eval(&env, ev)
    }

    fn render(&self) -> Option<String> {
        Some(self.expr.to_string())
    }
}

/// Parses an auxiliary expression. `resolve` maps variable names to
/// environment slots; `loader` opens files named in `ode(...)` calls.
pub fn parse_aux_at(
    text: &str,
    origin: Location,
    resolve: &dyn Fn(&str) -> Option<usize>,
    loader: &dyn Fn(&str) -> Result<Arc<OdeFile>>,
) -> Result<AuxExpr> {
    let mut p = AuxParser {
        cur: Cursor::new(tokenize(text, origin)?),
        resolve,
        loader,
    };
    let e = p.expr()?;
    p.cur.expect_eof()?;
    Ok(e)
}

struct AuxParser<'a> {
    cur: Cursor,
    resolve: &'a dyn Fn(&str) -> Option<usize>,
    loader: &'a dyn Fn(&str) -> Result<Arc<OdeFile>>,
}

impl AuxParser<'_> {
    fn expr(&mut self) -> Result<AuxExpr> {
        let mut acc = self.term()?;
        loop {
            if self.cur.eat(&Tok::Plus) {
                acc = AuxExpr::Add(Box::new(acc), Box::new(self.term()?));
            } else if self.cur.eat(&Tok::Minus) {
                acc = AuxExpr::Sub(Box::new(acc), Box::new(self.term()?));
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<AuxExpr> {
        let mut acc = self.factor()?;
        while self.cur.eat(&Tok::Star) {
            acc = AuxExpr::Mul(Box::new(acc), Box::new(self.factor()?));
        }
        Ok(acc)
    }

    fn unary(&mut self, name: &str) -> Result<Box<AuxExpr>> {
        self.cur.expect(&Tok::LParen, &format!("after `{name}`"))?;
        let e = self.expr()?;
        self.cur.expect(&Tok::RParen, &format!("to close `{name}(`"))?;
        Ok(Box::new(e))
    }

    fn factor(&mut self) -> Result<AuxExpr> {
        let tok = self.cur.peek().clone();
        match tok.tok {
            Tok::Int(v) => {
                self.cur.bump();
                Ok(AuxExpr::Const(v))
            }
            Tok::Minus => {
                self.cur.bump();
                Ok(match self.factor()? {
                    AuxExpr::Const(v) => AuxExpr::Const(-v),
                    e => AuxExpr::Mul(Box::new(AuxExpr::Const(Value::from(-1))), Box::new(e)),
                })
            }
            Tok::LParen => {
                self.cur.bump();
                let e = self.expr()?;
                self.cur.expect(&Tok::RParen, "to close `(`")?;
                Ok(e)
            }
            Tok::Ident(name) => {
                self.cur.bump();
                match name.as_str() {
                    "sg" => Ok(AuxExpr::Sg(self.unary("sg")?)),
                    "len" => Ok(AuxExpr::Len(self.unary("len")?)),
                    "pow2" => Ok(AuxExpr::Pow2(self.unary("pow2")?)),
                    "pow2len" => Ok(AuxExpr::Pow2(Box::new(AuxExpr::Len(self.unary("pow2len")?)))),
                    "ode" => self.ode_call(),
                    _ => match (self.resolve)(&name) {
                        Some(slot) => Ok(AuxExpr::Var { slot, name }),
                        None => Err(Error::UnknownIdentifier {
                            name,
                            location: tok.at,
                        }),
                    },
                }
            }
            _ => Err(self.cur.unexpected("expected an operand")),
        }
    }

    fn ode_call(&mut self) -> Result<AuxExpr> {
        self.cur.expect(&Tok::LParen, "after `ode`")?;
        let at = self.cur.peek().at;
        let path = match self.cur.bump().tok {
            Tok::Str(s) => s,
            _ => return Err(Error::syntax(at.line, at.column, "expected a quoted file name")),
        };
        let file = (self.loader)(&path)?;
        let mut args = Vec::new();
        while self.cur.eat(&Tok::Comma) {
            args.push(self.expr()?);
        }
        self.cur.expect(&Tok::RParen, "to close `ode(`")?;
        if args.len() != file.arity() {
            return Err(Error::syntax(
                at.line,
                at.column,
                format!("`{path}` takes {} arguments, got {}", file.arity(), args.len()),
            ));
        }
        let index = if self.cur.eat(&Tok::LBracket) {
            let at = self.cur.peek().at;
            let k = match self.cur.bump().tok {
                Tok::Int(v) => v.to_usize(),
                _ => None,
            }
            .ok_or_else(|| Error::syntax(at.line, at.column, "expected a component index"))?;
            self.cur.expect(&Tok::RBracket, "to close `[`")?;
            Some(k)
        } else {
            None
        };
        Ok(AuxExpr::Ode(Box::new(OdeCall {
            path,
            file,
            args,
            index,
        })))
    }
}
