use std::fmt;
use std::sync::{Arc, OnceLock};

use crate::error::{Error, Result};
use crate::expr::{blind, linear_decompose, BoundExpr, Expr, LinearDecomposition, Scope};
use crate::numeric::{Value, ValueVector};

use super::aux::{constant, AuxFn};
use super::eval::Evaluator;

pub fn f_name(i: usize) -> String {
    format!("f.{i}")
}

pub fn y_name(k: usize) -> String {
    format!("y.{k}")
}

pub fn h_name(name: &str) -> String {
    format!("h.{name}")
}

/// The function `L` whose changes drive an L-ODE.
#[derive(Clone)]
pub enum Driver {
    /// The binary length of `x`; its jumps have a closed form.
    Length,
    /// An arbitrary function of `x` and `y`, whose jumps are found by
    /// scanning every index below `x`.
    Scan(Arc<dyn AuxFn>),
}

impl fmt::Debug for Driver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Driver::Length => f.write_str("Length"),
            Driver::Scan(l) => write!(f, "Scan({})", l.render().unwrap_or_else(|| "<fn>".into())),
        }
    }
}

/// `f(x+1, y) = f(x, y) + (L(x+1, y) - L(x, y)) * u(f(x, y), h(x, y), x, y)`
/// with `f(0, y) = g(y)`.
///
/// The right-hand side `u` is a vector of sg-polynomials over the terms
/// `f.i`, `h.<name>`, `x` and `y.k`.
pub struct LOdeProblem {
    dim: usize,
    params: usize,
    driver: Driver,
    init: Vec<Arc<dyn AuxFn>>,
    aux: Vec<(String, Arc<dyn AuxFn>)>,
    rhs: Vec<Expr>,
    scope: Scope,
    bound: Vec<BoundExpr>,
    guard_form: OnceLock<Option<Arc<GuardForm>>>,
}

/// Coefficients of the linear form `A f + B`, with every pivot outside
/// `sg` replaced by 1, bound to the problem scope.
pub(crate) struct GuardForm {
    pub a: Vec<Vec<BoundExpr>>,
    pub b: Vec<BoundExpr>,
}

impl GuardForm {
    pub(crate) fn new(d: &LinearDecomposition, scope: &Scope) -> Result<GuardForm> {
        let pivots = d.pivots();
        let a = (0..d.q1().rows())
            .map(|i| {
                d.q1()
                    .row(i)
                    .iter()
                    .map(|e| BoundExpr::bind(&blind(e, pivots), scope))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let b = d
            .q2()
            .iter()
            .map(|e| BoundExpr::bind(&blind(e, pivots), scope))
            .collect::<Result<Vec<_>>>()?;
        Ok(GuardForm { a, b })
    }
}

impl fmt::Debug for LOdeProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LOdeProblem")
            .field("dim", &self.dim)
            .field("params", &self.params)
            .field("driver", &self.driver)
            .field("aux", &self.aux_names().collect::<Vec<_>>())
            .field("rhs", &self.rhs.iter().map(ToString::to_string).collect::<Vec<_>>())
            .finish()
    }
}

impl LOdeProblem {
    pub fn builder(dim: usize) -> LOdeBuilder {
        LOdeBuilder {
            dim,
            params: 0,
            driver: Driver::Length,
            init: Vec::new(),
            aux: Vec::new(),
            rhs: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn params(&self) -> usize {
        self.params
    }

    pub fn driver(&self) -> &Driver {
        &self.driver
    }

    pub fn rhs(&self) -> &[Expr] {
        &self.rhs
    }

    pub fn init(&self) -> &[Arc<dyn AuxFn>] {
        &self.init
    }

    pub fn aux(&self) -> &[(String, Arc<dyn AuxFn>)] {
        &self.aux
    }

    pub fn aux_names(&self) -> impl Iterator<Item = &str> {
        self.aux.iter().map(|(n, _)| n.as_str())
    }

    /// Term names of the solution components, `f.0 .. f.{dim-1}`.
    pub fn pivots(&self) -> Vec<String> {
        (0..self.dim).map(f_name).collect()
    }

    /// Slot layout used by bound right-hand sides: the components, then
    /// the auxiliary slots, then `x`, then the parameters.
    pub fn scope(&self) -> &Scope {
        &self.scope
    }

    pub(crate) fn bound_rhs(&self) -> &[BoundExpr] {
        &self.bound
    }

    pub(crate) fn check_params(&self, y: &[Value]) -> Result<()> {
        if y.len() != self.params {
            return Err(Error::ArityMismatch {
                expected: self.params,
                found: y.len(),
            });
        }
        Ok(())
    }

    /// `g(y)`.
    pub fn initial(&self, y: &[Value], ev: &Evaluator) -> Result<ValueVector> {
        self.check_params(y)?;
        let zero = Value::zero();
        self.init.iter().map(|g| g.eval(&zero, y, ev)).collect()
    }

    pub(crate) fn guard_form(&self) -> Result<Arc<GuardForm>> {
        let cached = self.guard_form.get_or_init(|| {
            check_linear(self)
                .and_then(|d| GuardForm::new(&d, &self.scope))
                .ok()
                .map(Arc::new)
        });
        match cached {
            Some(form) => Ok(Arc::clone(form)),
            // recompute to surface the error itself
            None => check_linear(self).and_then(|d| GuardForm::new(&d, &self.scope).map(Arc::new)),
        }
    }
}

/// Runs the linearity analysis on the right-hand side with the solution
/// components as pivots. On success the decomposition holds `A` (as `Q1`)
/// and `B` (as `Q2`) of `u = A f + B`.
pub fn check_linear(p: &LOdeProblem) -> Result<LinearDecomposition> {
    linear_decompose(p.rhs(), &p.pivots())
}

pub struct LOdeBuilder {
    dim: usize,
    params: usize,
    driver: Driver,
    init: Vec<Arc<dyn AuxFn>>,
    aux: Vec<(String, Arc<dyn AuxFn>)>,
    rhs: Vec<Expr>,
}

impl LOdeBuilder {
    pub fn params(mut self, params: usize) -> Self {
        self.params = params;
        self
    }

    pub fn driver(mut self, driver: Driver) -> Self {
        self.driver = driver;
        self
    }

    pub fn init(mut self, init: Vec<Arc<dyn AuxFn>>) -> Self {
        self.init = init;
        self
    }

    pub fn init_values(mut self, values: impl IntoIterator<Item = Value>) -> Self {
        self.init = values.into_iter().map(constant).collect();
        self
    }

    pub fn aux(mut self, name: impl Into<String>, h: Arc<dyn AuxFn>) -> Self {
        self.aux.push((name.into(), h));
        self
    }

    pub fn aux_list(mut self, aux: Vec<(String, Arc<dyn AuxFn>)>) -> Self {
        self.aux.extend(aux);
        self
    }

    pub fn rhs(mut self, rhs: Vec<Expr>) -> Self {
        self.rhs = rhs;
        self
    }

    pub fn build(self) -> Result<LOdeProblem> {
        let bad = |m: String| Err(Error::InvalidProblem(m));
        if self.dim == 0 {
            return bad("dimension must be at least 1".into());
        }
        if self.init.len() != self.dim {
            return bad(format!("{} initial values for dimension {}", self.init.len(), self.dim));
        }
        if self.rhs.len() != self.dim {
            return bad(format!("{} right-hand sides for dimension {}", self.rhs.len(), self.dim));
        }
        let mut scope = Scope::new((0..self.dim).map(f_name));
        for (name, _) in &self.aux {
            if scope.slot(&h_name(name)).is_some() {
                return bad(format!("auxiliary `{name}` defined twice"));
            }
            scope.push(h_name(name));
        }
        scope.push("x");
        for k in 0..self.params {
            scope.push(y_name(k));
        }
        let bound = self
            .rhs
            .iter()
            .map(|e| {
                BoundExpr::bind(e, &scope).map_err(|err| match err {
                    Error::UnboundTerm(t) => {
                        Error::InvalidProblem(format!("right-hand side uses unknown term `{t}`"))
                    }
                    other => other,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(LOdeProblem {
            dim: self.dim,
            params: self.params,
            driver: self.driver,
            init: self.init,
            aux: self.aux,
            rhs: self.rhs,
            scope,
            bound,
            guard_form: OnceLock::new(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    #[test]
    fn builder_validates_shape_and_terms() {
        let ok = LOdeProblem::builder(1)
            .init_values([Value::from(2)])
            .rhs(vec![parse("f.0").unwrap()])
            .build();
        assert!(ok.is_ok());
        let unknown = LOdeProblem::builder(1)
            .init_values([Value::from(2)])
            .rhs(vec![parse("f.0 * y.0").unwrap()])
            .build();
        assert!(matches!(unknown, Err(Error::InvalidProblem(_))));
        let short = LOdeProblem::builder(2)
            .init_values([Value::from(2)])
            .rhs(vec![parse("f.0").unwrap()])
            .build();
        assert!(short.is_err());
    }

    #[test]
    fn check_linear_examples() {
        let p = LOdeProblem::builder(1)
            .params(1)
            .aux("g", constant(3))
            .init_values([Value::from(1)])
            .rhs(vec![parse("f.0 * (h.g - 1)").unwrap()])
            .build()
            .unwrap();
        let d = check_linear(&p).unwrap();
        assert_eq!(d.q1().get(0, 0).to_string(), "h.g - 1");
        assert_eq!(d.q2()[0], Expr::constant(0));

        let p = LOdeProblem::builder(1)
            .init_values([Value::from(2)])
            .rhs(vec![parse("f.0 * f.0 - f.0").unwrap()])
            .build()
            .unwrap();
        assert!(matches!(check_linear(&p), Err(Error::NotEssentiallyLinear { degree: 2, .. })));
    }
}
