//! Worked examples as ready-made problems, each with a direct reference
//! implementation to compare against.

use std::sync::{Arc, OnceLock};

use crate::error::{Error, Result};
use crate::expr::{Expr, ExprMatrix};
use crate::numeric::{self, Valuation, Value, ValueVector};
use crate::ode::{
    iterate_ivp, solve_linear_closed, AuxClosure, Evaluator, Ivp, LinearOdeSystem, OdeFile,
};
use crate::rm::RegisterProgram;

/// Problem files shipped with the library, by name.
pub const PROBLEMS: &[(&str, &str)] = &[
    ("pow2_length", include_str!("../../problems/pow2_length.ode")),
    ("pow2_lenprod", include_str!("../../problems/pow2_lenprod.ode")),
    ("sqrt", include_str!("../../problems/sqrt.ode")),
    ("int_div", include_str!("../../problems/int_div.ode")),
    ("suffix", include_str!("../../problems/suffix.ode")),
    ("bprod", include_str!("../../problems/bprod.ode")),
    ("square", include_str!("../../problems/square.ode")),
];

/// Register-machine programs shipped with the library, by name.
pub const PROGRAMS: &[(&str, &str)] = &[
    ("addition", include_str!("../../programs/addition.rm")),
    ("max", include_str!("../../programs/max.rm")),
    ("monus", include_str!("../../programs/monus.rm")),
    ("copy", include_str!("../../programs/copy.rm")),
    ("counter", include_str!("../../programs/counter.rm")),
];

fn lookup<'a>(table: &'a [(&str, &str)], name: &str, what: &str) -> Result<&'a str> {
    table
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| *text)
        .ok_or_else(|| Error::InvalidInput(format!("no {what} named `{name}`")))
}

/// A shipped problem file, parsed once.
pub fn problem(name: &str) -> Result<Arc<OdeFile>> {
    static CACHE: OnceLock<Vec<(&'static str, Arc<OdeFile>)>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| {
        PROBLEMS
            .iter()
            .map(|(n, text)| {
                let file = OdeFile::parse(text).unwrap_or_else(|e| panic!("shipped `{n}`: {e}"));
                (*n, Arc::new(file))
            })
            .collect()
    });
    cache
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, f)| Arc::clone(f))
        .ok_or_else(|| Error::InvalidInput(format!("no problem named `{name}`")))
}

pub fn problem_source(name: &str) -> Result<&'static str> {
    lookup(PROBLEMS, name, "problem")
}

pub fn program(name: &str) -> Result<RegisterProgram> {
    lookup(PROGRAMS, name, "program")?.parse()
}

fn non_negative(v: &Value, what: &'static str) -> Result<()> {
    if v.is_negative() {
        return Err(Error::NegativeArgument {
            what,
            value: v.clone(),
        });
    }
    Ok(())
}

fn run_scalar(name: &str, args: &[Value]) -> Result<Value> {
    let out = problem(name)?.evaluate(&Evaluator::default(), args)?;
    Ok(out.as_scalar()?.clone())
}

/// `min { f(z) : 0 <= z <= x }` as the solution of
/// `F(0) = f(0)`, `F' = if F < f(t+1) then 0 else f(t+1) - F`.
pub fn prefix_min<F>(f: F, x: &Value) -> Result<Value>
where
    F: Fn(&Value) -> Result<Value> + Send + Sync + 'static,
{
    non_negative(x, "prefix_min bound")?;
    let ivp = prefix_min_ivp(f);
    Ok(iterate_ivp(&ivp, x, &Valuation::new())?.as_scalar()?.clone())
}

pub fn prefix_min_ivp<F>(f: F) -> Ivp
where
    F: Fn(&Value) -> Result<Value> + Send + Sync + 'static,
{
    let f = Arc::new(f);
    let g = Arc::clone(&f);
    Ivp::new(
        1,
        Box::new(move |_| Ok(ValueVector::scalar(g(&Value::zero())?))),
        Box::new(move |state, t, _| {
            let cur = state.as_scalar()?;
            let next = f(&(t + &Value::one()))?;
            // sg(F - f + 1) is 1 exactly when F >= f
            let keep = numeric::sg(&(cur - &next + Value::one()));
            Ok(ValueVector::scalar(keep * (next - cur)))
        }),
    )
}

pub fn floor_sqrt(x: &Value) -> Result<Value> {
    non_negative(x, "square root argument")?;
    run_scalar("sqrt", std::slice::from_ref(x))
}

pub fn int_div(x: &Value, y: &Value) -> Result<Value> {
    non_negative(x, "dividend")?;
    non_negative(y, "divisor")?;
    if y.is_zero() {
        return Err(Error::DivisionByZero);
    }
    run_scalar("int_div", &[x.clone(), y.clone()])
}

/// `x mod 2^len(y)`.
pub fn suffix(x: &Value, y: &Value) -> Result<Value> {
    non_negative(x, "suffix argument")?;
    non_negative(y, "suffix width")?;
    run_scalar("suffix", &[x.clone(), y.clone()])
}

pub fn pow2_length(x: &Value) -> Result<Value> {
    non_negative(x, "pow2_length argument")?;
    run_scalar("pow2_length", std::slice::from_ref(x))
}

pub fn pow2_lenprod(x: &Value, y: &Value) -> Result<Value> {
    non_negative(x, "pow2_lenprod argument")?;
    non_negative(y, "pow2_lenprod argument")?;
    run_scalar("pow2_lenprod", &[x.clone(), y.clone()])
}

/// `f(0) = 0`, `f' = g(x, y)`.
pub fn bsum_system(g: AuxClosure) -> LinearOdeSystem {
    LinearOdeSystem::new(
        vec![Expr::constant(0)],
        ExprMatrix::filled(1, 1, Expr::constant(0)),
        vec![Expr::term("h.g")],
    )
    .expect("bounded sum is linear")
    .with_aux("g", g)
}

/// `f(0) = 1`, `f' = f * (g(x, y) - 1)`.
pub fn bprod_system(g: AuxClosure) -> LinearOdeSystem {
    LinearOdeSystem::new(
        vec![Expr::constant(1)],
        ExprMatrix::filled(1, 1, Expr::term("h.g") - Expr::constant(1)),
        vec![Expr::constant(0)],
    )
    .expect("bounded product is linear")
    .with_aux("g", g)
}

/// `sum_{z < x} g(z, y)`.
pub fn bsum(g: AuxClosure, x: &Value, y: &Valuation) -> Result<Value> {
    non_negative(x, "bsum bound")?;
    Ok(solve_linear_closed(&bsum_system(g), x, y)?.as_scalar()?.clone())
}

/// `prod_{z < x} g(z, y)`.
pub fn bprod(g: AuxClosure, x: &Value, y: &Valuation) -> Result<Value> {
    non_negative(x, "bprod bound")?;
    Ok(solve_linear_closed(&bprod_system(g), x, y)?.as_scalar()?.clone())
}

/// `f(0) = 0`, `f' = 1 - f`, whose solution over the naturals is `sg`.
pub fn sign_ivp() -> Ivp {
    Ivp::new(
        1,
        Box::new(|_| Ok(ValueVector::scalar(Value::zero()))),
        Box::new(|f, _, _| Ok(ValueVector::scalar(Value::one() - f.as_scalar()?))),
    )
}

pub fn sign(x: &Value) -> Result<Value> {
    non_negative(x, "sign argument")?;
    Ok(iterate_ivp(&sign_ivp(), x, &Valuation::new())?.as_scalar()?.clone())
}

type Fun = fn(&[Value]) -> Result<Value>;

/// A stdlib function with its reference implementation.
pub struct NamedProgram {
    pub name: &'static str,
    pub args: &'static [&'static str],
    pub summary: &'static str,
    run: Fun,
    oracle: Fun,
}

impl NamedProgram {
    fn check(&self, args: &[Value]) -> Result<()> {
        if args.len() != self.args.len() {
            return Err(Error::ArityMismatch {
                expected: self.args.len(),
                found: args.len(),
            });
        }
        Ok(())
    }

    pub fn run(&self, args: &[Value]) -> Result<Value> {
        self.check(args)?;
        (self.run)(args)
    }

    pub fn oracle(&self, args: &[Value]) -> Result<Value> {
        self.check(args)?;
        for a in args {
            non_negative(a, "argument")?;
        }
        (self.oracle)(args)
    }
}

fn succ() -> AuxClosure {
    Arc::new(|z, _| Ok(z + &Value::one()))
}

fn ident() -> AuxClosure {
    Arc::new(|z, _| Ok(z.clone()))
}

fn small(v: &Value, what: &str) -> Result<u64> {
    v.to_u64()
        .filter(|&n| n <= 1 << 20)
        .ok_or_else(|| Error::InvalidInput(format!("{what} {v} is too large to iterate")))
}

const REGISTRY: &[NamedProgram] = &[
    NamedProgram {
        name: "floor_sqrt",
        args: &["x"],
        summary: "integer square root by bisection",
        run: |a| floor_sqrt(&a[0]),
        oracle: |a| Ok(Value::from(a[0].to_bigint().sqrt())),
    },
    NamedProgram {
        name: "int_div",
        args: &["x", "y"],
        summary: "floor(x / y) by bisection",
        run: |a| int_div(&a[0], &a[1]),
        oracle: |a| {
            let (q, _) = a[0].div_rem_floor(&a[1]).ok_or(Error::DivisionByZero)?;
            Ok(q)
        },
    },
    NamedProgram {
        name: "suffix",
        args: &["x", "y"],
        summary: "x mod 2^len(y)",
        run: |a| suffix(&a[0], &a[1]),
        oracle: |a| {
            let m = Value::pow2(a[1].bit_length());
            Ok(a[0].div_rem_floor(&m).expect("power of two is nonzero").1)
        },
    },
    NamedProgram {
        name: "pow2_length",
        args: &["x"],
        summary: "2^len(x)",
        run: |a| pow2_length(&a[0]),
        oracle: |a| Ok(Value::pow2(a[0].bit_length())),
    },
    NamedProgram {
        name: "pow2_lenprod",
        args: &["x", "y"],
        summary: "2^(len(x) * len(y))",
        run: |a| pow2_lenprod(&a[0], &a[1]),
        oracle: |a| Ok(Value::pow2(a[0].bit_length() * a[1].bit_length())),
    },
    NamedProgram {
        name: "bsum",
        args: &["x"],
        summary: "0 + 1 + .. + (x - 1)",
        run: |a| bsum(ident(), &a[0], &Valuation::new()),
        oracle: |a| Ok((0..small(&a[0], "bound")?).map(Value::from).sum()),
    },
    NamedProgram {
        name: "bprod",
        args: &["x"],
        summary: "1 * 2 * .. * x",
        run: |a| bprod(succ(), &a[0], &Valuation::new()),
        oracle: |a| Ok((1..=small(&a[0], "bound")?).map(Value::from).product()),
    },
    NamedProgram {
        name: "prefix_min",
        args: &["x", "c"],
        summary: "min of (z - c)^2 over z <= x",
        run: |a| {
            let c = a[1].clone();
            prefix_min(move |z| Ok((z - &c) * (z - &c)), &a[0])
        },
        oracle: |a| {
            let n = small(&a[0], "bound")?;
            Ok((0..=n)
                .map(|z| {
                    let d = Value::from(z) - &a[1];
                    &d * &d
                })
                .min()
                .expect("range is not empty"))
        },
    },
    NamedProgram {
        name: "sign",
        args: &["x"],
        summary: "sg(x) from f' = 1 - f, f(0) = 0",
        run: |a| sign(&a[0]),
        oracle: |a| Ok(numeric::sg(&a[0])),
    },
];

pub fn registry() -> &'static [NamedProgram] {
    REGISTRY
}

pub fn find(name: &str) -> Result<&'static NamedProgram> {
    REGISTRY
        .iter()
        .find(|p| p.name == name)
        .ok_or_else(|| Error::InvalidInput(format!("no stdlib function named `{name}`")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: i64) -> Value {
        Value::from(x)
    }

    #[test]
    fn shipped_files_parse() {
        for (name, _) in PROBLEMS {
            problem(name).unwrap();
        }
        for (name, _) in PROGRAMS {
            program(name).unwrap();
        }
    }

    #[test]
    fn examples() {
        assert_eq!(prefix_min(|z| Ok((z - &v(3)) * (z - &v(3))), &v(5)).unwrap(), v(0));
        assert_eq!(prefix_min(|z| Ok(z + &v(1)), &v(0)).unwrap(), v(1));
        assert_eq!(prefix_min(|z| Ok(v(10) - z), &v(4)).unwrap(), v(6));
        assert_eq!(floor_sqrt(&v(10)).unwrap(), v(3));
        assert_eq!(floor_sqrt(&v(0)).unwrap(), v(0));
        assert_eq!(floor_sqrt(&v(1_000_000)).unwrap(), v(1000));
        assert_eq!(int_div(&v(10), &v(3)).unwrap(), v(3));
        assert_eq!(int_div(&v(0), &v(5)).unwrap(), v(0));
        assert_eq!(int_div(&Value::pow2(40), &Value::pow2(20)).unwrap(), Value::pow2(20));
        assert!(matches!(int_div(&v(4), &v(0)), Err(Error::DivisionByZero)));
        assert_eq!(suffix(&v(53), &v(5)).unwrap(), v(5));
        assert_eq!(suffix(&v(0b110100), &v(1)).unwrap(), v(0));
        assert_eq!(suffix(&v(9), &v(100)).unwrap(), v(9));
        assert_eq!(pow2_length(&v(5)).unwrap(), v(8));
        assert_eq!(pow2_lenprod(&v(6), &v(3)).unwrap(), v(64));
        assert_eq!(pow2_lenprod(&v(6), &v(0)).unwrap(), v(8));
        let y = Valuation::new();
        assert_eq!(bsum(ident(), &v(5), &y).unwrap(), v(10));
        assert_eq!(bprod(succ(), &v(4), &y).unwrap(), v(24));
        assert_eq!(bsum(succ(), &v(0), &y).unwrap(), v(0));
        assert_eq!(bprod(ident(), &v(0), &y).unwrap(), v(1));
        assert_eq!(sign(&v(0)).unwrap(), v(0));
        assert_eq!(sign(&v(7)).unwrap(), v(1));
    }

    #[test]
    fn registry_matches_oracles_on_small_inputs() {
        for p in registry() {
            for a in 0..20 {
                let args: Vec<Value> = match p.args.len() {
                    1 => vec![v(a)],
                    _ => vec![v(a), v(a % 7 + 1)],
                };
                assert_eq!(p.run(&args).unwrap(), p.oracle(&args).unwrap(), "{} {args:?}", p.name);
            }
        }
        assert!(find("nope").is_err());
        assert!(find("bsum").unwrap().run(&[]).is_err());
    }
}
