mod common;

use std::sync::Arc;

use common::v;
use odecalc::ode::{check_linear, iterate_ivp, solve_linear_closed, Budget, Evaluator, Mode};
use odecalc::stdlib::{self, bprod_system, bsum_system, prefix_min};
use odecalc::{Error, Valuation, Value, ValueVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn big(rng: &mut impl Rng) -> Value {
    Value::from(rng.gen_range(0u64..1 << 60))
}

#[test]
fn registry_agrees_with_oracles() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for p in stdlib::registry() {
        let iterative = matches!(p.name, "bsum" | "bprod" | "prefix_min" | "sign");
        for x in 0..300i64 {
            let args: Vec<Value> = match p.args.len() {
                1 => vec![v(x)],
                _ => vec![v(x), v(rng.gen_range(1..2000))],
            };
            assert_eq!(p.run(&args).unwrap(), p.oracle(&args).unwrap(), "{} {args:?}", p.name);
        }
        if !iterative {
            for _ in 0..100 {
                let args: Vec<Value> = (0..p.args.len()).map(|_| big(&mut rng)).collect();
                assert_eq!(p.run(&args).unwrap(), p.oracle(&args).unwrap(), "{} {args:?}", p.name);
            }
        }
    }
}

#[test]
fn shipped_length_problems_are_linear_and_short() {
    let ev = Evaluator::default();
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    for name in ["pow2_length", "pow2_lenprod", "sqrt", "int_div", "suffix"] {
        let f = stdlib::problem(name).unwrap();
        check_linear(f.problem()).unwrap();
        for _ in 0..50 {
            let args: Vec<Value> = (0..f.arity()).map(|_| big(&mut rng)).collect();
            let (_, trace) = f.run(&ev, &args, &Mode::Guarded(Budget::Auto)).unwrap();
            assert!(trace.unwrap().len() as u64 <= args[0].bit_length() + 2, "{name}");
        }
    }
    assert!(check_linear(stdlib::problem("bprod").unwrap().problem()).is_ok());
    assert!(check_linear(stdlib::problem("square").unwrap().problem()).is_err());
}

#[test]
fn bounded_sums_and_products_match_iteration() {
    let y = Valuation::new().bind("c", 3);
    let g: Arc<dyn Fn(&Value, &Valuation) -> _ + Send + Sync> =
        Arc::new(|z: &Value, y: &Valuation| Ok(z * z - y.get("c")?));
    for x in 0..60 {
        for s in [bsum_system(g.clone()), bprod_system(g.clone())] {
            assert_eq!(
                solve_linear_closed(&s, &v(x), &y).unwrap(),
                iterate_ivp(&s.to_ivp(), &v(x), &y).unwrap()
            );
        }
    }
    let direct: Value = (0..60).map(|z| v(z * z - 3)).product();
    assert_eq!(stdlib::bprod(g, &v(60), &y).unwrap(), direct);
}

#[test]
fn prefix_min_never_increases() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..20 {
        let (a, b, c) = (rng.gen_range(-5i64..5), rng.gen_range(-50i64..50), rng.gen_range(-500i64..500));
        let f = move |z: &Value| Ok(v(a) * z * z + v(b) * z + v(c));
        let mut prev = prefix_min(f, &v(0)).unwrap();
        for x in 1..40 {
            let cur = prefix_min(f, &v(x)).unwrap();
            assert!(cur <= prev);
            let oracle = (0..=x).map(|z| f(&v(z)).unwrap()).min().unwrap();
            assert_eq!(cur, oracle);
            prev = cur;
        }
    }
}

#[test]
fn sign_ivp_is_sg() {
    let p = stdlib::sign_ivp();
    for x in 0..200 {
        let out = iterate_ivp(&p, &v(x), &Valuation::new()).unwrap();
        assert_eq!(out, ValueVector::scalar(odecalc::numeric::sg(&v(x))));
    }
}

#[test]
fn argument_errors() {
    assert!(matches!(stdlib::int_div(&v(5), &v(0)), Err(Error::DivisionByZero)));
    assert!(matches!(stdlib::floor_sqrt(&v(-1)), Err(Error::NegativeArgument { .. })));
    assert!(stdlib::find("floor_sqrt").unwrap().run(&[v(1), v(2)]).is_err());
}
