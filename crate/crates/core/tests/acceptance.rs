//! Acceptance suite. Prints one PASS or FAIL line per criterion and exits
//! non-zero if any fails. Every count, range and time limit is pinned here.

mod common;

use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use common::{machine_inputs, random_linear_system, shipped_programs, simulator_states, v};
use odecalc::calculus::{derivative, falling_exponential, falling_power, integral, scalar_seq};
use odecalc::expr::{
    degree, is_essentially_constant, is_essentially_linear, linear_decompose, parse, Expr,
    ExprMatrix, LinearDecomposition,
};
use odecalc::ode::{
    check_linear, iterate_ivp, solve_linear_closed, AuxClosure, Budget, EvalTrace, Evaluator,
    LOdeProblem, Mode, OdeFile,
};
use odecalc::rm::compile;
use odecalc::stdlib;
use odecalc::{Error, Valuation, Value, ValueVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const CALCULUS_CASES: usize = 1000;
const CALCULUS_LIMIT: Duration = Duration::from_secs(5);
const LINEAR_SYSTEMS: usize = 200;
const LINEAR_MAX_X: i64 = 30;
const LINEAR_LIMIT: Duration = Duration::from_secs(10);
const NAIVE_MAX_X: u64 = 1 << 16;
const COMPRESSED_MAX_X: u64 = 1 << 20;
const SIGN_MAX_X: i64 = 1000;
const MACHINE_SAMPLES: usize = 100;
const MACHINE_STEPS: u64 = 200;
const SWEEP_MAX_X: i64 = 10_000;
const SWEEP_MAX_Y: i64 = 100;
const RANDOM_WIDE: usize = 100;
const ACCUMULATE_MAX_X: i64 = 100;
const STDLIB_LIMIT: Duration = Duration::from_secs(60);
const PLANTED_MAX_STEP: u64 = 6;

type Verdict = Result<(), String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn ok<T>(r: odecalc::Result<T>, what: &str) -> Result<T, String> {
    r.map_err(|e| format!("{what}: {e}"))
}

fn poly(coeffs: Vec<i64>) -> impl Fn(&Value) -> Value + Clone {
    move |x: &Value| coeffs.iter().rev().fold(Value::zero(), |acc, c| acc * x + v(*c))
}

fn random_coeffs(rng: &mut impl Rng) -> Vec<i64> {
    (0..rng.gen_range(1..6)).map(|_| rng.gen_range(-20i64..20)).collect()
}

fn calculus() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let env = Valuation::new();
    for _ in 0..CALCULUS_CASES {
        let f = poly(random_coeffs(&mut rng));
        let a = rng.gen_range(0i64..=64);
        let b = rng.gen_range(a..=64);
        let fs = scalar_seq(f.clone());
        let df = |x: &Value, env: &Valuation| derivative(&fs, x, env);
        let total = ok(integral(&df, &v(a), &v(b), &env), "integral")?;
        ensure!(
            total == ValueVector::scalar(f(&v(b)) - f(&v(a))),
            "fundamental theorem fails on [{a}, {b}]"
        );
    }
    for _ in 0..CALCULUS_CASES {
        let (f, g) = (poly(random_coeffs(&mut rng)), poly(random_coeffs(&mut rng)));
        let x = v(rng.gen_range(0i64..200));
        let x1 = &x + &Value::one();
        let fg = {
            let (f, g) = (f.clone(), g.clone());
            scalar_seq(move |x| f(x) * g(x))
        };
        let lhs = ok(derivative(&fg, &x, &env), "derivative")?;
        let (df, dg) = (f(&x1) - f(&x), g(&x1) - g(&x));
        ensure!(
            lhs == ValueVector::scalar(&df * &g(&x1) + f(&x) * &dg)
                && lhs == ValueVector::scalar(f(&x1) * dg + df * g(&x)),
            "product rule fails at {x}"
        );
    }
    for _ in 0..CALCULUS_CASES {
        let m = rng.gen_range(1i64..=8);
        let x = v(rng.gen_range(0i64..=64));
        let fp = scalar_seq(move |x| falling_power(x, &v(m)).expect("m >= 0"));
        let lhs = ok(derivative(&fp, &x, &env), "derivative")?;
        let rhs = v(m) * ok(falling_power(&x, &v(m - 1)), "falling power")?;
        ensure!(lhs == ValueVector::scalar(rhs), "falling power rule fails for m={m} at {x}");
    }
    for _ in 0..CALCULUS_CASES {
        let u = scalar_seq(poly(random_coeffs(&mut rng)));
        let x = rng.gen_range(0i64..=32);
        let e0 = ok(falling_exponential(&u, &v(x), &env), "falling exponential")?;
        let e1 = ok(falling_exponential(&u, &v(x + 1), &env), "falling exponential")?;
        let du = ok(derivative(&u, &v(x), &env), "derivative")?;
        ensure!(
            e1 - &e0 == du[0].clone() * e0,
            "falling exponential rule fails at {x}"
        );
    }
    Ok(())
}

fn linear_systems() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let y = Valuation::new();
    let mut dependent = 0;
    for case in 0..LINEAR_SYSTEMS {
        let s = random_linear_system(&mut rng, case % 2 == 0);
        dependent += usize::from(s.depends_on_f());
        let x = v(rng.gen_range(0..=LINEAR_MAX_X));
        let closed = ok(solve_linear_closed(&s, &x, &y), "closed form")?;
        let iterated = ok(iterate_ivp(&s.to_ivp(), &x, &y), "iteration")?;
        ensure!(closed == iterated, "system {case} differs at {x}: {s:?}");
    }
    ensure!(dependent > 0, "no system read the solution");
    Ok(())
}

/// The guarded trace, checked against the unguarded result.
fn guarded_run(f: &OdeFile, args: &[Value]) -> Result<(ValueVector, EvalTrace), String> {
    let ev = Evaluator::default();
    let (out, trace) = ok(f.run(&ev, args, &Mode::Guarded(Budget::Auto)), "guarded run")?;
    let plain = ok(f.evaluate(&ev, args), "compressed run")?;
    ensure!(out == plain, "guarded and compressed runs differ on {args:?}");
    Ok((out, trace.expect("guarded runs are traced")))
}

fn length_problems() -> Vec<(&'static str, Arc<OdeFile>)> {
    ["pow2_length", "pow2_lenprod", "sqrt", "int_div", "suffix"]
        .into_iter()
        .map(|n| (n, stdlib::problem(n).expect("shipped")))
        .collect()
}

/// Arguments whose driver index (after `bind`) is at most `max_x`.
fn args_below(rng: &mut impl Rng, name: &str, max_x: u64) -> Vec<Value> {
    let x = rng.gen_range(0..=max_x);
    match name {
        "pow2_length" => vec![Value::from(x)],
        "sqrt" => vec![Value::from(x / 2)],
        "int_div" => vec![Value::from(x / 2), Value::from(rng.gen_range(1u64..1000))],
        _ => vec![Value::from(x), Value::from(rng.gen_range(0u64..1 << 12))],
    }
}

fn jump_compression() -> Verdict {
    let ev = Evaluator::default();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for (name, f) in length_problems() {
        for sample in 0..12 {
            let max = if sample < 4 { 1 << (4 * sample) } else { NAIVE_MAX_X };
            let args = args_below(&mut rng, name, max);
            let naive = ok(f.run(&ev, &args, &Mode::Naive), "naive run")?.0;
            let (out, _) = guarded_run(&f, &args)?;
            ensure!(naive == out, "{name} {args:?}: naive {naive} but compressed {out}");
        }
        for _ in 0..40 {
            let args = args_below(&mut rng, name, COMPRESSED_MAX_X);
            let (x, _) = ok(f.bind_args(&args, &ev), "bind")?;
            let (_, trace) = guarded_run(&f, &args)?;
            let expected = if x.is_zero() { 0 } else { x.bit_length() - 1 };
            ensure!(
                trace.len() as u64 == expected,
                "{name} {args:?}: {} steps, expected {expected}",
                trace.len()
            );
        }
    }
    let f = stdlib::problem("pow2_length").expect("shipped");
    let (out, trace) = guarded_run(&f, &[Value::pow2(20)])?;
    ensure!(out == ValueVector::scalar(Value::pow2(21)), "pow2_length(2^20) = {out}");
    ensure!(trace.len() <= 21, "pow2_length(2^20) took {} steps", trace.len());
    Ok(())
}

fn sign_ivp() -> Verdict {
    let p = stdlib::sign_ivp();
    for x in 0..=SIGN_MAX_X {
        let out = ok(iterate_ivp(&p, &v(x), &Valuation::new()), "sign")?;
        ensure!(out == ValueVector::scalar(odecalc::numeric::sg(&v(x))), "sign({x}) = {out}");
    }
    Ok(())
}

fn degree_verdicts() -> Verdict {
    let p = |s: &str| parse(s).expect("valid expression");
    let e = p("x * sg((x * x - z) * y) + y * y * y");
    ensure!(
        degree(&e, "x") == 1 && degree(&e, "z") == 0 && degree(&e, "y") == 3,
        "degrees of the mixed polynomial"
    );
    ensure!(
        is_essentially_linear(&e, "x")
            && is_essentially_constant(&e, "z")
            && !is_essentially_linear(&e, "y"),
        "verdicts on the mixed polynomial"
    );
    let c = Expr::cond(Expr::term("x"), Expr::term("y"), Expr::term("z"));
    ensure!(
        is_essentially_constant(&c, "x")
            && ["y", "z"].iter().all(|t| degree(&c, t) == 1),
        "verdicts on cond"
    );
    ensure!(
        is_essentially_constant(&p("sg(x * x - z) * z * z + w"), "x"),
        "sg(x^2 - z) z^2 + w is constant in x"
    );
    let m = ExprMatrix::from_rows(vec![
        vec![p("sg(x - y)"), p("sg(x) * y")],
        vec![p("sg(z * z * z * z * z - x * x * x)"), p("z")],
    ])
    .expect("square");
    ensure!(
        is_essentially_constant(&m, "x")
            && ["y", "z"]
                .iter()
                .all(|t| is_essentially_linear(&m, t) && !is_essentially_constant(&m, t)),
        "verdicts on the matrix"
    );
    match linear_decompose(&[p("f * f - f")], &["f"]) {
        Err(Error::NotEssentiallyLinear { degree: 2, .. }) => {}
        other => return Err(format!("f * f - f gave {other:?}")),
    }
    let square = stdlib::problem("square").expect("shipped");
    ensure!(check_linear(square.problem()).is_err(), "square problem accepted");
    Ok(())
}

fn bisimulation() -> Verdict {
    let ev = Evaluator::default();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let programs = shipped_programs();
    ensure!(programs.len() >= 5, "only {} shipped programs", programs.len());
    for (name, p) in programs {
        let c = compile(&p);
        ok(check_linear(c.problem()), name)?;
        for _ in 0..MACHINE_SAMPLES {
            let inputs = machine_inputs(&mut rng, &p);
            let expected = simulator_states(&p, &inputs, MACHINE_STEPS);
            ensure!(
                ok(c.problem().initial(&inputs, &ev), "initial state")? == expected[0],
                "{name} {inputs:?}: initial states differ"
            );
            let (_, trace) = ok(c.eval_guarded(&ev, MACHINE_STEPS, &inputs), name)?;
            ensure!(trace.len() as u64 == MACHINE_STEPS, "{name}: short trace");
            for s in trace.steps() {
                let t = s.t as usize + 1;
                ensure!(
                    s.value[..] == *expected[t].components(),
                    "{name} {inputs:?}: states differ at t={t}"
                );
            }
        }
    }
    Ok(())
}

fn within_steps(trace: &EvalTrace, n: &Value, what: &str) -> Verdict {
    ensure!(
        trace.len() as u64 <= n.bit_length() + 2,
        "{what}: {} steps for an input of length {}",
        trace.len(),
        n.bit_length()
    );
    Ok(())
}

fn stdlib_sweep() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let sqrt = stdlib::problem("sqrt").expect("shipped");
    let div = stdlib::problem("int_div").expect("shipped");
    let suffix = stdlib::problem("suffix").expect("shipped");
    let isqrt = |x: &Value| Value::from(x.to_bigint().sqrt());
    let floor_div = |x: &Value, y: &Value| x.div_rem_floor(y).expect("y >= 1").0;
    let modulus = |x: &Value, y: &Value| x.div_rem_floor(&Value::pow2(y.bit_length())).expect("nonzero").1;

    let check_sqrt = |x: Value| -> Verdict {
        let (out, trace) = guarded_run(&sqrt, std::slice::from_ref(&x))?;
        ensure!(out == ValueVector::scalar(isqrt(&x)), "floor_sqrt({x}) = {out}");
        within_steps(&trace, &x, "floor_sqrt")
    };
    let check_div = |x: Value, y: Value| -> Verdict {
        let (out, trace) = guarded_run(&div, &[x.clone(), y.clone()])?;
        ensure!(out == ValueVector::scalar(floor_div(&x, &y)), "int_div({x}, {y}) = {out}");
        within_steps(&trace, &x, "int_div")
    };
    let check_suffix = |x: Value, y: Value| -> Verdict {
        let (out, trace) = guarded_run(&suffix, &[x.clone(), y.clone()])?;
        ensure!(out == ValueVector::scalar(modulus(&x, &y)), "suffix({x}, {y}) = {out}");
        within_steps(&trace, &x, "suffix")
    };

    for x in 0..=SWEEP_MAX_X {
        check_sqrt(v(x))?;
        for y in 1..=SWEEP_MAX_Y {
            check_div(v(x), v(y))?;
        }
    }
    for x in 0..1 << 12 {
        check_suffix(v(x), v(rng.gen_range(0..1 << 13)))?;
    }
    let wide = |rng: &mut ChaCha8Rng| Value::from(rng.gen_range(0u64..1 << 60));
    for _ in 0..RANDOM_WIDE {
        check_sqrt(wide(&mut rng))?;
        let width: u32 = rng.gen_range(1..60);
        let y = Value::from(rng.gen_range(1u64..1 << width));
        check_div(wide(&mut rng), y)?;
        let width: u32 = rng.gen_range(1..62);
        let y = Value::from(rng.gen_range(0u64..1 << width));
        check_suffix(wide(&mut rng), y)?;
    }
    for (name, args) in [("pow2_length", 1), ("pow2_lenprod", 2)] {
        let f = stdlib::problem(name).expect("shipped");
        for _ in 0..RANDOM_WIDE {
            let a: Vec<Value> = (0..args).map(|_| wide(&mut rng)).collect();
            let (out, trace) = guarded_run(&f, &a)?;
            let bits: u64 = a.iter().map(Value::bit_length).product();
            ensure!(out == ValueVector::scalar(Value::pow2(bits)), "{name}({a:?}) = {out}");
            within_steps(&trace, &a[0], name)?;
        }
    }

    let y = Valuation::new().bind("c", 5);
    let gs: [(&str, AuxClosure); 3] = [
        ("z", Arc::new(|z: &Value, _: &Valuation| Ok(z.clone()))),
        ("z + 1", Arc::new(|z: &Value, _: &Valuation| Ok(z + &Value::one()))),
        ("z * z - c", Arc::new(|z: &Value, y: &Valuation| Ok(z * z - y.get("c")?))),
    ];
    for (label, g) in gs {
        for x in 0..=ACCUMULATE_MAX_X {
            let terms: Vec<Value> = (0..x).map(|z| g(&v(z), &y).expect("total")).collect();
            let sum = ok(stdlib::bsum(g.clone(), &v(x), &y), "bsum")?;
            let product = ok(stdlib::bprod(g.clone(), &v(x), &y), "bprod")?;
            ensure!(sum == terms.iter().cloned().sum::<Value>(), "bsum of {label} at {x}");
            ensure!(product == terms.into_iter().product::<Value>(), "bprod of {label} at {x}");
        }
    }
    Ok(())
}

fn planted_square() -> Verdict {
    let p = ok(
        LOdeProblem::builder(1)
            .init_values([v(2)])
            .rhs(vec![parse("f.0 * f.0").expect("valid")])
            .build(),
        "build",
    )?;
    // claims f * f = A f with A = f, which the analysis would refuse
    let wrong = ok(
        LinearDecomposition::unchecked(
            vec!["f.0".into()],
            ExprMatrix::from_rows(vec![vec![Expr::term("f.0")]]).expect("1x1"),
            vec![Expr::constant(0)],
        ),
        "decomposition",
    )?;
    match Evaluator::default().guarded_with(&p, &wrong, &Value::pow2(40), &[], Budget::Auto) {
        Err(Error::GrowthBoundViolated { step, .. }) if step < PLANTED_MAX_STEP => Ok(()),
        other => Err(format!("planted square gave {:?}", other.map(|(f, _)| f))),
    }
}

struct Criterion {
    title: &'static str,
    run: fn() -> Verdict,
    limit: Option<Duration>,
}

fn main() -> ExitCode {
    let criteria = [
        Criterion { title: "calculus identities", run: calculus, limit: Some(CALCULUS_LIMIT) },
        Criterion { title: "linear ODE closed form", run: linear_systems, limit: Some(LINEAR_LIMIT) },
        Criterion { title: "jump compression", run: jump_compression, limit: None },
        Criterion { title: "sign IVP", run: sign_ivp, limit: None },
        Criterion { title: "degree verdicts", run: degree_verdicts, limit: None },
        Criterion { title: "register machine bisimulation", run: bisimulation, limit: None },
        Criterion { title: "stdlib oracle sweep", run: stdlib_sweep, limit: Some(STDLIB_LIMIT) },
        Criterion { title: "growth guard", run: planted_square, limit: None },
    ];
    let mut failed = 0;
    for (n, c) in criteria.iter().enumerate() {
        let start = Instant::now();
        let mut verdict = (c.run)();
        let elapsed = start.elapsed();
        if let (Ok(()), Some(limit)) = (&verdict, c.limit) {
            if elapsed > limit {
                verdict = Err(format!("took {elapsed:.2?}, limit {limit:?}"));
            }
        }
        match verdict {
            Ok(()) => println!("criterion {} {}: PASS ({elapsed:.2?})", n + 1, c.title),
            Err(why) => {
                failed += 1;
                println!("criterion {} {}: FAIL ({elapsed:.2?}) {why}", n + 1, c.title);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
