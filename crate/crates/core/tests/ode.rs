mod common;

use common::v;
use odecalc::numeric::length;
use odecalc::ode::{check_linear, Budget, Evaluator, Mode, OdeFile};
use odecalc::stdlib;
use odecalc::{Error, Value, ValueVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn file(text: &str) -> OdeFile {
    OdeFile::parse(text).unwrap()
}

fn all_modes(f: &OdeFile, args: &[Value]) -> Vec<ValueVector> {
    let ev = Evaluator::default();
    let mut modes = vec![Mode::Naive, Mode::Compressed];
    if matches!(f.problem().driver(), odecalc::ode::Driver::Length) {
        modes.push(Mode::LengthOde);
    }
    if check_linear(f.problem()).is_ok() {
        modes.push(Mode::Guarded(Budget::Auto));
    }
    modes.iter().map(|m| f.run(&ev, args, m).unwrap().0).collect()
}

#[test]
fn compressed_agrees_with_naive_on_shipped_problems() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for name in ["pow2_length", "pow2_lenprod", "sqrt", "int_div", "suffix"] {
        let f = stdlib::problem(name).unwrap();
        for _ in 0..12 {
            let args: Vec<Value> = (0..f.arity())
                .map(|k| v(rng.gen_range(if k == 1 && name == "int_div" { 1 } else { 0 }..1 << 14)))
                .collect();
            let outs = all_modes(&f, &args);
            assert!(outs.windows(2).all(|w| w[0] == w[1]), "{name} {args:?}: {outs:?}");
        }
    }
}

#[test]
fn step_count_is_length_minus_one() {
    let f = stdlib::problem("pow2_length").unwrap();
    let ev = Evaluator::default();
    for x in [1u64, 2, 3, 10, 1000, 65535, 65536, 1 << 20] {
        let (out, trace) = f.run(&ev, &[Value::from(x)], &Mode::Compressed).unwrap();
        let n = Value::from(x).bit_length();
        assert_eq!(trace.unwrap().len() as u64, n - 1);
        assert_eq!(out, ValueVector::scalar(Value::pow2(n)));
    }
}

#[test]
fn solution_is_stable_off_jumps() {
    let f = stdlib::problem("pow2_lenprod").unwrap();
    let ev = Evaluator::default();
    let y = v(5);
    let mut prev = f.run(&ev, &[v(0), y.clone()], &Mode::Naive).unwrap().0;
    for x in 1..300i64 {
        let cur = f.run(&ev, &[v(x), y.clone()], &Mode::Naive).unwrap().0;
        if length(&v(x)) == length(&v(x - 1)) {
            assert_eq!(cur, prev, "changed at {x}");
        }
        prev = cur;
    }
}

#[test]
fn scan_drivers_including_decreasing_ones() {
    let texts = [
        "dim: 1\ndriver: scan: 40 - len(x) * len(x)\ninit:\n  f.0 = 3\nrhs:\n  f.0 = f.0 + 1\n",
        "dim: 2\ndriver: scan: sg(x - 3) * x\naux:\n  k = len(x)\ninit:\n  f.0 = 1\n  f.1 = 0\nrhs:\n  f.0 = f.1 + h.k\n  f.1 = sg(f.0 - 4) - x\n",
        "dim: 1\nparams: 1\ndriver: scan: len(x + y.0)\ninit:\n  f.0 = y.0\nrhs:\n  f.0 = 2 * f.0 - x\n",
    ];
    for text in texts {
        let f = file(text);
        for x in 0..70 {
            let args: Vec<Value> = (0..f.arity()).map(|k| v(x + 2 * k as i64)).collect();
            let outs = all_modes(&f, &args);
            assert!(outs.windows(2).all(|w| w[0] == w[1]), "{text} at {x}: {outs:?}");
        }
    }
}

#[test]
fn jump_sets() {
    let ev = Evaluator::default();
    let p = stdlib::problem("pow2_length").unwrap();
    let j = ev.jump_set(p.problem(), &v(10), &[]).unwrap();
    assert_eq!(j.jumps(), &[v(1), v(3), v(7)]);
    assert_eq!(ev.jump_set(p.problem(), &v(1), &[]).unwrap().count(), 0);
    for x in 0..300i64 {
        let scanned: Vec<Value> = (0..x).filter(|i| length(&v(i + 1)) != length(&v(*i))).map(v).collect();
        assert_eq!(ev.jump_set(p.problem(), &v(x), &[]).unwrap().jumps(), &scanned[..]);
    }
    let flat = file("dim: 1\ndriver: scan: 7\ninit:\n  f.0 = 1\nrhs:\n  f.0 = f.0\n");
    assert_eq!(ev.jump_set(flat.problem(), &v(50), &[]).unwrap().count(), 0);
}

#[test]
fn length_ode_examples() {
    let ev = Evaluator::default();
    let p = stdlib::problem("pow2_length").unwrap();
    for k in 0..30 {
        let out = ev.length_ode(p.problem(), &Value::pow2(k), &[]).unwrap();
        assert_eq!(out, ValueVector::scalar(Value::pow2(k + 1)));
    }
    assert_eq!(ev.length_ode(p.problem(), &v(0), &[]).unwrap(), ValueVector::scalar(v(2)));
    let s = stdlib::problem("suffix").unwrap();
    assert_eq!(s.run(&ev, &[v(53), v(5)], &Mode::LengthOde).unwrap().0, ValueVector::scalar(v(5)));
}

#[test]
fn guarded_evaluation() {
    let ev = Evaluator::default();
    let p = stdlib::problem("pow2_length").unwrap();
    let (out, trace) = ev.guarded(p.problem(), &Value::pow2(20), &[], Budget::Auto).unwrap();
    assert_eq!(out, ValueVector::scalar(Value::pow2(21)));
    assert_eq!(trace.len(), 20);
    assert_eq!(trace.max_bits(), 22);

    let sqrt = stdlib::problem("sqrt").unwrap();
    let (out, trace) = sqrt.run(&ev, &[v(1_000_000)], &Mode::Guarded(Budget::Auto)).unwrap();
    assert_eq!(out, ValueVector::scalar(v(1000)));
    assert_eq!(trace.unwrap().len(), 20);

    let square = stdlib::problem("square").unwrap();
    assert!(matches!(
        square.run(&ev, &[v(100)], &Mode::Guarded(Budget::Auto)),
        Err(Error::NotEssentiallyLinear { .. })
    ));
}

#[test]
fn bit_lengths_stay_within_the_linear_bound() {
    // length(f_t) <= length(G) + (t + 1) * (largest coefficient length + 1)
    let ev = Evaluator::default();
    let p = stdlib::problem("pow2_lenprod").unwrap();
    for (x, y) in [(v(1000), v(3)), (Value::pow2(40), v(255)), (v(7), Value::pow2(30))] {
        let (_, trace) = p.run(&ev, &[x, y.clone()], &Mode::Compressed).unwrap();
        let coeff = Value::pow2(y.bit_length()).bit_length();
        let base = Value::pow2(y.bit_length()).bit_length();
        for s in trace.unwrap().steps() {
            assert!(s.bits[0] <= base + (s.t + 1) * (coeff + 1));
        }
    }
}

#[test]
fn step_cap_applies() {
    let ev = Evaluator::new(100);
    let f = file("dim: 1\ndriver: scan: x\ninit:\n  f.0 = 0\nrhs:\n  f.0 = 1\n");
    assert!(matches!(f.run(&ev, &[v(101)], &Mode::Compressed), Err(Error::StepLimit { .. })));
    assert_eq!(f.run(&ev, &[v(100)], &Mode::Compressed).unwrap().0, ValueVector::scalar(v(100)));
}

#[test]
fn nested_problem_calls() {
    let dir = tempdir();
    std::fs::write(dir.join("p2.ode"), stdlib::problem_source("pow2_length").unwrap()).unwrap();
    let outer = "dim: 1\naux:\n  k = ode(\"p2.ode\", x)\ninit:\n  f.0 = 0\nrhs:\n  f.0 = h.k\n";
    std::fs::write(dir.join("outer.ode"), outer).unwrap();
    let f = OdeFile::load(dir.join("outer.ode")).unwrap();
    // h.k at the jump of length t is 2^t
    let out = f.evaluate(&Evaluator::default(), &[v(100)]).unwrap();
    assert_eq!(out, ValueVector::scalar(v(2 + 4 + 8 + 16 + 32 + 64)));
    std::fs::remove_dir_all(dir).unwrap();
}

fn tempdir() -> std::path::PathBuf {
    let d = std::env::temp_dir().join(format!("odecalc-nested-{}", std::process::id()));
    std::fs::create_dir_all(&d).unwrap();
    d
}
