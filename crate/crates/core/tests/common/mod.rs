#![allow(dead_code)]

use std::sync::Arc;

use odecalc::expr::{Expr, ExprMatrix};
use odecalc::ode::LinearOdeSystem;
use odecalc::rm::{run, MachineState, RegisterProgram};
use odecalc::stdlib;
use odecalc::{Value, ValueVector};
use rand::Rng;

pub fn v(x: i64) -> Value {
    Value::from(x)
}

fn coefficient(rng: &mut impl Rng, dim: usize, f_dependent: bool) -> Expr {
    let c = |rng: &mut dyn rand::RngCore| Expr::constant(rng.gen_range(-5i64..=5));
    let mut e = c(rng);
    if rng.gen_bool(0.4) {
        let k = Expr::constant(rng.gen_range(0i64..20));
        e = e + c(rng) * Expr::sg(Expr::term("x") - k);
    }
    if rng.gen_bool(0.3) {
        e = e + c(rng) * Expr::term("h.w");
    }
    if f_dependent && rng.gen_bool(0.5) {
        let j = rng.gen_range(0..dim);
        let k = Expr::constant(rng.gen_range(-50i64..50));
        e = e + c(rng) * Expr::sg(Expr::term(format!("f.{j}")) - k);
    }
    e
}

/// A random system of dimension at most 3 with small coefficients. `A`
/// and `B` read `x`, an auxiliary `h.w = x mod 3`, and with
/// `f_dependent` also the solution under `sg`.
pub fn random_linear_system(rng: &mut impl Rng, f_dependent: bool) -> LinearOdeSystem {
    let dim = rng.gen_range(1..=3);
    let g = (0..dim).map(|_| Expr::constant(rng.gen_range(-5i64..=5))).collect();
    let rows = (0..dim)
        .map(|_| (0..dim).map(|_| coefficient(rng, dim, f_dependent)).collect())
        .collect();
    let b = (0..dim).map(|_| coefficient(rng, dim, f_dependent)).collect();
    LinearOdeSystem::new(g, ExprMatrix::from_rows(rows).unwrap(), b)
        .unwrap()
        .with_aux(
            "w",
            Arc::new(|x: &Value, _: &_| Ok(x.div_rem_floor(&v(3)).unwrap().1)),
        )
}

/// Simulator states for `t = 0 ..= steps`, in compiled component order.
pub fn simulator_states(p: &RegisterProgram, inputs: &[Value], steps: u64) -> Vec<ValueVector> {
    let mut s = MachineState::initial(p, inputs).unwrap();
    let mut out = vec![s.to_vector()];
    for _ in 0..steps {
        s = odecalc::rm::step(p, &s);
        out.push(s.to_vector());
    }
    out
}

/// Random inputs below `2^32` for every input register of `p`.
pub fn machine_inputs(rng: &mut impl Rng, p: &RegisterProgram) -> Vec<Value> {
    (1..p.registers()).map(|_| Value::from(rng.gen_range(0u64..1 << 32))).collect()
}

pub fn shipped_programs() -> Vec<(&'static str, RegisterProgram)> {
    stdlib::PROGRAMS
        .iter()
        .map(|(n, _)| (*n, stdlib::program(n).unwrap()))
        .collect()
}

pub fn run_output(p: &RegisterProgram, inputs: &[Value], fuel: u64) -> Value {
    run(p, inputs, fuel).unwrap().output().clone()
}
