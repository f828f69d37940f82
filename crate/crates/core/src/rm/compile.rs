//! Register machines as linear length-ODE systems.
//!
//! Component 0 is the instruction label, component `r + 1` is `R_r`. Each
//! right-hand side is `sum_l sel_l * next_l` where
//! `sel_l = prod_{i<l} sg(inst - i) * cosg(inst - l)` is 1 exactly when
//! `inst = l`, and `next_l` is the change instruction `l` makes to that
//! component.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::numeric::{Valuation, Value, ValueVector};
use crate::ode::{
    f_name, y_name, AuxDef, AuxExpr, AuxFn, Budget, EvalTrace, Evaluator, LOdeProblem, OdeFile,
};

use super::machine::MachineState;
use super::program::{Instruction, RegisterProgram};

/// The compiled problem and the tables it was assembled from.
#[derive(Debug)]
pub struct CompiledSystem {
    program: RegisterProgram,
    arity: usize,
    /// `next[l][c]`: change made by instruction `l` to component `c`.
    next: Vec<Vec<Expr>>,
    problem: LOdeProblem,
}

fn inst() -> Expr {
    Expr::term(f_name(0))
}

fn reg(r: usize) -> Expr {
    Expr::term(f_name(r + 1))
}

/// `prod_{i<l} sg(inst - i) * cosg(inst - l)`.
pub fn selector(l: usize) -> Expr {
    let last = Expr::cosg(inst() - Expr::constant(l as u64));
    (0..l)
        .rev()
        .fold(last, |acc, i| Expr::sg(inst() - Expr::constant(i as u64)) * acc)
}

fn next_table(ins: &Instruction, registers: usize) -> Vec<Expr> {
    let zero = || Expr::constant(0);
    let mut next: Vec<Expr> = (0..=registers).map(|_| zero()).collect();
    match *ins {
        Instruction::Add { j, i } => {
            next[0] = Expr::constant(1);
            next[j + 1] = reg(i);
        }
        Instruction::Sub { j, i } => {
            next[0] = Expr::constant(1);
            next[j + 1] = Expr::constant(-1) * reg(i);
        }
        Instruction::Set { j, a } => {
            next[0] = Expr::constant(1);
            next[j + 1] = Expr::constant(u64::from(a)) - reg(j);
        }
        Instruction::Jgez { j, p } => {
            // sg(R_j + 1) is 0 exactly when R_j < 0: then step on, else go to p
            next[0] = Expr::cond(
                Expr::sg(reg(j) + Expr::constant(1)),
                Expr::constant(1),
                Expr::constant(p as u64) - inst(),
            );
        }
        Instruction::Halt => {}
    }
    next
}

/// Compiles with every register beyond `R_0` loadable from an input.
pub fn compile(prog: &RegisterProgram) -> CompiledSystem {
    compile_with_arity(prog, prog.registers() - 1).expect("default arity fits")
}

/// Compiles for `arity` inputs, loaded into `R_1 .. R_arity`.
pub fn compile_with_arity(prog: &RegisterProgram, arity: usize) -> Result<CompiledSystem> {
    let k = prog.registers() - 1;
    if arity > k {
        return Err(Error::InvalidInput(format!(
            "arity {arity} exceeds the {k} input registers"
        )));
    }
    let dim = k + 2;
    let next: Vec<Vec<Expr>> = prog
        .instructions()
        .iter()
        .map(|ins| next_table(ins, k + 1))
        .collect();
    let rhs: Vec<Expr> = (0..dim)
        .map(|c| {
            next.iter()
                .enumerate()
                .map(|(l, row)| selector(l) * row[c].clone())
                .reduce(|a, b| a + b)
                .expect("program is not empty")
        })
        .collect();
    let init: Vec<Arc<dyn AuxFn>> = (0..dim)
        .map(|c| {
            let e = match c.checked_sub(2) {
                // R_r for 1 <= r <= arity reads y.{r-1}, which sits in slot r
                Some(k) if k < arity => AuxExpr::var(k + 1, y_name(k)),
                _ => AuxExpr::Const(Value::zero()),
            };
            Arc::new(AuxDef::new(e)) as Arc<dyn AuxFn>
        })
        .collect();
    let problem = LOdeProblem::builder(dim)
        .params(arity)
        .init(init)
        .rhs(rhs)
        .build()?;
    Ok(CompiledSystem {
        program: prog.clone(),
        arity,
        next,
        problem,
    })
}

impl CompiledSystem {
    pub fn problem(&self) -> &LOdeProblem {
        &self.problem
    }

    pub fn program(&self) -> &RegisterProgram {
        &self.program
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn next_table(&self) -> &[Vec<Expr>] {
        &self.next
    }

    fn params(&self, inputs: &[Value]) -> Result<Vec<Value>> {
        MachineState::initial(&self.program, inputs)?;
        if inputs.len() > self.arity {
            return Err(Error::ArityMismatch {
                expected: self.arity,
                found: inputs.len(),
            });
        }
        let mut y = inputs.to_vec();
        y.resize(self.arity, Value::zero());
        Ok(y)
    }

    /// The state after `steps` applications of the right-hand side, as
    /// `(inst, R_0, .., R_k)`.
    pub fn eval(&self, ev: &Evaluator, steps: u64, inputs: &[Value]) -> Result<ValueVector> {
        ev.length_ode_steps(&self.problem, steps, &self.params(inputs)?)
    }

    /// Like [`CompiledSystem::eval`] under the growth guard; the trace holds
    /// the state after every step.
    pub fn eval_guarded(
        &self,
        ev: &Evaluator,
        steps: u64,
        inputs: &[Value],
    ) -> Result<(ValueVector, EvalTrace)> {
        ev.guarded_steps(&self.problem, steps, &self.params(inputs)?, Budget::Auto)
    }

    /// Whether a state vector sits on a halt (or past the last label).
    pub fn is_halted(&self, state: &ValueVector) -> bool {
        match state[0].to_usize() {
            Some(l) => matches!(self.program.get(l), None | Some(Instruction::Halt)),
            None => true,
        }
    }

    /// A problem file for this system. Without a clock the arguments are
    /// `steps` and the inputs, with `x = 2^steps`; with clock exponent `c`
    /// they are just the inputs and the step count is
    /// `(len(in1) + .. + len(inN))^c`. The output is `R_0`.
    pub fn to_file(&self, clock: Option<u32>) -> Result<OdeFile> {
        let inputs: Vec<String> = (1..=self.arity).map(|i| format!("in{i}")).collect();
        let mut args = Vec::new();
        let steps = match clock {
            None => {
                args.push("steps".to_string());
                AuxExpr::var(0, "steps")
            }
            Some(c) => {
                let total = inputs
                    .iter()
                    .enumerate()
                    .map(|(i, n)| AuxExpr::Len(Box::new(AuxExpr::var(i, n.clone()))))
                    .reduce(|a, b| AuxExpr::Add(Box::new(a), Box::new(b)))
                    .unwrap_or(AuxExpr::Const(Value::zero()));
                power(total, c.max(1))
            }
        };
        let base = args.len();
        args.extend(inputs.iter().cloned());
        let ys = inputs
            .iter()
            .enumerate()
            .map(|(i, n)| AuxExpr::var(base + i, n.clone()))
            .collect();
        let x = AuxExpr::Pow2(Box::new(steps));
        let rebuilt = compile_with_arity(&self.program, self.arity)?;
        OdeFile::new(rebuilt.problem, Some(args), Some((x, ys)), Some(reg(0)))
    }
}

fn power(e: AuxExpr, c: u32) -> AuxExpr {
    (1..c).fold(e.clone(), |acc, _| AuxExpr::Mul(Box::new(acc), Box::new(e.clone())))
}

/// `steps` applications of the compiled system.
pub fn eval_compiled(c: &CompiledSystem, steps: u64, inputs: &[Value]) -> Result<ValueVector> {
    c.eval(&Evaluator::default(), steps, inputs)
}

/// `R_0` after `(sum of input lengths)^c_exp` steps, with whether the
/// machine had halted by then.
pub fn clocked_output(c: &CompiledSystem, inputs: &[Value], c_exp: u32) -> Result<(Value, bool)> {
    if c_exp == 0 {
        return Err(Error::InvalidInput("clock exponent must be at least 1".into()));
    }
    let total: u64 = inputs.iter().map(Value::bit_length).sum();
    let steps = total
        .checked_pow(c_exp)
        .ok_or_else(|| Error::InvalidInput("clock is too large".into()))?;
    let state = eval_compiled(c, steps, inputs)?;
    let halted = c.is_halted(&state);
    Ok((state[1].clone(), halted))
}

/// Checks that exactly one selector is 1 at `inst` (and none past the end).
pub fn selected_summand(c: &CompiledSystem, inst: &Value) -> Vec<usize> {
    let env = Valuation::new().bind(f_name(0), inst.clone());
    (0..c.program.len())
        .filter(|&l| selector(l).eval(&env).map(|v| v == Value::one()).unwrap_or(false))
        .collect()
}
