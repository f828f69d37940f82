//! Evaluation of L-ODE problems: naive forward iteration, jump-compressed
//! evaluation, the length-ODE view, and the growth-guarded variant.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::{self, Value, ValueVector};

use super::problem::{check_linear, Driver, GuardForm, LOdeProblem};
use crate::expr::LinearDecomposition;

pub const DEFAULT_MAX_STEPS: u64 = 1 << 22;

/// Indices `i < x` where the driver changes, with the size of each change.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JumpData {
    jumps: Vec<Value>,
    deltas: Vec<Value>,
}

impl JumpData {
    /// The first `n` jumps of the length driver: `2^(t+1) - 1`, each a
    /// change by one.
    pub fn length_steps(n: u64) -> JumpData {
        let jumps: Vec<Value> = (0..n).map(|t| Value::pow2(t + 1) - Value::one()).collect();
        let deltas = vec![Value::one(); jumps.len()];
        JumpData { jumps, deltas }
    }

    pub fn jumps(&self) -> &[Value] {
        &self.jumps
    }

    pub fn deltas(&self) -> &[Value] {
        &self.deltas
    }

    /// Number of jumps.
    pub fn count(&self) -> usize {
        self.jumps.len()
    }

    /// The `t`-th jump, counting from 0.
    pub fn alpha(&self, t: usize) -> Option<&Value> {
        self.jumps.get(t)
    }

    fn iter(&self) -> impl Iterator<Item = (&Value, &Value)> {
        self.jumps.iter().zip(&self.deltas)
    }
}

/// One compressed step as written to a trace.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StepRecord {
    pub t: u64,
    pub alpha: Value,
    #[serde(rename = "deltaL")]
    pub delta_l: Value,
    pub bits: Vec<u64>,
    pub value: Vec<Value>,
}

/// The states after each compressed step.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct EvalTrace {
    steps: Vec<StepRecord>,
}

impl EvalTrace {
    pub fn steps(&self) -> &[StepRecord] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Largest component length reached by any step.
    pub fn max_bits(&self) -> u64 {
        self.steps
            .iter()
            .flat_map(|s| s.bits.iter().copied())
            .max()
            .unwrap_or(0)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("trace serializes")
    }
}

/// Cap on the length bits of the solution, checked after each step of a
/// guarded evaluation as `length(G) + (t + 1) * p_M`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub enum Budget {
    /// `p_M` is four times the largest per-step growth seen so far.
    #[default]
    Auto,
    /// `p_M = sum_k c_k * n^k` where `n` is the total length of the inputs.
    Fixed(Vec<u64>),
}

struct Guard<'a> {
    form: &'a GuardForm,
    budget: Budget,
    base: u64,
    input_len: u64,
    slack: u64,
    max_growth: u64,
}

impl Guard<'_> {
    /// Largest length among `dl * A_ij` and `dl * B_i` at the current slots.
    fn coefficient_bits(&self, slots: &[Value], dl: &Value) -> u64 {
        self.form
            .a
            .iter()
            .flatten()
            .chain(&self.form.b)
            .map(|c| (dl * c.eval(slots)).bit_length())
            .max()
            .unwrap_or(1)
    }

    fn check(&mut self, step: u64, before: u64, coeff_bits: u64, after: u64) -> Result<()> {
        let bound = before + coeff_bits + self.slack;
        if after > bound {
            return Err(Error::GrowthBoundViolated {
                step,
                bits: after,
                bound,
            });
        }
        self.max_growth = self.max_growth.max(coeff_bits + self.slack);
        let p_m = match &self.budget {
            Budget::Auto => 4 * self.max_growth,
            Budget::Fixed(coeffs) => coeffs
                .iter()
                .rev()
                .fold(0u64, |acc, c| acc.saturating_mul(self.input_len).saturating_add(*c)),
        };
        let budget = self.base.saturating_add((step + 1).saturating_mul(p_m));
        if after > budget {
            return Err(Error::BudgetExceeded {
                step,
                bits: after,
                budget,
            });
        }
        Ok(())
    }
}

/// `ceil(log2(d + 1))`: the extra bits from summing `d + 1` terms.
fn sum_slack(d: usize) -> u64 {
    let mut bits = 0;
    while (1u64 << bits) < d as u64 + 1 {
        bits += 1;
    }
    bits
}

/// Entry points of the engine, carrying the step cap shared by all of
/// them.
#[derive(Clone, Debug)]
pub struct Evaluator {
    max_steps: u64,
}

impl Default for Evaluator {
    fn default() -> Self {
        Evaluator {
            max_steps: DEFAULT_MAX_STEPS,
        }
    }
}

fn require_index(x: &Value) -> Result<()> {
    if x.is_negative() {
        return Err(Error::NegativeArgument {
            what: "evaluation index",
            value: x.clone(),
        });
    }
    Ok(())
}

impl Evaluator {
    pub fn new(max_steps: u64) -> Self {
        Evaluator { max_steps }
    }

    pub fn max_steps(&self) -> u64 {
        self.max_steps
    }

    fn steps_for(&self, x: &Value) -> Result<u64> {
        match x.to_u64() {
            Some(n) if n <= self.max_steps => Ok(n),
            _ => Err(Error::StepLimit {
                limit: self.max_steps,
            }),
        }
    }

    /// Indices `i < x` with `L(i+1, y) != L(i, y)`.
    pub fn jump_set(&self, p: &LOdeProblem, x: &Value, y: &[Value]) -> Result<JumpData> {
        require_index(x)?;
        p.check_params(y)?;
        match p.driver() {
            Driver::Length => {
                if x.is_zero() {
                    return Ok(JumpData::length_steps(0));
                }
                let n = x.bit_length() - 1;
                if n > self.max_steps {
                    return Err(Error::StepLimit {
                        limit: self.max_steps,
                    });
                }
                Ok(JumpData::length_steps(n))
            }
            Driver::Scan(l) => {
                let n = self.steps_for(x)?;
                let mut jumps = Vec::new();
                let mut deltas = Vec::new();
                let mut i = Value::zero();
                let mut prev = l.eval(&i, y, self)?;
                for _ in 0..n {
                    let next_i = &i + Value::one();
                    let next = l.eval(&next_i, y, self)?;
                    if next != prev {
                        deltas.push(&next - &prev);
                        jumps.push(i);
                    }
                    i = next_i;
                    prev = next;
                }
                Ok(JumpData { jumps, deltas })
            }
        }
    }

    /// Fills the slot vector for a step at index `at`.
    fn fill_slots(
        &self,
        p: &LOdeProblem,
        slots: &mut Vec<Value>,
        f: &[Value],
        at: &Value,
        y: &[Value],
    ) -> Result<()> {
        slots.clear();
        slots.extend_from_slice(f);
        for (_, h) in p.aux() {
            slots.push(h.eval(at, y, self)?);
        }
        slots.push(at.clone());
        slots.extend_from_slice(y);
        Ok(())
    }

    /// `f += dl * u(slots)`, all components from the same old state.
    fn apply(p: &LOdeProblem, f: &mut [Value], slots: &[Value], dl: &Value) {
        let updates: Vec<Value> = p.bound_rhs().iter().map(|u| u.eval(slots)).collect();
        for (fi, ui) in f.iter_mut().zip(updates) {
            if dl == &Value::one() {
                *fi += &ui;
            } else {
                *fi += &(dl * ui);
            }
        }
    }

    /// Forward iteration of the defining recurrence, one index at a time.
    pub fn naive(&self, p: &LOdeProblem, x: &Value, y: &[Value]) -> Result<ValueVector> {
        require_index(x)?;
        let n = self.steps_for(x)?;
        let mut f = p.initial(y, self)?.into_components();
        let mut slots = Vec::new();
        let mut i = Value::zero();
        let mut l_prev = self.driver_at(p, &i, y)?;
        for _ in 0..n {
            let next_i = &i + Value::one();
            let l_next = self.driver_at(p, &next_i, y)?;
            let dl = &l_next - &l_prev;
            if !dl.is_zero() {
                self.fill_slots(p, &mut slots, &f, &i, y)?;
                Self::apply(p, &mut f, &slots, &dl);
            }
            i = next_i;
            l_prev = l_next;
        }
        Ok(f.into())
    }

    fn driver_at(&self, p: &LOdeProblem, i: &Value, y: &[Value]) -> Result<Value> {
        match p.driver() {
            Driver::Length => Ok(numeric::length(i)),
            Driver::Scan(l) => l.eval(i, y, self),
        }
    }

    /// Evaluation in exactly one right-hand-side application per jump.
    pub fn compressed(&self, p: &LOdeProblem, x: &Value, y: &[Value]) -> Result<ValueVector> {
        let jumps = self.jump_set(p, x, y)?;
        self.run(p, &jumps, y, None, None)
    }

    pub fn compressed_traced(
        &self,
        p: &LOdeProblem,
        x: &Value,
        y: &[Value],
    ) -> Result<(ValueVector, EvalTrace)> {
        let jumps = self.jump_set(p, x, y)?;
        let mut trace = EvalTrace::default();
        let f = self.run(p, &jumps, y, None, Some(&mut trace))?;
        Ok((f, trace))
    }

    /// The length-ODE view: `F(1) = f(0)` and
    /// `F(t+1) = F(t) + u(F(t), h(2^t - 1), 2^t - 1, y)`, answered by
    /// `F(length(x))`. At `x = 0` this is the initial value.
    pub fn length_ode(&self, p: &LOdeProblem, x: &Value, y: &[Value]) -> Result<ValueVector> {
        require_index(x)?;
        if !matches!(p.driver(), Driver::Length) {
            return Err(Error::InvalidProblem(
                "the length-ODE view needs the length driver".into(),
            ));
        }
        let mut big_f = p.initial(y, self)?.into_components();
        if x.is_zero() {
            return Ok(big_f.into());
        }
        let top = x.bit_length();
        if top - 1 > self.max_steps {
            return Err(Error::StepLimit {
                limit: self.max_steps,
            });
        }
        let mut slots = Vec::new();
        let one = Value::one();
        for t in 1..top {
            let at = Value::pow2(t) - Value::one();
            self.fill_slots(p, &mut slots, &big_f, &at, y)?;
            Self::apply(p, &mut big_f, &slots, &one);
        }
        Ok(big_f.into())
    }

    /// `n` applications of the right-hand side of a length-driven problem,
    /// the `t`-th one at index `2^(t+1) - 1`.
    pub fn length_ode_steps(&self, p: &LOdeProblem, n: u64, y: &[Value]) -> Result<ValueVector> {
        if n > self.max_steps {
            return Err(Error::StepLimit {
                limit: self.max_steps,
            });
        }
        self.run(p, &JumpData::length_steps(n), y, None, None)
    }

    /// Compressed evaluation that checks, after every step, that the
    /// solution grew by no more than the coefficients allow and stayed
    /// inside the budget. The problem must pass [`check_linear`].
    pub fn guarded(
        &self,
        p: &LOdeProblem,
        x: &Value,
        y: &[Value],
        budget: Budget,
    ) -> Result<(ValueVector, EvalTrace)> {
        let form = p.guard_form()?;
        self.guarded_form(p, &form, x, y, budget)
    }

    /// Like [`Evaluator::guarded`], trusting a caller-supplied
    /// decomposition instead of running the analysis.
    pub fn guarded_with(
        &self,
        p: &LOdeProblem,
        decomposition: &LinearDecomposition,
        x: &Value,
        y: &[Value],
        budget: Budget,
    ) -> Result<(ValueVector, EvalTrace)> {
        let form = GuardForm::new(decomposition, p.scope())?;
        self.guarded_form(p, &form, x, y, budget)
    }

    /// Guarded evaluation of `n` length-driver steps.
    pub fn guarded_steps(
        &self,
        p: &LOdeProblem,
        n: u64,
        y: &[Value],
        budget: Budget,
    ) -> Result<(ValueVector, EvalTrace)> {
        if n > self.max_steps {
            return Err(Error::StepLimit {
                limit: self.max_steps,
            });
        }
        let form = p.guard_form()?;
        let jumps = JumpData::length_steps(n);
        self.guarded_jumps(p, &form, &jumps, y, budget, input_length(&Value::pow2(n), y))
    }

    fn guarded_form(
        &self,
        p: &LOdeProblem,
        form: &GuardForm,
        x: &Value,
        y: &[Value],
        budget: Budget,
    ) -> Result<(ValueVector, EvalTrace)> {
        let jumps = self.jump_set(p, x, y)?;
        self.guarded_jumps(p, form, &jumps, y, budget, input_length(x, y))
    }

    fn guarded_jumps(
        &self,
        p: &LOdeProblem,
        form: &GuardForm,
        jumps: &JumpData,
        y: &[Value],
        budget: Budget,
        input_len: u64,
    ) -> Result<(ValueVector, EvalTrace)> {
        let base = p.initial(y, self)?.max_bit_length();
        let mut guard = Guard {
            form,
            budget,
            base,
            input_len,
            slack: sum_slack(p.dim()),
            max_growth: 0,
        };
        let mut trace = EvalTrace::default();
        let f = self.run(p, jumps, y, Some(&mut guard), Some(&mut trace))?;
        Ok((f, trace))
    }

    fn run(
        &self,
        p: &LOdeProblem,
        jumps: &JumpData,
        y: &[Value],
        mut guard: Option<&mut Guard<'_>>,
        mut trace: Option<&mut EvalTrace>,
    ) -> Result<ValueVector> {
        let mut f = p.initial(y, self)?.into_components();
        let mut slots = Vec::new();
        for (t, (alpha, dl)) in jumps.iter().enumerate() {
            let t = t as u64;
            self.fill_slots(p, &mut slots, &f, alpha, y)?;
            let before = f.iter().map(Value::bit_length).max().unwrap_or(1);
            let coeff_bits = guard.as_ref().map(|g| g.coefficient_bits(&slots, dl));
            Self::apply(p, &mut f, &slots, dl);
            let bits: Vec<u64> = f.iter().map(Value::bit_length).collect();
            if let (Some(g), Some(m)) = (guard.as_deref_mut(), coeff_bits) {
                let after = bits.iter().copied().max().unwrap_or(1);
                g.check(t, before, m, after)?;
            }
            if let Some(tr) = trace.as_deref_mut() {
                tr.steps.push(StepRecord {
                    t,
                    alpha: alpha.clone(),
                    delta_l: dl.clone(),
                    bits,
                    value: f.clone(),
                });
            }
        }
        Ok(f.into())
    }
}

fn input_length(x: &Value, y: &[Value]) -> u64 {
    x.bit_length() + y.iter().map(Value::bit_length).sum::<u64>()
}

/// Checks the problem, then evaluates it under the growth guard with an
/// automatic budget.
pub fn guarded_eval(
    p: &LOdeProblem,
    x: &Value,
    y: &[Value],
    budget: Budget,
) -> Result<(ValueVector, EvalTrace)> {
    check_linear(p)?;
    Evaluator::default().guarded(p, x, y, budget)
}
