use crate::error::{Error, Result};
use crate::numeric::{Value, ValueVector};

use super::program::{Instruction, RegisterProgram};

/// Current label and register contents. A label equal to the program
/// length means control fell off the end; that state is frozen like a halt.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MachineState {
    pub inst: usize,
    pub registers: Vec<Value>,
}

impl MachineState {
    /// Label 0, inputs in `R_1 ..`, everything else 0. Inputs must be
    /// non-negative and fit in the registers beyond `R_0`.
    pub fn initial(prog: &RegisterProgram, inputs: &[Value]) -> Result<Self> {
        let k = prog.registers() - 1;
        if inputs.len() > k {
            return Err(Error::InvalidInput(format!(
                "{} inputs for a machine with {k} input registers",
                inputs.len()
            )));
        }
        if let Some(neg) = inputs.iter().find(|v| v.is_negative()) {
            return Err(Error::NegativeArgument {
                what: "machine input",
                value: neg.clone(),
            });
        }
        let mut registers = vec![Value::zero(); prog.registers()];
        registers[1..=inputs.len()].clone_from_slice(inputs);
        Ok(MachineState { inst: 0, registers })
    }

    pub fn is_halted(&self, prog: &RegisterProgram) -> bool {
        matches!(prog.get(self.inst), None | Some(Instruction::Halt))
    }

    /// `(inst, R_0, .., R_k)`, the component order of the compiled system.
    pub fn to_vector(&self) -> ValueVector {
        std::iter::once(Value::from(self.inst))
            .chain(self.registers.iter().cloned())
            .collect()
    }
}

/// One transition. Halted states map to themselves.
pub fn step(prog: &RegisterProgram, s: &MachineState) -> MachineState {
    let mut next = s.clone();
    let Some(ins) = prog.get(s.inst) else {
        return next;
    };
    match *ins {
        Instruction::Add { j, i } => {
            next.registers[j] = &s.registers[j] + &s.registers[i];
            next.inst += 1;
        }
        Instruction::Sub { j, i } => {
            next.registers[j] = &s.registers[j] - &s.registers[i];
            next.inst += 1;
        }
        Instruction::Set { j, a } => {
            next.registers[j] = Value::from(u64::from(a));
            next.inst += 1;
        }
        Instruction::Jgez { j, p } => {
            next.inst = if s.registers[j].is_negative() { s.inst + 1 } else { p };
        }
        Instruction::Halt => {}
    }
    next
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunOutcome {
    pub state: MachineState,
    /// Transitions taken before halting, or `fuel` if the machine never
    /// halted.
    pub steps: u64,
    pub halted: bool,
}

impl RunOutcome {
    pub fn registers(&self) -> ValueVector {
        self.state.registers.clone().into()
    }

    pub fn output(&self) -> &Value {
        &self.state.registers[0]
    }
}

/// Steps until a halt or until `fuel` transitions have been taken. Running
/// out of fuel is reported through `halted`, not as an error.
pub fn run(prog: &RegisterProgram, inputs: &[Value], fuel: u64) -> Result<RunOutcome> {
    let mut state = MachineState::initial(prog, inputs)?;
    let mut steps = 0;
    while steps < fuel && !state.is_halted(prog) {
        state = step(prog, &state);
        steps += 1;
    }
    let halted = state.is_halted(prog);
    Ok(RunOutcome {
        state,
        steps,
        halted,
    })
}
