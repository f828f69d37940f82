//! Register machines: assembly, simulation, and compilation to linear
//! length-ODE systems.

mod compile;
mod machine;
mod program;

pub use compile::{
    clocked_output, compile, compile_with_arity, eval_compiled, selected_summand, selector,
    CompiledSystem,
};
pub use machine::{run, step, MachineState, RunOutcome};
pub use program::{Instruction, RegisterProgram};
