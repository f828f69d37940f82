//! Discrete initial value problems and L-ODEs: problem descriptions, the
//! closed-form linear solver, and the evaluators.

pub mod aux;
mod eval;
mod file;
mod ivp;
mod linear;
mod problem;

pub use aux::{aux_fn, constant, AuxDef, AuxExpr, AuxFn};
pub use eval::{guarded_eval, Budget, EvalTrace, Evaluator, JumpData, StepRecord, DEFAULT_MAX_STEPS};
pub use file::{Mode, OdeFile};
pub use ivp::{iterate_ivp, InitFn, Ivp, StepFn};
pub use linear::{solve_linear_closed, AuxClosure, LinearOdeSystem};
pub use problem::{check_linear, f_name, h_name, y_name, Driver, LOdeBuilder, LOdeProblem};
