//! Exact-arithmetic engine for discrete ordinary differential equations.
//!
//! The crate covers finite-difference calculus over the integers, the
//! sg-polynomial expression language with its degree analysis, evaluation
//! of length-driven ODEs by jump compression, and a compiler from register
//! machines to linear length-ODE systems.

pub mod calculus;
pub mod error;
pub mod expr;
pub mod numeric;
pub mod ode;
pub mod rm;
pub mod stdlib;

pub use error::{Error, Result};
pub use numeric::{Valuation, Value, ValueVector};
