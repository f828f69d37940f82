//! sg-polynomial expressions: syntax tree, text format, evaluation and the
//! degree analysis behind essential constancy and linearity.

mod analysis;
mod ast;
mod bound;
pub(crate) mod lexer;
mod parser;

pub use analysis::{
    blind, degree, is_essentially_constant, is_essentially_linear, joint_degree, linear_decompose,
    Entries, LinearDecomposition,
};
pub use ast::{Expr, ExprMatrix};
pub use bound::{BoundExpr, Scope};
pub use parser::{parse, parse_at, parse_with_terms};
