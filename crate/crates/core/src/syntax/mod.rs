//! Text formats: CHC files, solution files, interpolation problem files and
//! the constraint s-expressions they share.

mod chc;
mod formula;
mod problem;
pub mod sexpr;
mod solution;

use thiserror::Error;

use crate::horn::HornError;

pub use chc::{parse_chc, print_chc};
pub use formula::{
    bindings_sexpr, constraint_sexpr, model_sexpr, parse_bindings, parse_constraint, parse_model, parse_numeral,
    parse_sort, parse_term, rational_sexpr, scope_of, term_sexpr, Scope,
};
pub use problem::{parse_problem, Problem};
pub use solution::{parse_solution, print_solution};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum SyntaxError {
    #[error("{line}:{col}: {message}")]
    Parse { line: usize, col: usize, message: String },
    #[error("{line}:{col}: sort error: {message}")]
    Sort { line: usize, col: usize, message: String },
    #[error("{line}:{col}: undeclared symbol `{name}`")]
    UndeclaredSymbol { name: String, line: usize, col: usize },
    #[error(transparent)]
    Horn(#[from] HornError),
}

