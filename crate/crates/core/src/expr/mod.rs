//! Scalar expressions for Lagrangian densities, fields and symmetry generators.
//!
//! Expressions are immutable trees with shared (`Arc`) children. They can be
//! parsed from text, rendered back, evaluated, differentiated exactly and
//! compiled into a flat register program for repeated evaluation.

mod ast;
mod compile;
mod diff;
mod parse;
mod space;

use thiserror::Error;

pub use ast::{BinaryOp, Bindings, Expr, UnaryOp};
pub use compile::Program;
pub use parse::{parse, MAX_NESTING};
pub use space::{alpha_derivative_name, coordinate_name, VarRole, VarSpace, FIELD};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("syntax error at byte {offset}: {message}")]
    /// `offset` is 1-based.
    Syntax { offset: usize, message: String },

    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },

    #[error("unknown function `{name}` at byte {offset}")]
    UnknownFunction { name: String, offset: usize },

    #[error("variable `{0}` is not declared")]
    UnknownVariable(String),

    #[error("duplicate variable `{0}`")]
    DuplicateVariable(String),

    #[error("variable `{0}` is not bound")]
    UnboundVariable(String),

    #[error("domain violation in {op}: {detail}")]
    Domain { op: &'static str, detail: String },
}

impl ExprError {
    pub fn is_parse(&self) -> bool {
        matches!(
            self,
            ExprError::Syntax { .. }
                | ExprError::UnknownIdentifier { .. }
                | ExprError::UnknownFunction { .. }
                | ExprError::UnknownVariable(_)
                | ExprError::DuplicateVariable(_)
        )
    }
}

/// Checked partial derivative: `v` must be declared in `space`.
pub fn diff(e: &Expr, v: &str, space: &VarSpace) -> Result<Expr, ExprError> {
    if space.index_of(v).is_none() {
        return Err(ExprError::UnknownVariable(v.to_string()));
    }
    Ok(e.derivative(v))
}

/// Evaluate with named bindings.
pub fn eval(e: &Expr, bindings: &impl Bindings) -> Result<f64, ExprError> {
    e.eval(bindings)
}
