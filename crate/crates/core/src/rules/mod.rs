//! The rule formula language: parsing, binding to a model, evaluation.
//!
//! Formulas look like spreadsheet formulas but reference members by name
//! (`{Total sales} - {Discounts and allowances}`) instead of cells. A
//! reference reads the cell being computed with one coordinate swapped:
//! the anchor dimension's coordinate for a plain `{name}`, plus any
//! coordinates pinned with `{name | DIM=Member}`.

mod ast;
mod bind;
mod eval;
mod parser;

use thiserror::Error;

pub use ast::{BinaryOp, Expression, Function, MemberRef};
pub use bind::{bind, BoundExpr, BoundNode, BoundRef};
pub use parser::parse;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseError {
    #[error("empty formula")]
    Empty,
    #[error("unterminated member reference at offset {pos}")]
    UnterminatedRef { pos: usize },
    #[error("empty member reference at offset {pos}")]
    EmptyRef { pos: usize },
    #[error("malformed override '{text}' at offset {pos} (expected DIM=Member)")]
    MalformedOverride { pos: usize, text: String },
    #[error("unexpected character '{ch}' at offset {pos}")]
    UnexpectedChar { pos: usize, ch: char },
    #[error("unexpected '{found}' at offset {pos}")]
    UnexpectedToken { pos: usize, found: String },
    #[error("unexpected end of formula")]
    UnexpectedEnd,
    #[error("unknown function '{name}' at offset {pos}")]
    UnknownFunction { pos: usize, name: String },
    #[error("invalid number '{text}' at offset {pos}")]
    InvalidNumber { pos: usize, text: String },
}

impl ParseError {
    fn shifted(self, by: usize) -> ParseError {
        use ParseError::*;
        match self {
            UnterminatedRef { pos } => UnterminatedRef { pos: pos + by },
            EmptyRef { pos } => EmptyRef { pos: pos + by },
            MalformedOverride { pos, text } => MalformedOverride { pos: pos + by, text },
            UnexpectedChar { pos, ch } => UnexpectedChar { pos: pos + by, ch },
            UnexpectedToken { pos, found } => UnexpectedToken { pos: pos + by, found },
            UnknownFunction { pos, name } => UnknownFunction { pos: pos + by, name },
            InvalidNumber { pos, text } => InvalidNumber { pos: pos + by, text },
            other => other,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BindError {
    #[error("unknown member '{member}' in {dimension}")]
    UnknownMember { dimension: String, member: String },
    #[error("unknown dimension '{0}' in override")]
    UnknownDimension(String),
    #[error("'{member}' is ambiguous across dimensions {dimensions:?}")]
    Ambiguous { member: String, dimensions: Vec<String> },
    #[error("dimension {dimension} overridden twice")]
    RepeatedOverride { dimension: String },
    #[error("override on {dimension} contradicts reference '{member}'")]
    ConflictingOverride { dimension: String, member: String },
    #[error("{function} does not take {got} argument(s)")]
    Arity { function: &'static str, got: usize },
}
