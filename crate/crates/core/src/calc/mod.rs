//! Rule application: scope expansion, sequential precedence, write-back,
//! overrides, and coverage lint.
//!
//! Rules run strictly in sequence. Each rule reads the cube as it stood when
//! the rule started and writes every cell in its scope, so a later rule wins
//! wherever scopes overlap. Pinned cells are skipped.

mod engine;
mod lint;
mod ruleset;
mod scope;
mod writeback;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::ModelError;
use crate::rules::{BindError, ParseError};

pub use engine::{apply_rules, CalcReport, RuleWrites};
pub use lint::{coverage_lint, Finding};
pub use ruleset::{BoundRule, RuleDef, RuleSet, RuleSetError};
pub use scope::{rule_scope, scope_linear, scope_size, ScopeIter};
pub use writeback::{clear_override, input_eligible, override_cell, write_back};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RuleErrorKind {
    #[error("rule name is empty")]
    EmptyName,
    #[error("duplicate rule name")]
    DuplicateName,
    #[error("unknown dimension '{0}'")]
    UnknownDimension(String),
    #[error("unknown target '{member}' in {dimension}")]
    UnknownTarget { dimension: String, member: String },
    #[error("filter names the rule's own dimension {0}")]
    FilterOnAnchor(String),
    #[error("dimension {0} filtered twice")]
    RepeatedFilter(String),
    #[error("unknown filter member '{member}' in {dimension}")]
    UnknownFilterMember { dimension: String, member: String },
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Bind(#[from] BindError),
}

/// A rule that failed to parse or bind, with its 1-based position.
#[derive(Debug, Error, Clone, PartialEq)]
#[error("rule {position} '{rule}': {kind}")]
pub struct RuleError {
    pub rule: String,
    pub position: usize,
    pub kind: RuleErrorKind,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CalcError {
    #[error("rule-covered cell {address}; use override")]
    RuleCovered { address: String },
    #[error("value for {address} is not finite")]
    NonFinite { address: String },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// A user-fixed value on a cell that recalculation must not overwrite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverridePin {
    pub address: crate::model::CellAddress,
    pub value: f64,
    pub source: String,
}
