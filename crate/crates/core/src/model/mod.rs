//! Model structure, cell addressing, the dense cube, and structural stats.

mod cube;
mod stats;
mod structure;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use cube::{CellSource, Cube, Provenance};
pub use stats::{leaf_mask, stats, ModelStats};
pub use structure::{Dimension, DimensionDef, Member, MemberDef, ModelStructure};

pub(crate) use structure::fold;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("a model needs at least two dimensions, got {0}")]
    TooFewDimensions(usize),
    #[error("duplicate dimension '{0}'")]
    DuplicateDimension(String),
    #[error("empty name in dimension '{dimension}'")]
    EmptyName { dimension: String },
    #[error("dimension '{dimension}' has no members")]
    EmptyDimension { dimension: String },
    #[error("duplicate member name or alias '{member}' in {dimension}")]
    DuplicateMember { dimension: String, member: String },
    #[error("member '{member}' in {dimension} names unknown parent '{parent}'")]
    UnknownParent { dimension: String, member: String, parent: String },
    #[error("parent cycle through '{member}' in {dimension}")]
    ParentCycle { dimension: String, member: String },
    #[error("unknown dimension '{0}'")]
    UnknownDimension(String),
    #[error("unknown member '{member}' in {dimension}")]
    UnknownMember { dimension: String, member: String },
    #[error("dimension '{0}' given twice in address")]
    RepeatedDimension(String),
    #[error("address does not name dimension '{0}'")]
    MissingDimension(String),
    #[error("ordinal {ordinal} out of range for {dimension} ({count} members)")]
    OrdinalOutOfRange { dimension: String, ordinal: usize, count: usize },
    #[error("address has {got} coordinates, model has {expected} dimensions")]
    AddressArity { expected: usize, got: usize },
    #[error("linear index {index} out of range ({total} cells)")]
    IndexOutOfRange { index: usize, total: usize },
    #[error("malformed cell address '{0}' (expected DIM=Member,...)")]
    MalformedAddress(String),
    #[error("cell count overflows the address space")]
    TooLarge,
}

/// One member ordinal per dimension, in dimension order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CellAddress(Vec<usize>);

impl CellAddress {
    pub fn new(ordinals: Vec<usize>) -> Self {
        CellAddress(ordinals)
    }

    pub fn ordinals(&self) -> &[usize] {
        &self.0
    }

    pub fn get(&self, dimension: usize) -> usize {
        self.0[dimension]
    }

    pub fn with(&self, dimension: usize, ordinal: usize) -> CellAddress {
        let mut next = self.clone();
        next.0[dimension] = ordinal;
        next
    }

    pub fn set(&mut self, dimension: usize, ordinal: usize) {
        self.0[dimension] = ordinal;
    }
}

impl fmt::Display for CellAddress {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}
