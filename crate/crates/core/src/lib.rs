//! A dense multidimensional calculation engine.
//!
//! A model is a set of dimensions (accounts, time, products, ...) whose
//! cartesian product forms a cube. Instead of per-cell formulas, an ordered
//! list of member rules computes every aggregate and derived cell, e.g.
//! `ACCTS - Net sales = {Total sales} - {Discounts and allowances}` fills
//! Net sales for every product, period, organization and scenario.
//!
//! Modules, bottom-up:
//! - [`model`]: structure, addressing, the cube, stats
//! - [`rules`]: the formula language
//! - [`calc`]: sequential rule application, write-back, overrides, lint

pub mod calc;
pub mod io;
pub mod model;
pub mod pivot;
pub mod rules;
pub mod synthetic;
pub mod trace;
pub mod value;
pub mod view;

pub use calc::{apply_rules, CalcReport, RuleDef, RuleSet};
pub use model::{CellAddress, Cube, ModelStats, ModelStructure, Provenance};
pub use value::{CellValue, ErrorKind};
