use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{RuleError, RuleErrorKind};
use crate::model::{fold, CellAddress, ModelStructure};
use crate::rules::{bind, parse, BoundExpr};

fn enabled_default() -> bool {
    true
}

fn is_true(b: &bool) -> bool {
    *b
}

/// A rule as written in a model file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleDef {
    pub name: String,
    pub dimension: String,
    pub target: String,
    pub formula: String,
    #[serde(default = "enabled_default", skip_serializing_if = "is_true")]
    pub enabled: bool,
    /// Restricts the rule's scope on non-anchor dimensions.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub filters: BTreeMap<String, Vec<String>>,
    /// Folder path for display grouping only.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub folder: Vec<String>,
}

impl RuleDef {
    pub fn new(
        name: impl Into<String>,
        dimension: impl Into<String>,
        target: impl Into<String>,
        formula: impl Into<String>,
    ) -> Self {
        RuleDef {
            name: name.into(),
            dimension: dimension.into(),
            target: target.into(),
            formula: formula.into(),
            enabled: true,
            filters: BTreeMap::new(),
            folder: Vec::new(),
        }
    }

    pub fn filter(mut self, dimension: impl Into<String>, members: &[&str]) -> Self {
        self.filters.insert(dimension.into(), members.iter().map(|m| m.to_string()).collect());
        self
    }

    pub fn in_folder(mut self, path: &[&str]) -> Self {
        self.folder = path.iter().map(|p| p.to_string()).collect();
        self
    }
}

/// A rule bound to a structure: it writes every cell whose anchor coordinate
/// is `target`, restricted by `filters` on the other dimensions.
#[derive(Debug, Clone)]
pub struct BoundRule {
    name: String,
    anchor: usize,
    target: usize,
    formula: String,
    expression: BoundExpr,
    enabled: bool,
    /// Per dimension: `None` for all members, else sorted allowed ordinals.
    filters: Vec<Option<Vec<usize>>>,
    folder: Vec<String>,
}

impl BoundRule {
    pub fn bind(structure: &ModelStructure, def: &RuleDef) -> Result<BoundRule, RuleErrorKind> {
        let anchor = structure
            .find_dimension(&def.dimension)
            .ok_or_else(|| RuleErrorKind::UnknownDimension(def.dimension.clone()))?;
        let anchor_dim = structure.dimension(anchor);
        let target = anchor_dim.find(&def.target).ok_or_else(|| RuleErrorKind::UnknownTarget {
            dimension: anchor_dim.name().to_string(),
            member: def.target.clone(),
        })?;

        let mut filters = vec![None; structure.dimension_count()];
        for (dim_name, members) in &def.filters {
            let d = structure
                .find_dimension(dim_name)
                .ok_or_else(|| RuleErrorKind::UnknownDimension(dim_name.clone()))?;
            if d == anchor {
                return Err(RuleErrorKind::FilterOnAnchor(anchor_dim.name().to_string()));
            }
            if filters[d].is_some() {
                return Err(RuleErrorKind::RepeatedFilter(structure.dimension(d).name().to_string()));
            }
            let dim = structure.dimension(d);
            let mut ordinals = members
                .iter()
                .map(|m| {
                    dim.find(m).ok_or_else(|| RuleErrorKind::UnknownFilterMember {
                        dimension: dim.name().to_string(),
                        member: m.clone(),
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            ordinals.sort_unstable();
            ordinals.dedup();
            filters[d] = Some(ordinals);
        }

        let expression = bind(&parse(&def.formula)?, structure, anchor)?;
        Ok(BoundRule {
            name: def.name.trim().to_string(),
            anchor,
            target,
            formula: def.formula.clone(),
            expression,
            enabled: def.enabled,
            filters,
            folder: def.folder.clone(),
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn anchor(&self) -> usize {
        self.anchor
    }

    pub fn target(&self) -> usize {
        self.target
    }

    /// The formula as written.
    pub fn formula(&self) -> &str {
        &self.formula
    }

    pub fn expression(&self) -> &BoundExpr {
        &self.expression
    }

    pub fn is_enabled(&self) -> bool {
        self.enabled
    }

    pub fn folder(&self) -> &[String] {
        &self.folder
    }

    pub fn filters(&self) -> &[Option<Vec<usize>>] {
        &self.filters
    }

    pub fn filter_allows(&self, dimension: usize, member: usize) -> bool {
        match &self.filters[dimension] {
            None => true,
            Some(allowed) => allowed.binary_search(&member).is_ok(),
        }
    }

    /// Whether the cell lies in this rule's scope (ignores the enable flag).
    pub fn covers(&self, address: &CellAddress) -> bool {
        address.get(self.anchor) == self.target
            && address.ordinals().iter().enumerate().all(|(d, &m)| self.filter_allows(d, m))
    }

    pub fn covers_linear(&self, structure: &ModelStructure, linear: usize) -> bool {
        structure.coordinate(linear, self.anchor) == self.target
            && (0..structure.dimension_count())
                .all(|d| self.filters[d].is_none() || self.filter_allows(d, structure.coordinate(linear, d)))
    }

    /// Formula text with canonical member names.
    pub fn display(&self, structure: &ModelStructure) -> String {
        self.expression.display(structure)
    }

    /// `DIM - Target`, the label used in listings.
    pub fn label(&self, structure: &ModelStructure) -> String {
        let dim = structure.dimension(self.anchor);
        format!("{} - {}", dim.name(), dim.member_name(self.target))
    }

    pub fn to_def(&self, structure: &ModelStructure) -> RuleDef {
        let dim = structure.dimension(self.anchor);
        let filters = self
            .filters
            .iter()
            .enumerate()
            .filter_map(|(d, f)| {
                f.as_ref().map(|ordinals| {
                    let fd = structure.dimension(d);
                    (
                        fd.name().to_string(),
                        ordinals.iter().map(|&m| fd.member_name(m).to_string()).collect(),
                    )
                })
            })
            .collect();
        RuleDef {
            name: self.name.clone(),
            dimension: dim.name().to_string(),
            target: dim.member_name(self.target).to_string(),
            formula: self.formula.clone(),
            enabled: self.enabled,
            filters,
            folder: self.folder.clone(),
        }
    }
}

/// Rules in sequence order. Sequence numbers are 1-based positions.
#[derive(Debug, Clone, Default)]
pub struct RuleSet {
    rules: Vec<BoundRule>,
}

impl RuleSet {
    pub fn new() -> RuleSet {
        RuleSet::default()
    }

    /// Binds every definition in order. Errors name the rule and its position.
    pub fn build(structure: &ModelStructure, defs: &[RuleDef]) -> Result<RuleSet, RuleError> {
        let mut set = RuleSet::new();
        for def in defs {
            set.push(structure, def)?;
        }
        Ok(set)
    }

    /// Appends a rule at the end of the sequence.
    pub fn push(&mut self, structure: &ModelStructure, def: &RuleDef) -> Result<(), RuleError> {
        let position = self.rules.len() + 1;
        let error = |kind| RuleError { rule: def.name.clone(), position, kind };
        if def.name.trim().is_empty() {
            return Err(error(RuleErrorKind::EmptyName));
        }
        if self.find(&def.name).is_some() {
            return Err(error(RuleErrorKind::DuplicateName));
        }
        let rule = BoundRule::bind(structure, def).map_err(error)?;
        self.rules.push(rule);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn rules(&self) -> &[BoundRule] {
        &self.rules
    }

    /// Rule at a 1-based sequence position.
    pub fn get(&self, sequence: usize) -> Option<&BoundRule> {
        sequence.checked_sub(1).and_then(|i| self.rules.get(i))
    }

    /// `(sequence, rule)` pairs in order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, &BoundRule)> {
        self.rules.iter().enumerate().map(|(i, r)| (i + 1, r))
    }

    pub fn enabled(&self) -> impl Iterator<Item = (usize, &BoundRule)> {
        self.iter().filter(|(_, r)| r.enabled)
    }

    /// Sequence number of the rule with this name (case-insensitive).
    pub fn find(&self, name: &str) -> Option<usize> {
        let key = fold(name);
        self.rules.iter().position(|r| fold(&r.name) == key).map(|i| i + 1)
    }

    /// New order given as 0-based indexes into the current order:
    /// `permutation[k]` is the rule that moves to position `k`.
    pub fn reorder(&self, permutation: &[usize]) -> Result<RuleSet, RuleSetError> {
        if permutation.len() != self.rules.len() {
            return Err(RuleSetError::InvalidPermutation);
        }
        let mut seen = vec![false; self.rules.len()];
        for &p in permutation {
            if p >= seen.len() || std::mem::replace(&mut seen[p], true) {
                return Err(RuleSetError::InvalidPermutation);
            }
        }
        Ok(RuleSet { rules: permutation.iter().map(|&p| self.rules[p].clone()).collect() })
    }

    /// Reorders by listing every rule name in the desired order.
    pub fn reorder_by_names<S: AsRef<str>>(&self, names: &[S]) -> Result<RuleSet, RuleSetError> {
        let permutation = names
            .iter()
            .map(|n| {
                self.find(n.as_ref())
                    .map(|seq| seq - 1)
                    .ok_or_else(|| RuleSetError::UnknownRule(n.as_ref().to_string()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        self.reorder(&permutation)
    }

    /// Moves the rule at `from` (1-based) so it lands at position `to`.
    pub fn move_rule(&self, from: usize, to: usize) -> Result<RuleSet, RuleSetError> {
        let n = self.rules.len();
        if from == 0 || from > n || to == 0 || to > n {
            return Err(RuleSetError::InvalidPermutation);
        }
        let mut order: Vec<usize> = (0..n).collect();
        let moved = order.remove(from - 1);
        order.insert(to - 1, moved);
        self.reorder(&order)
    }

    pub fn set_enabled(&self, sequence: usize, enabled: bool) -> Result<RuleSet, RuleSetError> {
        let mut next = self.clone();
        let rule = sequence
            .checked_sub(1)
            .and_then(|i| next.rules.get_mut(i))
            .ok_or(RuleSetError::UnknownSequence(sequence))?;
        rule.enabled = enabled;
        Ok(next)
    }

    pub fn to_defs(&self, structure: &ModelStructure) -> Vec<RuleDef> {
        self.rules.iter().map(|r| r.to_def(structure)).collect()
    }
}

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum RuleSetError {
    #[error("not a permutation of the rule list")]
    InvalidPermutation,
    #[error("no rule named '{0}'")]
    UnknownRule(String),
    #[error("no rule at sequence {0}")]
    UnknownSequence(usize),
}
