use serde::{Deserialize, Serialize};

use super::ModelStructure;
use crate::calc::RuleSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelStats {
    pub total_cells: usize,
    /// Cells whose every coordinate is a leaf (not an enabled rule target).
    pub input_cells: usize,
    pub calculated_cells: usize,
    pub rules: usize,
    pub enabled_rules: usize,
}

/// Per dimension, per member: true when no enabled rule targets the member.
pub fn leaf_mask(structure: &ModelStructure, rules: &RuleSet) -> Vec<Vec<bool>> {
    let mut mask: Vec<Vec<bool>> = structure.dimensions().iter().map(|d| vec![true; d.len()]).collect();
    for (_, rule) in rules.enabled() {
        mask[rule.anchor()][rule.target()] = false;
    }
    mask
}

pub fn stats(structure: &ModelStructure, rules: &RuleSet) -> ModelStats {
    let input_cells = leaf_mask(structure, rules)
        .iter()
        .map(|leaves| leaves.iter().filter(|&&leaf| leaf).count())
        .product();
    let total_cells = structure.total_cells();
    ModelStats {
        total_cells,
        input_cells,
        calculated_cells: total_cells - input_cells,
        rules: rules.len(),
        enabled_rules: rules.enabled().count(),
    }
}
