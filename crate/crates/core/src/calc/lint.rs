use std::fmt;

use serde::{Deserialize, Serialize};

use super::{BoundRule, RuleSet};
use crate::model::ModelStructure;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Finding {
    /// A member with hierarchy children that no enabled rule computes.
    UncoveredParent { dimension: String, member: String },
    /// Two enabled rules write the same target with overlapping filters;
    /// the later one wins on the overlap.
    Shadowed { dimension: String, target: String, earlier: usize, later: usize },
    /// The rule reads cells inside its own scope, so results depend on
    /// evaluation order.
    SelfReference { sequence: usize, rule: String },
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Finding::UncoveredParent { dimension, member } => {
                write!(f, "{dimension} '{member}' has hierarchy children but no enabled rule")
            }
            Finding::Shadowed { dimension, target, earlier, later } => write!(
                f,
                "rule {earlier} is shadowed by rule {later} on {dimension} '{target}'"
            ),
            Finding::SelfReference { sequence, rule } => {
                write!(f, "rule {sequence} '{rule}' reads cells in its own scope")
            }
        }
    }
}

fn filters_overlap(a: &BoundRule, b: &BoundRule) -> bool {
    a.filters().iter().zip(b.filters()).all(|(fa, fb)| match (fa, fb) {
        (Some(x), Some(y)) => x.iter().any(|m| y.binary_search(m).is_ok()),
        _ => true,
    })
}

fn reads_own_scope(rule: &BoundRule) -> bool {
    rule.expression().refs().iter().any(|r| {
        let anchor_pin = r.pins().iter().find(|&&(d, _)| d == rule.anchor()).map(|&(_, m)| m);
        anchor_pin == Some(rule.target())
            && r.pins().iter().all(|&(d, m)| d == rule.anchor() || rule.filter_allows(d, m))
    })
}

/// Static checks over an enabled rule set.
pub fn coverage_lint(structure: &ModelStructure, rules: &RuleSet) -> Vec<Finding> {
    let mut findings = Vec::new();

    for (d, dim) in structure.dimensions().iter().enumerate() {
        for m in 0..dim.len() {
            if !dim.is_leaf_in_hierarchy(m) && !rules.enabled().any(|(_, r)| r.anchor() == d && r.target() == m) {
                findings.push(Finding::UncoveredParent {
                    dimension: dim.name().to_string(),
                    member: dim.member_name(m).to_string(),
                });
            }
        }
    }

    let enabled: Vec<_> = rules.enabled().collect();
    for (i, &(seq_a, a)) in enabled.iter().enumerate() {
        for &(seq_b, b) in &enabled[i + 1..] {
            if a.anchor() == b.anchor() && a.target() == b.target() && filters_overlap(a, b) {
                let dim = structure.dimension(a.anchor());
                findings.push(Finding::Shadowed {
                    dimension: dim.name().to_string(),
                    target: dim.member_name(a.target()).to_string(),
                    earlier: seq_a,
                    later: seq_b,
                });
            }
        }
    }

    for &(sequence, rule) in &enabled {
        if reads_own_scope(rule) {
            findings.push(Finding::SelfReference { sequence, rule: rule.name().to_string() });
        }
    }

    findings
}
