//! Trace-precedence drill-down, decomposition audit, and documentation.
//!
//! A trace node is one cell plus the rule used to explain it; its children
//! are that rule's operand cells at the node's address, labelled by
//! appending the 1-based operand position (`L1`, `L1.2`, `L1.2.1`, ...).
//! Any rule whose scope contains the cell may be drilled, not only the one
//! that produced the stored value.

mod audit;
mod docs;

use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::calc::{BoundRule, RuleSet};
use crate::model::{CellAddress, CellSource, Cube, ModelError, ModelStructure, Provenance};
use crate::value::CellValue;

pub use audit::{decomposition_check, model_audit, values_agree, Decomposition, DecompositionReport};
pub use docs::{export_docs, export_docs_csv, parse_docs_hierarchy, DocsDimension};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TraceError {
    #[error("rule {sequence} '{rule}' does not apply to {address}")]
    NotApplicable { sequence: usize, rule: String, address: String },
    #[error("unknown rule '{0}'")]
    UnknownRule(String),
    #[error("node {label} has no operand {operand}")]
    NoOperand { label: String, operand: usize },
    #[error("malformed level label '{0}'")]
    BadLabel(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceRule {
    pub sequence: usize,
    pub name: String,
    /// Formula with canonical member names.
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceNode {
    pub label: String,
    pub address: CellAddress,
    /// Member name per dimension, in dimension order.
    pub members: Vec<String>,
    pub value: CellValue,
    pub provenance: Provenance,
    /// The rule this node is explained by, if any.
    pub rule: Option<TraceRule>,
    /// Every enabled rule whose scope contains the cell, in sequence order.
    pub applicable: Vec<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<TraceNode>,
}

/// Enabled rules whose scope contains the cell, in sequence order. The last
/// one wins on recalculation.
pub fn applicable_rules(structure: &ModelStructure, rules: &RuleSet, linear: usize) -> Vec<usize> {
    rules.enabled().filter(|(_, r)| r.covers_linear(structure, linear)).map(|(seq, _)| seq).collect()
}

/// Finds a rule by name (case-insensitive) or by its `DIM - Target` label.
pub fn resolve_rule(structure: &ModelStructure, rules: &RuleSet, name: &str) -> Result<usize, TraceError> {
    rules
        .find(name)
        .or_else(|| {
            let wanted = name.trim().to_lowercase();
            rules.iter().find(|(_, r)| r.label(structure).to_lowercase() == wanted).map(|(seq, _)| seq)
        })
        .ok_or_else(|| TraceError::UnknownRule(name.to_string()))
}

fn trace_rule(structure: &ModelStructure, sequence: usize, rule: &BoundRule) -> TraceRule {
    TraceRule { sequence, name: rule.name().to_string(), text: rule.display(structure) }
}

/// Builds a childless node with its default rule: the winning rule, unless
/// the cell is pinned or no rule covers it.
fn bare_node(cube: &Cube, rules: &RuleSet, linear: usize, label: String) -> TraceNode {
    let structure = cube.structure();
    let address = structure.address_of(linear).expect("linear index in range");
    let applicable = applicable_rules(structure, rules, linear);
    let rule = match cube.source(linear) {
        CellSource::Override(_) => None,
        _ => applicable.last().map(|&seq| trace_rule(structure, seq, rules.get(seq).expect("sequence in range"))),
    };
    TraceNode {
        label,
        members: structure.member_names(&address).into_iter().map(String::from).collect(),
        address,
        value: cube.value(linear),
        provenance: cube.provenance(linear),
        rule,
        applicable,
        children: Vec::new(),
    }
}

fn node_at(
    cube: &Cube,
    rules: &RuleSet,
    linear: usize,
    label: String,
    chosen: Option<usize>,
) -> Result<TraceNode, TraceError> {
    let structure = cube.structure();
    let mut node = bare_node(cube, rules, linear, label);
    if let Some(seq) = chosen {
        if !node.applicable.contains(&seq) {
            let name = rules.get(seq).map(|r| r.name().to_string()).unwrap_or_default();
            return Err(TraceError::NotApplicable {
                sequence: seq,
                rule: name,
                address: structure.describe(&node.address),
            });
        }
        node.rule = Some(trace_rule(structure, seq, rules.get(seq).expect("checked above")));
    }
    if let Some(rule) = &node.rule {
        let bound = rules.get(rule.sequence).expect("sequence in range");
        node.children = bound
            .expression()
            .refs()
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let child = r.operand_linear(structure, linear);
                bare_node(cube, rules, child, format!("{}.{}", node.label, i + 1))
            })
            .collect();
    }
    Ok(node)
}

/// One level of trace at `address`: the node and its operand children.
/// `chosen` picks a rule by sequence; it defaults to the winner.
pub fn trace(cube: &Cube, rules: &RuleSet, address: &CellAddress, chosen: Option<usize>) -> Result<TraceNode, TraceError> {
    let linear = cube.structure().linear_index(address)?;
    node_at(cube, rules, linear, "L1".to_string(), chosen)
}

/// One drill step: the 1-based operand to open and the rule to explain it by.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DrillStep {
    pub operand: usize,
    #[serde(default)]
    pub rule: Option<usize>,
}

/// Follows a drill path from `address`, returning one traced node per step
/// (the root first). In each block, the child that is drilled next carries
/// the rule it is drilled by.
pub fn drill_path(
    cube: &Cube,
    rules: &RuleSet,
    address: &CellAddress,
    root_rule: Option<usize>,
    steps: &[DrillStep],
) -> Result<Vec<TraceNode>, TraceError> {
    let mut blocks = vec![trace(cube, rules, address, root_rule)?];
    for step in steps {
        let parent = blocks.last().expect("non-empty");
        let child = step.operand.checked_sub(1).and_then(|i| parent.children.get(i)).ok_or_else(|| {
            TraceError::NoOperand { label: parent.label.clone(), operand: step.operand }
        })?;
        let linear = cube.structure().linear_index(&child.address)?;
        let next = node_at(cube, rules, linear, child.label.clone(), step.rule)?;
        let parent = blocks.last_mut().expect("non-empty");
        parent.children[step.operand - 1].rule = next.rule.clone();
        blocks.push(next);
    }
    Ok(blocks)
}

/// Drills winning rules depth-first up to `depth` levels (1 = the root
/// block only). Returns one block per drilled node, in pre-order.
pub fn trace_depth(
    cube: &Cube,
    rules: &RuleSet,
    address: &CellAddress,
    chosen: Option<usize>,
    depth: usize,
) -> Result<Vec<TraceNode>, TraceError> {
    fn walk(cube: &Cube, rules: &RuleSet, node: TraceNode, remaining: usize, out: &mut Vec<TraceNode>) {
        let children: Vec<(usize, String)> = node
            .children
            .iter()
            .filter(|c| c.rule.is_some())
            .map(|c| (cube.structure().linear_index(&c.address).expect("valid"), c.label.clone()))
            .collect();
        out.push(node);
        if remaining <= 1 {
            return;
        }
        for (linear, label) in children {
            let child = node_at(cube, rules, linear, label, None).expect("winning rule applies");
            walk(cube, rules, child, remaining - 1, out);
        }
    }
    let mut out = Vec::new();
    if depth == 0 {
        return Ok(out);
    }
    walk(cube, rules, trace(cube, rules, address, chosen)?, depth, &mut out);
    Ok(out)
}

/// Operand positions encoded by a level label: `L1.1.2` gives `[1, 2]`.
pub fn parse_label(label: &str) -> Result<Vec<usize>, TraceError> {
    let bad = || TraceError::BadLabel(label.to_string());
    let rest = label.strip_prefix("L1").ok_or_else(bad)?;
    if rest.is_empty() {
        return Ok(Vec::new());
    }
    rest.strip_prefix('.')
        .ok_or_else(bad)?
        .split('.')
        .map(|p| p.parse::<usize>().ok().filter(|&n| n > 0).ok_or_else(bad))
        .collect()
}

/// Writes blocks as CSV: `Level`, one column per dimension, `Value`, `Rule`.
/// Each block is the node's row followed by its children; blocks are
/// separated by an empty line.
pub fn write_trace_csv<W: Write>(structure: &ModelStructure, blocks: &[TraceNode], mut writer: W) -> std::io::Result<()> {
    let row = |node: &TraceNode| -> Vec<String> {
        let mut r = vec![node.label.clone()];
        r.extend(node.members.iter().cloned());
        r.push(node.value.to_string());
        r.push(node.rule.as_ref().map(|x| x.text.clone()).unwrap_or_default());
        r
    };
    {
        let mut out = csv::Writer::from_writer(&mut writer);
        let mut header = vec!["Level".to_string()];
        header.extend(structure.dimensions().iter().map(|d| d.name().to_string()));
        header.extend(["Value".to_string(), "Rule".to_string()]);
        out.write_record(&header)?;
        out.flush()?;
    }
    for block in blocks {
        let mut out = csv::Writer::from_writer(&mut writer);
        out.write_record(row(block))?;
        for child in &block.children {
            out.write_record(row(child))?;
        }
        out.flush()?;
        drop(out);
        writer.write_all(b"\n")?;
    }
    Ok(())
}
