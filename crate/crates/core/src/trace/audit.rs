use serde::{Deserialize, Serialize};

use super::applicable_rules;
use crate::calc::RuleSet;
use crate::model::{CellSource, Cube};
use crate::value::CellValue;

const REL_TOL: f64 = 1e-9;
const ABS_TOL: f64 = 1e-12;

/// Numbers agree within 1e-9 relative (1e-12 absolute near zero); errors
/// agree when they are the same kind.
pub fn values_agree(a: CellValue, b: CellValue) -> bool {
    match (a, b) {
        (CellValue::Number(x), CellValue::Number(y)) => (x - y).abs() <= (REL_TOL * x.abs().max(y.abs())).max(ABS_TOL),
        (CellValue::Error(x), CellValue::Error(y)) => x == y,
        _ => false,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    pub sequence: usize,
    pub rule: String,
    pub value: CellValue,
    pub agrees: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionReport {
    pub members: Vec<String>,
    pub stored: CellValue,
    pub decompositions: Vec<Decomposition>,
}

impl DecompositionReport {
    pub fn disagrees(&self) -> bool {
        self.decompositions.iter().any(|d| !d.agrees)
    }
}

fn recompute(cube: &Cube, rules: &RuleSet, linear: usize, sequence: usize) -> CellValue {
    let structure = cube.structure();
    let rule = rules.get(sequence).expect("sequence in range");
    let refs = rule.expression().refs();
    rule.expression().evaluate(&mut |i: usize| cube.value(refs[i].operand_linear(structure, linear)))
}

/// Recomputes the cell under every applicable rule, reading current cube
/// values for the operands, and compares each result with the stored value.
pub fn decomposition_check(cube: &Cube, rules: &RuleSet, linear: usize) -> DecompositionReport {
    let structure = cube.structure();
    let stored = cube.value(linear);
    let address = structure.address_of(linear).expect("linear index in range");
    let decompositions = applicable_rules(structure, rules, linear)
        .into_iter()
        .map(|sequence| {
            let value = recompute(cube, rules, linear, sequence);
            Decomposition {
                sequence,
                rule: rules.get(sequence).expect("in range").name().to_string(),
                value,
                agrees: values_agree(value, stored),
            }
        })
        .collect();
    DecompositionReport {
        members: structure.member_names(&address).into_iter().map(String::from).collect(),
        stored,
        decompositions,
    }
}

/// Every unpinned cell with two or more applicable rules where some
/// decomposition disagrees with the stored value.
pub fn model_audit(cube: &Cube, rules: &RuleSet) -> Vec<DecompositionReport> {
    let structure = cube.structure();
    let enabled: Vec<_> = rules.enabled().collect();
    let mut out = Vec::new();
    for linear in 0..cube.len() {
        if matches!(cube.source(linear), CellSource::Override(_)) {
            continue;
        }
        let covering = enabled.iter().filter(|(_, r)| r.covers_linear(structure, linear)).count();
        if covering < 2 {
            continue;
        }
        let report = decomposition_check(cube, rules, linear);
        if report.disagrees() {
            out.push(report);
        }
    }
    out
}
