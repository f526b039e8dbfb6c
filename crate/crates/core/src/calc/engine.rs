use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{scope_linear, RuleSet};
use crate::model::{CellSource, Cube};
use crate::value::CellValue;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleWrites {
    pub sequence: usize,
    pub name: String,
    pub cells_written: usize,
}

/// Summary of one full calculation.
///
/// `total_written - overwrites` equals the number of RULE cells afterwards;
/// `overwrites` counts write events that hit a cell an earlier rule already
/// wrote, `contested_cells` the distinct cells written more than once.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct CalcReport {
    pub rules: Vec<RuleWrites>,
    pub total_written: usize,
    pub overwrites: usize,
    pub contested_cells: usize,
    pub skipped_pinned: usize,
    pub duration_ms: f64,
}

impl CalcReport {
    pub fn summary(&self) -> String {
        format!(
            "rules={} written={} overwrites={} contested={} pinned_skipped={}",
            self.rules.len(),
            self.total_written,
            self.overwrites,
            self.contested_cells,
            self.skipped_pinned
        )
    }
}

/// Recalculates the whole cube from its data and pins.
///
/// Previous rule results are discarded first. Then, for each enabled rule
/// in sequence, every unpinned cell of its scope is evaluated against the
/// cube as of that rule's start and written with RULE provenance.
pub fn apply_rules(cube: &mut Cube, rules: &RuleSet) -> CalcReport {
    let started = Instant::now();
    let structure = cube.structure().clone();
    cube.clear_rule_cells();
    cube.set_rule_names(rules.rules().iter().map(|r| r.name().to_string()).collect());

    let mut write_counts = vec![0u8; cube.len()];
    let mut report = CalcReport::default();
    let mut staged: Vec<(usize, CellValue)> = Vec::new();

    for (sequence, rule) in rules.enabled() {
        let refs = rule.expression().refs();
        let expr = rule.expression();
        staged.clear();
        for linear in scope_linear(rule, &structure) {
            if matches!(cube.source(linear), CellSource::Override(_)) {
                report.skipped_pinned += 1;
                continue;
            }
            let values = cube.values();
            let value = expr.evaluate(&mut |i| values[refs[i].operand_linear(&structure, linear)]);
            staged.push((linear, value));
        }
        // Writes land after the whole scope is evaluated: the rule sees a
        // consistent snapshot regardless of iteration order.
        for &(linear, value) in &staged {
            cube.write_rule(linear, value, sequence as u32);
            let count = &mut write_counts[linear];
            if *count > 0 {
                report.overwrites += 1;
            }
            *count = count.saturating_add(1);
        }
        report.total_written += staged.len();
        report.rules.push(RuleWrites {
            sequence,
            name: rule.name().to_string(),
            cells_written: staged.len(),
        });
    }

    report.contested_cells = write_counts.iter().filter(|&&c| c >= 2).count();
    report.duration_ms = started.elapsed().as_secs_f64() * 1e3;
    report
}
