//! Deterministic synthetic data and models for tests and benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::calc::{RuleDef, RuleSet};
use crate::model::{leaf_mask, CellAddress, Cube, DimensionDef, MemberDef, ModelStructure};

/// Calls `value` for every input cell in cube order and stores what it
/// returns as DATA. Returns the number of cells written.
pub fn fill_inputs<F>(cube: &mut Cube, rules: &RuleSet, seed: u64, source: &str, mut value: F) -> usize
where
    F: FnMut(&CellAddress, &mut ChaCha8Rng) -> Option<f64>,
{
    let structure = cube.structure().clone();
    let leaves = leaf_mask(&structure, rules);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut written = 0;
    for linear in 0..cube.len() {
        let input = (0..structure.dimension_count()).all(|d| leaves[d][structure.coordinate(linear, d)]);
        if !input {
            continue;
        }
        let address = structure.address_of(linear).expect("in range");
        if let Some(v) = value(&address, &mut rng) {
            cube.set_data(linear, v, source);
            written += 1;
        }
    }
    written
}

/// Typical quarterly magnitude per account of the lighting P&L.
fn account_range(account: &str) -> (f64, f64) {
    match account {
        "Total sales" => (9000.0, 10500.0),
        "Discounts and allowances" => (3.0, 4.0),
        "Standard cost of sales" => (6500.0, 7300.0),
        "Manufacturing Variances" => (85.0, 100.0),
        "Other Adjustments" => (42.0, 48.0),
        "Engineering" => (400.0, 480.0),
        "Research & development" => (130.0, 160.0),
        "General & administrative" => (500.0, 580.0),
        "Sales & marketing" => (480.0, 560.0),
        _ => (0.0, 100.0),
    }
}

/// Fills every input cell of a lighting-shaped model (ACCTS, TIME, PRODUCT,
/// ORG, SCENARIO with Actuals/Budget leaves). Actuals run about 1% over
/// budget, so variance ratios keep one sign across quarters.
pub fn lighting_data(cube: &mut Cube, rules: &RuleSet, seed: u64) -> usize {
    let structure = cube.structure().clone();
    let accts = structure.find_dimension("ACCTS").expect("ACCTS dimension");
    let scenario = structure.find_dimension("SCENARIO").expect("SCENARIO dimension");
    let actuals = structure.dimension(scenario).find("Actuals").expect("Actuals member");
    fill_inputs(cube, rules, seed, "synthetic", |address, rng| {
        let account = structure.dimension(accts).member_name(address.get(accts));
        let (lo, hi) = account_range(account);
        let budget = rng.gen_range(lo..hi);
        let skew = if address.get(scenario) == actuals { 1.0 + rng.gen_range(0.0..0.02) } else { 1.0 };
        Some(budget * skew)
    })
}

fn rollup(dim: &str, target: &str, children: &[String]) -> RuleDef {
    let formula = children.iter().map(|c| format!("{{{c}}}")).collect::<Vec<_>>().join(" + ");
    RuleDef::new(format!("{dim} - {target}"), dim, target, formula)
}

/// A dimension of `leaves` leaf members grouped into `groups` parents, and
/// optionally a grand total over the groups. Returns the definition and
/// rollup rules.
fn grouped(name: &str, prefix: &str, leaves: usize, groups: usize, total: bool) -> (DimensionDef, Vec<RuleDef>) {
    let per = leaves.div_ceil(groups);
    let mut members = Vec::new();
    let mut rules = Vec::new();
    let group_names: Vec<String> = (1..=groups).map(|g| format!("{prefix} group {g}")).collect();
    for (g, group) in group_names.iter().enumerate() {
        let children: Vec<String> =
            (g * per..((g + 1) * per).min(leaves)).map(|i| format!("{prefix} {}", i + 1)).collect();
        for c in &children {
            members.push(MemberDef::new(c.clone()).parent(group.clone()));
        }
        rules.push(rollup(name, group, &children));
    }
    let total_name = format!("All {prefix}");
    for group in &group_names {
        let m = MemberDef::new(group.clone());
        members.push(if total { m.parent(total_name.clone()) } else { m });
    }
    if total {
        members.push(MemberDef::new(total_name.clone()));
        rules.push(rollup(name, &total_name, &group_names));
    }
    (DimensionDef::new(name, members), rules)
}

/// A one-million-cell model: ACCT 50 x TIME 20 x PRODUCT 25 x ORG 10 x
/// SCENARIO 4, with 28 rules (rollups, P&L-style account arithmetic, and
/// variance ratios last).
pub fn million_cell_model() -> (ModelStructure, RuleSet) {
    // ACCT: 36 inputs, 12 subtotals of 3, a difference and a ratio.
    let (mut acct, mut acct_rules) = grouped("ACCT", "Account", 36, 12, false);
    acct.members.push(MemberDef::new("Margin"));
    acct.members.push(MemberDef::new("Margin ratio"));
    acct_rules.push(RuleDef::new(
        "ACCT - Margin",
        "ACCT",
        "Margin",
        "SUM({Account group 1}, {Account group 2}, {Account group 3}) - SUM({Account group 4}, {Account group 5})",
    ));
    acct_rules.push(RuleDef::new("ACCT - Margin ratio", "ACCT", "Margin ratio", "IFERROR({Margin} / {Account group 1}, 0)"));
    let (time, time_rules) = grouped("TIME", "Period", 16, 3, true);
    let (product, product_rules) = grouped("PRODUCT", "Product", 20, 4, true);
    let (org, org_rules) = grouped("ORG", "Office", 7, 2, true);
    let scenario = DimensionDef::flat("SCENARIO", &["Actuals", "Budget", "Var", "Var %"]);
    let scenario_rules = vec![
        RuleDef::new("SCENARIO - Var", "SCENARIO", "Var", "{Actuals} - {Budget}"),
        RuleDef::new("SCENARIO - Var %", "SCENARIO", "Var %", "IFERROR({Var} / {Budget}, 0)"),
    ];
    let structure = ModelStructure::build("million", &[acct, time, product, org, scenario]).expect("valid model");
    let defs: Vec<RuleDef> =
        [org_rules, product_rules, time_rules, acct_rules, scenario_rules].into_iter().flatten().collect();
    let rules = RuleSet::build(&structure, &defs).expect("rules bind");
    (structure, rules)
}

/// Uniform input data in [0, 1000).
pub fn uniform_data(cube: &mut Cube, rules: &RuleSet, seed: u64) -> usize {
    fill_inputs(cube, rules, seed, "synthetic", |_, rng| Some(rng.gen_range(0.0..1000.0)))
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::model::stats;

    #[test]
    fn million_cell_shape() {
        let (s, rules) = million_cell_model();
        assert_eq!(s.shape(), vec![50, 20, 25, 10, 4]);
        assert_eq!(s.total_cells(), 1_000_000);
        assert_eq!(rules.len(), 28);
        assert_eq!(stats(&s, &rules).input_cells, 36 * 16 * 20 * 7 * 2);
    }

    #[test]
    fn fill_is_deterministic() {
        let (s, rules) = million_cell_model();
        let s = Arc::new(s);
        let mut a = Cube::new(s.clone());
        let mut b = Cube::new(s);
        let n = uniform_data(&mut a, &rules, 7);
        uniform_data(&mut b, &rules, 7);
        assert_eq!(n, 36 * 16 * 20 * 7 * 2);
        assert_eq!(a.values(), b.values());
    }
}
