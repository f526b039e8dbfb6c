//! Fixtures shared by the benchmarks.

use std::path::PathBuf;

use pivotmodel::pivot::PivotModel;
use pivotmodel::synthetic::{lighting_data, million_cell_model, uniform_data};
use pivotmodel::view::ViewSpec;

pub fn models_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../models")
}

/// The 12,600-cell Lighting model with synthetic inputs, calculated.
pub fn lighting() -> PivotModel {
    let mut model = PivotModel::open(models_dir().join("lighting.json")).expect("lighting model");
    let rules = model.rules().clone();
    lighting_data(model.cube_mut(), &rules, 1);
    model.calculate();
    model
}

/// The 1,000,000-cell synthetic model with uniform inputs, calculated.
pub fn million() -> PivotModel {
    let (structure, rules) = million_cell_model();
    let mut model = PivotModel::new(structure, rules.clone());
    uniform_data(model.cube_mut(), &rules, 1);
    model.calculate();
    model
}

/// 100 rows (25 accounts by 4 scenarios) by 10 periods on the million-cell model.
pub fn hundred_by_ten() -> ViewSpec {
    let accounts: Vec<String> = (1..=25).map(|i| format!("Account {i}")).collect();
    let accounts: Vec<&str> = accounts.iter().map(String::as_str).collect();
    let periods: Vec<String> = (1..=10).map(|i| format!("Period {i}")).collect();
    let periods: Vec<&str> = periods.iter().map(String::as_str).collect();
    ViewSpec::default()
        .page("PRODUCT", "All Product")
        .page("ORG", "All Office")
        .rows(&["ACCT", "SCENARIO"])
        .cols(&["TIME"])
        .select("ACCT", &accounts)
        .select("TIME", &periods)
}
