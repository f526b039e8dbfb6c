#![allow(dead_code)]

pub mod oracle;

use std::path::PathBuf;

use pivotmodel::pivot::PivotModel;
use pivotmodel::CellValue;

pub fn models_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../models")
}

pub fn fixture(name: &str) -> PathBuf {
    models_dir().join(name)
}

pub fn lighting() -> PivotModel {
    PivotModel::open(fixture("lighting.json")).expect("lighting model loads")
}

/// Lighting model with the Figure 7 budget loaded and calculated.
pub fn lighting_with_europe_budget() -> PivotModel {
    let mut m = lighting();
    let (_, report) = m.load_path(fixture("europe_budget_wide.csv")).unwrap();
    assert!(report.rejected.is_empty(), "{:?}", report.rejected);
    m.calculate();
    m
}

pub fn value(model: &PivotModel, cell: &str) -> CellValue {
    let address = model.address(cell).unwrap_or_else(|e| panic!("{cell}: {e}"));
    model.cube().value_at(&address).unwrap()
}

pub fn number(model: &PivotModel, cell: &str) -> f64 {
    match value(model, cell) {
        CellValue::Number(n) => n,
        other => panic!("{cell} holds {other}"),
    }
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

pub fn rel_close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}
