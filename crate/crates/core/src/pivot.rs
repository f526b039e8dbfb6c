//! A model bundled with its rules and cube, plus a version counter that
//! every mutation bumps. This is what the CLI and the service operate on.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::calc::{
    apply_rules, coverage_lint, input_eligible, CalcError, CalcReport, Finding, RuleSet, RuleSetError,
};
use crate::io::{self, DataLayout, IoError, LoadReport, ModelFile};
use crate::model::{leaf_mask, stats, CellAddress, Cube, ModelError, ModelStats, ModelStructure};
use crate::trace::{self, DecompositionReport, TraceError, TraceNode};
use crate::view::{self, ViewError, ViewGrid, ViewSpec};

#[derive(Debug, Error)]
pub enum PivotError {
    #[error(transparent)]
    Io(#[from] IoError),
    #[error(transparent)]
    Calc(#[from] CalcError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Rules(#[from] RuleSetError),
    #[error(transparent)]
    Trace(#[from] TraceError),
    #[error(transparent)]
    View(#[from] ViewError),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EditMode {
    #[default]
    Data,
    Override,
}

/// One cell edit: a data write on an input cell, or a pin on any cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellEdit {
    pub address: CellAddress,
    pub value: f64,
    #[serde(default)]
    pub mode: EditMode,
}

#[derive(Debug, Clone)]
pub struct PivotModel {
    structure: Arc<ModelStructure>,
    rules: RuleSet,
    cube: Cube,
    version: u64,
}

impl PivotModel {
    pub fn new(structure: ModelStructure, rules: RuleSet) -> PivotModel {
        let structure = Arc::new(structure);
        PivotModel { cube: Cube::new(structure.clone()), structure, rules, version: 0 }
    }

    pub fn from_model_file(file: &ModelFile) -> Result<PivotModel, PivotError> {
        let (structure, rules) = file.build()?;
        Ok(PivotModel::new(structure, rules))
    }

    pub fn open(path: impl AsRef<Path>) -> Result<PivotModel, PivotError> {
        let (structure, rules) = io::load_model(path)?;
        Ok(PivotModel::new(structure, rules))
    }

    pub fn structure(&self) -> &Arc<ModelStructure> {
        &self.structure
    }

    pub fn rules(&self) -> &RuleSet {
        &self.rules
    }

    pub fn cube(&self) -> &Cube {
        &self.cube
    }

    /// Mutable cube access for bulk loaders; bumps the version.
    pub fn cube_mut(&mut self) -> &mut Cube {
        self.version += 1;
        &mut self.cube
    }

    pub fn version(&self) -> u64 {
        self.version
    }

    pub fn stats(&self) -> ModelStats {
        stats(&self.structure, &self.rules)
    }

    pub fn model_file(&self) -> ModelFile {
        ModelFile::from_model(&self.structure, &self.rules)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), PivotError> {
        Ok(io::save_model(path, &self.structure, &self.rules)?)
    }

    pub fn address(&self, text: &str) -> Result<CellAddress, PivotError> {
        Ok(self.structure.parse_address(text)?)
    }

    pub fn calculate(&mut self) -> CalcReport {
        self.version += 1;
        apply_rules(&mut self.cube, &self.rules)
    }

    /// Loads CSV text, detecting the layout unless given. Does not recalc.
    pub fn load_csv(
        &mut self,
        text: &str,
        source: &str,
        layout: Option<DataLayout>,
        spread: Option<&str>,
    ) -> Result<(DataLayout, LoadReport), PivotError> {
        let report = match layout {
            None => io::load_csv_auto(&mut self.cube, &self.rules, text, source)?,
            Some(DataLayout::Long) => {
                (DataLayout::Long, io::load_long_csv(&mut self.cube, &self.rules, text.as_bytes(), source)?)
            }
            Some(DataLayout::Wide) => {
                (DataLayout::Wide, io::load_wide_csv(&mut self.cube, &self.rules, text.as_bytes(), source, spread)?)
            }
        };
        self.version += 1;
        Ok(report)
    }

    /// Loads a CSV file; the source id is the file name.
    pub fn load_path(&mut self, path: impl AsRef<Path>) -> Result<(DataLayout, LoadReport), PivotError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|source| IoError::File { path: path.display().to_string(), source })?;
        let source = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        self.load_csv(&text, &source, None, None)
    }

    /// Applies a batch of edits atomically, then recalculates once. Data
    /// edits must target input cells; overrides may target any cell.
    pub fn apply_edits(&mut self, edits: &[CellEdit], source: &str) -> Result<CalcReport, PivotError> {
        let leaves = leaf_mask(&self.structure, &self.rules);
        let mut checked = Vec::with_capacity(edits.len());
        for edit in edits {
            let linear = self.structure.linear_index(&edit.address)?;
            if !edit.value.is_finite() {
                return Err(CalcError::NonFinite { address: self.structure.describe(&edit.address) }.into());
            }
            if edit.mode == EditMode::Data && !input_eligible(&leaves, &edit.address) {
                return Err(CalcError::RuleCovered { address: self.structure.describe(&edit.address) }.into());
            }
            checked.push((linear, edit));
        }
        for (linear, edit) in checked {
            match edit.mode {
                EditMode::Data => self.cube.set_data(linear, edit.value, source),
                EditMode::Override => self.cube.pin(linear, edit.value, source),
            }
        }
        Ok(self.calculate())
    }

    /// Releases a pin and recalculates. Returns false if nothing was pinned.
    pub fn clear_override(&mut self, address: &CellAddress) -> Result<(bool, CalcReport), PivotError> {
        let linear = self.structure.linear_index(address)?;
        let was_pinned = self.cube.unpin(linear);
        Ok((was_pinned, self.calculate()))
    }

    /// Replaces the rule list (reorder, enable/disable) and recalculates.
    pub fn set_rules(&mut self, rules: RuleSet) -> CalcReport {
        self.rules = rules;
        self.calculate()
    }

    pub fn view(&self, spec: &ViewSpec) -> Result<ViewGrid, PivotError> {
        Ok(view::materialize(&self.cube, &self.rules, spec, self.version)?)
    }

    pub fn trace(&self, address: &CellAddress, rule: Option<&str>) -> Result<TraceNode, PivotError> {
        let chosen = rule.map(|r| trace::resolve_rule(&self.structure, &self.rules, r)).transpose()?;
        Ok(trace::trace(&self.cube, &self.rules, address, chosen)?)
    }

    pub fn audit(&self) -> Vec<DecompositionReport> {
        trace::model_audit(&self.cube, &self.rules)
    }

    pub fn lint(&self) -> Vec<Finding> {
        coverage_lint(&self.structure, &self.rules)
    }

    pub fn docs(&self) -> String {
        let mut out = Vec::new();
        trace::export_docs(&self.structure, &self.rules, &mut out).expect("writing to memory");
        String::from_utf8(out).expect("docs are UTF-8")
    }
}
