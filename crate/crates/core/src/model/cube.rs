use std::collections::HashMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{CellAddress, ModelError, ModelStructure};
use crate::value::CellValue;

/// Compact per-cell provenance tag. Source ids and rule names are interned
/// in the owning [`Cube`]; use [`Cube::provenance`] for the resolved form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum CellSource {
    #[default]
    Empty,
    Data(u32),
    /// 1-based rule sequence at the time of the last calculation.
    Rule(u32),
    Override(u32),
}

impl CellSource {
    pub fn kind(self) -> &'static str {
        match self {
            CellSource::Empty => "EMPTY",
            CellSource::Data(_) => "DATA",
            CellSource::Rule(_) => "RULE",
            CellSource::Override(_) => "OVERRIDE",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Provenance {
    Empty,
    Data { source: String },
    Rule { sequence: u32, name: String },
    Override { source: String },
}

/// Dense value store over every cell of a model, with a parallel
/// provenance ledger.
#[derive(Debug, Clone)]
pub struct Cube {
    structure: Arc<ModelStructure>,
    values: Vec<CellValue>,
    sources: Vec<CellSource>,
    source_ids: Vec<String>,
    source_lookup: HashMap<String, u32>,
    rule_names: Vec<String>,
}

impl Cube {
    pub fn new(structure: Arc<ModelStructure>) -> Cube {
        let total = structure.total_cells();
        Cube {
            structure,
            values: vec![CellValue::ZERO; total],
            sources: vec![CellSource::Empty; total],
            source_ids: Vec::new(),
            source_lookup: HashMap::new(),
            rule_names: Vec::new(),
        }
    }

    pub fn structure(&self) -> &Arc<ModelStructure> {
        &self.structure
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[CellValue] {
        &self.values
    }

    pub fn sources(&self) -> &[CellSource] {
        &self.sources
    }

    #[inline]
    pub fn value(&self, linear: usize) -> CellValue {
        self.values[linear]
    }

    #[inline]
    pub fn source(&self, linear: usize) -> CellSource {
        self.sources[linear]
    }

    pub fn value_at(&self, address: &CellAddress) -> Result<CellValue, ModelError> {
        Ok(self.values[self.structure.linear_index(address)?])
    }

    pub fn provenance(&self, linear: usize) -> Provenance {
        match self.sources[linear] {
            CellSource::Empty => Provenance::Empty,
            CellSource::Data(s) => Provenance::Data { source: self.source_ids[s as usize].clone() },
            CellSource::Override(s) => Provenance::Override { source: self.source_ids[s as usize].clone() },
            CellSource::Rule(seq) => Provenance::Rule {
                sequence: seq,
                name: self.rule_names.get(seq as usize - 1).cloned().unwrap_or_default(),
            },
        }
    }

    pub fn source_id(&self, source: CellSource) -> Option<&str> {
        match source {
            CellSource::Data(s) | CellSource::Override(s) => Some(&self.source_ids[s as usize]),
            _ => None,
        }
    }

    /// Rule names by sequence as of the last calculation.
    pub fn rule_names(&self) -> &[String] {
        &self.rule_names
    }

    pub(crate) fn set_rule_names(&mut self, names: Vec<String>) {
        self.rule_names = names;
    }

    fn intern(&mut self, source_id: &str) -> u32 {
        if let Some(&id) = self.source_lookup.get(source_id) {
            return id;
        }
        let id = self.source_ids.len() as u32;
        self.source_ids.push(source_id.to_string());
        self.source_lookup.insert(source_id.to_string(), id);
        id
    }

    /// Stores a data value without eligibility checks. Loaders and
    /// write-back validate addresses before calling this.
    pub fn set_data(&mut self, linear: usize, value: f64, source_id: &str) {
        let id = self.intern(source_id);
        self.values[linear] = CellValue::number(value);
        self.sources[linear] = CellSource::Data(id);
    }

    pub fn pin(&mut self, linear: usize, value: f64, source_id: &str) {
        let id = self.intern(source_id);
        self.values[linear] = CellValue::number(value);
        self.sources[linear] = CellSource::Override(id);
    }

    /// Releases a pin. The cell reads empty until the next calculation.
    /// Returns false when the cell was not pinned.
    pub fn unpin(&mut self, linear: usize) -> bool {
        if matches!(self.sources[linear], CellSource::Override(_)) {
            self.values[linear] = CellValue::ZERO;
            self.sources[linear] = CellSource::Empty;
            true
        } else {
            false
        }
    }

    pub fn is_pinned(&self, linear: usize) -> bool {
        matches!(self.sources[linear], CellSource::Override(_))
    }

    #[inline]
    pub(crate) fn write_rule(&mut self, linear: usize, value: CellValue, sequence: u32) {
        self.values[linear] = value;
        self.sources[linear] = CellSource::Rule(sequence);
    }

    /// Drops every rule result so a calculation starts from data and pins only.
    pub(crate) fn clear_rule_cells(&mut self) {
        for (value, source) in self.values.iter_mut().zip(self.sources.iter_mut()) {
            if matches!(source, CellSource::Rule(_)) {
                *value = CellValue::ZERO;
                *source = CellSource::Empty;
            }
        }
    }

    /// Removes all data, rule results, and pins.
    pub fn clear(&mut self) {
        self.values.fill(CellValue::ZERO);
        self.sources.fill(CellSource::Empty);
        self.rule_names.clear();
    }

    pub fn count_where(&self, pred: impl Fn(CellSource) -> bool) -> usize {
        self.sources.iter().filter(|&&s| pred(s)).count()
    }

    /// Linear indexes and values of every DATA cell, in linear order.
    pub fn data_cells(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.sources.iter().enumerate().filter_map(move |(i, s)| match s {
            CellSource::Data(_) => self.values[i].as_number().map(|v| (i, v)),
            _ => None,
        })
    }
}
