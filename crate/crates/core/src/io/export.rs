use std::collections::BTreeMap;
use std::io::Write;

use super::IoError;
use crate::model::{CellSource, Cube};

/// Which cells an export includes, by provenance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Include {
    /// DATA and OVERRIDE cells: what a reload needs.
    #[default]
    Data,
    /// RULE cells only.
    Calculated,
    /// Every non-empty cell.
    All,
}

impl Include {
    fn admits(self, source: CellSource) -> bool {
        match (self, source) {
            (_, CellSource::Empty) => false,
            (Include::Data, s) => matches!(s, CellSource::Data(_) | CellSource::Override(_)),
            (Include::Calculated, s) => matches!(s, CellSource::Rule(_)),
            (Include::All, _) => true,
        }
    }
}

/// Restricts an export to some members per dimension (by name or alias).
#[derive(Debug, Clone, Default)]
pub struct ExportFilter {
    pub members: BTreeMap<String, Vec<String>>,
}

impl ExportFilter {
    pub fn only(mut self, dimension: impl Into<String>, members: &[&str]) -> Self {
        self.members.insert(dimension.into(), members.iter().map(|m| m.to_string()).collect());
        self
    }
}

/// Writes the long layout: one column per dimension plus `Value`, rows in
/// cube order. Errors are written as their error string.
pub fn export_long_csv<W: Write>(
    cube: &Cube,
    writer: W,
    filter: &ExportFilter,
    include: Include,
) -> Result<usize, IoError> {
    let structure = cube.structure();
    let mut allowed: Vec<Option<Vec<bool>>> = vec![None; structure.dimension_count()];
    for (dim, members) in &filter.members {
        let d = structure.resolve_dimension(dim)?;
        let mut mask = vec![false; structure.dimension(d).len()];
        for m in members {
            mask[structure.dimension(d).resolve(m)?] = true;
        }
        allowed[d] = Some(mask);
    }

    let mut out = csv::Writer::from_writer(writer);
    let mut header: Vec<&str> = structure.dimensions().iter().map(|d| d.name()).collect();
    header.push("Value");
    out.write_record(&header)?;

    let mut rows = 0;
    for linear in 0..cube.len() {
        if !include.admits(cube.source(linear)) {
            continue;
        }
        let passes = allowed.iter().enumerate().all(|(d, mask)| match mask {
            Some(mask) => mask[structure.coordinate(linear, d)],
            None => true,
        });
        if !passes {
            continue;
        }
        let address = structure.address_of(linear)?;
        let mut record: Vec<String> = structure.member_names(&address).into_iter().map(String::from).collect();
        record.push(cube.value(linear).to_string());
        out.write_record(&record)?;
        rows += 1;
    }
    out.flush()?;
    Ok(rows)
}
