//! Pivot views: place each dimension on pages, rows or columns, and
//! materialize the resulting grid of cells.
//!
//! A row or column dimension shows every member in member order, unless it
//! has an explicit member selection, or an `expand` entry. With `expand`,
//! only hierarchy roots and the children of expanded visible members are
//! shown (collapsed by default), still in member order.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::calc::RuleSet;
use crate::model::{leaf_mask, CellSource, Cube, ModelStructure};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ViewError {
    #[error("unknown dimension '{0}'")]
    UnknownDimension(String),
    #[error("unknown member '{member}' in {dimension}")]
    UnknownMember { dimension: String, member: String },
    #[error("dimension {0} is placed more than once")]
    Repeated(String),
    #[error("dimension {0} is not placed on pages, rows or columns")]
    Unplaced(String),
    #[error("cannot expand {dimension} '{member}': it is not visible")]
    NotVisible { dimension: String, member: String },
    #[error("member selection for {0}, which is not on rows or columns")]
    SelectionOffAxis(String),
    #[error("empty member selection for {0}")]
    EmptySelection(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PagePin {
    pub dimension: String,
    pub member: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ViewSpec {
    #[serde(default)]
    pub pages: Vec<PagePin>,
    #[serde(default)]
    pub rows: Vec<String>,
    #[serde(default)]
    pub cols: Vec<String>,
    #[serde(default)]
    pub expand: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    pub member_selection: BTreeMap<String, Vec<String>>,
}

impl ViewSpec {
    pub fn page(mut self, dimension: &str, member: &str) -> Self {
        self.pages.push(PagePin { dimension: dimension.into(), member: member.into() });
        self
    }

    pub fn rows(mut self, dims: &[&str]) -> Self {
        self.rows = dims.iter().map(|d| d.to_string()).collect();
        self
    }

    pub fn cols(mut self, dims: &[&str]) -> Self {
        self.cols = dims.iter().map(|d| d.to_string()).collect();
        self
    }

    pub fn expand(mut self, dimension: &str, members: &[&str]) -> Self {
        self.expand.insert(dimension.into(), members.iter().map(|m| m.to_string()).collect());
        self
    }

    pub fn select(mut self, dimension: &str, members: &[&str]) -> Self {
        self.member_selection.insert(dimension.into(), members.iter().map(|m| m.to_string()).collect());
        self
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellFlags {
    pub input_eligible: bool,
    pub rule_covered: bool,
    pub overridden: bool,
    pub error: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViewGrid {
    pub pages: Vec<PagePin>,
    pub row_dimensions: Vec<String>,
    pub col_dimensions: Vec<String>,
    /// One member-name tuple per row, outer dimension first.
    pub row_headers: Vec<Vec<String>>,
    /// Hierarchy depth of each header member, for indentation.
    pub row_depths: Vec<Vec<usize>>,
    pub col_headers: Vec<Vec<String>>,
    pub col_depths: Vec<Vec<usize>>,
    pub values: Vec<Vec<crate::value::CellValue>>,
    pub flags: Vec<Vec<CellFlags>>,
    pub model_version: u64,
}

struct Axis {
    dims: Vec<usize>,
    /// Displayed ordinals per dimension.
    members: Vec<Vec<usize>>,
}

impl Axis {
    fn len(&self) -> usize {
        self.members.iter().map(Vec::len).product()
    }

    /// Cartesian product, last dimension fastest.
    fn tuples(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new()];
        for members in &self.members {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    members.iter().map(move |&m| {
                        let mut t = prefix.clone();
                        t.push(m);
                        t
                    })
                })
                .collect();
        }
        out
    }
}

fn resolve_dim(structure: &ModelStructure, name: &str) -> Result<usize, ViewError> {
    structure.find_dimension(name).ok_or_else(|| ViewError::UnknownDimension(name.to_string()))
}

fn resolve_member(structure: &ModelStructure, d: usize, name: &str) -> Result<usize, ViewError> {
    let dim = structure.dimension(d);
    dim.find(name).ok_or_else(|| ViewError::UnknownMember { dimension: dim.name().to_string(), member: name.to_string() })
}

fn displayed_members(structure: &ModelStructure, spec: &ViewSpec, d: usize) -> Result<Vec<usize>, ViewError> {
    let dim = structure.dimension(d);
    let lookup = |map: &BTreeMap<String, Vec<String>>| {
        map.iter().find(|(k, _)| structure.find_dimension(k) == Some(d)).map(|(_, v)| v.clone())
    };
    if let Some(selection) = lookup(&spec.member_selection) {
        if selection.is_empty() {
            return Err(ViewError::EmptySelection(dim.name().to_string()));
        }
        return selection.iter().map(|m| resolve_member(structure, d, m)).collect();
    }
    let Some(expanded) = lookup(&spec.expand) else {
        return Ok((0..dim.len()).collect());
    };
    let mut visible = vec![false; dim.len()];
    for root in dim.roots() {
        visible[root] = true;
    }
    // Expansions may be listed in any order; apply them outermost first.
    let mut targets = expanded.iter().map(|m| resolve_member(structure, d, m)).collect::<Result<Vec<_>, _>>()?;
    targets.sort_by_key(|&m| dim.depth(m));
    for m in targets {
        if !visible[m] {
            return Err(ViewError::NotVisible { dimension: dim.name().to_string(), member: dim.member_name(m).to_string() });
        }
        for &c in dim.children(m) {
            visible[c] = true;
        }
    }
    Ok((0..dim.len()).filter(|&m| visible[m]).collect())
}

/// Builds the grid. Cost is proportional to the number of displayed cells.
pub fn materialize(cube: &Cube, rules: &RuleSet, spec: &ViewSpec, model_version: u64) -> Result<ViewGrid, ViewError> {
    let structure = cube.structure();
    let n = structure.dimension_count();
    let mut placed = vec![false; n];
    let mut place = |d: usize| -> Result<usize, ViewError> {
        if std::mem::replace(&mut placed[d], true) {
            return Err(ViewError::Repeated(structure.dimension(d).name().to_string()));
        }
        Ok(d)
    };

    let mut base = 0usize;
    let mut pages = Vec::with_capacity(spec.pages.len());
    for pin in &spec.pages {
        let d = place(resolve_dim(structure, &pin.dimension)?)?;
        let m = resolve_member(structure, d, &pin.member)?;
        base += m * structure.strides()[d];
        let dim = structure.dimension(d);
        pages.push(PagePin { dimension: dim.name().to_string(), member: dim.member_name(m).to_string() });
    }
    let mut axis = |names: &[String]| -> Result<Axis, ViewError> {
        let dims = names.iter().map(|name| resolve_dim(structure, name).and_then(&mut place)).collect::<Result<Vec<_>, _>>()?;
        let members = dims.iter().map(|&d| displayed_members(structure, spec, d)).collect::<Result<Vec<_>, _>>()?;
        Ok(Axis { dims, members })
    };
    let rows = axis(&spec.rows)?;
    let cols = axis(&spec.cols)?;
    if let Some(d) = placed.iter().position(|&p| !p) {
        return Err(ViewError::Unplaced(structure.dimension(d).name().to_string()));
    }
    for name in spec.member_selection.keys() {
        let d = resolve_dim(structure, name)?;
        if !rows.dims.contains(&d) && !cols.dims.contains(&d) {
            return Err(ViewError::SelectionOffAxis(structure.dimension(d).name().to_string()));
        }
    }

    let leaves = leaf_mask(structure, rules);
    let enabled: Vec<_> = rules.enabled().map(|(_, r)| r).collect();
    let strides = structure.strides();
    let offset = |axis: &Axis, tuple: &[usize]| -> usize { axis.dims.iter().zip(tuple).map(|(&d, &m)| m * strides[d]).sum() };
    let names = |axis: &Axis, tuple: &[usize]| -> Vec<String> {
        axis.dims.iter().zip(tuple).map(|(&d, &m)| structure.dimension(d).member_name(m).to_string()).collect()
    };
    let depths = |axis: &Axis, tuple: &[usize]| -> Vec<usize> {
        axis.dims.iter().zip(tuple).map(|(&d, &m)| structure.dimension(d).depth(m)).collect()
    };

    let row_tuples = rows.tuples();
    let col_tuples = cols.tuples();
    let col_offsets: Vec<usize> = col_tuples.iter().map(|t| offset(&cols, t)).collect();
    let mut values = Vec::with_capacity(rows.len());
    let mut flags = Vec::with_capacity(rows.len());
    for row in &row_tuples {
        let row_base = base + offset(&rows, row);
        let mut vrow = Vec::with_capacity(col_offsets.len());
        let mut frow = Vec::with_capacity(col_offsets.len());
        for &co in &col_offsets {
            let linear = row_base + co;
            let value = cube.value(linear);
            let input_eligible = (0..n).all(|d| leaves[d][structure.coordinate(linear, d)]);
            let rule_covered = !input_eligible && enabled.iter().any(|r| r.covers_linear(structure, linear));
            vrow.push(value);
            frow.push(CellFlags {
                input_eligible,
                rule_covered,
                overridden: matches!(cube.source(linear), CellSource::Override(_)),
                error: value.is_error(),
            });
        }
        values.push(vrow);
        flags.push(frow);
    }

    Ok(ViewGrid {
        pages,
        row_dimensions: rows.dims.iter().map(|&d| structure.dimension(d).name().to_string()).collect(),
        col_dimensions: cols.dims.iter().map(|&d| structure.dimension(d).name().to_string()).collect(),
        row_headers: row_tuples.iter().map(|t| names(&rows, t)).collect(),
        row_depths: row_tuples.iter().map(|t| depths(&rows, t)).collect(),
        col_headers: col_tuples.iter().map(|t| names(&cols, t)).collect(),
        col_depths: col_tuples.iter().map(|t| depths(&cols, t)).collect(),
        values,
        flags,
        model_version,
    })
}

/// Writes the grid as CSV: one header column per row dimension, then one
/// column per column tuple (members joined with " / ").
pub fn write_view_csv<W: Write>(grid: &ViewGrid, out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = grid.row_dimensions.clone();
    header.extend(grid.col_headers.iter().map(|t| t.join(" / ")));
    w.write_record(&header)?;
    for (names, values) in grid.row_headers.iter().zip(&grid.values) {
        let mut record = names.clone();
        record.extend(values.iter().map(|v| v.to_string()));
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}
