//! CSV data loading into the DATA layer of a cube.
//!
//! Loads are transactional per file: header problems fail the whole file
//! before anything is written; row problems reject just that row and are
//! listed in the report. Only input cells (every coordinate a leaf) can be
//! loaded. When two rows hit the same cell, the later one wins and a
//! warning is recorded. No calculation is triggered.

use std::collections::HashMap;
use std::io::Read;

use serde::{Deserialize, Serialize};

use super::{IoError, LoadReport, Rejection};
use crate::calc::RuleSet;
use crate::model::{fold, leaf_mask, Cube, ModelStructure};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DataLayout {
    Long,
    Wide,
}

fn parse_value(text: &str) -> Option<f64> {
    let cleaned: String = text.trim().chars().filter(|&c| c != ',').collect();
    if cleaned.is_empty() {
        return None;
    }
    cleaned.parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Accepted cells for one file, applied only after the whole file is read.
struct Staging {
    cells: Vec<(usize, f64)>,
    first_line: HashMap<usize, u64>,
    report: LoadReport,
}

impl Staging {
    fn new() -> Self {
        Staging { cells: Vec::new(), first_line: HashMap::new(), report: LoadReport::default() }
    }

    fn stage(&mut self, structure: &ModelStructure, linear: usize, value: f64, line: u64) {
        if let Some(previous) = self.first_line.insert(linear, line) {
            let address = structure.address_of(linear).map(|a| structure.describe(&a)).unwrap_or_default();
            self.report
                .warnings
                .push(format!("line {line} overwrites line {previous} at {address}"));
        }
        self.cells.push((linear, value));
    }

    fn reject(&mut self, line: u64, reason: String) {
        self.report.rejected.push(Rejection { line, reason });
    }

    fn commit(self, cube: &mut Cube, source: &str) -> LoadReport {
        for (linear, value) in self.cells {
            cube.set_data(linear, value, source);
        }
        self.report
    }
}

fn header_lookup(headers: &csv::StringRecord) -> Result<HashMap<String, usize>, IoError> {
    let mut map = HashMap::new();
    for (i, h) in headers.iter().enumerate() {
        if map.insert(fold(h), i).is_some() {
            return Err(IoError::DuplicateColumn(h.trim().to_string()));
        }
    }
    Ok(map)
}

fn reader<R: Read>(input: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new().flexible(true).trim(csv::Trim::All).from_reader(input)
}

/// Resolves a pinned member and checks it is a leaf; errors are row reasons.
fn pinned_member(
    structure: &ModelStructure,
    leaves: &[Vec<bool>],
    d: usize,
    name: &str,
) -> Result<usize, String> {
    let dim = structure.dimension(d);
    let m = dim.find(name).ok_or_else(|| format!("unknown member '{name}' in {}", dim.name()))?;
    if !leaves[d][m] {
        return Err(format!("aggregate member not loadable: {} '{}'", dim.name(), dim.member_name(m)));
    }
    Ok(m)
}

/// One row per cell: a column per dimension plus `Value`.
pub fn load_long_csv<R: Read>(cube: &mut Cube, rules: &RuleSet, input: R, source: &str) -> Result<LoadReport, IoError> {
    let structure = cube.structure().clone();
    let leaves = leaf_mask(&structure, rules);
    let mut rdr = reader(input);
    let headers = rdr.headers()?.clone();
    let lookup = header_lookup(&headers)?;
    let dim_cols = structure
        .dimensions()
        .iter()
        .map(|d| lookup.get(&fold(d.name())).copied().ok_or_else(|| IoError::MissingColumn(d.name().to_string())))
        .collect::<Result<Vec<_>, _>>()?;
    let value_col = *lookup.get("value").ok_or_else(|| IoError::MissingColumn("Value".into()))?;

    let mut staging = Staging::new();
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        staging.report.rows_total += 1;
        let mut linear = 0;
        let mut failure = None;
        for (d, &col) in dim_cols.iter().enumerate() {
            match pinned_member(&structure, &leaves, d, record.get(col).unwrap_or("")) {
                Ok(m) => linear += m * structure.strides()[d],
                Err(reason) => {
                    failure = Some(reason);
                    break;
                }
            }
        }
        let value = record.get(value_col).unwrap_or("");
        let outcome = match (failure, parse_value(value)) {
            (Some(reason), _) => Err(reason),
            (None, None) => Err(format!("non-numeric value '{value}'")),
            (None, Some(v)) => Ok(v),
        };
        match outcome {
            Ok(v) => {
                staging.stage(&structure, linear, v, line);
                staging.report.rows_loaded += 1;
                staging.report.cells_loaded += 1;
            }
            Err(reason) => staging.reject(line, reason),
        }
    }
    Ok(staging.commit(cube, source))
}

/// One row per combination of the pinned dimensions, with one column per
/// member of the spread dimension. The spread dimension is inferred from
/// the headers when not given.
pub fn load_wide_csv<R: Read>(
    cube: &mut Cube,
    rules: &RuleSet,
    input: R,
    source: &str,
    spread: Option<&str>,
) -> Result<LoadReport, IoError> {
    let structure = cube.structure().clone();
    let leaves = leaf_mask(&structure, rules);
    let mut rdr = reader(input);
    let headers = rdr.headers()?.clone();
    header_lookup(&headers)?;

    let spread_dim = spread.map(|name| structure.resolve_dimension(name)).transpose()?;
    let mut dim_cols: Vec<Option<usize>> = vec![None; structure.dimension_count()];
    let mut spread_cols: Vec<(usize, usize, &str)> = Vec::new();
    let mut spread_dims_seen: Vec<usize> = Vec::new();

    for (col, header) in headers.iter().enumerate() {
        if let Some(d) = structure.find_dimension(header) {
            if Some(d) != spread_dim {
                dim_cols[d] = Some(col);
                continue;
            }
        }
        let (d, m) = match spread_dim {
            Some(d) => (d, structure.dimension(d).find(header).ok_or_else(|| IoError::UnknownHeader(header.into()))?),
            None => {
                let hits: Vec<(usize, usize)> = (0..structure.dimension_count())
                    .filter_map(|d| structure.dimension(d).find(header).map(|m| (d, m)))
                    .collect();
                match hits.as_slice() {
                    [hit] => *hit,
                    [] => return Err(IoError::UnknownHeader(header.to_string())),
                    _ => {
                        return Err(IoError::AmbiguousHeader {
                            header: header.to_string(),
                            dimensions: hits.iter().map(|&(d, _)| structure.dimension(d).name().to_string()).collect(),
                        })
                    }
                }
            }
        };
        if !leaves[d][m] {
            return Err(IoError::AggregateColumn {
                header: header.to_string(),
                dimension: structure.dimension(d).name().to_string(),
            });
        }
        if !spread_dims_seen.contains(&d) {
            spread_dims_seen.push(d);
        }
        spread_cols.push((col, m, header));
    }

    if spread_dims_seen.len() > 1 {
        return Err(IoError::MixedSpread(
            spread_dims_seen.iter().map(|&d| structure.dimension(d).name().to_string()).collect(),
        ));
    }
    let spread_d = match (spread_dims_seen.first(), spread_dim) {
        (Some(&d), _) => d,
        (None, _) => return Err(IoError::NoSpreadColumns),
    };
    for (d, col) in dim_cols.iter().enumerate() {
        if d != spread_d && col.is_none() {
            return Err(IoError::MissingColumn(structure.dimension(d).name().to_string()));
        }
    }
    if dim_cols[spread_d].is_some() {
        return Err(IoError::DuplicateColumn(structure.dimension(spread_d).name().to_string()));
    }

    let strides = structure.strides();
    let mut staging = Staging::new();
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        staging.report.rows_total += 1;

        let base: Result<usize, String> = dim_cols.iter().enumerate().try_fold(0, |acc, (d, col)| match col {
            None => Ok(acc),
            Some(col) => pinned_member(&structure, &leaves, d, record.get(*col).unwrap_or(""))
                .map(|m| acc + m * strides[d]),
        });
        let cells: Result<Vec<(usize, f64)>, String> = base.and_then(|base| {
            let mut cells = Vec::new();
            for &(col, m, header) in &spread_cols {
                let text = record.get(col).unwrap_or("");
                if text.is_empty() {
                    continue;
                }
                let v = parse_value(text).ok_or_else(|| format!("non-numeric value '{text}' in column '{header}'"))?;
                cells.push((base + m * strides[spread_d], v));
            }
            Ok(cells)
        });
        match cells {
            Ok(cells) => {
                staging.report.rows_loaded += 1;
                staging.report.cells_loaded += cells.len();
                for (linear, v) in cells {
                    staging.stage(&structure, linear, v, line);
                }
            }
            Err(reason) => staging.reject(line, reason),
        }
    }
    Ok(staging.commit(cube, source))
}

/// Long layout when the header has `Value` and every dimension name,
/// otherwise wide with an inferred spread dimension.
pub fn load_csv_auto(
    cube: &mut Cube,
    rules: &RuleSet,
    text: &str,
    source: &str,
) -> Result<(DataLayout, LoadReport), IoError> {
    let headers = reader(text.as_bytes()).headers()?.clone();
    let names: Vec<String> = headers.iter().map(fold).collect();
    let structure = cube.structure().clone();
    let long = names.iter().any(|h| h == "value")
        && structure.dimensions().iter().all(|d| names.contains(&fold(d.name())));
    if long {
        Ok((DataLayout::Long, load_long_csv(cube, rules, text.as_bytes(), source)?))
    } else {
        Ok((DataLayout::Wide, load_wide_csv(cube, rules, text.as_bytes(), source, None)?))
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::calc::RuleDef;
    use crate::model::{DimensionDef, MemberDef};
    use crate::value::CellValue;

    fn setup() -> (Cube, RuleSet) {
        let s = Arc::new(
            ModelStructure::build(
                "t",
                &[
                    DimensionDef::new(
                        "ACCTS",
                        vec![
                            MemberDef::new("Total sales").alias("Sales"),
                            MemberDef::new("Discounts"),
                            MemberDef::new("Net sales"),
                        ],
                    ),
                    DimensionDef::flat("TIME", &["Qtr1", "Qtr2"]),
                    DimensionDef::new("SCENARIO", vec![MemberDef::new("Actuals").alias("Act/Fcst"), MemberDef::new("Budget")]),
                ],
            )
            .unwrap(),
        );
        let rules = RuleSet::build(&s, &[RuleDef::new("n", "ACCTS", "Net sales", "{Sales}-{Discounts}")]).unwrap();
        (Cube::new(s), rules)
    }

    fn at(cube: &Cube, a: &str, t: &str, sc: &str) -> CellValue {
        let s = cube.structure();
        cube.value_at(&s.address_from_names(&[("ACCTS", a), ("TIME", t), ("SCENARIO", sc)]).unwrap()).unwrap()
    }

    #[test]
    fn long_rows_with_aliases_and_thousands() {
        let (mut cube, rules) = setup();
        let csv = "ACCTS,SCENARIO,TIME,Value\nSales,Act/Fcst,Qtr1,\"6,602.56\"\nDiscounts,Budget,qtr2,3.5\n";
        let report = load_long_csv(&mut cube, &rules, csv.as_bytes(), "erp").unwrap();
        assert_eq!((report.rows_total, report.rows_loaded), (2, 2));
        assert_eq!(at(&cube, "Total sales", "Qtr1", "Actuals"), CellValue::Number(6602.56));
        assert_eq!(at(&cube, "Discounts", "Qtr2", "Budget"), CellValue::Number(3.5));
    }

    #[test]
    fn long_rejections_are_reported_per_line() {
        let (mut cube, rules) = setup();
        let csv = "ACCTS,SCENARIO,TIME,Value\nNet sales,Budget,Qtr1,1\nSales,Budget,Qtr9,1\nSales,Budget,Qtr1,abc\nSales,Budget,Qtr1,4\n";
        let report = load_long_csv(&mut cube, &rules, csv.as_bytes(), "x").unwrap();
        assert_eq!(report.rows_total, 4);
        assert_eq!(report.rows_loaded, 1);
        let lines: Vec<u64> = report.rejected.iter().map(|r| r.line).collect();
        assert_eq!(lines, vec![2, 3, 4]);
        assert!(report.rejected[0].reason.contains("aggregate member not loadable"));
        assert!(report.rejected[1].reason.contains("unknown member 'Qtr9'"));
        assert!(report.rejected[2].reason.contains("non-numeric"));
    }

    #[test]
    fn header_only_and_missing_columns() {
        let (mut cube, rules) = setup();
        let report = load_long_csv(&mut cube, &rules, "ACCTS,SCENARIO,TIME,Value\n".as_bytes(), "x").unwrap();
        assert_eq!(report, LoadReport::default());
        assert!(matches!(
            load_long_csv(&mut cube, &rules, "ACCTS,TIME,Value\n".as_bytes(), "x"),
            Err(IoError::MissingColumn(_))
        ));
    }

    #[test]
    fn duplicate_rows_last_wins_with_warning() {
        let (mut cube, rules) = setup();
        let csv = "ACCTS,SCENARIO,TIME,Value\nSales,Budget,Qtr1,1\nSales,Budget,Qtr1,2\n";
        let report = load_long_csv(&mut cube, &rules, csv.as_bytes(), "x").unwrap();
        assert_eq!(report.warnings.len(), 1);
        assert_eq!(at(&cube, "Total sales", "Qtr1", "Budget"), CellValue::Number(2.0));
    }

    #[test]
    fn wide_infers_spread_dimension() {
        let (mut cube, rules) = setup();
        let csv = "SCENARIO,TIME,Sales,Discounts\nBudget,Qtr1,100,2\nBudget,Qtr2,110,\n";
        let report = load_wide_csv(&mut cube, &rules, csv.as_bytes(), "bud", None).unwrap();
        assert_eq!((report.rows_loaded, report.cells_loaded), (2, 3));
        assert_eq!(at(&cube, "Discounts", "Qtr1", "Budget"), CellValue::Number(2.0));
    }

    #[test]
    fn wide_header_errors() {
        let (mut cube, rules) = setup();
        assert!(matches!(
            load_wide_csv(&mut cube, &rules, "SCENARIO,TIME,Net sales\n".as_bytes(), "x", None),
            Err(IoError::AggregateColumn { .. })
        ));
        assert!(matches!(
            load_wide_csv(&mut cube, &rules, "SCENARIO,Sales\n".as_bytes(), "x", None),
            Err(IoError::MissingColumn(_))
        ));
        assert!(matches!(
            load_wide_csv(&mut cube, &rules, "SCENARIO,Sales,Qtr1\n".as_bytes(), "x", None),
            Err(IoError::MixedSpread(_))
        ));
        assert!(matches!(
            load_wide_csv(&mut cube, &rules, "SCENARIO,TIME,Bogus\n".as_bytes(), "x", None),
            Err(IoError::UnknownHeader(_))
        ));
    }

    #[test]
    fn wide_ambiguous_header() {
        let s = Arc::new(
            ModelStructure::build(
                "t",
                &[DimensionDef::flat("A", &["Total", "x"]), DimensionDef::flat("B", &["Total", "y"])],
            )
            .unwrap(),
        );
        let mut cube = Cube::new(s);
        let err = load_wide_csv(&mut cube, &RuleSet::new(), "A,Total\n".as_bytes(), "x", None).unwrap_err();
        assert!(matches!(err, IoError::AmbiguousHeader { .. }), "{err}");
        // Naming the spread dimension resolves it.
        let r = load_wide_csv(&mut cube, &RuleSet::new(), "A,Total\nx,3\n".as_bytes(), "x", Some("B")).unwrap();
        assert_eq!(r.cells_loaded, 1);
    }

    #[test]
    fn single_column_spread_matches_long() {
        let (mut wide, rules) = setup();
        let (mut long, _) = setup();
        load_wide_csv(&mut wide, &rules, "SCENARIO,TIME,Sales\nBudget,Qtr1,5\n".as_bytes(), "s", None).unwrap();
        load_long_csv(&mut long, &rules, "ACCTS,SCENARIO,TIME,Value\nSales,Budget,Qtr1,5\n".as_bytes(), "s").unwrap();
        assert_eq!(wide.values(), long.values());
        assert_eq!(wide.sources(), long.sources());
    }

    #[test]
    fn failed_file_leaves_cube_untouched() {
        let (mut cube, rules) = setup();
        let _ = load_wide_csv(&mut cube, &rules, "SCENARIO,TIME,Net sales\nBudget,Qtr1,1\n".as_bytes(), "x", None);
        assert_eq!(cube.count_where(|s| s != crate::model::CellSource::Empty), 0);
    }
}
