use std::io::Write;

use super::IoError;
use crate::calc::RuleSet;
use crate::model::{CellSource, Cube};

/// One row per non-empty cell: coordinates, value, provenance kind, source
/// id or rule, the rule text and the current operand values it reads.
pub fn export_cell_ledger<W: Write>(cube: &Cube, rules: &RuleSet, writer: W) -> Result<usize, IoError> {
    let structure = cube.structure();
    let mut out = csv::Writer::from_writer(writer);
    let mut header: Vec<&str> = structure.dimensions().iter().map(|d| d.name()).collect();
    header.extend(["Value", "Provenance", "Source", "Rule", "Formula", "Operands"]);
    out.write_record(&header)?;

    let mut rows = 0;
    for linear in 0..cube.len() {
        let source = cube.source(linear);
        if source == CellSource::Empty {
            continue;
        }
        let address = structure.address_of(linear)?;
        let mut record: Vec<String> = structure.member_names(&address).into_iter().map(String::from).collect();
        record.push(cube.value(linear).to_string());
        record.push(source.kind().to_string());
        match source {
            CellSource::Rule(seq) => {
                record.push(String::new());
                record.push(cube.rule_names().get(seq as usize - 1).cloned().unwrap_or_else(|| seq.to_string()));
                match rules.get(seq as usize) {
                    Some(rule) => {
                        record.push(rule.display(structure));
                        let operands: Vec<String> = rule
                            .expression()
                            .refs()
                            .iter()
                            .map(|r| {
                                let v = cube.value(r.operand_linear(structure, linear));
                                format!("{}={}", r.display(structure), v)
                            })
                            .collect();
                        record.push(operands.join("; "));
                    }
                    None => record.extend([String::new(), String::new()]),
                }
            }
            other => {
                record.push(cube.source_id(other).unwrap_or("").to_string());
                record.extend([String::new(), String::new(), String::new()]);
            }
        }
        out.write_record(&record)?;
        rows += 1;
    }
    out.flush()?;
    Ok(rows)
}
