use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::calc::{BoundRule, RuleSet};
use crate::model::ModelStructure;
use crate::rules::parse;

const MEMBERS_HEADER: &str = "Dimension Members\tChild\tParent";

/// Formula as the author wrote it (their member spellings), normalized
/// spacing: `= {Sales} - {Discounts and allowances}`.
fn formula_text(rule: &BoundRule) -> String {
    match parse(rule.formula()) {
        Ok(expr) => format!("= {expr}"),
        Err(_) => rule.formula().to_string(),
    }
}

/// Per dimension, a member table (1-based child ordinal, parent ordinal,
/// 0 = no parent), then the rule listing grouped by folder.
pub fn export_docs<W: Write>(structure: &ModelStructure, rules: &RuleSet, mut out: W) -> std::io::Result<()> {
    for dim in structure.dimensions() {
        writeln!(out, "{}", dim.name())?;
        writeln!(out, "{MEMBERS_HEADER}")?;
        for (i, member) in dim.members().iter().enumerate() {
            writeln!(out, "{}\t{}\t{}", member.name, i + 1, member.parent.map_or(0, |p| p + 1))?;
        }
        writeln!(out)?;
    }
    writeln!(out, "Rules")?;
    let mut folder: &[String] = &[];
    for (_, rule) in rules.iter() {
        if rule.folder() != folder {
            folder = rule.folder();
            if !folder.is_empty() {
                writeln!(out, "{}", folder.join(" / "))?;
            }
        }
        write!(out, "{}\t{}", rule.label(structure), formula_text(rule))?;
        if !rule.is_enabled() {
            write!(out, "\t(disabled)")?;
        }
        writeln!(out)?;
    }
    Ok(())
}

/// The same content as CSV: member rows carry the dimension in `Section`,
/// rule rows have `Section` = `Rules` and the sequence in `Child`.
pub fn export_docs_csv<W: Write>(structure: &ModelStructure, rules: &RuleSet, out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["Section", "Folder", "Name", "Child", "Parent", "Formula", "Enabled"])?;
    for dim in structure.dimensions() {
        for (i, member) in dim.members().iter().enumerate() {
            let child = (i + 1).to_string();
            let parent = member.parent.map_or(0, |p| p + 1).to_string();
            w.write_record([dim.name(), "", &member.name, &child, &parent, "", ""])?;
        }
    }
    for (seq, rule) in rules.iter() {
        w.write_record([
            "Rules",
            &rule.folder().join(" / "),
            &rule.label(structure),
            &seq.to_string(),
            "",
            &formula_text(rule),
            if rule.is_enabled() { "true" } else { "false" },
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocsDimension {
    pub name: String,
    /// (member name, parent ordinal, 0 = none), in child-ordinal order.
    pub members: Vec<(String, usize)>,
}

/// Reads the member tables back from [`export_docs`] text.
pub fn parse_docs_hierarchy(text: &str) -> Vec<DocsDimension> {
    let lines: Vec<&str> = text.lines().collect();
    let mut dims = Vec::new();
    let mut i = 0;
    while i + 1 < lines.len() && lines[i + 1] == MEMBERS_HEADER {
        let mut dim = DocsDimension { name: lines[i].to_string(), members: Vec::new() };
        i += 2;
        while i < lines.len() && !lines[i].is_empty() {
            let mut cols = lines[i].rsplitn(3, '\t');
            let parent = cols.next().and_then(|p| p.parse().ok()).unwrap_or(0);
            let _child = cols.next();
            dim.members.push((cols.next().unwrap_or("").to_string(), parent));
            i += 1;
        }
        dims.push(dim);
        i += 1;
    }
    dims
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calc::RuleDef;
    use crate::model::{DimensionDef, MemberDef};

    #[test]
    fn text_layout_and_roundtrip() {
        let s = ModelStructure::build(
            "t",
            &[
                DimensionDef::new(
                    "ACCTS",
                    vec![
                        MemberDef::new("Sales").parent("Net"),
                        MemberDef::new("Disc").parent("Net"),
                        MemberDef::new("Net"),
                    ],
                ),
                DimensionDef::flat("TIME", &["Q1", "Q2"]),
            ],
        )
        .unwrap();
        let mut off = RuleDef::new("q", "TIME", "Q2", "={Q1}*2");
        off.enabled = false;
        let rules = RuleSet::build(&s, &[RuleDef::new("n", "ACCTS", "Net", "=({Sales})-({Disc})").in_folder(&["Main"]), off])
            .unwrap();
        let mut out = Vec::new();
        export_docs(&s, &rules, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(
            text,
            "ACCTS\nDimension Members\tChild\tParent\nSales\t1\t3\nDisc\t2\t3\nNet\t3\t0\n\n\
             TIME\nDimension Members\tChild\tParent\nQ1\t1\t0\nQ2\t2\t0\n\n\
             Rules\nMain\nACCTS - Net\t= {Sales} - {Disc}\nTIME - Q2\t= {Q1} * 2\t(disabled)\n"
        );
        let parsed = parse_docs_hierarchy(&text);
        assert_eq!(parsed.len(), 2);
        assert_eq!(parsed[0].members, vec![("Sales".into(), 3), ("Disc".into(), 3), ("Net".into(), 0)]);

        let mut csv_out = Vec::new();
        export_docs_csv(&s, &rules, &mut csv_out).unwrap();
        let csv_text = String::from_utf8(csv_out).unwrap();
        assert!(csv_text.contains("ACCTS,,Sales,1,3,,\n"));
        assert!(csv_text.contains("Rules,Main,ACCTS - Net,1,,= {Sales} - {Disc},true\n"));
    }
}
