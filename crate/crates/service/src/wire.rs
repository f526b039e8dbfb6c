//! Request and response bodies.

use std::collections::BTreeMap;

use pivotmodel::calc::RuleSet;
use pivotmodel::io::{DataLayout, LoadReport};
use pivotmodel::model::{leaf_mask, ModelStructure};
use pivotmodel::pivot::EditMode;
use pivotmodel::trace::DecompositionReport;
use pivotmodel::{CalcReport, CellAddress, ModelStats};
use serde::{Deserialize, Serialize};

/// A cell named by member per dimension.
pub type NamedAddress = BTreeMap<String, String>;

pub fn resolve_address(structure: &ModelStructure, named: &NamedAddress) -> Result<CellAddress, pivotmodel::model::ModelError> {
    structure.address_from_names(&named.iter().collect::<Vec<_>>())
}

pub fn name_address(structure: &ModelStructure, address: &CellAddress) -> NamedAddress {
    structure
        .dimensions()
        .iter()
        .zip(structure.member_names(address))
        .map(|(d, m)| (d.name().to_string(), m.to_string()))
        .collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelSummary {
    pub id: String,
    pub name: String,
    pub model_version: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelList {
    pub models: Vec<ModelSummary>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CreatedModel {
    pub id: String,
    pub model_version: u64,
    pub stats: ModelStats,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MemberInfo {
    pub name: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub aliases: Vec<String>,
    pub parent: Option<String>,
    pub depth: usize,
    /// No enabled rule targets this member.
    pub leaf: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DimensionInfo {
    pub name: String,
    pub members: Vec<MemberInfo>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StructureResponse {
    pub name: String,
    pub model_version: u64,
    pub dimensions: Vec<DimensionInfo>,
}

impl StructureResponse {
    pub fn new(structure: &ModelStructure, rules: &RuleSet, model_version: u64) -> Self {
        let leaves = leaf_mask(structure, rules);
        let dimensions = structure
            .dimensions()
            .iter()
            .zip(&leaves)
            .map(|(dim, leaf)| DimensionInfo {
                name: dim.name().to_string(),
                members: dim
                    .members()
                    .iter()
                    .enumerate()
                    .map(|(i, m)| MemberInfo {
                        name: m.name.clone(),
                        aliases: m.aliases.clone(),
                        parent: m.parent.map(|p| dim.member_name(p).to_string()),
                        depth: dim.depth(i),
                        leaf: leaf[i],
                    })
                    .collect(),
            })
            .collect();
        StructureResponse { name: structure.name().to_string(), model_version, dimensions }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StatsResponse {
    #[serde(flatten)]
    pub stats: ModelStats,
    pub model_version: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LoadResponse {
    pub layout: DataLayout,
    pub report: LoadReport,
    pub model_version: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CalcResponse {
    pub report: CalcReport,
    pub model_version: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CellWrite {
    pub address: NamedAddress,
    pub value: f64,
    #[serde(default)]
    pub mode: EditMode,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CellsRequest {
    #[serde(default)]
    pub model_version: Option<u64>,
    #[serde(default)]
    pub source: Option<String>,
    pub cells: Vec<CellWrite>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RuleInfo {
    pub sequence: usize,
    pub name: String,
    pub dimension: String,
    pub target: String,
    pub formula: String,
    /// Canonical rendering of the parsed formula.
    pub display: String,
    pub enabled: bool,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub filters: BTreeMap<String, Vec<String>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub folder: Vec<String>,
}

pub fn rule_infos(structure: &ModelStructure, rules: &RuleSet) -> Vec<RuleInfo> {
    rules
        .iter()
        .map(|(sequence, rule)| {
            let def = rule.to_def(structure);
            RuleInfo {
                sequence,
                name: def.name,
                dimension: def.dimension,
                target: def.target,
                formula: def.formula,
                display: rule.display(structure),
                enabled: def.enabled,
                filters: def.filters,
                folder: def.folder,
            }
        })
        .collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RulesResponse {
    pub rules: Vec<RuleInfo>,
    pub model_version: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<CalcReport>,
}

/// Reorder by full list of names, then toggle.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct RulesPatch {
    #[serde(default)]
    pub model_version: Option<u64>,
    #[serde(default)]
    pub order: Option<Vec<String>>,
    #[serde(default)]
    pub enable: Vec<String>,
    #[serde(default)]
    pub disable: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceRequest {
    pub address: NamedAddress,
    #[serde(default)]
    pub rule: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AuditResponse {
    pub model_version: u64,
    pub flagged: Vec<DecompositionReport>,
}
