use std::path::Path;

use serde::{Deserialize, Serialize};

use super::IoError;
use crate::calc::{RuleDef, RuleSet};
use crate::model::{DimensionDef, ModelStructure};

pub const FORMAT_VERSION: u32 = 1;

/// The JSON model document: structure plus ordered rules.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub format_version: u32,
    pub name: String,
    pub dimensions: Vec<DimensionDef>,
    #[serde(default)]
    pub rules: Vec<RuleDef>,
}

impl ModelFile {
    pub fn from_json(text: &str) -> Result<ModelFile, IoError> {
        let file: ModelFile = serde_json::from_str(text)?;
        if file.format_version != FORMAT_VERSION {
            return Err(IoError::UnsupportedVersion(file.format_version));
        }
        Ok(file)
    }

    /// Canonical formatting: pretty-printed, trailing newline.
    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("model file serializes");
        text.push('\n');
        text
    }

    pub fn build(&self) -> Result<(ModelStructure, RuleSet), IoError> {
        let structure = ModelStructure::build(&self.name, &self.dimensions)?;
        let rules = RuleSet::build(&structure, &self.rules)?;
        Ok((structure, rules))
    }

    pub fn from_model(structure: &ModelStructure, rules: &RuleSet) -> ModelFile {
        ModelFile {
            format_version: FORMAT_VERSION,
            name: structure.name().to_string(),
            dimensions: structure.to_defs(),
            rules: rules.to_defs(structure),
        }
    }
}

pub fn load_model(path: impl AsRef<Path>) -> Result<(ModelStructure, RuleSet), IoError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|source| IoError::File { path: path.display().to_string(), source })?;
    ModelFile::from_json(&text)?.build()
}

pub fn save_model(path: impl AsRef<Path>, structure: &ModelStructure, rules: &RuleSet) -> Result<(), IoError> {
    let path = path.as_ref();
    std::fs::write(path, ModelFile::from_model(structure, rules).to_json())
        .map_err(|source| IoError::File { path: path.display().to_string(), source })
}
