//! Models by id, each behind its own lock.
//!
//! With a model directory, each model is kept as `<id>.json` (structure
//! and rules) plus `<id>.cells.json` (loaded data and overrides), written
//! after every mutation and reloaded at startup.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use parking_lot::RwLock;
use pivotmodel::io::ModelFile;
use pivotmodel::model::CellSource;
use pivotmodel::pivot::{EditMode, PivotError, PivotModel};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::wire::{name_address, resolve_address, NamedAddress};

#[derive(Debug, Error)]
pub enum RegistryError {
    #[error("model '{0}' already exists")]
    Exists(String),
    #[error("'{0}' is not a usable model id")]
    BadId(String),
    #[error(transparent)]
    Model(#[from] PivotError),
    #[error("{path}: {source}")]
    Storage { path: String, source: std::io::Error },
    #[error("{path}: {source}")]
    Snapshot { path: String, source: serde_json::Error },
}

pub type SharedModel = Arc<RwLock<PivotModel>>;

#[derive(Debug, Serialize, Deserialize)]
struct StoredCell {
    address: NamedAddress,
    value: f64,
    mode: EditMode,
    source: String,
}

#[derive(Debug, Default, Serialize, Deserialize)]
struct CellsSnapshot {
    cells: Vec<StoredCell>,
}

#[derive(Debug, Default)]
pub struct Registry {
    models: RwLock<BTreeMap<String, SharedModel>>,
    dir: Option<PathBuf>,
}

fn valid_id(id: &str) -> bool {
    !id.is_empty() && id.len() <= 64 && id.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_')
}

fn slug(name: &str) -> String {
    let mut out = String::new();
    for c in name.chars() {
        if c.is_ascii_alphanumeric() {
            out.push(c.to_ascii_lowercase());
        } else if !out.ends_with('-') {
            out.push('-');
        }
    }
    let trimmed: String = out.trim_matches('-').chars().take(48).collect();
    if trimmed.is_empty() {
        "model".into()
    } else {
        trimmed
    }
}

fn storage(path: &Path) -> impl FnOnce(std::io::Error) -> RegistryError + '_ {
    move |source| RegistryError::Storage { path: path.display().to_string(), source }
}

fn write_atomic(path: &Path, text: &str) -> Result<(), RegistryError> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, text).map_err(storage(&tmp))?;
    std::fs::rename(&tmp, path).map_err(storage(path))
}

impl Registry {
    pub fn in_memory() -> Registry {
        Registry::default()
    }

    /// Opens (creating if needed) a model directory and loads every model in it.
    pub fn open(dir: impl Into<PathBuf>) -> Result<Registry, RegistryError> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir).map_err(storage(&dir))?;
        let mut models = BTreeMap::new();
        let entries = std::fs::read_dir(&dir).map_err(storage(&dir))?;
        for entry in entries {
            let path = entry.map_err(storage(&dir))?.path();
            let Some(file) = path.file_name().and_then(|n| n.to_str()) else { continue };
            let Some(id) = file.strip_suffix(".json") else { continue };
            if id.ends_with(".cells") || !valid_id(id) {
                continue;
            }
            let mut model = PivotModel::open(&path)?;
            let cells_path = dir.join(format!("{id}.cells.json"));
            if cells_path.exists() {
                let text = std::fs::read_to_string(&cells_path).map_err(storage(&cells_path))?;
                let snapshot: CellsSnapshot = serde_json::from_str(&text)
                    .map_err(|source| RegistryError::Snapshot { path: cells_path.display().to_string(), source })?;
                restore(&mut model, &snapshot)?;
            }
            model.calculate();
            models.insert(id.to_string(), Arc::new(RwLock::new(model)));
        }
        Ok(Registry { models: RwLock::new(models), dir: Some(dir) })
    }

    pub fn len(&self) -> usize {
        self.models.read().len()
    }

    pub fn is_empty(&self) -> bool {
        self.models.read().is_empty()
    }

    pub fn get(&self, id: &str) -> Option<SharedModel> {
        self.models.read().get(id).cloned()
    }

    pub fn list(&self) -> Vec<(String, SharedModel)> {
        self.models.read().iter().map(|(k, v)| (k.clone(), v.clone())).collect()
    }

    /// Registers a model under `id`, or under a fresh id derived from the
    /// model name.
    pub fn insert(&self, id: Option<&str>, model: PivotModel) -> Result<String, RegistryError> {
        let mut models = self.models.write();
        let id = match id {
            Some(id) if !valid_id(id) => return Err(RegistryError::BadId(id.to_string())),
            Some(id) if models.contains_key(id) => return Err(RegistryError::Exists(id.to_string())),
            Some(id) => id.to_string(),
            None => {
                let base = slug(model.structure().name());
                let mut candidate = base.clone();
                let mut n = 2;
                while models.contains_key(&candidate) {
                    candidate = format!("{base}-{n}");
                    n += 1;
                }
                candidate
            }
        };
        self.persist(&id, &model)?;
        models.insert(id.clone(), Arc::new(RwLock::new(model)));
        Ok(id)
    }

    pub fn remove(&self, id: &str) -> Result<bool, RegistryError> {
        let removed = self.models.write().remove(id).is_some();
        if removed {
            if let Some(dir) = &self.dir {
                for path in [dir.join(format!("{id}.json")), dir.join(format!("{id}.cells.json"))] {
                    if path.exists() {
                        std::fs::remove_file(&path).map_err(storage(&path))?;
                    }
                }
            }
        }
        Ok(removed)
    }

    /// Writes the model's files when the registry has a directory.
    pub fn persist(&self, id: &str, model: &PivotModel) -> Result<(), RegistryError> {
        let Some(dir) = &self.dir else { return Ok(()) };
        write_atomic(&dir.join(format!("{id}.json")), &model.model_file().to_json())?;
        let text = serde_json::to_string_pretty(&snapshot(model)).expect("snapshot serializes");
        write_atomic(&dir.join(format!("{id}.cells.json")), &text)
    }
}

fn snapshot(model: &PivotModel) -> CellsSnapshot {
    let cube = model.cube();
    let structure = model.structure();
    let cells = cube
        .sources()
        .iter()
        .enumerate()
        .filter_map(|(linear, &source)| {
            let mode = match source {
                CellSource::Data(_) => EditMode::Data,
                CellSource::Override(_) => EditMode::Override,
                _ => return None,
            };
            let address = structure.address_of(linear).expect("linear index in range");
            Some(StoredCell {
                address: name_address(structure, &address),
                value: cube.value(linear).as_number().unwrap_or(0.0),
                mode,
                source: cube.source_id(source).unwrap_or_default().to_string(),
            })
        })
        .collect();
    CellsSnapshot { cells }
}

fn restore(model: &mut PivotModel, snapshot: &CellsSnapshot) -> Result<(), RegistryError> {
    let structure = model.structure().clone();
    for cell in &snapshot.cells {
        let address = resolve_address(&structure, &cell.address).map_err(PivotError::from)?;
        let linear = structure.linear_index(&address).map_err(PivotError::from)?;
        match cell.mode {
            EditMode::Data => model.cube_mut().set_data(linear, cell.value, &cell.source),
            EditMode::Override => model.cube_mut().pin(linear, cell.value, &cell.source),
        }
    }
    Ok(())
}

/// Builds a model from an uploaded model document.
pub fn model_from_json(text: &str) -> Result<PivotModel, PivotError> {
    let file = ModelFile::from_json(text)?;
    PivotModel::from_model_file(&file)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slugs_are_usable_ids() {
        assert_eq!(slug("Lighting Co. 2024"), "lighting-co-2024");
        assert_eq!(slug("***"), "model");
        assert!(valid_id(&slug("Été plan")));
    }
}
