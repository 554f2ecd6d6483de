//! A model directory holds `snapshot.json` (both networks, scalers, score)
//! and `model.json` (config, seed, training curve).

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{CganConfig, CganModel, GeneratorSnapshot, SnapshotRecord};
use crate::error::{Error, Result};

const FORMAT_VERSION: u32 = 1;
pub const SNAPSHOT_FILE: &str = "snapshot.json";
pub const SIDECAR_FILE: &str = "model.json";

#[derive(Serialize, Deserialize)]
struct Sidecar {
    format_version: u32,
    config: CganConfig,
    seed: u64,
    train_len: usize,
    selected_epoch: usize,
    selected_rmse: f64,
    curve: Vec<SnapshotRecord>,
}

impl CganModel {
    pub fn save(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let sidecar = Sidecar {
            format_version: FORMAT_VERSION,
            config: self.config.clone(),
            seed: self.seed,
            train_len: self.train_len,
            selected_epoch: self.selected.epoch,
            selected_rmse: self.selected.rmse,
            curve: self.curve.clone(),
        };
        write_json(&dir.join(SIDECAR_FILE), &sidecar)?;
        write_json(&dir.join(SNAPSHOT_FILE), &self.selected)
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let sidecar: Sidecar = read_json(&dir.join(SIDECAR_FILE))?;
        if sidecar.format_version != FORMAT_VERSION {
            return Err(Error::FormatVersion(sidecar.format_version));
        }
        let selected: GeneratorSnapshot = read_json(&dir.join(SNAPSHOT_FILE))?;
        Ok(CganModel {
            selected,
            curve: sidecar.curve,
            config: sidecar.config,
            seed: sidecar.seed,
            train_len: sidecar.train_len,
        })
    }
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub(crate) fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}
