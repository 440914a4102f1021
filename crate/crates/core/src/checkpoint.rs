//! Checkpoint files: trained parameters plus the metadata needed to rebuild
//! and audit the run.
//!
//! The format is TOML. Floats are written in shortest round-trip form, so a
//! save/load cycle reproduces every weight bit for bit.

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::equations::ReactionSpec;
use crate::gtw::GeneralIC;
use crate::error::{Error, Result};
use crate::training::{DomainPreset, OmegaInit, Rect, TrainConfig, TrainReport, Verdict};

pub const FORMAT_VERSION: u32 = 1;

/// Training metadata stored next to the weights.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainMeta {
    pub seed: u64,
    pub epochs: usize,
    pub preset: Option<DomainPreset>,
    pub domain: Rect,
    pub n_icbc: usize,
    pub n_res: usize,
    pub lr0: f64,
    #[serde(default)]
    pub lr_min: f64,
    pub width: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_init: Option<OmegaInit>,
    /// Initial condition of a general-IC run.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ic: Option<GeneralIC>,
    pub verdict: Verdict,
    pub final_loss: f64,
    pub final_monitor: f64,
}

impl TrainMeta {
    pub fn from_run<P>(config: &TrainConfig, report: &TrainReport<P>) -> Self {
        let last = report.history.last();
        Self {
            seed: config.seed,
            epochs: config.epochs,
            preset: Some(config.preset),
            domain: config.rect(),
            n_icbc: config.n_icbc,
            n_res: config.n_res,
            lr0: config.lr0,
            lr_min: config.lr_min,
            width: config.width,
            omega_init: Some(config.omega_init),
            ic: None,
            verdict: report.verdict,
            final_loss: last.map(|r| r.loss).unwrap_or(f64::NAN),
            final_monitor: last.map(|r| r.omega).unwrap_or(f64::NAN),
        }
    }

    /// True when a run of `config` would reproduce this checkpoint.
    pub fn matches(&self, config: &TrainConfig) -> bool {
        self.seed == config.seed
            && self.epochs == config.epochs
            && self.preset == Some(config.preset)
            && self.domain == config.rect()
            && self.n_icbc == config.n_icbc
            && self.n_res == config.n_res
            && self.lr0 == config.lr0
            && self.lr_min == config.lr_min
            && self.width == config.width
            && self.omega_init == Some(config.omega_init)
    }
}

/// A saved model of network family `P`. `model` tags the family so a
/// wave-PINN checkpoint is never read as a traveling-wave one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint<P> {
    pub version: u32,
    pub model: String,
    pub reaction: ReactionSpec,
    pub meta: TrainMeta,
    pub params: P,
}

impl<P: Serialize + DeserializeOwned> Checkpoint<P> {
    pub fn new(model: &str, reaction: ReactionSpec, meta: TrainMeta, params: P) -> Self {
        Self {
            version: FORMAT_VERSION,
            model: model.to_string(),
            reaction,
            meta,
            params,
        }
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Parse {
            path: "<checkpoint>".into(),
            reason: e.to_string(),
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        std::fs::write(path, self.to_toml()?).map_err(|e| Error::io(path, e))
    }

    /// Reads a checkpoint, checking that it holds a `model` network.
    pub fn load(path: impl AsRef<Path>, model: &str) -> Result<Self> {
        let path = path.as_ref();
        let text = match std::fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                return Err(Error::CheckpointNotFound(PathBuf::from(path)))
            }
            Err(e) => return Err(Error::io(path, e)),
        };
        let parse_err = |reason: String| Error::Parse {
            path: path.display().to_string(),
            reason,
        };
        let ck: Self = toml::from_str(&text).map_err(|e| parse_err(e.to_string()))?;
        if ck.version != FORMAT_VERSION {
            return Err(parse_err(format!("unsupported checkpoint version {}", ck.version)));
        }
        if ck.model != model {
            return Err(parse_err(format!("expected a `{model}` checkpoint, found `{}`", ck.model)));
        }
        Ok(ck)
    }
}
