//! Channel checkpoints: a directory holding `manifest.toml` plus one text
//! matrix per tensor (`w1.txt`, `w2.txt`, `input_1.txt`, `input_2.txt`).
//! Trainable inputs are stored dense, fixed inputs sparse.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Activation, ChannelInput, ChannelKind, GcnChannel, GcnChannelConfig};
use crate::error::{Error, Result};
use crate::matrix::io::{read_dense, read_sparse, write_dense, write_sparse};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckpointManifest {
    pub kind: ChannelKind,
    pub input_dim: usize,
    pub hidden_dim: usize,
    pub output_dim: usize,
    pub hidden_activation: Activation,
    pub output_activation: Activation,
    pub seed: u64,
    pub epoch: usize,
}

impl CheckpointManifest {
    pub fn config(&self) -> GcnChannelConfig {
        GcnChannelConfig {
            kind: self.kind,
            input_dim: self.input_dim,
            hidden_dim: self.hidden_dim,
            output_dim: self.output_dim,
            hidden_activation: self.hidden_activation,
            output_activation: self.output_activation,
        }
    }
}

pub fn save_checkpoint(dir: impl AsRef<Path>, channel: &GcnChannel, epoch: usize) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let c = channel.config();
    let manifest = CheckpointManifest {
        kind: c.kind,
        input_dim: c.input_dim,
        hidden_dim: c.hidden_dim,
        output_dim: c.output_dim,
        hidden_activation: c.hidden_activation,
        output_activation: c.output_activation,
        seed: channel.seed(),
        epoch,
    };
    let text = toml::to_string(&manifest).map_err(|e| Error::Config(e.to_string()))?;
    let path = dir.join("manifest.toml");
    fs::write(&path, text).map_err(|e| Error::io(path, e))?;
    write_dense(dir.join("w1.txt"), channel.w1())?;
    write_dense(dir.join("w2.txt"), channel.w2())?;
    for side in 0..2 {
        let path = dir.join(format!("input_{}.txt", side + 1));
        match channel.input(side) {
            ChannelInput::Dense(m) => write_dense(path, m)?,
            ChannelInput::Sparse { matrix, .. } => write_sparse(path, matrix)?,
        }
    }
    Ok(())
}

pub fn load_checkpoint(dir: impl AsRef<Path>) -> Result<(GcnChannel, CheckpointManifest)> {
    let dir = dir.as_ref();
    let path = dir.join("manifest.toml");
    if !path.exists() {
        return Err(Error::MissingFile(path));
    }
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let manifest: CheckpointManifest =
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let config = manifest.config();
    let w1 = read_dense(dir.join("w1.txt"))?;
    let w2 = read_dense(dir.join("w2.txt"))?;
    let read_input = |side: usize| -> Result<ChannelInput> {
        let path = dir.join(format!("input_{side}.txt"));
        if config.input_trainable() {
            Ok(ChannelInput::Dense(read_dense(path)?))
        } else {
            Ok(ChannelInput::sparse(read_sparse(path)?))
        }
    };
    let inputs = [read_input(1)?, read_input(2)?];
    let channel = GcnChannel::from_parts(config, manifest.seed, w1, w2, inputs)?;
    Ok((channel, manifest))
}
