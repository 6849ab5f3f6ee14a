//! Per-channel margin-ranking training with full-batch gradient descent.

mod loss;
mod negatives;

pub use loss::{l1_distance, margin_loss, LossOutput};
pub use negatives::{sample_negatives, NegativeBatch};

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gcn::{save_checkpoint, ChannelKind, GcnChannel};
use crate::matrix::NormalizedAdjacency;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingConfig {
    pub margin_structure: f64,
    pub margin_attribute: f64,
    pub margin_subgraph: f64,
    /// Corruptions drawn per side for every positive pair (`2k` in total).
    pub negatives_per_side: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub rng_seed: u64,
    /// Epochs between negative resampling.
    pub resample_every: usize,
    /// Epochs between checkpoints; 0 saves only the final state.
    pub checkpoint_every: usize,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        Self {
            margin_structure: 3.0,
            margin_attribute: 3.0,
            margin_subgraph: 3.0,
            negatives_per_side: 20,
            epochs: 5000,
            learning_rate: DEFAULT_LEARNING_RATE,
            rng_seed: 42,
            resample_every: 10,
            checkpoint_every: 0,
        }
    }
}

/// Step size of plain gradient descent on the summed loss.
pub const DEFAULT_LEARNING_RATE: f64 = 3e-4;

impl TrainingConfig {
    pub fn margin(&self, kind: ChannelKind) -> f64 {
        match kind {
            ChannelKind::Structure => self.margin_structure,
            ChannelKind::Attribute => self.margin_attribute,
            ChannelKind::Subgraph => self.margin_subgraph,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for kind in ChannelKind::ALL {
            let m = self.margin(kind);
            if !(m > 0.0 && m.is_finite()) {
                return Err(Error::Config(format!("{kind} margin must be > 0, got {m}")));
            }
        }
        if self.negatives_per_side == 0 {
            return Err(Error::Config("negatives_per_side must be >= 1".into()));
        }
        if self.epochs == 0 {
            return Err(Error::Config("epochs must be >= 1".into()));
        }
        if self.resample_every == 0 {
            return Err(Error::Config("resample_every must be >= 1".into()));
        }
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config("learning_rate must be finite and >= 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelReport {
    pub kind: ChannelKind,
    /// Loss before the update of each epoch.
    pub losses: Vec<f64>,
    pub wall_time: Duration,
    pub checkpoint: Option<PathBuf>,
}

impl ChannelReport {
    /// Trailing mean over `window` epochs, for each epoch.
    pub fn smoothed(&self, window: usize) -> Vec<f64> {
        smoothed(&self.losses, window)
    }
}

pub fn smoothed(values: &[f64], window: usize) -> Vec<f64> {
    let window = window.max(1);
    let mut out = Vec::with_capacity(values.len());
    let mut acc = 0.0;
    for (i, v) in values.iter().enumerate() {
        acc += v;
        if i >= window {
            acc -= values[i - window];
        }
        out.push(acc / (i + 1).min(window) as f64);
    }
    out
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainReport {
    pub channels: Vec<ChannelReport>,
}

impl TrainReport {
    pub fn channel(&self, kind: ChannelKind) -> Option<&ChannelReport> {
        self.channels.iter().find(|c| c.kind == kind)
    }

    /// Loss trace as `epoch,channel,loss` CSV.
    pub fn loss_csv(&self) -> String {
        let mut s = String::from("epoch,channel,loss\n");
        for c in &self.channels {
            for (epoch, loss) in c.losses.iter().enumerate() {
                writeln!(s, "{epoch},{},{loss:?}", c.kind).unwrap();
            }
        }
        s
    }

    pub fn write_loss_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.loss_csv()).map_err(|e| Error::io(path, e))
    }
}

/// Trains one channel for `config.epochs` full-batch epochs.
///
/// Negatives are resampled every `resample_every` epochs from a random
/// stream derived from `rng_seed` and the channel kind, so channels trained
/// in any order or concurrently see the same negatives. When `checkpoint_dir`
/// is given the channel is saved there every `checkpoint_every` epochs and at
/// the end.
pub fn train_channel(
    channel: &mut GcnChannel,
    adj: [&NormalizedAdjacency; 2],
    train_pairs: &[(usize, usize)],
    config: &TrainingConfig,
    checkpoint_dir: Option<&Path>,
) -> Result<ChannelReport> {
    config.validate()?;
    if train_pairs.is_empty() {
        return Err(Error::InvalidSeeds("no training pairs".into()));
    }
    let kind = channel.kind();
    let margin = config.margin(kind);
    let (n1, n2) = (channel.num_entities(0), channel.num_entities(1));
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    rng.set_stream(100 + kind.stream());

    let started = Instant::now();
    let mut losses = Vec::with_capacity(config.epochs);
    let mut batch = sample_negatives(train_pairs, n1, n2, config.negatives_per_side, &mut rng)?;
    for epoch in 0..config.epochs {
        if epoch > 0 && epoch % config.resample_every == 0 {
            batch = sample_negatives(train_pairs, n1, n2, config.negatives_per_side, &mut rng)?;
        }
        let diverged = |detail: String| Error::Diverged {
            epoch,
            channel: kind.name().to_string(),
            detail,
        };
        let out = match channel.forward(adj) {
            Err(Error::NonFinite(what)) => {
                return Err(diverged(format!("{what}; {}", channel.parameter_norms())))
            }
            other => other?,
        };
        let loss = margin_loss(&batch, [&out[0], &out[1]], margin)?;
        if !loss.value.is_finite() {
            return Err(diverged(format!(
                "loss {}; {}",
                loss.value,
                channel.parameter_norms()
            )));
        }
        losses.push(loss.value);
        let grads = channel.backward(adj, [&loss.grads[0], &loss.grads[1]])?;
        channel.apply_gradients(&grads, config.learning_rate)?;

        if let Some(dir) = checkpoint_dir {
            if config.checkpoint_every > 0 && (epoch + 1) % config.checkpoint_every == 0 {
                save_checkpoint(dir, channel, epoch + 1)?;
            }
        }
        if epoch % 100 == 0 {
            log::debug!("{kind} epoch {epoch}: loss {:.4}", loss.value);
        }
    }
    channel.clear_cache();
    if let Some(dir) = checkpoint_dir {
        save_checkpoint(dir, channel, config.epochs)?;
    }
    Ok(ChannelReport {
        kind,
        losses,
        wall_time: started.elapsed(),
        checkpoint: checkpoint_dir.map(Path::to_path_buf),
    })
}
