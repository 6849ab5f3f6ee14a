use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::align::AlignmentConfig;
use crate::error::{Error, Result};
use crate::gcn::{Activation, ChannelKind};
use crate::matrix::DEFAULT_WEIGHT_FLOOR;
use crate::train::{TrainingConfig, DEFAULT_LEARNING_RATE};

/// Which channels take part in training and in the alignment distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    #[serde(rename = "se")]
    Se,
    #[serde(rename = "se+ae")]
    SeAe,
    #[serde(rename = "sub-gcn")]
    SubGcn,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::Se, Mode::SeAe, Mode::SubGcn];

    pub fn name(self) -> &'static str {
        match self {
            Self::Se => "se",
            Self::SeAe => "se+ae",
            Self::SubGcn => "sub-gcn",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.name() == s)
    }

    /// File-name friendly form of the name.
    pub fn slug(self) -> &'static str {
        match self {
            Self::Se => "se",
            Self::SeAe => "se_ae",
            Self::SubGcn => "sub_gcn",
        }
    }

    pub fn channels(self) -> &'static [ChannelKind] {
        match self {
            Self::Se => &[ChannelKind::Structure],
            Self::SeAe => &[ChannelKind::Structure, ChannelKind::Attribute],
            Self::SubGcn => &ChannelKind::ALL,
        }
    }

    /// Distance weights for this mode. Only sub-GCN reads the configured
    /// weights; SE uses the structure channel alone and SE+AE the fixed
    /// 0.8 / 0.2 split.
    pub fn alignment(self, cfg: &RunConfig) -> AlignmentConfig {
        let (alpha, beta, gamma_weight) = match self {
            Self::Se => (1.0, 0.0, 0.0),
            Self::SeAe => (0.8, 0.2, 0.0),
            Self::SubGcn => (cfg.alpha, cfg.beta, cfg.gamma_weight),
        };
        AlignmentConfig {
            alpha,
            beta,
            gamma_weight,
            hits_levels: cfg.hits_levels.clone(),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Every knob of a run, stored as flat TOML.
///
/// | key | default | meaning |
/// |-----|---------|---------|
/// | `dataset` | none | dataset directory in the DBP15K layout |
/// | `out` | `runs/default` | output directory |
/// | `mode` | `sub-gcn` | `se`, `se+ae` or `sub-gcn` |
/// | `seed` | 42 | seed for the split, initialisation and negatives |
/// | `train_fraction` | 0.3 | share of seed links used for training |
/// | `d_s`, `d_a`, `d_sgn` | 200, 100, 100 | channel widths |
/// | `epochs` | 5000 | training epochs per channel |
/// | `learning_rate` | see [`DEFAULT_LEARNING_RATE`] | gradient step |
/// | `margin_structure`, `margin_attribute`, `margin_subgraph` | 3 | hinge margins |
/// | `negatives_per_side` | 20 | corruptions per side per seed |
/// | `resample_every` | 10 | epochs between negative resampling |
/// | `checkpoint_every` | 0 | epochs between checkpoints, 0 = final only |
/// | `alpha`, `beta`, `gamma_weight` | 0.72, 0.2, 0.08 | distance weights |
/// | `hits_levels` | `[1, 10, 50]` | k values reported |
/// | `attr_vocab_cap` | 2000 | most frequent attributes kept |
/// | `adjacency_weight_floor` | 0.3 | lower clip of relation weights |
/// | `output_activation` | `identity` | `identity` or `relu` on the second layer |
/// | `sgn_order` | 1 | subgraph-network order (only 1 is built) |
/// | `sweep_fractions` | 0.1 .. 0.6 | fractions used by `sweep` |
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub dataset: Option<PathBuf>,
    pub out: PathBuf,
    pub mode: Mode,
    pub seed: u64,
    pub train_fraction: f64,
    pub d_s: usize,
    pub d_a: usize,
    pub d_sgn: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub margin_structure: f64,
    pub margin_attribute: f64,
    pub margin_subgraph: f64,
    pub negatives_per_side: usize,
    pub resample_every: usize,
    pub checkpoint_every: usize,
    pub alpha: f64,
    pub beta: f64,
    pub gamma_weight: f64,
    pub hits_levels: Vec<usize>,
    pub attr_vocab_cap: usize,
    pub adjacency_weight_floor: f64,
    pub output_activation: Activation,
    pub sgn_order: usize,
    pub sweep_fractions: Vec<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let align = AlignmentConfig::default();
        let train = TrainingConfig::default();
        Self {
            dataset: None,
            out: PathBuf::from("runs/default"),
            mode: Mode::SubGcn,
            seed: 42,
            train_fraction: 0.3,
            d_s: 200,
            d_a: 100,
            d_sgn: 100,
            epochs: train.epochs,
            learning_rate: DEFAULT_LEARNING_RATE,
            margin_structure: train.margin_structure,
            margin_attribute: train.margin_attribute,
            margin_subgraph: train.margin_subgraph,
            negatives_per_side: train.negatives_per_side,
            resample_every: train.resample_every,
            checkpoint_every: train.checkpoint_every,
            alpha: align.alpha,
            beta: align.beta,
            gamma_weight: align.gamma_weight,
            hits_levels: align.hits_levels,
            attr_vocab_cap: 2000,
            adjacency_weight_floor: DEFAULT_WEIGHT_FLOOR,
            output_activation: Activation::Identity,
            sgn_order: 1,
            sweep_fractions: vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.6],
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run config serializes")
    }

    pub fn training(&self) -> TrainingConfig {
        TrainingConfig {
            margin_structure: self.margin_structure,
            margin_attribute: self.margin_attribute,
            margin_subgraph: self.margin_subgraph,
            negatives_per_side: self.negatives_per_side,
            epochs: self.epochs,
            learning_rate: self.learning_rate,
            rng_seed: self.seed,
            resample_every: self.resample_every,
            checkpoint_every: self.checkpoint_every,
        }
    }

    pub fn dataset_dir(&self) -> Result<&Path> {
        self.dataset
            .as_deref()
            .ok_or_else(|| Error::Config("no dataset directory configured".into()))
    }

    pub fn validate(&self) -> Result<()> {
        self.training().validate()?;
        self.mode.alignment(self).validate()?;
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::Config(format!(
                "train_fraction {} not in (0, 1)",
                self.train_fraction
            )));
        }
        if self.d_s == 0 || self.d_a == 0 || self.d_sgn == 0 {
            return Err(Error::Config("channel widths must be positive".into()));
        }
        if self.attr_vocab_cap == 0 {
            return Err(Error::Config("attr_vocab_cap must be positive".into()));
        }
        if !(self.adjacency_weight_floor >= 0.0 && self.adjacency_weight_floor.is_finite()) {
            return Err(Error::Config("adjacency_weight_floor must be >= 0".into()));
        }
        if self.sgn_order != 1 {
            return Err(Error::UnsupportedOrder(self.sgn_order));
        }
        if let Some(f) = self
            .sweep_fractions
            .iter()
            .find(|f| !(**f > 0.0 && **f < 1.0))
        {
            return Err(Error::Config(format!("sweep fraction {f} not in (0, 1)")));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let cfg = RunConfig::default();
        assert_eq!(RunConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
        assert_eq!(RunConfig::from_toml("").unwrap(), cfg);
    }

    #[test]
    fn unknown_keys_rejected() {
        let err = RunConfig::from_toml("d_z = 3\n").unwrap_err();
        assert_eq!(err.category(), "config");
    }

    #[test]
    fn partial_override() {
        let cfg = RunConfig::from_toml("mode = \"se+ae\"\nepochs = 7\n").unwrap();
        assert_eq!(cfg.mode, Mode::SeAe);
        assert_eq!(cfg.epochs, 7);
        assert_eq!(cfg.d_s, 200);
    }

    #[test]
    fn mode_weights() {
        let cfg = RunConfig::default();
        assert_eq!(Mode::Se.alignment(&cfg).alpha, 1.0);
        assert_eq!(Mode::SubGcn.alignment(&cfg).gamma_weight, 0.08);
        for m in Mode::ALL {
            assert!(m.alignment(&cfg).validate().is_ok());
            assert_eq!(Mode::parse(m.name()), Some(m));
        }
    }
}
