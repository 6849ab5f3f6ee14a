//! End-to-end runs: graph preparation, channel training, evaluation and the
//! command implementations behind the `subgcn` binary.

mod commands;
mod config;

pub use commands::{
    cmd_build_sgn, cmd_eval, cmd_ingest, cmd_sweep, cmd_synth, cmd_train, comparison_csv,
    monotonicity_warnings, IngestReport, SweepRow, CODE_VERSION,
};
pub use config::{Mode, RunConfig};

use std::path::Path;

use rayon::prelude::*;

use crate::align::{evaluate, AlignmentResult};
use crate::error::{Error, Result};
use crate::gcn::{init_channel, ChannelKind, EmbeddingSet, GcnChannel, GcnChannelConfig, InitialInput};
use crate::kg::{AttributeVocab, Dataset};
use crate::matrix::{build_adjacency, normalize, relation_stats, NormalizedAdjacency, SparseMatrix};
use crate::sgn::{build_sgn, build_skeleton, subgraph_features, SubgraphNetwork};
use crate::train::{train_channel, TrainReport};

/// Everything derived from the two graphs that the channels consume.
#[derive(Debug, Clone)]
pub struct PreparedGraphs {
    pub adjacency: [NormalizedAdjacency; 2],
    pub entities: [usize; 2],
    pub vocab: Option<AttributeVocab>,
    pub attribute_features: Option<[SparseMatrix; 2]>,
    pub sgn: Option<[SubgraphNetwork; 2]>,
    pub subgraph_features: Option<[SparseMatrix; 2]>,
}

/// Builds adjacencies plus the inputs of the requested channels.
pub fn prepare(data: &Dataset, cfg: &RunConfig, kinds: &[ChannelKind]) -> Result<PreparedGraphs> {
    let kgs = [&data.kg1, &data.kg2];
    let adjacency = {
        let build = |i: usize| -> Result<NormalizedAdjacency> {
            let kg = kgs[i];
            normalize(&build_adjacency(kg, &relation_stats(kg), cfg.adjacency_weight_floor)?)
        };
        [build(0)?, build(1)?]
    };
    let mut out = PreparedGraphs {
        adjacency,
        entities: [data.kg1.num_entities(), data.kg2.num_entities()],
        vocab: None,
        attribute_features: None,
        sgn: None,
        subgraph_features: None,
    };
    if kinds.contains(&ChannelKind::Attribute) {
        let vocab = AttributeVocab::build(&data.kg1, &data.kg2, cfg.attr_vocab_cap);
        if vocab.is_empty() {
            return Err(Error::Config("attribute channel requested but no attributes".into()));
        }
        out.attribute_features = Some([vocab.features(0, &data.kg1), vocab.features(1, &data.kg2)]);
        out.vocab = Some(vocab);
    }
    if kinds.contains(&ChannelKind::Subgraph) {
        let sgn = [
            build_sgn(&build_skeleton(&data.kg1), cfg.sgn_order)?,
            build_sgn(&build_skeleton(&data.kg2), cfg.sgn_order)?,
        ];
        if sgn[0].num_lines().max(sgn[1].num_lines()) == 0 {
            return Err(Error::Config("subgraph channel requested but both skeletons are empty".into()));
        }
        out.subgraph_features = Some([
            subgraph_features(&data.kg1, &sgn[0])?,
            subgraph_features(&data.kg2, &sgn[1])?,
        ]);
        out.sgn = Some(sgn);
    }
    Ok(out)
}

impl PreparedGraphs {
    pub fn adjacency_refs(&self) -> [&NormalizedAdjacency; 2] {
        [&self.adjacency[0], &self.adjacency[1]]
    }

    /// Channel configuration derived from the run config and graph sizes.
    pub fn channel_config(&self, kind: ChannelKind, cfg: &RunConfig) -> Result<GcnChannelConfig> {
        let base = match kind {
            ChannelKind::Structure => GcnChannelConfig::structure(cfg.d_s),
            ChannelKind::Attribute => {
                let vocab = self.vocab.as_ref().ok_or(Error::MissingChannel("attribute"))?;
                GcnChannelConfig::attribute(vocab.len(), cfg.d_a)
            }
            ChannelKind::Subgraph => {
                let sgn = self.sgn.as_ref().ok_or(Error::MissingChannel("subgraph"))?;
                GcnChannelConfig::subgraph(sgn[0].num_lines(), sgn[1].num_lines(), cfg.d_sgn)
            }
        };
        Ok(base.with_output_activation(cfg.output_activation))
    }

    pub fn init_channel(&self, kind: ChannelKind, cfg: &RunConfig) -> Result<GcnChannel> {
        let config = self.channel_config(kind, cfg)?;
        let inputs = match kind {
            ChannelKind::Structure => [
                InitialInput::Random { entities: self.entities[0] },
                InitialInput::Random { entities: self.entities[1] },
            ],
            ChannelKind::Attribute => {
                let [a, b] = self.attribute_features.clone().ok_or(Error::MissingChannel("attribute"))?;
                [InitialInput::Features(a), InitialInput::Features(b)]
            }
            ChannelKind::Subgraph => {
                let [a, b] = self.subgraph_features.clone().ok_or(Error::MissingChannel("subgraph"))?;
                [InitialInput::Features(a), InitialInput::Features(b)]
            }
        };
        init_channel(config, inputs, cfg.seed)
    }
}

/// Trains the given channels concurrently. Each channel is checkpointed
/// under `checkpoint_root/<channel>` when a root is given.
pub fn train_channels(
    channels: &mut [GcnChannel],
    prepared: &PreparedGraphs,
    train_pairs: &[(usize, usize)],
    cfg: &RunConfig,
    checkpoint_root: Option<&Path>,
) -> Result<TrainReport> {
    let tcfg = cfg.training();
    let adj = prepared.adjacency_refs();
    let reports = channels
        .par_iter_mut()
        .map(|ch| {
            let dir = checkpoint_root.map(|r| r.join(ch.kind().name()));
            train_channel(ch, adj, train_pairs, &tcfg, dir.as_deref())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TrainReport { channels: reports })
}

pub fn embed_channels(channels: &[GcnChannel], prepared: &PreparedGraphs) -> Result<EmbeddingSet> {
    let mut set = EmbeddingSet::new();
    for ch in channels {
        set.insert(ch.kind(), ch.embed(prepared.adjacency_refs())?)?;
    }
    Ok(set)
}

/// Result of one in-memory train + evaluate cycle.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub report: TrainReport,
    pub channels: Vec<GcnChannel>,
    pub embeddings: EmbeddingSet,
    /// Evaluation for every mode whose channels were trained.
    pub results: Vec<(Mode, AlignmentResult)>,
}

impl RunOutcome {
    pub fn result(&self, mode: Mode) -> Option<&AlignmentResult> {
        self.results.iter().find(|(m, _)| *m == mode).map(|(_, r)| r)
    }
}

/// Modes that can be evaluated from the given channels.
pub fn modes_for(kinds: &[ChannelKind]) -> Vec<Mode> {
    Mode::ALL
        .into_iter()
        .filter(|m| m.channels().iter().all(|k| kinds.contains(k)))
        .collect()
}

pub fn evaluate_modes(
    embeddings: &EmbeddingSet,
    test_pairs: &[(usize, usize)],
    cfg: &RunConfig,
) -> Result<Vec<(Mode, AlignmentResult)>> {
    modes_for(&embeddings.kinds())
        .into_iter()
        .map(|m| Ok((m, evaluate(test_pairs, embeddings, &m.alignment(cfg))?)))
        .collect()
}

/// Prepares, trains the channels of `cfg.mode` and evaluates every mode they
/// support. `data.seeds` must already carry a train/test split.
pub fn run_in_memory(data: &Dataset, cfg: &RunConfig, checkpoint_root: Option<&Path>) -> Result<RunOutcome> {
    cfg.validate()?;
    if !data.seeds.is_split() {
        return Err(Error::InvalidSeeds("seed alignment has no train/test split".into()));
    }
    data.seeds.check_bounds(data.kg1.num_entities(), data.kg2.num_entities())?;
    let kinds = cfg.mode.channels();
    let prepared = prepare(data, cfg, kinds)?;
    let mut channels = kinds
        .iter()
        .map(|&k| prepared.init_channel(k, cfg))
        .collect::<Result<Vec<_>>>()?;
    let report = train_channels(&mut channels, &prepared, &data.seeds.train_pairs(), cfg, checkpoint_root)?;
    let embeddings = embed_channels(&channels, &prepared)?;
    let results = evaluate_modes(&embeddings, &data.seeds.test_pairs(), cfg)?;
    Ok(RunOutcome {
        report,
        channels,
        embeddings,
        results,
    })
}
