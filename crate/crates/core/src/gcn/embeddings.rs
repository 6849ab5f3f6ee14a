use super::ChannelKind;
use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;

/// Output embeddings of the trained channels, one matrix per graph.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EmbeddingSet {
    channels: [Option<[DenseMatrix; 2]>; 3],
}

fn slot(kind: ChannelKind) -> usize {
    match kind {
        ChannelKind::Structure => 0,
        ChannelKind::Attribute => 1,
        ChannelKind::Subgraph => 2,
    }
}

impl EmbeddingSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Stores the embeddings of one channel. Both matrices must be finite and
    /// have the same width; row counts must agree with channels already set.
    pub fn insert(&mut self, kind: ChannelKind, pair: [DenseMatrix; 2]) -> Result<()> {
        if pair[0].cols() != pair[1].cols() {
            return Err(Error::Dimension(format!(
                "{kind} embeddings have widths {} and {}",
                pair[0].cols(),
                pair[1].cols()
            )));
        }
        if !(pair[0].is_finite() && pair[1].is_finite()) {
            return Err(Error::NonFinite(format!("{kind} embeddings")));
        }
        if let Some(rows) = self.entity_counts() {
            if rows != (pair[0].rows(), pair[1].rows()) {
                return Err(Error::Dimension(format!(
                    "{kind} embeddings cover {:?} entities, other channels {:?}",
                    (pair[0].rows(), pair[1].rows()),
                    rows
                )));
            }
        }
        self.channels[slot(kind)] = Some(pair);
        Ok(())
    }

    pub fn with(mut self, kind: ChannelKind, pair: [DenseMatrix; 2]) -> Result<Self> {
        self.insert(kind, pair)?;
        Ok(self)
    }

    pub fn get(&self, kind: ChannelKind) -> Option<&[DenseMatrix; 2]> {
        self.channels[slot(kind)].as_ref()
    }

    pub fn kinds(&self) -> Vec<ChannelKind> {
        ChannelKind::ALL
            .into_iter()
            .filter(|k| self.get(*k).is_some())
            .collect()
    }

    /// Entity counts of the two graphs, if any channel is present.
    pub fn entity_counts(&self) -> Option<(usize, usize)> {
        self.channels
            .iter()
            .flatten()
            .next()
            .map(|p| (p[0].rows(), p[1].rows()))
    }

    /// Multiplies every embedding by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        for pair in out.channels.iter_mut().flatten() {
            pair[0].scale(factor);
            pair[1].scale(factor);
        }
        out
    }
}
