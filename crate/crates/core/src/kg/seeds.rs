use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SplitTag {
    Train,
    Test,
}

/// Pre-aligned entity pairs `(left in KG1, right in KG2)`.
///
/// Pairs form a partial bijection. A freshly loaded alignment carries no
/// split; [`split_seeds`] assigns one tag per pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeedAlignment {
    pairs: Vec<(usize, usize)>,
    tags: Option<Vec<SplitTag>>,
}

impl SeedAlignment {
    pub fn new(pairs: Vec<(usize, usize)>) -> Result<Self> {
        let mut left = HashSet::with_capacity(pairs.len());
        let mut right = HashSet::with_capacity(pairs.len());
        for &(l, r) in &pairs {
            if !left.insert(l) {
                return Err(Error::InvalidSeeds(format!(
                    "left entity {l} appears in more than one pair"
                )));
            }
            if !right.insert(r) {
                return Err(Error::InvalidSeeds(format!(
                    "right entity {r} appears in more than one pair"
                )));
            }
        }
        Ok(Self { pairs, tags: None })
    }

    /// Builds an alignment with an explicit train/test assignment.
    pub fn with_split(pairs: Vec<(usize, usize)>, tags: Vec<SplitTag>) -> Result<Self> {
        if pairs.len() != tags.len() {
            return Err(Error::InvalidSeeds(format!(
                "{} pairs but {} split tags",
                pairs.len(),
                tags.len()
            )));
        }
        let mut seeds = Self::new(pairs)?;
        seeds.tags = Some(tags);
        Ok(seeds)
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn tags(&self) -> Option<&[SplitTag]> {
        self.tags.as_deref()
    }

    pub fn is_split(&self) -> bool {
        self.tags.is_some()
    }

    fn tagged(&self, want: SplitTag) -> Vec<(usize, usize)> {
        match &self.tags {
            Some(tags) => self
                .pairs
                .iter()
                .zip(tags)
                .filter(|(_, &t)| t == want)
                .map(|(&p, _)| p)
                .collect(),
            None => Vec::new(),
        }
    }

    /// Training pairs in file order; empty when no split is assigned.
    pub fn train_pairs(&self) -> Vec<(usize, usize)> {
        self.tagged(SplitTag::Train)
    }

    pub fn test_pairs(&self) -> Vec<(usize, usize)> {
        self.tagged(SplitTag::Test)
    }

    /// Checks every pair against the entity counts of the two graphs.
    pub fn check_bounds(&self, n_left: usize, n_right: usize) -> Result<()> {
        for &(l, r) in &self.pairs {
            if l >= n_left || r >= n_right {
                return Err(Error::InvalidSeeds(format!(
                    "pair ({l}, {r}) outside entity ranges {n_left} x {n_right}"
                )));
            }
        }
        Ok(())
    }
}

/// Tags `floor(train_fraction * m)` uniformly sampled pairs as train and the
/// rest as test.
pub fn split_seeds(
    seeds: &SeedAlignment,
    train_fraction: f64,
    rng_seed: u64,
) -> Result<SeedAlignment> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::InvalidSeeds(format!(
            "train fraction {train_fraction} not in (0, 1)"
        )));
    }
    let m = seeds.len();
    // The epsilon absorbs representation error, e.g. 0.3 * 15000.
    let n_train = ((train_fraction * m as f64) + 1e-9).floor() as usize;
    let n_test = m - n_train.min(m);
    if n_train == 0 || n_test == 0 {
        return Err(Error::DegenerateSplit {
            train: n_train,
            test: n_test,
        });
    }
    let mut order: Vec<usize> = (0..m).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    order.shuffle(&mut rng);
    let mut tags = vec![SplitTag::Test; m];
    for &i in &order[..n_train] {
        tags[i] = SplitTag::Train;
    }
    Ok(SeedAlignment {
        pairs: seeds.pairs.clone(),
        tags: Some(tags),
    })
}
