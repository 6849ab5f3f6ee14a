use rand::Rng;

use crate::error::{Error, Result};

/// Corrupted pairs for every positive seed `(e, v)`: `k` pairs `(e', v)`
/// with `e'` drawn from KG1 and `k` pairs `(e, v')` with `v'` drawn from KG2.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NegativeBatch {
    positives: Vec<(usize, usize)>,
    left: Vec<Vec<usize>>,
    right: Vec<Vec<usize>>,
}

impl NegativeBatch {
    /// Builds a batch from explicit corruptions (mainly for tests).
    pub fn from_parts(
        positives: Vec<(usize, usize)>,
        left: Vec<Vec<usize>>,
        right: Vec<Vec<usize>>,
    ) -> Result<Self> {
        if left.len() != positives.len() || right.len() != positives.len() {
            return Err(Error::Sampling("one corruption list per positive required".into()));
        }
        Ok(Self {
            positives,
            left,
            right,
        })
    }

    pub fn positives(&self) -> &[(usize, usize)] {
        &self.positives
    }

    /// Corrupted pairs of positive `i`, left corruptions first.
    pub fn negatives_of(&self, i: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        let (e, v) = self.positives[i];
        self.left[i]
            .iter()
            .map(move |&a| (a, v))
            .chain(self.right[i].iter().map(move |&b| (e, b)))
    }

    pub fn num_negatives(&self) -> usize {
        self.left.iter().chain(&self.right).map(Vec::len).sum()
    }
}

/// Draws `k` left and `k` right corruptions per positive, rejecting draws
/// that reproduce the positive entity.
pub fn sample_negatives<R: Rng + ?Sized>(
    positives: &[(usize, usize)],
    entities1: usize,
    entities2: usize,
    k: usize,
    rng: &mut R,
) -> Result<NegativeBatch> {
    if k == 0 {
        return Err(Error::Sampling("k must be at least 1".into()));
    }
    if entities1 < 2 || entities2 < 2 {
        return Err(Error::Sampling(format!(
            "need at least two entities per graph, got {entities1} and {entities2}"
        )));
    }
    let mut draw = |n: usize, avoid: usize| loop {
        let c = rng.gen_range(0..n);
        if c != avoid {
            break c;
        }
    };
    let mut left = Vec::with_capacity(positives.len());
    let mut right = Vec::with_capacity(positives.len());
    for &(e, v) in positives {
        if e >= entities1 || v >= entities2 {
            return Err(Error::UnknownEntity(if e >= entities1 { e } else { v }));
        }
        left.push((0..k).map(|_| draw(entities1, e)).collect());
        right.push((0..k).map(|_| draw(entities2, v)).collect());
    }
    Ok(NegativeBatch {
        positives: positives.to_vec(),
        left,
        right,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn two_k_per_positive() {
        let pos: Vec<_> = (0..10).map(|i| (i, i)).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let b = sample_negatives(&pos, 50, 60, 20, &mut rng).unwrap();
        assert_eq!(b.num_negatives(), 400);
        for (i, &p) in pos.iter().enumerate() {
            let negs: Vec<_> = b.negatives_of(i).collect();
            assert_eq!(negs.len(), 40);
            assert!(negs.iter().all(|&n| n != p));
            assert!(negs[..20].iter().all(|&(_, v)| v == p.1));
            assert!(negs[20..].iter().all(|&(e, _)| e == p.0));
        }
    }

    #[test]
    fn forced_corruption() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let b = sample_negatives(&[(0, 3)], 2, 5, 1, &mut rng).unwrap();
        assert_eq!(b.negatives_of(0).next(), Some((1, 3)));
    }

    #[test]
    fn deterministic() {
        let pos = [(0, 1), (2, 3)];
        let a = sample_negatives(&pos, 9, 9, 4, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        let b = sample_negatives(&pos, 9, 9, 4, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn single_entity_graph_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(matches!(
            sample_negatives(&[(0, 0)], 1, 5, 1, &mut rng),
            Err(Error::Sampling(_))
        ));
    }
}
