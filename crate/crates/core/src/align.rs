//! Weighted-distance alignment and Hits@k evaluation.
//!
//! The distance between a KG1 entity `x` and a KG2 entity `y` is
//!
//! ```text
//! D(x, y) = alpha * |hs(x) - hs(y)|_1 / d_s
//!         + beta  * |ha(x) - ha(y)|_1 / d_a
//!         + gamma * |hsgn(x) - hsgn(y)|_1 / d_sgn
//! ```
//!
//! Every entity of the target graph is a candidate. Candidates are ranked by
//! ascending distance with ties broken by ascending entity id.

use std::cmp::Ordering;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gcn::{ChannelKind, EmbeddingSet};
use crate::matrix::DenseMatrix;
use crate::train::l1_distance;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignmentConfig {
    pub alpha: f64,
    pub beta: f64,
    pub gamma_weight: f64,
    pub hits_levels: Vec<usize>,
}

impl Default for AlignmentConfig {
    fn default() -> Self {
        Self {
            alpha: 0.72,
            beta: 0.2,
            gamma_weight: 0.08,
            hits_levels: vec![1, 10, 50],
        }
    }
}

impl AlignmentConfig {
    pub fn with_weights(alpha: f64, beta: f64, gamma_weight: f64) -> Self {
        Self {
            alpha,
            beta,
            gamma_weight,
            ..Self::default()
        }
    }

    pub fn weight(&self, kind: ChannelKind) -> f64 {
        match kind {
            ChannelKind::Structure => self.alpha,
            ChannelKind::Attribute => self.beta,
            ChannelKind::Subgraph => self.gamma_weight,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let w = [self.alpha, self.beta, self.gamma_weight];
        if w.iter().any(|x| !(*x >= 0.0 && x.is_finite())) {
            return Err(Error::Config("distance weights must be finite and >= 0".into()));
        }
        let sum: f64 = w.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!("distance weights sum to {sum}, expected 1")));
        }
        if self.hits_levels.is_empty() || self.hits_levels.contains(&0) {
            return Err(Error::Config("hits levels must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    /// Query KG1 entities against all of KG2.
    Forward,
    /// Query KG2 entities against all of KG1.
    Backward,
}

impl Direction {
    pub const BOTH: [Direction; 2] = [Direction::Forward, Direction::Backward];

    pub fn name(self) -> &'static str {
        match self {
            Self::Forward => "kg1->kg2",
            Self::Backward => "kg2->kg1",
        }
    }

    fn sides(self) -> (usize, usize) {
        match self {
            Self::Forward => (0, 1),
            Self::Backward => (1, 0),
        }
    }
}

/// Precomputed per-channel coefficients `weight / dim` for one direction.
struct Scorer<'a> {
    parts: Vec<(f64, &'a DenseMatrix, &'a DenseMatrix)>,
    targets: usize,
    sources: usize,
}

impl<'a> Scorer<'a> {
    fn new(emb: &'a EmbeddingSet, cfg: &AlignmentConfig, dir: Direction) -> Result<Self> {
        let (s, t) = dir.sides();
        let mut parts = Vec::with_capacity(3);
        for kind in ChannelKind::ALL {
            let w = cfg.weight(kind);
            if w == 0.0 {
                continue;
            }
            let pair = emb.get(kind).ok_or(Error::MissingChannel(kind.name()))?;
            let dim = pair[0].cols().max(1) as f64;
            parts.push((w / dim, &pair[s], &pair[t]));
        }
        let (sources, targets) = match emb.entity_counts() {
            Some((a, b)) if s == 0 => (a, b),
            Some((a, b)) => (b, a),
            None => return Err(Error::MissingChannel("any")),
        };
        Ok(Self {
            parts,
            targets,
            sources,
        })
    }

    fn distance(&self, source: usize, target: usize) -> f64 {
        self.parts
            .iter()
            .map(|(c, src, tgt)| c * l1_distance(src.row(source), tgt.row(target)))
            .sum()
    }

    fn check(&self, source: usize) -> Result<()> {
        if source >= self.sources {
            return Err(Error::UnknownEntity(source));
        }
        Ok(())
    }

    /// 1-based rank of `truth` among all targets for `source`.
    fn rank_of(&self, source: usize, truth: usize) -> Result<usize> {
        self.check(source)?;
        if truth >= self.targets {
            return Err(Error::UnknownEntity(truth));
        }
        let d_true = self.distance(source, truth);
        let ahead = (0..self.targets)
            .filter(|&c| {
                c != truth && {
                    let d = self.distance(source, c);
                    d < d_true || (d == d_true && c < truth)
                }
            })
            .count();
        Ok(ahead + 1)
    }
}

/// Weighted distance between KG1 entity `e1` and KG2 entity `e2`.
pub fn combined_distance(
    e1: usize,
    e2: usize,
    emb: &EmbeddingSet,
    cfg: &AlignmentConfig,
) -> Result<f64> {
    let scorer = Scorer::new(emb, cfg, Direction::Forward)?;
    scorer.check(e1)?;
    if e2 >= scorer.targets {
        return Err(Error::UnknownEntity(e2));
    }
    Ok(scorer.distance(e1, e2))
}

fn by_distance(a: &(usize, f64), b: &(usize, f64)) -> Ordering {
    a.1.total_cmp(&b.1).then(a.0.cmp(&b.0))
}

/// All target entities ordered by ascending distance to `entity`.
pub fn rank_candidates(
    entity: usize,
    direction: Direction,
    emb: &EmbeddingSet,
    cfg: &AlignmentConfig,
) -> Result<Vec<(usize, f64)>> {
    let scorer = Scorer::new(emb, cfg, direction)?;
    scorer.check(entity)?;
    let mut out: Vec<(usize, f64)> = (0..scorer.targets)
        .map(|c| (c, scorer.distance(entity, c)))
        .collect();
    out.sort_unstable_by(by_distance);
    Ok(out)
}

/// Rank of the true counterpart, without sorting the candidate list.
pub fn true_rank(
    entity: usize,
    truth: usize,
    direction: Direction,
    emb: &EmbeddingSet,
    cfg: &AlignmentConfig,
) -> Result<usize> {
    Scorer::new(emb, cfg, direction)?.rank_of(entity, truth)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DirectionResult {
    pub direction: Direction,
    /// `(source, true target, rank)` per test pair in input order.
    pub ranks: Vec<(usize, usize, usize)>,
    /// `(k, Hits@k in percent)` for each configured level.
    pub hits: Vec<(usize, f64)>,
    pub mean_rank: f64,
}

impl DirectionResult {
    pub fn hits_at(&self, k: usize) -> Option<f64> {
        self.hits.iter().find(|(l, _)| *l == k).map(|(_, v)| *v)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlignmentResult {
    pub directions: [DirectionResult; 2],
}

impl AlignmentResult {
    pub fn direction(&self, d: Direction) -> &DirectionResult {
        match d {
            Direction::Forward => &self.directions[0],
            Direction::Backward => &self.directions[1],
        }
    }

    /// `direction,metric,value` CSV with two-decimal values.
    pub fn metrics_csv(&self) -> String {
        let mut s = String::from("direction,metric,value\n");
        for d in &self.directions {
            for (k, v) in &d.hits {
                writeln!(s, "{},hits@{k},{v:.2}", d.direction.name()).unwrap();
            }
            writeln!(s, "{},mean_rank,{:.2}", d.direction.name(), d.mean_rank).unwrap();
        }
        s
    }

    /// Per-entity `entity,true_rank` dump for one direction.
    pub fn ranks_csv(&self, d: Direction) -> String {
        let mut s = String::from("entity,true_rank\n");
        for (e, _, r) in &self.direction(d).ranks {
            writeln!(s, "{e},{r}").unwrap();
        }
        s
    }
}

/// Hits@k in percent for 1-based ranks.
pub fn hits_at_k(ranks: &[usize], k: usize) -> f64 {
    if ranks.is_empty() {
        return 0.0;
    }
    100.0 * ranks.iter().filter(|&&r| r <= k).count() as f64 / ranks.len() as f64
}

/// Ranks every test pair in both directions against the full target graph.
pub fn evaluate(
    test_pairs: &[(usize, usize)],
    emb: &EmbeddingSet,
    cfg: &AlignmentConfig,
) -> Result<AlignmentResult> {
    cfg.validate()?;
    if test_pairs.is_empty() {
        return Err(Error::EmptyTestSet);
    }
    let run = |dir: Direction| -> Result<DirectionResult> {
        let scorer = Scorer::new(emb, cfg, dir)?;
        let ranks = test_pairs
            .par_iter()
            .map(|&(l, r)| {
                let (src, tgt) = match dir {
                    Direction::Forward => (l, r),
                    Direction::Backward => (r, l),
                };
                scorer.rank_of(src, tgt).map(|rank| (src, tgt, rank))
            })
            .collect::<Result<Vec<_>>>()?;
        let plain: Vec<usize> = ranks.iter().map(|r| r.2).collect();
        let hits = cfg
            .hits_levels
            .iter()
            .map(|&k| (k, hits_at_k(&plain, k)))
            .collect();
        let mean_rank = plain.iter().sum::<usize>() as f64 / plain.len() as f64;
        Ok(DirectionResult {
            direction: dir,
            ranks,
            hits,
            mean_rank,
        })
    };
    Ok(AlignmentResult {
        directions: [run(Direction::Forward)?, run(Direction::Backward)?],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[f64]]) -> DenseMatrix {
        DenseMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    fn set(s: [DenseMatrix; 2], a: [DenseMatrix; 2], g: [DenseMatrix; 2]) -> EmbeddingSet {
        EmbeddingSet::new()
            .with(ChannelKind::Structure, s)
            .unwrap()
            .with(ChannelKind::Attribute, a)
            .unwrap()
            .with(ChannelKind::Subgraph, g)
            .unwrap()
    }

    #[test]
    fn identical_embeddings_have_zero_distance() {
        let x = m(&[&[0.3, -1.0]]);
        let e = set([x.clone(), x.clone()], [x.clone(), x.clone()], [x.clone(), x]);
        assert_eq!(combined_distance(0, 0, &e, &AlignmentConfig::default()).unwrap(), 0.0);
    }

    #[test]
    fn structure_only_unit_difference() {
        let mut a = DenseMatrix::zeros(1, 200);
        let b = DenseMatrix::zeros(1, 200);
        a[(0, 7)] = 1.0;
        let e = EmbeddingSet::new().with(ChannelKind::Structure, [a, b]).unwrap();
        let cfg = AlignmentConfig::with_weights(1.0, 0.0, 0.0);
        assert_eq!(combined_distance(0, 0, &e, &cfg).unwrap(), 0.005);
    }

    #[test]
    fn default_weights_unit_distance_per_channel() {
        let unit = |d: usize| {
            let mut a = DenseMatrix::zeros(1, d);
            a[(0, 0)] = 1.0;
            [a, DenseMatrix::zeros(1, d)]
        };
        let e = set(unit(200), unit(100), unit(100));
        let d = combined_distance(0, 0, &e, &AlignmentConfig::default()).unwrap();
        assert!((d - 0.0064).abs() < 1e-15);
    }

    #[test]
    fn missing_channel_is_an_error() {
        let x = m(&[&[0.0]]);
        let e = EmbeddingSet::new().with(ChannelKind::Structure, [x.clone(), x]).unwrap();
        assert!(matches!(
            combined_distance(0, 0, &e, &AlignmentConfig::default()),
            Err(Error::MissingChannel("attribute"))
        ));
    }

    #[test]
    fn ties_go_to_lower_id() {
        let src = m(&[&[0.0]]);
        let tgt = m(&[&[1.0], &[-1.0], &[0.0], &[1.0]]);
        let e = EmbeddingSet::new().with(ChannelKind::Structure, [src, tgt]).unwrap();
        let cfg = AlignmentConfig::with_weights(1.0, 0.0, 0.0);
        let ranked = rank_candidates(0, Direction::Forward, &e, &cfg).unwrap();
        let ids: Vec<usize> = ranked.iter().map(|r| r.0).collect();
        assert_eq!(ids, vec![2, 0, 1, 3]);
        assert_eq!(true_rank(0, 3, Direction::Forward, &e, &cfg).unwrap(), 4);
        assert!(rank_candidates(5, Direction::Forward, &e, &cfg).is_err());
    }

    #[test]
    fn hits_from_ranks() {
        assert_eq!(hits_at_k(&[1, 3], 1), 50.0);
        assert_eq!(hits_at_k(&[1, 3], 10), 100.0);
    }

    #[test]
    fn perfect_embeddings_hit_everything() {
        let x = m(&[&[0.0], &[5.0], &[10.0]]);
        let e = EmbeddingSet::new().with(ChannelKind::Structure, [x.clone(), x]).unwrap();
        let cfg = AlignmentConfig::with_weights(1.0, 0.0, 0.0);
        let r = evaluate(&[(0, 0), (1, 1), (2, 2)], &e, &cfg).unwrap();
        for d in Direction::BOTH {
            assert_eq!(r.direction(d).hits_at(1), Some(100.0));
            assert_eq!(r.direction(d).mean_rank, 1.0);
        }
        assert!(r.metrics_csv().starts_with("direction,metric,value\nkg1->kg2,hits@1,100.00\n"));
        assert!(matches!(evaluate(&[], &e, &cfg), Err(Error::EmptyTestSet)));
    }

    #[test]
    fn weights_must_sum_to_one() {
        assert!(AlignmentConfig::with_weights(0.5, 0.2, 0.2).validate().is_err());
        assert!(AlignmentConfig::with_weights(1.2, -0.2, 0.0).validate().is_err());
        assert!(AlignmentConfig::default().validate().is_ok());
    }
}
