//! Functionality-weighted KG adjacency and its symmetric normalization.
//!
//! Relation `r` with `n` triples, `h` distinct heads and `t` distinct tails
//! has functionality `fun(r) = h / n` and inverse functionality
//! `ifun(r) = t / n`. Every triple `(a, r, b)` adds `ifun(r)` to `P[a][b]`
//! and `fun(r)` to `P[b][a]`, each weight clipped below at a configurable
//! floor.

use std::collections::HashSet;

use super::SparseMatrix;
use crate::error::{Error, Result};
use crate::kg::KnowledgeGraph;

/// Default lower clip applied to functionality weights.
pub const DEFAULT_WEIGHT_FLOOR: f64 = 0.3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RelationStat {
    pub triple_count: usize,
    pub distinct_heads: usize,
    pub distinct_tails: usize,
}

impl RelationStat {
    pub fn fun(&self) -> f64 {
        self.distinct_heads as f64 / self.triple_count as f64
    }

    pub fn ifun(&self) -> f64 {
        self.distinct_tails as f64 / self.triple_count as f64
    }
}

/// Per-relation counts; relations without triples have no entry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationStats {
    stats: Vec<Option<RelationStat>>,
}

impl RelationStats {
    pub fn get(&self, relation: usize) -> Option<&RelationStat> {
        self.stats.get(relation).and_then(Option::as_ref)
    }

    /// Relations that occur in at least one triple.
    pub fn iter(&self) -> impl Iterator<Item = (usize, &RelationStat)> {
        self.stats
            .iter()
            .enumerate()
            .filter_map(|(r, s)| s.as_ref().map(|s| (r, s)))
    }

    pub fn len(&self) -> usize {
        self.iter().count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

pub fn relation_stats(kg: &KnowledgeGraph) -> RelationStats {
    let nr = kg.num_relations();
    let mut counts = vec![0usize; nr];
    let mut heads: Vec<HashSet<usize>> = vec![HashSet::new(); nr];
    let mut tails: Vec<HashSet<usize>> = vec![HashSet::new(); nr];
    for t in kg.relation_triples() {
        counts[t.relation] += 1;
        heads[t.relation].insert(t.head);
        tails[t.relation].insert(t.tail);
    }
    let stats = (0..nr)
        .map(|r| {
            (counts[r] > 0).then(|| RelationStat {
                triple_count: counts[r],
                distinct_heads: heads[r].len(),
                distinct_tails: tails[r].len(),
            })
        })
        .collect();
    RelationStats { stats }
}

/// `|E| x |E|` weighted adjacency `P`. Duplicate and parallel triples
/// accumulate; `P` need not be symmetric.
pub fn build_adjacency(
    kg: &KnowledgeGraph,
    stats: &RelationStats,
    weight_floor: f64,
) -> Result<SparseMatrix> {
    let n = kg.num_entities();
    let mut entries = Vec::with_capacity(2 * kg.relation_triples().len());
    for t in kg.relation_triples() {
        let s = stats.get(t.relation).ok_or_else(|| {
            Error::Dimension(format!("no statistics for relation {}", t.relation))
        })?;
        entries.push((t.head, t.tail, s.ifun().max(weight_floor)));
        entries.push((t.tail, t.head, s.fun().max(weight_floor)));
    }
    SparseMatrix::from_triplets(n, n, entries)
}

/// The GCN propagation operator `Q^-1/2 (P + I) Q^-1/2`, where `P + I` is
/// first symmetrized by elementwise max with its transpose and `Q` holds its
/// row sums.
///
/// Entries are computed as `p_ij / (sqrt(q_i) * sqrt(q_j))`, so the result is
/// exactly symmetric.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedAdjacency {
    matrix: SparseMatrix,
    degrees: Vec<f64>,
}

impl NormalizedAdjacency {
    pub fn matrix(&self) -> &SparseMatrix {
        &self.matrix
    }

    /// Row sums `Q` of the symmetrized `P + I`.
    pub fn degrees(&self) -> &[f64] {
        &self.degrees
    }

    pub fn size(&self) -> usize {
        self.matrix.rows()
    }

    pub fn into_inner(self) -> SparseMatrix {
        self.matrix
    }
}

impl std::ops::Deref for NormalizedAdjacency {
    type Target = SparseMatrix;

    fn deref(&self) -> &SparseMatrix {
        &self.matrix
    }
}

/// `P + I` symmetrized by elementwise max.
pub fn self_looped_symmetric(p: &SparseMatrix) -> Result<SparseMatrix> {
    if p.rows() != p.cols() {
        return Err(Error::Dimension(format!(
            "adjacency must be square, got {:?}",
            p.shape()
        )));
    }
    let n = p.rows();
    let mut has_diag = vec![false; n];
    let mut entries = Vec::with_capacity(2 * p.nnz() + n);
    for (r, c, v) in p.iter() {
        if !v.is_finite() {
            return Err(Error::NonFinite(format!("adjacency entry ({r}, {c})")));
        }
        if v < 0.0 {
            return Err(Error::NegativeEntry {
                row: r,
                col: c,
                value: v,
            });
        }
        if r == c {
            has_diag[r] = true;
            entries.push((r, r, v + 1.0));
        } else {
            entries.push((r, c, v));
            entries.push((c, r, v));
        }
    }
    for (i, _) in has_diag.iter().enumerate().filter(|(_, d)| !**d) {
        entries.push((i, i, 1.0));
    }
    SparseMatrix::from_triplets_with(n, n, entries, f64::max)
}

pub fn normalize(p: &SparseMatrix) -> Result<NormalizedAdjacency> {
    let hat = self_looped_symmetric(p)?;
    let degrees = hat.row_sums();
    if let Some(i) = degrees.iter().position(|&q| q <= 0.0) {
        return Err(Error::Dimension(format!("zero degree at row {i} after self-loops")));
    }
    let entries = hat
        .iter()
        .map(|(r, c, v)| (r, c, v / (degrees[r] * degrees[c]).sqrt()));
    let matrix = SparseMatrix::from_triplets(hat.rows(), hat.cols(), entries)?;
    Ok(NormalizedAdjacency { matrix, degrees })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kg::RelationTriple;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn kg(n: usize, triples: &[(usize, usize, usize)], nr: usize) -> KnowledgeGraph {
        KnowledgeGraph::new(
            (0..n).map(|i| format!("e{i}")).collect(),
            (0..nr).map(|i| format!("r{i}")).collect(),
            vec![],
            triples
                .iter()
                .map(|&(h, r, t)| RelationTriple::new(h, r, t))
                .collect(),
            vec![],
        )
        .unwrap()
    }

    #[test]
    fn functionality_hand_counts() {
        // r0: (a,b),(a,c): one head, two tails; r1: (a,b),(c,b); r2 single.
        let g = kg(3, &[(0, 0, 1), (0, 0, 2), (0, 1, 1), (2, 1, 1), (1, 2, 2)], 4);
        let s = relation_stats(&g);
        let r0 = s.get(0).unwrap();
        assert_eq!((r0.fun(), r0.ifun()), (0.5, 1.0));
        let r1 = s.get(1).unwrap();
        assert_eq!((r1.fun(), r1.ifun()), (1.0, 0.5));
        let r2 = s.get(2).unwrap();
        assert_eq!((r2.fun(), r2.ifun()), (1.0, 1.0));
        assert!(s.get(3).is_none());
        assert_eq!(s.len(), 3);
    }

    #[test]
    fn single_triple_adjacency() {
        let g = kg(3, &[(0, 0, 1)], 1);
        let p = build_adjacency(&g, &relation_stats(&g), 0.0).unwrap();
        assert_eq!(p.get(0, 1), 1.0);
        assert_eq!(p.get(1, 0), 1.0);
        assert_eq!(p.nnz(), 2);
    }

    #[test]
    fn empty_and_duplicate_triples() {
        let g = kg(2, &[], 1);
        let p = build_adjacency(&g, &relation_stats(&g), 0.3).unwrap();
        assert_eq!(p.nnz(), 0);

        let g = kg(2, &[(0, 0, 1), (0, 0, 1)], 1);
        let s = relation_stats(&g);
        let ifun = s.get(0).unwrap().ifun();
        assert_eq!(ifun, 0.5);
        let p = build_adjacency(&g, &s, 0.0).unwrap();
        assert_eq!(p.get(0, 1), 2.0 * ifun);
    }

    #[test]
    fn weight_floor_clips_low_functionality() {
        // One head fanning out to four tails: fun = 0.25.
        let g = kg(5, &[(0, 0, 1), (0, 0, 2), (0, 0, 3), (0, 0, 4)], 1);
        let s = relation_stats(&g);
        assert_eq!(s.get(0).unwrap().fun(), 0.25);
        let p = build_adjacency(&g, &s, 0.3).unwrap();
        assert_eq!(p.get(1, 0), 0.3);
        assert_eq!(p.get(0, 1), 1.0);
    }

    #[test]
    fn normalize_hand_examples() {
        let one = normalize(&SparseMatrix::zeros(1, 1)).unwrap();
        assert_eq!(one.get(0, 0), 1.0);

        let p = SparseMatrix::from_triplets(2, 2, vec![(0, 1, 1.0), (1, 0, 1.0)]).unwrap();
        let a = normalize(&p).unwrap();
        for r in 0..2 {
            for c in 0..2 {
                assert_eq!(a.get(r, c), 0.5);
            }
        }
        assert_eq!(a.degrees(), &[2.0, 2.0]);
    }

    #[test]
    fn isolated_node_keeps_unit_self_loop() {
        let p = SparseMatrix::from_triplets(3, 3, vec![(0, 1, 2.0), (1, 0, 2.0)]).unwrap();
        let a = normalize(&p).unwrap();
        assert_eq!(a.get(2, 2), 1.0);
        assert_eq!(a.row_nnz(2), 1);
    }

    #[test]
    fn rejects_negative_and_non_square() {
        let p = SparseMatrix::from_triplets(2, 2, vec![(0, 1, -1.0)]).unwrap();
        assert!(matches!(normalize(&p), Err(Error::NegativeEntry { .. })));
        assert!(normalize(&SparseMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn asymmetric_input_uses_stronger_direction() {
        let p = SparseMatrix::from_triplets(2, 2, vec![(0, 1, 3.0), (1, 0, 1.0)]).unwrap();
        let hat = self_looped_symmetric(&p).unwrap();
        assert_eq!(hat.get(0, 1), 3.0);
        assert_eq!(hat.get(1, 0), 3.0);
        assert_eq!(hat.get(0, 0), 1.0);
    }

    proptest::proptest! {
        #[test]
        fn row_scaling_identity(seed in 0u64..200) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = rng.gen_range(1..9);
            let mut e = Vec::new();
            for r in 0..n {
                for c in 0..n {
                    if rng.gen_bool(0.3) {
                        e.push((r, c, rng.gen_range(0.0..3.0)));
                    }
                }
            }
            let p = SparseMatrix::from_triplets(n, n, e).unwrap();
            let hat = self_looped_symmetric(&p).unwrap();
            let a = normalize(&p).unwrap();
            proptest::prop_assert!(a.is_symmetric(1e-12));
            let q = a.degrees();
            for r in 0..n {
                for c in 0..n {
                    let lhs = a.get(r, c) * q[r].sqrt();
                    let rhs = hat.get(r, c) / q[c].sqrt();
                    proptest::prop_assert!((lhs - rhs).abs() <= 1e-12);
                }
                proptest::prop_assert!(a.get(r, r) > 0.0);
            }
        }
    }
}
