mod common;

use common::{adjacency, loss_oracle, random_dense, random_kg, ranking_oracle, rng};
use proptest::prelude::*;
use rand::Rng;

use subgcn::align::{
    combined_distance, evaluate, hits_at_k, rank_candidates, AlignmentConfig, Direction,
};
use subgcn::gcn::{init_channel, ChannelKind, EmbeddingSet, GcnChannelConfig, InitialInput};
use subgcn::kg::{KnowledgeGraph, RelationTriple};
use subgcn::matrix::{DenseMatrix, SparseMatrix};
use subgcn::train::{margin_loss, sample_negatives, NegativeBatch};

fn permute_kg(kg: &KnowledgeGraph, perm: &[usize]) -> KnowledgeGraph {
    let mut labels = vec![String::new(); perm.len()];
    for (old, &new) in perm.iter().enumerate() {
        labels[new] = kg.entity_label(old).to_string();
    }
    KnowledgeGraph::new(
        labels,
        kg.relation_labels().to_vec(),
        Vec::new(),
        kg.relation_triples()
            .iter()
            .map(|t| RelationTriple::new(perm[t.head], t.relation, perm[t.tail]))
            .collect(),
        Vec::new(),
    )
    .unwrap()
}

fn shuffled(n: usize, seed: u64) -> Vec<usize> {
    use rand::seq::SliceRandom;
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(&mut rng(seed));
    p
}

#[test]
fn permuting_entities_permutes_embeddings() {
    let mut r = rng(3);
    let kg = random_kg(15, 0.15, 3, &mut r);
    let perm = shuffled(15, 9);
    let pkg = permute_kg(&kg, &perm);
    let feats = {
        let t: Vec<_> = (0..15)
            .flat_map(|e| (0..5).map(move |a| (e, a)))
            .filter(|_| r.gen_bool(0.5))
            .map(|(e, a)| (e, a, 1.0))
            .collect();
        SparseMatrix::from_triplets(15, 5, t).unwrap()
    };
    let pfeats = SparseMatrix::from_triplets(
        15,
        5,
        feats.iter().map(|(e, a, v)| (perm[e], a, v)),
    )
    .unwrap();
    let ch = init_channel(
        GcnChannelConfig::attribute(5, 4),
        [InitialInput::Features(feats), InitialInput::Features(pfeats)],
        1,
    )
    .unwrap();
    let out = ch.embed([&adjacency(&kg), &adjacency(&pkg)]).unwrap();
    for (old, &new) in perm.iter().enumerate() {
        for j in 0..4 {
            assert!((out[0][(old, j)] - out[1][(new, j)]).abs() < 1e-12);
        }
    }
}

#[test]
fn weights_are_shared_between_graphs() {
    let mut r = rng(4);
    let kg = random_kg(10, 0.2, 2, &mut r);
    let a = adjacency(&kg);
    let f = SparseMatrix::from_triplets(10, 3, (0..10).map(|e| (e, e % 3, 1.0))).unwrap();
    let ch = init_channel(
        GcnChannelConfig::attribute(3, 4),
        [InitialInput::Features(f.clone()), InitialInput::Features(f)],
        2,
    )
    .unwrap();
    let out = ch.embed([&a, &a]).unwrap();
    assert_eq!(out[0], out[1]);
}

#[test]
fn one_graph_does_not_leak_into_the_other() {
    let mut r = rng(5);
    let k1 = random_kg(10, 0.2, 2, &mut r);
    let k2 = random_kg(8, 0.2, 2, &mut r);
    let k2b = random_kg(8, 0.3, 2, &mut r);
    let make = |kg2: &KnowledgeGraph| {
        let ch = init_channel(
            GcnChannelConfig::structure(4),
            [InitialInput::Random { entities: 10 }, InitialInput::Random { entities: 8 }],
            3,
        )
        .unwrap();
        ch.embed([&adjacency(&k1), &adjacency(kg2)]).unwrap()
    };
    assert_eq!(make(&k2)[0], make(&k2b)[0]);
}

proptest! {
    #[test]
    fn loss_matches_enumeration(seed in 0u64..10_000, margin in 0.1f64..4.0) {
        let mut r = rng(seed);
        let h1 = random_dense(9, 4, 2.0, &mut r);
        let h2 = random_dense(7, 4, 2.0, &mut r);
        let pos: Vec<_> = (0..5).map(|i| (i, (i + 2) % 7)).collect();
        let batch = sample_negatives(&pos, 9, 7, 3, &mut r).unwrap();
        let out = margin_loss(&batch, [&h1, &h2], margin).unwrap();
        let oracle = loss_oracle(&batch, [&h1, &h2], margin);
        prop_assert!((out.value - oracle).abs() <= 1e-12 * oracle.abs().max(1.0));
        prop_assert_eq!(out.value == 0.0, out.active_terms == 0);
    }

    #[test]
    fn loss_zero_when_negatives_far(seed in 0u64..10_000) {
        let mut r = rng(seed);
        // Positives coincide, every other entity sits 10 units away per axis.
        let h1 = DenseMatrix::from_fn(6, 2, |i, _| i as f64 * 10.0);
        let h2 = h1.clone();
        let pos: Vec<_> = (0..6).map(|i| (i, i)).collect();
        let batch = sample_negatives(&pos, 6, 6, 2, &mut r).unwrap();
        let out = margin_loss(&batch, [&h1, &h2], 3.0).unwrap();
        prop_assert_eq!(out.value, 0.0);
        prop_assert_eq!(out.grads[0].max_abs(), 0.0);
    }

    #[test]
    fn distance_is_a_metric(seed in 0u64..10_000) {
        let mut r = rng(seed);
        let m = |r: &mut rand_chacha::ChaCha8Rng, d| random_dense(6, d, 1.0, r);
        let (s, a, g) = (m(&mut r, 5), m(&mut r, 3), m(&mut r, 4));
        let set = EmbeddingSet::new()
            .with(ChannelKind::Structure, [s.clone(), s]).unwrap()
            .with(ChannelKind::Attribute, [a.clone(), a]).unwrap()
            .with(ChannelKind::Subgraph, [g.clone(), g]).unwrap();
        let cfg = AlignmentConfig::default();
        let d = |x, y| combined_distance(x, y, &set, &cfg).unwrap();
        for x in 0..6 {
            prop_assert_eq!(d(x, x), 0.0);
            for y in 0..6 {
                prop_assert_eq!(d(x, y), d(y, x));
                for z in 0..6 {
                    prop_assert!(d(x, z) <= d(x, y) + d(y, z) + 1e-12);
                }
            }
        }
    }

    #[test]
    fn scaling_preserves_rankings(seed in 0u64..10_000, factor in 0.1f64..10.0) {
        let mut r = rng(seed);
        let pair = |r: &mut rand_chacha::ChaCha8Rng, d| [random_dense(8, d, 1.0, r), random_dense(9, d, 1.0, r)];
        let set = EmbeddingSet::new()
            .with(ChannelKind::Structure, pair(&mut r, 4)).unwrap()
            .with(ChannelKind::Attribute, pair(&mut r, 3)).unwrap()
            .with(ChannelKind::Subgraph, pair(&mut r, 2)).unwrap();
        let scaled = set.scaled(factor);
        let cfg = AlignmentConfig::default();
        for dir in Direction::BOTH {
            let n = if dir == Direction::Forward { 8 } else { 9 };
            for e in 0..n {
                let ids = |s: &EmbeddingSet| -> Vec<usize> {
                    rank_candidates(e, dir, s, &cfg).unwrap().into_iter().map(|c| c.0).collect()
                };
                prop_assert_eq!(ids(&set), ids(&scaled));
            }
        }
    }
}

#[test]
fn ranking_matches_exhaustive_sort() {
    for seed in 0..50 {
        let mut r = rng(seed);
        // Small integer coordinates make exact ties common.
        let m = |r: &mut rand_chacha::ChaCha8Rng| {
            DenseMatrix::from_fn(10, 2, |_, _| r.gen_range(0..3) as f64)
        };
        let set = EmbeddingSet::new()
            .with(ChannelKind::Structure, [m(&mut r), m(&mut r)])
            .unwrap();
        let cfg = AlignmentConfig::with_weights(1.0, 0.0, 0.0);
        for e in 0..10 {
            let table: Vec<f64> = (0..10)
                .map(|c| combined_distance(e, c, &set, &cfg).unwrap())
                .collect();
            let got: Vec<usize> = rank_candidates(e, Direction::Forward, &set, &cfg)
                .unwrap()
                .into_iter()
                .map(|c| c.0)
                .collect();
            assert_eq!(got, ranking_oracle(&table), "seed {seed} entity {e}");
        }
    }
}

#[test]
fn channel_isolation_with_zero_weights() {
    let mut r = rng(11);
    let pair = |r: &mut rand_chacha::ChaCha8Rng, d| [random_dense(12, d, 1.0, r), random_dense(12, d, 1.0, r)];
    let s = pair(&mut r, 4);
    let full = EmbeddingSet::new()
        .with(ChannelKind::Structure, s.clone()).unwrap()
        .with(ChannelKind::Attribute, pair(&mut r, 3)).unwrap()
        .with(ChannelKind::Subgraph, pair(&mut r, 3)).unwrap();
    let only = EmbeddingSet::new().with(ChannelKind::Structure, s).unwrap();
    let cfg = AlignmentConfig::with_weights(1.0, 0.0, 0.0);
    let test: Vec<_> = (0..12).map(|i| (i, (i * 5) % 12)).collect();
    assert_eq!(evaluate(&test, &full, &cfg).unwrap(), evaluate(&test, &only, &cfg).unwrap());
}

#[test]
fn hits_monotone_and_saturate() {
    let mut r = rng(12);
    let set = EmbeddingSet::new()
        .with(ChannelKind::Structure, [random_dense(20, 3, 1.0, &mut r), random_dense(25, 3, 1.0, &mut r)])
        .unwrap();
    let cfg = AlignmentConfig {
        hits_levels: (1..=25).collect(),
        ..AlignmentConfig::with_weights(1.0, 0.0, 0.0)
    };
    let test: Vec<_> = (0..20).map(|i| (i, i)).collect();
    let res = evaluate(&test, &set, &cfg).unwrap();
    for d in &res.directions {
        let n = if d.direction == Direction::Forward { 25 } else { 20 };
        assert!(d.hits.windows(2).all(|w| w[0].1 <= w[1].1));
        assert_eq!(d.hits_at(n), Some(100.0));
    }
    assert_eq!(hits_at_k(&[1, 3], 1), 50.0);
}

#[test]
fn explicit_negative_batch() {
    let h = DenseMatrix::from_rows(&[vec![0.0], vec![1.0]]).unwrap();
    let b = NegativeBatch::from_parts(vec![(0, 0)], vec![vec![1]], vec![vec![1]]).unwrap();
    // pos 0, negatives 1 and 1, margin 2: two terms of 1.
    assert_eq!(margin_loss(&b, [&h, &h], 2.0).unwrap().value, 2.0);
}
