//! Reference implementations shared by the integration and acceptance tests.
//! Everything here is written the slow, obvious way.

#![allow(dead_code)]

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use subgcn::gcn::{
    init_channel, ChannelInput, ChannelKind, GcnChannel, GcnChannelConfig, InitialInput,
};
use subgcn::kg::{KnowledgeGraph, RelationTriple};
use subgcn::matrix::{
    build_adjacency, normalize, relation_stats, DenseMatrix, NormalizedAdjacency, SparseMatrix,
};
use subgcn::sgn::{build_sgn1, build_skeleton, subgraph_features};
use subgcn::train::{margin_loss, NegativeBatch};

pub type Edges = BTreeSet<(usize, usize)>;
pub type LineGraph = (Edges, BTreeSet<((usize, usize), (usize, usize))>);

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Erdos-Renyi style directed KG: every ordered pair (including loops) gets
/// an edge with probability `p`.
pub fn random_kg(n: usize, p: f64, relations: usize, rng: &mut ChaCha8Rng) -> KnowledgeGraph {
    let mut triples = Vec::new();
    for h in 0..n {
        for t in 0..n {
            if rng.gen_bool(p) {
                triples.push(RelationTriple::new(h, rng.gen_range(0..relations), t));
            }
        }
    }
    KnowledgeGraph::new(
        (0..n).map(|i| format!("e{i}")).collect(),
        (0..relations).map(|i| format!("r{i}")).collect(),
        Vec::new(),
        triples,
        Vec::new(),
    )
    .unwrap()
}

/// Undirected simple edges of a KG, computed from scratch.
pub fn skeleton_edges(kg: &KnowledgeGraph) -> Edges {
    kg.relation_triples()
        .iter()
        .filter(|t| t.head != t.tail)
        .map(|t| (t.head.min(t.tail), t.head.max(t.tail)))
        .collect()
}

/// Line graph by checking every pair of edges for a shared endpoint.
pub fn brute_line_graph(edges: &Edges) -> LineGraph {
    let list: Vec<_> = edges.iter().copied().collect();
    let mut links = BTreeSet::new();
    for i in 0..list.len() {
        for j in i + 1..list.len() {
            let (a, b) = (list[i], list[j]);
            if a.0 == b.0 || a.0 == b.1 || a.1 == b.0 || a.1 == b.1 {
                links.insert((a, b));
            }
        }
    }
    (edges.clone(), links)
}

/// The library's line graph expressed over endpoint pairs so it can be
/// compared with [`brute_line_graph`] independent of line numbering.
pub fn library_line_graph(kg: &KnowledgeGraph) -> LineGraph {
    let sgn = build_sgn1(&build_skeleton(kg));
    let lines = sgn.lines();
    let nodes = lines.iter().copied().collect();
    let links = sgn
        .links()
        .iter()
        .map(|&(i, j)| {
            let (a, b) = (lines[i], lines[j]);
            (a.min(b), a.max(b))
        })
        .collect();
    (nodes, links)
}

pub fn adjacency(kg: &KnowledgeGraph) -> NormalizedAdjacency {
    normalize(&build_adjacency(kg, &relation_stats(kg), 0.3).unwrap()).unwrap()
}

pub fn random_dense(rows: usize, cols: usize, scale: f64, rng: &mut ChaCha8Rng) -> DenseMatrix {
    DenseMatrix::from_fn(rows, cols, |_, _| rng.gen_range(-scale..scale))
}

/// Margin loss written as the double sum it is defined by.
pub fn loss_oracle(batch: &NegativeBatch, h: [&DenseMatrix; 2], margin: f64) -> f64 {
    let dist = |a: usize, b: usize| -> f64 {
        (0..h[0].cols()).map(|j| (h[0][(a, j)] - h[1][(b, j)]).abs()).sum()
    };
    let mut total = 0.0;
    for (i, &(e, v)) in batch.positives().iter().enumerate() {
        for (a, b) in batch.negatives_of(i) {
            total += (dist(e, v) + margin - dist(a, b)).max(0.0);
        }
    }
    total
}

/// Which tensor a finite-difference probe perturbs.
#[derive(Debug, Clone, Copy)]
pub enum Param {
    W1,
    W2,
    Input(usize),
}

fn perturbed(ch: &GcnChannel, which: Param, idx: (usize, usize), delta: f64) -> GcnChannel {
    let mut w1 = ch.w1().clone();
    let mut w2 = ch.w2().clone();
    let mut inputs = [ch.input(0).clone(), ch.input(1).clone()];
    match which {
        Param::W1 => w1[idx] += delta,
        Param::W2 => w2[idx] += delta,
        Param::Input(side) => match &mut inputs[side] {
            ChannelInput::Dense(x) => x[idx] += delta,
            ChannelInput::Sparse { .. } => panic!("fixed inputs are not parameters"),
        },
    }
    GcnChannel::from_parts(ch.config().clone(), ch.seed(), w1, w2, inputs).unwrap()
}

pub fn rel_err(analytic: f64, numeric: f64) -> f64 {
    let scale = analytic.abs().max(numeric.abs());
    if scale < 1e-8 {
        (analytic - numeric).abs()
    } else {
        (analytic - numeric).abs() / scale
    }
}

/// A small two-graph instance for one channel kind: 12 entities per graph,
/// every dimension at most 6.
pub struct GradInstance {
    pub channel: GcnChannel,
    pub adj: [NormalizedAdjacency; 2],
    pub batch: NegativeBatch,
    pub margin: f64,
}

pub fn grad_instance(kind: ChannelKind, seed: u64) -> GradInstance {
    let mut r = rng(seed);
    let n = 12;
    let sparse_kg = |r: &mut ChaCha8Rng| random_kg(n, 0.08, 3, r);
    let kgs = [sparse_kg(&mut r), sparse_kg(&mut r)];
    let adj = [adjacency(&kgs[0]), adjacency(&kgs[1])];
    let (config, inputs) = match kind {
        ChannelKind::Structure => (
            GcnChannelConfig::structure(5),
            [InitialInput::Random { entities: n }, InitialInput::Random { entities: n }],
        ),
        ChannelKind::Attribute => {
            let feat = |r: &mut ChaCha8Rng| {
                let t: Vec<_> = (0..n)
                    .flat_map(|e| (0..6).map(move |a| (e, a)))
                    .filter(|_| r.gen_bool(0.4))
                    .map(|(e, a)| (e, a, 1.0))
                    .collect();
                SparseMatrix::from_triplets(n, 6, t).unwrap()
            };
            (
                GcnChannelConfig::attribute(6, 4),
                [InitialInput::Features(feat(&mut r)), InitialInput::Features(feat(&mut r))],
            )
        }
        ChannelKind::Subgraph => {
            // At most six lines per graph keeps the input width within 6.
            let small = |r: &mut ChaCha8Rng| loop {
                let kg = random_kg(n, 0.03, 2, r);
                let sgn = build_sgn1(&build_skeleton(&kg));
                if (3..=6).contains(&sgn.num_lines()) {
                    let f = subgraph_features(&kg, &sgn).unwrap();
                    return (kg, f);
                }
            };
            let (k1, f1) = small(&mut r);
            let (k2, f2) = small(&mut r);
            let adj = [adjacency(&k1), adjacency(&k2)];
            let config = GcnChannelConfig::subgraph(f1.cols(), f2.cols(), 4);
            let channel = init_channel(
                config,
                [InitialInput::Features(f1), InitialInput::Features(f2)],
                seed,
            )
            .unwrap();
            return finish(channel, adj, &mut r);
        }
    };
    let channel = init_channel(config, inputs, seed).unwrap();
    finish(channel, adj, &mut r)
}

fn finish(
    mut channel: GcnChannel,
    adj: [NormalizedAdjacency; 2],
    r: &mut ChaCha8Rng,
) -> GradInstance {
    // Larger weights than Glorot so that hinge terms are a mix of active and
    // inactive with a margin of 1.
    let w1 = random_dense(channel.w1().rows(), channel.w1().cols(), 1.0, r);
    let w2 = random_dense(channel.w2().rows(), channel.w2().cols(), 1.0, r);
    let inputs = [channel.input(0).clone(), channel.input(1).clone()];
    channel = GcnChannel::from_parts(channel.config().clone(), channel.seed(), w1, w2, inputs).unwrap();
    let positives: Vec<(usize, usize)> = (0..4).map(|i| (i, i)).collect();
    let batch = subgcn::train::sample_negatives(&positives, 12, 12, 3, r).unwrap();
    GradInstance {
        channel,
        adj,
        batch,
        margin: 1.0,
    }
}

impl GradInstance {
    fn loss_of(&self, ch: &GcnChannel) -> f64 {
        let out = ch.embed([&self.adj[0], &self.adj[1]]).unwrap();
        margin_loss(&self.batch, [&out[0], &out[1]], self.margin).unwrap().value
    }

    /// Largest relative error between analytic and central-difference
    /// gradients over every trainable entry, plus the embedding gradient
    /// returned by the loss itself.
    pub fn max_relative_error(&self, step: f64) -> f64 {
        let adj = [&self.adj[0], &self.adj[1]];
        let mut ch = self.channel.clone();
        let out = ch.forward(adj).unwrap();
        let loss = margin_loss(&self.batch, [&out[0], &out[1]], self.margin).unwrap();
        assert!(loss.active_terms > 0, "instance has no active hinge");
        let grads = ch.backward(adj, [&loss.grads[0], &loss.grads[1]]).unwrap();

        let mut worst: f64 = 0.0;
        let mut probe = |which: Param, analytic: &DenseMatrix| {
            for r in 0..analytic.rows() {
                for c in 0..analytic.cols() {
                    let plus = self.loss_of(&perturbed(&self.channel, which, (r, c), step));
                    let minus = self.loss_of(&perturbed(&self.channel, which, (r, c), -step));
                    let numeric = (plus - minus) / (2.0 * step);
                    worst = worst.max(rel_err(analytic[(r, c)], numeric));
                }
            }
        };
        probe(Param::W1, &grads.w1);
        probe(Param::W2, &grads.w2);
        for side in 0..2 {
            if let Some(g) = &grads.inputs[side] {
                probe(Param::Input(side), g);
            }
        }

        // dL/dH from the loss against differences on the embeddings.
        for side in 0..2 {
            for r in 0..out[side].rows() {
                for c in 0..out[side].cols() {
                    let f = |d: f64| {
                        let mut h = [out[0].clone(), out[1].clone()];
                        h[side][(r, c)] += d;
                        margin_loss(&self.batch, [&h[0], &h[1]], self.margin).unwrap().value
                    };
                    let numeric = (f(step) - f(-step)) / (2.0 * step);
                    worst = worst.max(rel_err(loss.grads[side][(r, c)], numeric));
                }
            }
        }
        worst
    }
}

/// Exhaustive ranking oracle: the full distance table sorted by (distance, id).
pub fn ranking_oracle(dist_row: &[f64]) -> Vec<usize> {
    let mut ids: Vec<usize> = (0..dist_row.len()).collect();
    ids.sort_by(|&a, &b| dist_row[a].partial_cmp(&dist_row[b]).unwrap().then(a.cmp(&b)));
    ids
}
