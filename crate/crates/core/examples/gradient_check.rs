//! Compares backpropagated gradients of a structure channel with central
//! finite differences of the margin loss.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use subgcn::gcn::{init_channel, GcnChannel, GcnChannelConfig, InitialInput};
use subgcn::kg::KnowledgeGraph;
use subgcn::matrix::{build_adjacency, normalize, relation_stats, NormalizedAdjacency};
use subgcn::train::{margin_loss, sample_negatives, NegativeBatch};

fn loss(ch: &GcnChannel, adj: [&NormalizedAdjacency; 2], batch: &NegativeBatch) -> f64 {
    let h = ch.embed(adj).unwrap();
    margin_loss(batch, [&h[0], &h[1]], 1.0).unwrap().value
}

fn main() -> subgcn::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut graph = || {
        let edges: Vec<_> = (0..20).map(|_| (rng.gen_range(0..12), rng.gen_range(0..12))).collect();
        let kg = KnowledgeGraph::from_edges(12, &edges).unwrap();
        normalize(&build_adjacency(&kg, &relation_stats(&kg), 0.3).unwrap()).unwrap()
    };
    let (a1, a2) = (graph(), graph());
    let adj = [&a1, &a2];

    let random = InitialInput::Random { entities: 12 };
    let mut ch = init_channel(GcnChannelConfig::structure(4), [random.clone(), random], 3)?;
    let pos: Vec<_> = (0..4).map(|i| (i, i)).collect();
    let batch = sample_negatives(&pos, 12, 12, 3, &mut rng)?;

    let h = ch.forward(adj)?;
    let out = margin_loss(&batch, [&h[0], &h[1]], 1.0)?;
    let grads = ch.backward(adj, [&out.grads[0], &out.grads[1]])?;
    println!("loss {:.6}, {} active hinge terms", out.value, out.active_terms);

    let step = 1e-5;
    let mut worst: f64 = 0.0;
    for r in 0..4 {
        for c in 0..4 {
            let shifted = |d: f64| {
                let mut w1 = ch.w1().clone();
                w1[(r, c)] += d;
                GcnChannel::from_parts(
                    ch.config().clone(),
                    ch.seed(),
                    w1,
                    ch.w2().clone(),
                    [ch.input(0).clone(), ch.input(1).clone()],
                )
                .unwrap()
            };
            let numeric = (loss(&shifted(step), adj, &batch) - loss(&shifted(-step), adj, &batch)) / (2.0 * step);
            let analytic = grads.w1[(r, c)];
            let rel = (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-12);
            worst = worst.max(rel);
        }
    }
    println!("W1: max relative error {worst:.2e}");
    Ok(())
}
