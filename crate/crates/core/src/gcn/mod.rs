//! Two-layer GCN embedding channels with hand-derived gradients.
//!
//! Each channel maps the entity features `X` of both graphs through the same
//! pair of weight matrices:
//!
//! ```text
//! Z1 = A (X W1)     H1 = relu(Z1)
//! Z2 = A (H1 W2)    H2 = act(Z2)      act = identity by default
//! ```
//!
//! where `A` is the normalized adjacency of the respective graph. The
//! structure channel learns `X` itself; the attribute and subgraph channels
//! use fixed multi-hot inputs.

mod checkpoint;
mod embeddings;

pub use checkpoint::{load_checkpoint, save_checkpoint, CheckpointManifest};
pub use embeddings::EmbeddingSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{DenseMatrix, NormalizedAdjacency, SparseMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelKind {
    Structure,
    Attribute,
    Subgraph,
}

impl ChannelKind {
    pub const ALL: [ChannelKind; 3] = [Self::Structure, Self::Attribute, Self::Subgraph];

    pub fn name(self) -> &'static str {
        match self {
            Self::Structure => "structure",
            Self::Attribute => "attribute",
            Self::Subgraph => "subgraph",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }

    /// Stream id used to derive per-channel random streams from one seed.
    pub fn stream(self) -> u64 {
        match self {
            Self::Structure => 1,
            Self::Attribute => 2,
            Self::Subgraph => 3,
        }
    }
}

impl std::fmt::Display for ChannelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Identity,
}

impl Activation {
    fn apply(self, z: &DenseMatrix) -> DenseMatrix {
        match self {
            Self::Relu => z.map(|x| x.max(0.0)),
            Self::Identity => z.clone(),
        }
    }

    /// Multiplies `grad` by the derivative at `z` (relu'(0) = 0).
    fn backprop(self, z: &DenseMatrix, grad: &DenseMatrix) -> Result<DenseMatrix> {
        match self {
            Self::Relu => grad.hadamard(&z.map(|x| if x > 0.0 { 1.0 } else { 0.0 })),
            Self::Identity => Ok(grad.clone()),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Relu => "relu",
            Self::Identity => "identity",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GcnChannelConfig {
    pub kind: ChannelKind,
    pub input_dim: usize,
    pub hidden_dim: usize,
    pub output_dim: usize,
    pub hidden_activation: Activation,
    pub output_activation: Activation,
}

impl GcnChannelConfig {
    /// Structure channel: all three dimensions equal `d_s`.
    pub fn structure(d_s: usize) -> Self {
        Self {
            kind: ChannelKind::Structure,
            input_dim: d_s,
            hidden_dim: d_s,
            output_dim: d_s,
            hidden_activation: Activation::Relu,
            output_activation: Activation::Identity,
        }
    }

    pub fn attribute(vocab_size: usize, d_a: usize) -> Self {
        Self {
            kind: ChannelKind::Attribute,
            input_dim: vocab_size,
            hidden_dim: d_a,
            output_dim: d_a,
            hidden_activation: Activation::Relu,
            output_activation: Activation::Identity,
        }
    }

    /// Subgraph channel over the larger of the two line counts.
    pub fn subgraph(lines1: usize, lines2: usize, d_sgn: usize) -> Self {
        Self {
            kind: ChannelKind::Subgraph,
            input_dim: lines1.max(lines2),
            hidden_dim: d_sgn,
            output_dim: d_sgn,
            hidden_activation: Activation::Relu,
            output_activation: Activation::Identity,
        }
    }

    pub fn with_output_activation(mut self, act: Activation) -> Self {
        self.output_activation = act;
        self
    }

    pub fn input_trainable(&self) -> bool {
        self.kind == ChannelKind::Structure
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 || self.hidden_dim == 0 || self.output_dim == 0 {
            return Err(Error::Config(format!(
                "{} channel dimensions must be positive",
                self.kind
            )));
        }
        if self.kind == ChannelKind::Structure
            && !(self.input_dim == self.hidden_dim && self.hidden_dim == self.output_dim)
        {
            return Err(Error::Config(
                "structure channel needs input_dim = hidden_dim = output_dim".into(),
            ));
        }
        Ok(())
    }
}

/// Per-graph input features of a channel.
#[derive(Debug, Clone, PartialEq)]
pub enum ChannelInput {
    /// Trainable dense features.
    Dense(DenseMatrix),
    /// Fixed sparse features, kept with their transpose for the backward pass.
    Sparse {
        matrix: SparseMatrix,
        transpose: SparseMatrix,
    },
}

impl ChannelInput {
    pub fn sparse(matrix: SparseMatrix) -> Self {
        let transpose = matrix.transpose();
        Self::Sparse { matrix, transpose }
    }

    pub fn rows(&self) -> usize {
        match self {
            Self::Dense(m) => m.rows(),
            Self::Sparse { matrix, .. } => matrix.rows(),
        }
    }

    pub fn cols(&self) -> usize {
        match self {
            Self::Dense(m) => m.cols(),
            Self::Sparse { matrix, .. } => matrix.cols(),
        }
    }

    fn times(&self, w: &DenseMatrix) -> Result<DenseMatrix> {
        match self {
            Self::Dense(m) => m.matmul(w),
            Self::Sparse { matrix, .. } => matrix.spmm(w),
        }
    }

    fn transpose_times(&self, g: &DenseMatrix) -> Result<DenseMatrix> {
        match self {
            Self::Dense(m) => m.t_matmul(g),
            Self::Sparse { transpose, .. } => transpose.spmm(g),
        }
    }

    pub fn as_dense(&self) -> Option<&DenseMatrix> {
        match self {
            Self::Dense(m) => Some(m),
            Self::Sparse { .. } => None,
        }
    }
}

/// What a channel is initialised from, per graph.
#[derive(Debug, Clone)]
pub enum InitialInput {
    /// Random trainable features for this many entities (structure channel).
    Random { entities: usize },
    /// Fixed features; padded with zero columns up to the input dimension.
    Features(SparseMatrix),
}

#[derive(Debug, Clone, PartialEq)]
struct ForwardCache {
    pre_hidden: DenseMatrix,
    hidden: DenseMatrix,
    pre_output: DenseMatrix,
}

/// Gradients of a scalar loss with respect to every trainable tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelGradients {
    pub w1: DenseMatrix,
    pub w2: DenseMatrix,
    /// Present for trainable inputs only.
    pub inputs: [Option<DenseMatrix>; 2],
}

impl ChannelGradients {
    pub fn max_abs(&self) -> f64 {
        let mut m = self.w1.max_abs().max(self.w2.max_abs());
        for g in self.inputs.iter().flatten() {
            m = m.max(g.max_abs());
        }
        m
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GcnChannel {
    config: GcnChannelConfig,
    seed: u64,
    pub(crate) w1: DenseMatrix,
    pub(crate) w2: DenseMatrix,
    pub(crate) inputs: [ChannelInput; 2],
    cache: [Option<ForwardCache>; 2],
}

fn glorot(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> DenseMatrix {
    let bound = (6.0 / (rows + cols) as f64).sqrt();
    DenseMatrix::from_fn(rows, cols, |_, _| rng.gen_range(-bound..bound))
}

/// Initialises a channel deterministically from `seed`.
///
/// Weights are drawn uniformly in `±sqrt(6 / (fan_in + fan_out))`; random
/// structure features uniformly in `±1/sqrt(d_s)`.
pub fn init_channel(
    config: GcnChannelConfig,
    inputs: [InitialInput; 2],
    seed: u64,
) -> Result<GcnChannel> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(config.kind.stream());
    let w1 = glorot(config.input_dim, config.hidden_dim, &mut rng);
    let w2 = glorot(config.hidden_dim, config.output_dim, &mut rng);

    let [a, b] = inputs;
    let mut build = |input: InitialInput| -> Result<ChannelInput> {
        match (input, config.input_trainable()) {
            (InitialInput::Random { entities }, true) => {
                let bound = 1.0 / (config.input_dim as f64).sqrt();
                Ok(ChannelInput::Dense(DenseMatrix::from_fn(
                    entities,
                    config.input_dim,
                    |_, _| rng.gen_range(-bound..bound),
                )))
            }
            (InitialInput::Features(m), false) => {
                if m.cols() > config.input_dim {
                    return Err(Error::Dimension(format!(
                        "{} features have {} columns, more than input_dim {}",
                        config.kind,
                        m.cols(),
                        config.input_dim
                    )));
                }
                Ok(ChannelInput::sparse(m.with_cols(config.input_dim)?))
            }
            (InitialInput::Random { .. }, false) => Err(Error::Config(format!(
                "{} channel needs fixed input features",
                config.kind
            ))),
            (InitialInput::Features(_), true) => Err(Error::Config(
                "structure channel learns its inputs; pass an entity count".into(),
            )),
        }
    };
    let inputs = [build(a)?, build(b)?];
    Ok(GcnChannel {
        config,
        seed,
        w1,
        w2,
        inputs,
        cache: [None, None],
    })
}

impl GcnChannel {
    /// Assembles a channel from explicit tensors (checkpoint loading, tests).
    pub fn from_parts(
        config: GcnChannelConfig,
        seed: u64,
        w1: DenseMatrix,
        w2: DenseMatrix,
        inputs: [ChannelInput; 2],
    ) -> Result<Self> {
        config.validate()?;
        if w1.shape() != (config.input_dim, config.hidden_dim)
            || w2.shape() != (config.hidden_dim, config.output_dim)
        {
            return Err(Error::Dimension(format!(
                "weights {:?}, {:?} do not fit config {}x{}x{}",
                w1.shape(),
                w2.shape(),
                config.input_dim,
                config.hidden_dim,
                config.output_dim
            )));
        }
        for input in &inputs {
            if input.cols() != config.input_dim {
                return Err(Error::Dimension(format!(
                    "input has {} columns, expected {}",
                    input.cols(),
                    config.input_dim
                )));
            }
            if matches!(input, ChannelInput::Dense(_)) != config.input_trainable() {
                return Err(Error::Config(format!(
                    "{} channel input has the wrong representation",
                    config.kind
                )));
            }
        }
        Ok(Self {
            config,
            seed,
            w1,
            w2,
            inputs,
            cache: [None, None],
        })
    }

    pub fn config(&self) -> &GcnChannelConfig {
        &self.config
    }

    pub fn kind(&self) -> ChannelKind {
        self.config.kind
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn w1(&self) -> &DenseMatrix {
        &self.w1
    }

    pub fn w2(&self) -> &DenseMatrix {
        &self.w2
    }

    pub fn input(&self, side: usize) -> &ChannelInput {
        &self.inputs[side]
    }

    pub fn num_entities(&self, side: usize) -> usize {
        self.inputs[side].rows()
    }

    fn forward_one(
        &self,
        side: usize,
        adj: &NormalizedAdjacency,
    ) -> Result<(DenseMatrix, ForwardCache)> {
        let x = &self.inputs[side];
        if adj.size() != x.rows() {
            return Err(Error::Dimension(format!(
                "graph {} adjacency is {}x{} but the channel has {} entities",
                side + 1,
                adj.size(),
                adj.size(),
                x.rows()
            )));
        }
        let pre_hidden = adj.spmm(&x.times(&self.w1)?)?;
        let hidden = self.config.hidden_activation.apply(&pre_hidden);
        let pre_output = adj.spmm(&hidden.matmul(&self.w2)?)?;
        let output = self.config.output_activation.apply(&pre_output);
        if !output.is_finite() {
            return Err(Error::NonFinite(format!(
                "{} channel output for graph {}",
                self.config.kind,
                side + 1
            )));
        }
        Ok((
            output,
            ForwardCache {
                pre_hidden,
                hidden,
                pre_output,
            },
        ))
    }

    /// Forward pass for both graphs; caches activations for [`backward`](Self::backward).
    pub fn forward(&mut self, adj: [&NormalizedAdjacency; 2]) -> Result<[DenseMatrix; 2]> {
        let (out1, c1) = self.forward_one(0, adj[0])?;
        let (out2, c2) = self.forward_one(1, adj[1])?;
        self.cache = [Some(c1), Some(c2)];
        Ok([out1, out2])
    }

    /// Forward pass without touching the cache.
    pub fn embed(&self, adj: [&NormalizedAdjacency; 2]) -> Result<[DenseMatrix; 2]> {
        Ok([self.forward_one(0, adj[0])?.0, self.forward_one(1, adj[1])?.0])
    }

    pub fn clear_cache(&mut self) {
        self.cache = [None, None];
    }

    /// Reverse pass for `grad_output[side] = dL/dH2` of each graph. Both
    /// graphs accumulate into the shared weight gradients.
    pub fn backward(
        &self,
        adj: [&NormalizedAdjacency; 2],
        grad_output: [&DenseMatrix; 2],
    ) -> Result<ChannelGradients> {
        let mut w1 = DenseMatrix::zeros(self.w1.rows(), self.w1.cols());
        let mut w2 = DenseMatrix::zeros(self.w2.rows(), self.w2.cols());
        let mut inputs = [None, None];
        for side in 0..2 {
            let cache = self.cache[side].as_ref().ok_or(Error::MissingCache(side + 1))?;
            let g = grad_output[side];
            if g.shape() != cache.pre_output.shape() {
                return Err(Error::Dimension(format!(
                    "output gradient {:?} vs output {:?}",
                    g.shape(),
                    cache.pre_output.shape()
                )));
            }
            // The normalized adjacency is exactly symmetric, so A^T = A.
            let a = adj[side];
            let d_pre_out = self.config.output_activation.backprop(&cache.pre_output, g)?;
            let t2 = a.spmm(&d_pre_out)?;
            w2.axpy(1.0, &cache.hidden.t_matmul(&t2)?)?;
            let d_hidden = t2.matmul_t(&self.w2)?;
            let d_pre_hidden = self
                .config
                .hidden_activation
                .backprop(&cache.pre_hidden, &d_hidden)?;
            let t1 = a.spmm(&d_pre_hidden)?;
            w1.axpy(1.0, &self.inputs[side].transpose_times(&t1)?)?;
            if self.config.input_trainable() {
                inputs[side] = Some(t1.matmul_t(&self.w1)?);
            }
        }
        Ok(ChannelGradients { w1, w2, inputs })
    }

    /// Plain gradient step `theta -= lr * grad` on every trainable tensor.
    pub fn apply_gradients(&mut self, grads: &ChannelGradients, learning_rate: f64) -> Result<()> {
        self.w1.axpy(-learning_rate, &grads.w1)?;
        self.w2.axpy(-learning_rate, &grads.w2)?;
        for (input, g) in self.inputs.iter_mut().zip(&grads.inputs) {
            if let (ChannelInput::Dense(x), Some(g)) = (input, g) {
                x.axpy(-learning_rate, g)?;
            }
        }
        Ok(())
    }

    /// Euclidean norms of the weights and trainable inputs, for diagnostics.
    pub fn parameter_norms(&self) -> String {
        let mut s = format!(
            "|W1|={:.4e} |W2|={:.4e}",
            self.w1.frobenius_norm(),
            self.w2.frobenius_norm()
        );
        for (i, input) in self.inputs.iter().enumerate() {
            if let Some(x) = input.as_dense() {
                s.push_str(&format!(" |X{}|={:.4e}", i + 1, x.frobenius_norm()));
            }
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::normalize;

    fn path_adj(n: usize) -> NormalizedAdjacency {
        let e = (0..n - 1).flat_map(|i| [(i, i + 1, 1.0), (i + 1, i, 1.0)]);
        normalize(&SparseMatrix::from_triplets(n, n, e).unwrap()).unwrap()
    }

    fn identity_adj(n: usize) -> NormalizedAdjacency {
        normalize(&SparseMatrix::zeros(n, n)).unwrap()
    }

    #[test]
    fn init_is_deterministic_and_shaped() {
        let cfg = GcnChannelConfig::structure(4);
        let inputs = || [InitialInput::Random { entities: 10 }, InitialInput::Random { entities: 7 }];
        let a = init_channel(cfg.clone(), inputs(), 5).unwrap();
        let b = init_channel(cfg, inputs(), 5).unwrap();
        assert_eq!(a.w1().as_slice(), b.w1().as_slice());
        let x = a.input(0).as_dense().unwrap();
        assert_eq!(x.shape(), (10, 4));
        assert!(x.as_slice().iter().all(|v| v.abs() <= 0.5));
        let bound = (6.0f64 / 8.0).sqrt();
        assert!(a.w1().as_slice().iter().all(|v| v.abs() <= bound));
    }

    #[test]
    fn subgraph_inputs_are_padded() {
        let f1 = SparseMatrix::from_triplets(3, 5, vec![(0, 4, 1.0)]).unwrap();
        let f2 = SparseMatrix::from_triplets(4, 7, vec![(3, 6, 1.0)]).unwrap();
        let cfg = GcnChannelConfig::subgraph(5, 7, 3);
        assert_eq!(cfg.input_dim, 7);
        let ch = init_channel(
            cfg,
            [InitialInput::Features(f1.clone()), InitialInput::Features(f2)],
            1,
        )
        .unwrap();
        assert_eq!(ch.input(0).cols(), 7);
        assert_eq!(ch.input(1).cols(), 7);

        let small = GcnChannelConfig::subgraph(5, 5, 3);
        let too_wide = SparseMatrix::zeros(4, 7);
        let err = init_channel(
            small,
            [InitialInput::Features(f1), InitialInput::Features(too_wide)],
            1,
        );
        assert!(matches!(err, Err(Error::Dimension(_))));
    }

    #[test]
    fn zero_weights_give_zero_embeddings() {
        let cfg = GcnChannelConfig::structure(3);
        let mut ch = init_channel(
            cfg,
            [InitialInput::Random { entities: 4 }, InitialInput::Random { entities: 4 }],
            2,
        )
        .unwrap();
        ch.w1 = DenseMatrix::zeros(3, 3);
        ch.w2 = DenseMatrix::zeros(3, 3);
        let adj = path_adj(4);
        let [a, b] = ch.forward([&adj, &adj]).unwrap();
        assert!(a.as_slice().iter().chain(b.as_slice()).all(|&v| v == 0.0));
    }

    #[test]
    fn identity_path_reproduces_input() {
        let x = DenseMatrix::from_rows(&[vec![1.0, 0.5], vec![0.0, 2.0], vec![3.0, 0.25]]).unwrap();
        let cfg = GcnChannelConfig::structure(2).with_output_activation(Activation::Relu);
        let ch = GcnChannel::from_parts(
            cfg,
            0,
            DenseMatrix::identity(2),
            DenseMatrix::identity(2),
            [ChannelInput::Dense(x.clone()), ChannelInput::Dense(x.clone())],
        )
        .unwrap();
        let adj = identity_adj(3);
        let [out, _] = ch.embed([&adj, &adj]).unwrap();
        assert_eq!(out, x);
    }

    #[test]
    fn zero_upstream_gradient() {
        let cfg = GcnChannelConfig::structure(3);
        let mut ch = init_channel(
            cfg,
            [InitialInput::Random { entities: 4 }, InitialInput::Random { entities: 5 }],
            3,
        )
        .unwrap();
        let (a1, a2) = (path_adj(4), path_adj(5));
        ch.forward([&a1, &a2]).unwrap();
        let g = ch
            .backward([&a1, &a2], [&DenseMatrix::zeros(4, 3), &DenseMatrix::zeros(5, 3)])
            .unwrap();
        assert_eq!(g.max_abs(), 0.0);
    }

    #[test]
    fn backward_without_forward_fails() {
        let ch = init_channel(
            GcnChannelConfig::structure(2),
            [InitialInput::Random { entities: 2 }, InitialInput::Random { entities: 2 }],
            0,
        )
        .unwrap();
        let a = identity_adj(2);
        let g = DenseMatrix::zeros(2, 2);
        assert!(matches!(ch.backward([&a, &a], [&g, &g]), Err(Error::MissingCache(1))));
    }

    #[test]
    fn single_layer_closed_form() {
        // With W2 = I, identity activations and A = I the network is X W1,
        // so dW1 = X^T G summed over both graphs.
        let x1 = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![-1.0, 0.5]]).unwrap();
        let x2 = DenseMatrix::from_rows(&[vec![0.5, 0.0], vec![2.0, -3.0]]).unwrap();
        let mut cfg = GcnChannelConfig::structure(2);
        cfg.hidden_activation = Activation::Identity;
        let mut ch = GcnChannel::from_parts(
            cfg,
            0,
            DenseMatrix::from_rows(&[vec![0.3, -0.2], vec![0.1, 0.4]]).unwrap(),
            DenseMatrix::identity(2),
            [ChannelInput::Dense(x1.clone()), ChannelInput::Dense(x2.clone())],
        )
        .unwrap();
        let a = identity_adj(2);
        ch.forward([&a, &a]).unwrap();
        let g1 = DenseMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 2.0]]).unwrap();
        let g2 = DenseMatrix::from_rows(&[vec![-1.0, 1.0], vec![0.5, 0.5]]).unwrap();
        let grads = ch.backward([&a, &a], [&g1, &g2]).unwrap();
        let want = x1.t_matmul(&g1).unwrap().add(&x2.t_matmul(&g2).unwrap()).unwrap();
        assert_eq!(grads.w1, want);
    }

    #[test]
    fn mismatched_adjacency_rejected() {
        let mut ch = init_channel(
            GcnChannelConfig::structure(2),
            [InitialInput::Random { entities: 3 }, InitialInput::Random { entities: 3 }],
            0,
        )
        .unwrap();
        let a = identity_adj(4);
        assert!(matches!(ch.forward([&a, &a]), Err(Error::Dimension(_))));
    }
}
