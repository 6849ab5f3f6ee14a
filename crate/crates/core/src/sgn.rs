//! First-order subgraph networks.
//!
//! The skeleton of a KG is its undirected simple graph: relation labels and
//! directions are erased, duplicate edges merged and self-loops dropped.
//! Each skeleton edge ("line") becomes a node of the subgraph network, and
//! two lines are linked when they share an endpoint, which makes the
//! first-order network the line graph of the skeleton. An entity's
//! subgraph feature row marks every line it belongs to.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kg::KnowledgeGraph;
use crate::matrix::SparseMatrix;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Skeleton {
    num_nodes: usize,
    edges: Vec<(usize, usize)>,
}

impl Skeleton {
    /// Normalizes arbitrary node pairs into a skeleton.
    pub fn from_pairs(num_nodes: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut edges: Vec<(usize, usize)> = pairs
            .into_iter()
            .filter(|(a, b)| a != b)
            .map(|(a, b)| (a.min(b), a.max(b)))
            .collect();
        edges.sort_unstable();
        edges.dedup();
        Self { num_nodes, edges }
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    /// Edges `(u, v)` with `u < v`, sorted lexicographically.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.num_nodes];
        for &(u, v) in &self.edges {
            d[u] += 1;
            d[v] += 1;
        }
        d
    }
}

pub fn build_skeleton(kg: &KnowledgeGraph) -> Skeleton {
    let loops = kg
        .relation_triples()
        .iter()
        .filter(|t| t.head == t.tail)
        .count();
    if loops > 0 {
        log::info!("skeleton: dropped {loops} self-loop triples");
    }
    Skeleton::from_pairs(
        kg.num_entities(),
        kg.relation_triples().iter().map(|t| (t.head, t.tail)),
    )
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubgraphNetwork {
    num_entities: usize,
    lines: Vec<(usize, usize)>,
    links: Vec<(usize, usize)>,
}

impl SubgraphNetwork {
    /// Entity count of the graph the network was built from.
    pub fn num_entities(&self) -> usize {
        self.num_entities
    }

    /// `lines[i]` is the skeleton edge represented by network node `i`.
    pub fn lines(&self) -> &[(usize, usize)] {
        &self.lines
    }

    /// Links `(i, j)` with `i < j`, sorted. Symmetry is implied.
    pub fn links(&self) -> &[(usize, usize)] {
        &self.links
    }

    pub fn num_lines(&self) -> usize {
        self.lines.len()
    }

    /// Writes the links as `i TAB j` lines.
    pub fn write_edge_list(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut s = String::with_capacity(self.links.len() * 12);
        for (i, j) in &self.links {
            writeln!(s, "{i}\t{j}").unwrap();
        }
        fs::write(path, s).map_err(|e| Error::io(path, e))
    }
}

/// Builds the subgraph network of the requested order. Only order 1 (lines
/// as subgraphs) is supported.
pub fn build_sgn(skeleton: &Skeleton, order: usize) -> Result<SubgraphNetwork> {
    match order {
        1 => Ok(build_sgn1(skeleton)),
        other => Err(Error::UnsupportedOrder(other)),
    }
}

/// Line graph of the skeleton via per-node edge buckets, `O(sum deg^2)`.
pub fn build_sgn1(skeleton: &Skeleton) -> SubgraphNetwork {
    let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); skeleton.num_nodes];
    for (i, &(u, v)) in skeleton.edges.iter().enumerate() {
        buckets[u].push(i);
        buckets[v].push(i);
    }
    // Two distinct lines of a simple graph share at most one endpoint, so
    // no link is produced twice.
    let mut links: Vec<(usize, usize)> = buckets
        .par_iter()
        .flat_map_iter(|bucket| {
            bucket
                .iter()
                .enumerate()
                .flat_map(move |(a, &i)| bucket[a + 1..].iter().map(move |&j| (i, j)))
        })
        .collect();
    links.par_sort_unstable();
    SubgraphNetwork {
        num_entities: skeleton.num_nodes,
        lines: skeleton.edges.clone(),
        links,
    }
}

/// Entity x line incidence matrix; entities outside every line get empty
/// rows.
pub fn subgraph_features(kg: &KnowledgeGraph, sgn: &SubgraphNetwork) -> Result<SparseMatrix> {
    if kg.num_entities() != sgn.num_entities {
        return Err(Error::Dimension(format!(
            "graph has {} entities but the subgraph network was built for {}",
            kg.num_entities(),
            sgn.num_entities
        )));
    }
    let entries = sgn
        .lines
        .iter()
        .enumerate()
        .flat_map(|(i, &(u, v))| [(u, i, 1.0), (v, i, 1.0)]);
    SparseMatrix::from_triplets(sgn.num_entities, sgn.lines.len(), entries)
}
