use std::collections::HashMap;

use super::KnowledgeGraph;
use crate::matrix::SparseMatrix;

/// Attribute vocabulary shared by both graphs.
///
/// Attributes are merged by exact label match and the `cap` most frequent
/// labels (counted over the attribute triples of both graphs, ties broken by
/// label) become the feature columns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttributeVocab {
    labels: Vec<String>,
    columns: [Vec<Option<usize>>; 2],
}

impl AttributeVocab {
    pub fn build(kg1: &KnowledgeGraph, kg2: &KnowledgeGraph, cap: usize) -> Self {
        let mut freq: HashMap<&str, usize> = HashMap::new();
        for kg in [kg1, kg2] {
            for label in kg.attribute_labels() {
                freq.entry(label.as_str()).or_insert(0);
            }
            for t in kg.attribute_triples() {
                *freq.get_mut(kg.attribute_labels()[t.attribute].as_str()).unwrap() += 1;
            }
        }
        let mut ranked: Vec<(&str, usize)> = freq.into_iter().collect();
        ranked.sort_unstable_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
        ranked.truncate(cap);

        let labels: Vec<String> = ranked.iter().map(|(l, _)| l.to_string()).collect();
        let index: HashMap<&str, usize> = ranked
            .iter()
            .enumerate()
            .map(|(i, (l, _))| (*l, i))
            .collect();
        let map = |kg: &KnowledgeGraph| {
            kg.attribute_labels()
                .iter()
                .map(|l| index.get(l.as_str()).copied())
                .collect()
        };
        let columns = [map(kg1), map(kg2)];
        Self { labels, columns }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Shared column of attribute `attr` of graph `side` (0 or 1).
    pub fn column(&self, side: usize, attr: usize) -> Option<usize> {
        self.columns[side].get(attr).copied().flatten()
    }

    /// Binary entity x vocabulary matrix; entities without attributes get
    /// empty rows.
    pub fn features(&self, side: usize, kg: &KnowledgeGraph) -> SparseMatrix {
        let entries = kg.attribute_triples().iter().filter_map(|t| {
            self.column(side, t.attribute)
                .map(|c| (t.entity, c, 1.0))
        });
        SparseMatrix::from_triplets_with(kg.num_entities(), self.len(), entries, |_, _| 1.0)
            .expect("attribute triples are validated against the graph")
    }
}
