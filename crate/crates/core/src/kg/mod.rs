//! Bilingual knowledge-graph data model.
//!
//! A [`KnowledgeGraph`] holds one language side: dense entity, relation and
//! attribute ids, the relation triples `(head, relation, tail)` and the
//! attribute triples `(entity, attribute, value)`. Ids are contiguous from 0
//! so they can index matrix rows directly; the original URIs live in the
//! label tables.

mod dbp15k;
mod seeds;
mod synthetic;
mod vocab;

pub use dbp15k::{known_dbp15k_counts, load_dbp15k, DBP15K_LINKS, write_dbp15k, Dataset, Dbp15kPair};
pub use seeds::{split_seeds, SeedAlignment, SplitTag};
pub use synthetic::{generate_synthetic_pair, SyntheticSpec};
pub use vocab::AttributeVocab;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RelationTriple {
    pub head: usize,
    pub relation: usize,
    pub tail: usize,
}

impl RelationTriple {
    pub fn new(head: usize, relation: usize, tail: usize) -> Self {
        Self {
            head,
            relation,
            tail,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AttributeTriple {
    pub entity: usize,
    pub attribute: usize,
    /// Stored verbatim; attribute values never become features.
    pub value: String,
}

/// Table-2 style size summary of one graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GraphCounts {
    pub entities: usize,
    pub relations: usize,
    pub attributes: usize,
    pub relation_triples: usize,
    pub attribute_triples: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KnowledgeGraph {
    entity_labels: Vec<String>,
    relation_labels: Vec<String>,
    attribute_labels: Vec<String>,
    relation_triples: Vec<RelationTriple>,
    attribute_triples: Vec<AttributeTriple>,
}

impl KnowledgeGraph {
    /// Builds a graph, checking that every triple references declared ids.
    pub fn new(
        entity_labels: Vec<String>,
        relation_labels: Vec<String>,
        attribute_labels: Vec<String>,
        relation_triples: Vec<RelationTriple>,
        attribute_triples: Vec<AttributeTriple>,
    ) -> Result<Self> {
        let (ne, nr, na) = (
            entity_labels.len(),
            relation_labels.len(),
            attribute_labels.len(),
        );
        for (i, t) in relation_triples.iter().enumerate() {
            if t.head >= ne || t.tail >= ne {
                return Err(Error::Dimension(format!(
                    "relation triple {i} references entity outside 0..{ne}"
                )));
            }
            if t.relation >= nr {
                return Err(Error::Dimension(format!(
                    "relation triple {i} references relation {} outside 0..{nr}",
                    t.relation
                )));
            }
        }
        for (i, t) in attribute_triples.iter().enumerate() {
            if t.entity >= ne || t.attribute >= na {
                return Err(Error::Dimension(format!(
                    "attribute triple {i} references an undeclared entity or attribute"
                )));
            }
        }
        Ok(Self {
            entity_labels,
            relation_labels,
            attribute_labels,
            relation_triples,
            attribute_triples,
        })
    }

    /// A graph with `n` anonymous entities and one relation, handy for tests.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let triples = edges
            .iter()
            .map(|&(h, t)| RelationTriple::new(h, 0, t))
            .collect();
        Self::new(
            (0..n).map(|i| format!("e{i}")).collect(),
            vec!["r0".to_string()],
            Vec::new(),
            triples,
            Vec::new(),
        )
    }

    pub fn num_entities(&self) -> usize {
        self.entity_labels.len()
    }

    pub fn num_relations(&self) -> usize {
        self.relation_labels.len()
    }

    pub fn num_attributes(&self) -> usize {
        self.attribute_labels.len()
    }

    pub fn relation_triples(&self) -> &[RelationTriple] {
        &self.relation_triples
    }

    pub fn attribute_triples(&self) -> &[AttributeTriple] {
        &self.attribute_triples
    }

    pub fn entity_label(&self, id: usize) -> &str {
        &self.entity_labels[id]
    }

    pub fn entity_labels(&self) -> &[String] {
        &self.entity_labels
    }

    pub fn relation_labels(&self) -> &[String] {
        &self.relation_labels
    }

    pub fn attribute_labels(&self) -> &[String] {
        &self.attribute_labels
    }

    pub fn counts(&self) -> GraphCounts {
        GraphCounts {
            entities: self.num_entities(),
            relations: self.num_relations(),
            attributes: self.num_attributes(),
            relation_triples: self.relation_triples.len(),
            attribute_triples: self.attribute_triples.len(),
        }
    }
}
