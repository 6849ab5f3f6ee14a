//! Seeded bilingual graph pairs for desk-scale experiments.
//!
//! KG1 is a random multi-relational graph. KG2 is a copy of KG1 under a
//! random entity permutation, after which a fraction of its relation triples
//! is rewired and the same fraction of its attribute assignments resampled.
//! The permutation is returned as the reference alignment.

use std::collections::HashSet;

use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{AttributeTriple, Dataset, KnowledgeGraph, RelationTriple, SeedAlignment};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSpec {
    pub n_entities: usize,
    pub n_relations: usize,
    pub n_rel_triples: usize,
    pub n_attributes: usize,
    /// Expected number of attributes per entity.
    pub attr_per_entity: f64,
    /// Share of KG2 triples rewired (and attribute assignments resampled).
    pub perturbation_rate: f64,
    pub rng_seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            n_entities: 200,
            n_relations: 20,
            n_rel_triples: 800,
            n_attributes: 50,
            attr_per_entity: 4.0,
            perturbation_rate: 0.0,
            rng_seed: 42,
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_entities < 2
            || self.n_relations == 0
            || self.n_rel_triples == 0
            || self.n_attributes == 0
        {
            return Err(Error::InvalidSpec(
                "entity (>= 2), relation, triple and attribute counts must be positive".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.perturbation_rate) {
            return Err(Error::InvalidSpec(format!(
                "perturbation rate {} not in [0, 1]",
                self.perturbation_rate
            )));
        }
        if !(self.attr_per_entity >= 0.0 && self.attr_per_entity.is_finite()) {
            return Err(Error::InvalidSpec("attr_per_entity must be >= 0".into()));
        }
        let n = self.n_entities;
        let capacity = n * (n - 1);
        if self.n_rel_triples > capacity {
            return Err(Error::InvalidSpec(format!(
                "{} relation triples cannot be placed on {} distinct ordered entity pairs",
                self.n_rel_triples, capacity
            )));
        }
        Ok(())
    }
}

/// Draws `count` distinct ordered pairs `(h, t)` with `h != t`.
fn distinct_pairs(n: usize, count: usize, rng: &mut ChaCha8Rng) -> Vec<(usize, usize)> {
    let capacity = n * (n - 1);
    if count * 2 > capacity {
        // Dense request: sample positions in the enumeration instead of rejecting.
        let mut picked = index::sample(rng, capacity, count).into_vec();
        picked.sort_unstable();
        let mut pairs: Vec<(usize, usize)> = picked
            .into_iter()
            .map(|k| {
                let h = k / (n - 1);
                let mut t = k % (n - 1);
                if t >= h {
                    t += 1;
                }
                (h, t)
            })
            .collect();
        pairs.shuffle(rng);
        return pairs;
    }
    let mut seen = HashSet::with_capacity(count);
    let mut pairs = Vec::with_capacity(count);
    while pairs.len() < count {
        let h = rng.gen_range(0..n);
        let t = rng.gen_range(0..n);
        if h != t && seen.insert((h, t)) {
            pairs.push((h, t));
        }
    }
    pairs
}

pub fn generate_synthetic_pair(spec: &SyntheticSpec) -> Result<Dataset> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.rng_seed);
    let n = spec.n_entities;

    let mut triples1: Vec<RelationTriple> = distinct_pairs(n, spec.n_rel_triples, &mut rng)
        .into_iter()
        .map(|(h, t)| RelationTriple::new(h, rng.gen_range(0..spec.n_relations), t))
        .collect();
    triples1.sort_unstable();

    let p_attr = (spec.attr_per_entity / spec.n_attributes as f64).min(1.0);
    let mut attrs1 = Vec::new();
    for e in 0..n {
        for a in 0..spec.n_attributes {
            if rng.gen_bool(p_attr) {
                attrs1.push(AttributeTriple {
                    entity: e,
                    attribute: a,
                    value: format!("v{e}_{a}"),
                });
            }
        }
    }

    // perm[i] is the KG2 id of KG1 entity i.
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut rng);

    let mut triples2: Vec<RelationTriple> = triples1
        .iter()
        .map(|t| RelationTriple::new(perm[t.head], t.relation, perm[t.tail]))
        .collect();
    let n_rewire = (spec.perturbation_rate * triples2.len() as f64).round() as usize;
    if n_rewire > 0 {
        let mut present: HashSet<(usize, usize)> =
            triples2.iter().map(|t| (t.head, t.tail)).collect();
        for i in index::sample(&mut rng, triples2.len(), n_rewire).into_vec() {
            let head = triples2[i].head;
            // Bounded retries; a saturated head keeps its original tail.
            for _ in 0..64 {
                let tail = rng.gen_range(0..n);
                if tail != head && !present.contains(&(head, tail)) {
                    present.remove(&(head, triples2[i].tail));
                    present.insert((head, tail));
                    triples2[i].tail = tail;
                    break;
                }
            }
        }
    }
    triples2.sort_unstable();

    let mut attrs2: Vec<AttributeTriple> = attrs1
        .iter()
        .map(|t| AttributeTriple {
            entity: perm[t.entity],
            attribute: t.attribute,
            value: t.value.clone(),
        })
        .collect();
    let n_resample = (spec.perturbation_rate * attrs2.len() as f64).round() as usize;
    if n_resample > 0 && spec.n_attributes > 1 {
        for i in index::sample(&mut rng, attrs2.len(), n_resample).into_vec() {
            let old = attrs2[i].attribute;
            let mut a = rng.gen_range(0..spec.n_attributes - 1);
            if a >= old {
                a += 1;
            }
            attrs2[i].attribute = a;
        }
    }
    attrs2.sort_unstable();

    let relation_labels: Vec<String> = (0..spec.n_relations).map(|r| format!("rel{r}")).collect();
    let attribute_labels: Vec<String> =
        (0..spec.n_attributes).map(|a| format!("attr{a}")).collect();

    let kg1 = KnowledgeGraph::new(
        (0..n).map(|i| format!("kg1:e{i}")).collect(),
        relation_labels.clone(),
        attribute_labels.clone(),
        triples1,
        attrs1,
    )?;
    let kg2 = KnowledgeGraph::new(
        (0..n).map(|i| format!("kg2:e{i}")).collect(),
        relation_labels,
        attribute_labels,
        triples2,
        attrs2,
    )?;
    let seeds = SeedAlignment::new(perm.iter().enumerate().map(|(i, &j)| (i, j)).collect())?;
    Ok(Dataset { kg1, kg2, seeds })
}
