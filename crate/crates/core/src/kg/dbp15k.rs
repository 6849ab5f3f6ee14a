//! Reader and writer for the DBP15K tab-separated directory layout.
//!
//! ```text
//! ent_ids_{1,2}       id TAB uri
//! rel_ids_{1,2}       id TAB uri
//! attr_ids_{1,2}      id TAB uri            (optional)
//! triples_{1,2}       head TAB relation TAB tail
//! attr_triples_{1,2}  entity TAB attribute TAB value
//! ref_ent_ids         left TAB right
//! ```
//!
//! Ids in the files may be arbitrary (the public release numbers both sides
//! from one global counter); they are reindexed densely per graph in file
//! order. When `attr_ids_N` is absent the attribute column of
//! `attr_triples_N` is read as a string predicate and indexed on first use.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::{AttributeTriple, GraphCounts, KnowledgeGraph, RelationTriple, SeedAlignment};
use crate::error::{Error, Result};

/// Two graphs plus their reference alignment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    pub kg1: KnowledgeGraph,
    pub kg2: KnowledgeGraph,
    pub seeds: SeedAlignment,
}

/// The three public DBP15K language pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dbp15kPair {
    ZhEn,
    JaEn,
    FrEn,
}

impl Dbp15kPair {
    /// Recognises `zh_en`, `ja-en`, `DBP15K_FR-EN` style names.
    pub fn detect(name: &str) -> Option<Self> {
        let n = name.to_ascii_lowercase().replace('-', "_");
        if n.contains("zh_en") {
            Some(Self::ZhEn)
        } else if n.contains("ja_en") {
            Some(Self::JaEn)
        } else if n.contains("fr_en") {
            Some(Self::FrEn)
        } else {
            None
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::ZhEn => "DBP15K_ZH-EN",
            Self::JaEn => "DBP15K_JA-EN",
            Self::FrEn => "DBP15K_FR-EN",
        }
    }
}

const fn counts(e: usize, r: usize, a: usize, rt: usize, at: usize) -> GraphCounts {
    GraphCounts {
        entities: e,
        relations: r,
        attributes: a,
        relation_triples: rt,
        attribute_triples: at,
    }
}

/// Published sizes of the two sides of each DBP15K pair.
pub fn known_dbp15k_counts(pair: Dbp15kPair) -> [GraphCounts; 2] {
    match pair {
        Dbp15kPair::ZhEn => [
            counts(66469, 2830, 8113, 153929, 379684),
            counts(98125, 2317, 7173, 237674, 567755),
        ],
        Dbp15kPair::JaEn => [
            counts(65744, 2043, 5882, 164373, 354619),
            counts(95680, 2096, 6066, 233319, 497230),
        ],
        Dbp15kPair::FrEn => [
            counts(66858, 1379, 4547, 192191, 528665),
            counts(105889, 2209, 6422, 278590, 576543),
        ],
    }
}

/// Number of reference links in every DBP15K pair.
pub const DBP15K_LINKS: usize = 15000;

fn read_required(path: &Path) -> Result<String> {
    if !path.exists() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Non-empty lines with 1-based line numbers.
fn lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty())
}

fn parse_id(path: &Path, line: usize, field: &str) -> Result<u64> {
    field
        .trim()
        .parse::<u64>()
        .map_err(|_| Error::parse(path, line, format!("expected an integer id, found {field:?}")))
}

fn split_fields<'a>(path: &Path, line_no: usize, line: &'a str, n: usize) -> Result<Vec<&'a str>> {
    let fields: Vec<&str> = line.splitn(n, '\t').collect();
    if fields.len() != n || (n < 3 && fields.iter().any(|f| f.contains('\t'))) {
        return Err(Error::parse(
            path,
            line_no,
            format!("expected {n} tab-separated columns, found {}", fields.len()),
        ));
    }
    Ok(fields)
}

struct IdTable {
    labels: Vec<String>,
    index: HashMap<u64, usize>,
}

impl IdTable {
    fn read(path: &Path) -> Result<Self> {
        let text = read_required(path)?;
        let mut labels = Vec::new();
        let mut index = HashMap::new();
        for (no, line) in lines(&text) {
            let f = split_fields(path, no, line, 2)?;
            let id = parse_id(path, no, f[0])?;
            if index.insert(id, labels.len()).is_some() {
                return Err(Error::parse(path, no, format!("duplicate id {id}")));
            }
            labels.push(f[1].to_string());
        }
        Ok(Self { labels, index })
    }

    fn lookup(&self, path: &Path, line: usize, kind: &'static str, raw: &str) -> Result<usize> {
        let id = parse_id(path, line, raw)?;
        self.index.get(&id).copied().ok_or_else(|| Error::UndeclaredId {
            file: path.to_path_buf(),
            line,
            kind,
            id: id.to_string(),
        })
    }
}

fn load_side(dir: &Path, side: u8) -> Result<(KnowledgeGraph, IdTable)> {
    let entities = IdTable::read(&dir.join(format!("ent_ids_{side}")))?;
    let relations = IdTable::read(&dir.join(format!("rel_ids_{side}")))?;

    let triples_path = dir.join(format!("triples_{side}"));
    let text = read_required(&triples_path)?;
    let mut relation_triples = Vec::new();
    for (no, line) in lines(&text) {
        let f = split_fields(&triples_path, no, line, 3)?;
        if f[2].contains('\t') {
            return Err(Error::parse(&triples_path, no, "expected 3 tab-separated columns"));
        }
        relation_triples.push(RelationTriple {
            head: entities.lookup(&triples_path, no, "entity", f[0])?,
            relation: relations.lookup(&triples_path, no, "relation", f[1])?,
            tail: entities.lookup(&triples_path, no, "entity", f[2])?,
        });
    }

    let attr_ids_path = dir.join(format!("attr_ids_{side}"));
    let declared_attrs = if attr_ids_path.exists() {
        Some(IdTable::read(&attr_ids_path)?)
    } else {
        None
    };
    let mut auto_labels: Vec<String> = Vec::new();
    let mut auto_index: HashMap<String, usize> = HashMap::new();

    let attr_path = dir.join(format!("attr_triples_{side}"));
    let text = read_required(&attr_path)?;
    let mut attribute_triples = Vec::new();
    for (no, line) in lines(&text) {
        let f = split_fields(&attr_path, no, line, 3)?;
        let entity = entities.lookup(&attr_path, no, "entity", f[0])?;
        let attribute = match &declared_attrs {
            Some(table) => table.lookup(&attr_path, no, "attribute", f[1])?,
            None => {
                let next = auto_labels.len();
                *auto_index.entry(f[1].to_string()).or_insert_with(|| {
                    auto_labels.push(f[1].to_string());
                    next
                })
            }
        };
        attribute_triples.push(AttributeTriple {
            entity,
            attribute,
            value: f[2].to_string(),
        });
    }
    let attribute_labels = match declared_attrs {
        Some(t) => t.labels,
        None => auto_labels,
    };

    let kg = KnowledgeGraph::new(
        entities.labels.clone(),
        relations.labels,
        attribute_labels,
        relation_triples,
        attribute_triples,
    )?;
    Ok((kg, entities))
}

/// Loads both graphs and all reference links; no train/test split is set.
pub fn load_dbp15k(dir: impl AsRef<Path>) -> Result<Dataset> {
    let dir = dir.as_ref();
    // Check the link file up front so a missing file is reported before the
    // (slow) graph parsing.
    let ref_path = dir.join("ref_ent_ids");
    if !ref_path.exists() {
        return Err(Error::MissingFile(ref_path));
    }
    let (kg1, ents1) = load_side(dir, 1)?;
    let (kg2, ents2) = load_side(dir, 2)?;

    let text = read_required(&ref_path)?;
    let mut pairs = Vec::new();
    for (no, line) in lines(&text) {
        let f = split_fields(&ref_path, no, line, 2)?;
        pairs.push((
            ents1.lookup(&ref_path, no, "entity", f[0])?,
            ents2.lookup(&ref_path, no, "entity", f[1])?,
        ));
    }
    let seeds = SeedAlignment::new(pairs)?;
    log::info!(
        "loaded {}: {} + {} entities, {} reference links",
        dir.display(),
        kg1.num_entities(),
        kg2.num_entities(),
        seeds.len()
    );
    Ok(Dataset { kg1, kg2, seeds })
}

fn check_label(label: &str) -> Result<()> {
    if label.contains(['\t', '\n', '\r']) {
        return Err(Error::Config(format!(
            "label {label:?} contains a tab or newline and cannot be serialized"
        )));
    }
    Ok(())
}

fn write_file(path: PathBuf, body: String) -> Result<()> {
    fs::write(&path, body).map_err(|e| Error::io(path, e))
}

fn id_file(labels: &[String]) -> Result<String> {
    let mut s = String::new();
    for (i, l) in labels.iter().enumerate() {
        check_label(l)?;
        writeln!(s, "{i}\t{l}").unwrap();
    }
    Ok(s)
}

/// Writes a dataset with dense ids. Reading the directory back with
/// [`load_dbp15k`] yields an identical dataset.
pub fn write_dbp15k(dir: impl AsRef<Path>, data: &Dataset) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for (side, kg) in [(1, &data.kg1), (2, &data.kg2)] {
        write_file(dir.join(format!("ent_ids_{side}")), id_file(kg.entity_labels())?)?;
        write_file(dir.join(format!("rel_ids_{side}")), id_file(kg.relation_labels())?)?;
        write_file(dir.join(format!("attr_ids_{side}")), id_file(kg.attribute_labels())?)?;

        let mut s = String::new();
        for t in kg.relation_triples() {
            writeln!(s, "{}\t{}\t{}", t.head, t.relation, t.tail).unwrap();
        }
        write_file(dir.join(format!("triples_{side}")), s)?;

        let mut s = String::new();
        for t in kg.attribute_triples() {
            if t.value.contains(['\n', '\r']) {
                return Err(Error::Config("attribute value contains a newline".into()));
            }
            writeln!(s, "{}\t{}\t{}", t.entity, t.attribute, t.value).unwrap();
        }
        write_file(dir.join(format!("attr_triples_{side}")), s)?;
    }
    let mut s = String::new();
    for (l, r) in data.seeds.pairs() {
        writeln!(s, "{l}\t{r}").unwrap();
    }
    write_file(dir.join("ref_ent_ids"), s)
}
