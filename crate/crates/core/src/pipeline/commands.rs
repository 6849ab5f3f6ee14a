use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use rayon::prelude::*;
use serde::Serialize;

use super::{embed_channels, evaluate_modes, prepare, run_in_memory, Mode, RunConfig};
use crate::align::{AlignmentResult, Direction};
use crate::error::{Error, Result};
use crate::gcn::{load_checkpoint, ChannelKind, GcnChannel};
use crate::kg::{
    generate_synthetic_pair, known_dbp15k_counts, load_dbp15k, split_seeds, write_dbp15k,
    Dataset, Dbp15kPair, GraphCounts, SeedAlignment, SplitTag, SyntheticSpec, DBP15K_LINKS,
};
use crate::matrix::io::write_sparse;
use crate::sgn::{build_sgn, build_skeleton, subgraph_features, SubgraphNetwork};
use crate::train::TrainReport;

pub const CODE_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write(path: PathBuf, body: impl AsRef<[u8]>) -> Result<()> {
    fs::write(&path, body).map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, PartialEq)]
pub struct IngestReport {
    pub name: String,
    pub pair: Option<Dbp15kPair>,
    pub counts: [GraphCounts; 2],
    pub links: usize,
    /// Differences from the published figures, if the pair was recognised.
    pub mismatches: Vec<String>,
}

impl IngestReport {
    pub fn new(name: &str, data: &Dataset) -> Self {
        let pair = Dbp15kPair::detect(name);
        let counts = [data.kg1.counts(), data.kg2.counts()];
        let links = data.seeds.len();
        let mut mismatches = Vec::new();
        if let Some(pair) = pair {
            let known = known_dbp15k_counts(pair);
            for side in 0..2 {
                let (got, want) = (&counts[side], &known[side]);
                let fields = [
                    ("entities", got.entities, want.entities),
                    ("relations", got.relations, want.relations),
                    ("attributes", got.attributes, want.attributes),
                    ("relation triples", got.relation_triples, want.relation_triples),
                    ("attribute triples", got.attribute_triples, want.attribute_triples),
                ];
                for (what, g, w) in fields {
                    if g != w {
                        mismatches.push(format!("KG{} {what}: found {g}, expected {w}", side + 1));
                    }
                }
            }
            if links != DBP15K_LINKS {
                mismatches.push(format!("links: found {links}, expected {DBP15K_LINKS}"));
            }
        }
        Self {
            name: name.to_string(),
            pair,
            counts,
            links,
            mismatches,
        }
    }

    pub fn is_consistent(&self) -> bool {
        self.mismatches.is_empty()
    }

    pub fn table(&self) -> String {
        let mut s = String::new();
        let title = self.pair.map_or(self.name.as_str(), |p| p.name());
        writeln!(s, "{title} ({} links)", self.links).unwrap();
        writeln!(
            s,
            "{:<6}{:>10}{:>11}{:>12}{:>14}{:>14}",
            "graph", "entities", "relations", "attributes", "rel.triples", "attr.triples"
        )
        .unwrap();
        for (i, c) in self.counts.iter().enumerate() {
            writeln!(
                s,
                "{:<6}{:>10}{:>11}{:>12}{:>14}{:>14}",
                format!("KG{}", i + 1),
                c.entities,
                c.relations,
                c.attributes,
                c.relation_triples,
                c.attribute_triples
            )
            .unwrap();
        }
        for m in &self.mismatches {
            writeln!(s, "mismatch: {m}").unwrap();
        }
        s
    }
}

/// Loads and validates a dataset directory; with `out_dir` the normalized
/// (densely re-indexed) copy is written there.
pub fn cmd_ingest(dataset_dir: &Path, out_dir: Option<&Path>) -> Result<IngestReport> {
    let data = load_dbp15k(dataset_dir)?;
    let name = dataset_dir
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let report = IngestReport::new(&name, &data);
    for m in &report.mismatches {
        log::warn!("count mismatch: {m}");
    }
    if let Some(out) = out_dir {
        write_dbp15k(out, &data)?;
    }
    Ok(report)
}

/// Generates a synthetic pair and writes it as a dataset directory together
/// with the spec that produced it.
pub fn cmd_synth(spec: &SyntheticSpec, out_dir: &Path) -> Result<Dataset> {
    let data = generate_synthetic_pair(spec)?;
    write_dbp15k(out_dir, &data)?;
    let text = toml::to_string(spec).map_err(|e| Error::Config(e.to_string()))?;
    write(out_dir.join("synthetic.toml"), text)?;
    Ok(data)
}

/// Builds both first-order subgraph networks and writes, under `<out>/sgn`,
/// their link lists (`edges_N.tsv`, `i TAB j` over line ids), the line
/// endpoints (`lines_N.tsv`) and the entity-by-line feature matrices.
pub fn cmd_build_sgn(cfg: &RunConfig) -> Result<[SubgraphNetwork; 2]> {
    cfg.validate()?;
    let data = load_dbp15k(cfg.dataset_dir()?)?;
    let dir = cfg.out.join("sgn");
    create_dir(&dir)?;
    let mut out = Vec::with_capacity(2);
    for (side, kg) in [(1, &data.kg1), (2, &data.kg2)] {
        let sgn = build_sgn(&build_skeleton(kg), cfg.sgn_order)?;
        sgn.write_edge_list(dir.join(format!("edges_{side}.tsv")))?;
        let mut lines = String::new();
        for (i, (u, v)) in sgn.lines().iter().enumerate() {
            writeln!(lines, "{i}\t{u}\t{v}").unwrap();
        }
        write(dir.join(format!("lines_{side}.tsv")), lines)?;
        write_sparse(dir.join(format!("features_{side}.txt")), &subgraph_features(kg, &sgn)?)?;
        log::info!(
            "KG{side}: {} lines, {} links",
            sgn.num_lines(),
            sgn.links().len()
        );
        out.push(sgn);
    }
    let [a, b]: [SubgraphNetwork; 2] = out.try_into().expect("two graphs");
    Ok([a, b])
}

fn split_tsv(seeds: &SeedAlignment) -> String {
    let mut s = String::new();
    let tags = seeds.tags().expect("split seeds");
    for (&(l, r), tag) in seeds.pairs().iter().zip(tags) {
        let t = match tag {
            SplitTag::Train => "train",
            SplitTag::Test => "test",
        };
        writeln!(s, "{l}\t{r}\t{t}").unwrap();
    }
    s
}

fn read_split(path: &Path) -> Result<SeedAlignment> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut pairs = Vec::new();
    let mut tags = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let bad = |m: &str| Error::parse(path, i + 1, m);
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() != 3 {
            return Err(bad("expected left TAB right TAB train|test"));
        }
        let id = |s: &str| s.parse::<usize>().map_err(|_| bad("entity id is not an integer"));
        pairs.push((id(f[0])?, id(f[1])?));
        tags.push(match f[2] {
            "train" => SplitTag::Train,
            "test" => SplitTag::Test,
            _ => return Err(bad("tag must be train or test")),
        });
    }
    SeedAlignment::with_split(pairs, tags)
}

#[derive(Serialize)]
struct RunManifest<'a> {
    code_version: &'a str,
    train_pairs: usize,
    test_pairs: usize,
    channels: Vec<&'static str>,
    config: &'a RunConfig,
}

/// Loads the dataset and applies the configured train/test split.
fn load_split(cfg: &RunConfig) -> Result<Dataset> {
    let mut data = load_dbp15k(cfg.dataset_dir()?)?;
    data.seeds = split_seeds(&data.seeds, cfg.train_fraction, cfg.seed)?;
    Ok(data)
}

/// Trains the channels of the configured mode. Writes `split.tsv`,
/// `manifest.toml`, `loss.csv` and one checkpoint directory per channel
/// under `<out>/checkpoints`.
pub fn cmd_train(cfg: &RunConfig) -> Result<TrainReport> {
    cfg.validate()?;
    let data = load_split(cfg)?;
    create_dir(&cfg.out)?;
    write(cfg.out.join("split.tsv"), split_tsv(&data.seeds))?;
    let manifest = RunManifest {
        code_version: CODE_VERSION,
        train_pairs: data.seeds.train_pairs().len(),
        test_pairs: data.seeds.test_pairs().len(),
        channels: cfg.mode.channels().iter().map(|k| k.name()).collect(),
        config: cfg,
    };
    let text = toml::to_string(&manifest).map_err(|e| Error::Config(e.to_string()))?;
    write(cfg.out.join("manifest.toml"), text)?;

    let kinds = cfg.mode.channels();
    let prepared = prepare(&data, cfg, kinds)?;
    let mut channels = kinds
        .iter()
        .map(|&k| prepared.init_channel(k, cfg))
        .collect::<Result<Vec<_>>>()?;
    let report = super::train_channels(
        &mut channels,
        &prepared,
        &data.seeds.train_pairs(),
        cfg,
        Some(&cfg.out.join("checkpoints")),
    )?;
    report.write_loss_csv(cfg.out.join("loss.csv"))?;
    for c in &report.channels {
        log::info!(
            "{}: final loss {:.4} after {:.1?}",
            c.kind,
            c.losses.last().copied().unwrap_or(0.0),
            c.wall_time
        );
    }
    Ok(report)
}

fn check_checkpoint(ch: &GcnChannel, kind: ChannelKind, cfg: &RunConfig, entities: [usize; 2]) -> Result<()> {
    let c = ch.config();
    let width = match kind {
        ChannelKind::Structure => cfg.d_s,
        ChannelKind::Attribute => cfg.d_a,
        ChannelKind::Subgraph => cfg.d_sgn,
    };
    if c.kind != kind || c.output_dim != width || c.output_activation != cfg.output_activation {
        return Err(Error::Dimension(format!(
            "{kind} checkpoint ({} wide, {} output) does not match the run config ({width} wide, {} output)",
            c.output_dim,
            c.output_activation.name(),
            cfg.output_activation.name()
        )));
    }
    for (side, &n) in entities.iter().enumerate() {
        if ch.num_entities(side) != n {
            return Err(Error::Dimension(format!(
                "{kind} checkpoint covers {} entities in KG{}, dataset has {n}",
                ch.num_entities(side),
                side + 1
            )));
        }
    }
    Ok(())
}

/// `mode,direction,hits@k...,mean_rank` rows for every evaluated mode.
pub fn comparison_csv(results: &[(Mode, AlignmentResult)]) -> String {
    let mut s = String::from("mode,direction");
    if let Some((_, r)) = results.first() {
        for (k, _) in &r.directions[0].hits {
            write!(s, ",hits@{k}").unwrap();
        }
    }
    s.push_str(",mean_rank\n");
    for (mode, r) in results {
        for d in &r.directions {
            write!(s, "{mode},{}", d.direction.name()).unwrap();
            for (_, v) in &d.hits {
                write!(s, ",{v:.2}").unwrap();
            }
            writeln!(s, ",{:.2}", d.mean_rank).unwrap();
        }
    }
    s
}

/// Evaluates the checkpoints of a finished `train` run. Writes
/// `metrics_<mode>.csv` for every mode the trained channels support, the
/// per-entity ranks of the configured mode, and `comparison.csv`.
pub fn cmd_eval(cfg: &RunConfig) -> Result<Vec<(Mode, AlignmentResult)>> {
    cfg.validate()?;
    let mut data = load_dbp15k(cfg.dataset_dir()?)?;
    let split_path = cfg.out.join("split.tsv");
    data.seeds = if split_path.exists() {
        read_split(&split_path)?
    } else {
        split_seeds(&data.seeds, cfg.train_fraction, cfg.seed)?
    };
    data.seeds.check_bounds(data.kg1.num_entities(), data.kg2.num_entities())?;
    let prepared = prepare(&data, cfg, &[])?;
    let root = cfg.out.join("checkpoints");
    let channels = cfg
        .mode
        .channels()
        .iter()
        .map(|&kind| {
            let (ch, _) = load_checkpoint(root.join(kind.name()))?;
            check_checkpoint(&ch, kind, cfg, prepared.entities)?;
            Ok(ch)
        })
        .collect::<Result<Vec<_>>>()?;
    let embeddings = embed_channels(&channels, &prepared)?;
    let results = evaluate_modes(&embeddings, &data.seeds.test_pairs(), cfg)?;
    for (mode, r) in &results {
        write(cfg.out.join(format!("metrics_{}.csv", mode.slug())), r.metrics_csv())?;
        if *mode == cfg.mode {
            for d in Direction::BOTH {
                let name = format!("ranks_{}_{}.csv", mode.slug(), d.name().replace("->", "_to_"));
                write(cfg.out.join(name), r.ranks_csv(d))?;
            }
        }
    }
    write(cfg.out.join("comparison.csv"), comparison_csv(&results))?;
    Ok(results)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub fraction: f64,
    pub mode: Mode,
    pub direction: Direction,
    pub hits: Vec<(usize, f64)>,
}

fn sweep_line(row: &SweepRow) -> String {
    let mut s = format!("{},{}", row.fraction, row.direction.name());
    for (_, v) in &row.hits {
        write!(s, ",{v:.2}").unwrap();
    }
    s.push('\n');
    s
}

fn sweep_rows(fraction: f64, results: &[(Mode, AlignmentResult)]) -> Vec<SweepRow> {
    results
        .iter()
        .flat_map(|(mode, r)| {
            r.directions.iter().map(move |d| SweepRow {
                fraction,
                mode: *mode,
                direction: d.direction,
                hits: d.hits.clone(),
            })
        })
        .collect()
}

/// Warnings for every mode and direction where Hits@1 drops as the training
/// fraction grows.
pub fn monotonicity_warnings(rows: &[SweepRow]) -> Vec<String> {
    let mut out = Vec::new();
    for mode in Mode::ALL {
        for dir in Direction::BOTH {
            let mut series: Vec<(f64, f64)> = rows
                .iter()
                .filter(|r| r.mode == mode && r.direction == dir)
                .filter_map(|r| r.hits.first().map(|h| (r.fraction, h.1)))
                .collect();
            series.sort_by(|a, b| a.0.total_cmp(&b.0));
            for w in series.windows(2) {
                if w[1].1 < w[0].1 {
                    out.push(format!(
                        "{mode} {}: hits@{} falls from {:.2} at {} to {:.2} at {}",
                        dir.name(),
                        rows[0].hits[0].0,
                        w[0].1,
                        w[0].0,
                        w[1].1,
                        w[1].0
                    ));
                }
            }
        }
    }
    out
}

/// Trains and evaluates from scratch once per fraction in
/// `cfg.sweep_fractions`. Rows go to `<out>/sweep_<mode>.csv` as
/// `fraction,direction,hits<k>...`, flushed after every fraction. With
/// `parallel` the fractions run concurrently and the files are rewritten in
/// fraction order at the end.
pub fn cmd_sweep(cfg: &RunConfig, parallel: bool) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    let base = load_dbp15k(cfg.dataset_dir()?)?;
    create_dir(&cfg.out)?;
    let modes = super::modes_for(cfg.mode.channels());
    let header = {
        let mut h = String::from("fraction,direction");
        for k in &cfg.hits_levels {
            write!(h, ",hits{k}").unwrap();
        }
        h.push('\n');
        h
    };
    let path = |m: Mode| cfg.out.join(format!("sweep_{}.csv", m.slug()));
    let files = modes
        .iter()
        .map(|&m| {
            let p = path(m);
            let mut f = File::create(&p).map_err(|e| Error::io(&p, e))?;
            f.write_all(header.as_bytes()).map_err(|e| Error::io(&p, e))?;
            Ok((m, f))
        })
        .collect::<Result<Vec<_>>>()?;
    let files = Mutex::new(files);

    let run = |fraction: f64| -> Result<Vec<SweepRow>> {
        let mut data = base.clone();
        data.seeds = split_seeds(&base.seeds, fraction, cfg.seed)?;
        let run_cfg = RunConfig {
            train_fraction: fraction,
            ..cfg.clone()
        };
        let outcome = run_in_memory(&data, &run_cfg, None)?;
        let rows = sweep_rows(fraction, &outcome.results);
        let mut files = files.lock().expect("sweep files");
        for (mode, f) in files.iter_mut() {
            for row in rows.iter().filter(|r| r.mode == *mode) {
                f.write_all(sweep_line(row).as_bytes())
                    .and_then(|_| f.flush())
                    .map_err(|e| Error::io(path(*mode), e))?;
            }
        }
        log::info!("fraction {fraction} done");
        Ok(rows)
    };
    let rows: Vec<SweepRow> = if parallel {
        cfg.sweep_fractions
            .par_iter()
            .map(|&f| run(f))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .flatten()
            .collect()
    } else {
        let mut all = Vec::new();
        for &f in &cfg.sweep_fractions {
            all.extend(run(f)?);
        }
        all
    };
    if parallel {
        for m in &modes {
            let mut s = header.clone();
            for row in rows.iter().filter(|r| r.mode == *m) {
                s.push_str(&sweep_line(row));
            }
            write(path(*m), s)?;
        }
    }
    for w in monotonicity_warnings(&rows) {
        log::warn!("{w}");
    }
    Ok(rows)
}
