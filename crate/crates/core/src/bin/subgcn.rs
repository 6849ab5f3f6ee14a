use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use subgcn::kg::SyntheticSpec;
use subgcn::pipeline::{
    cmd_build_sgn, cmd_eval, cmd_ingest, cmd_sweep, cmd_synth, cmd_train, comparison_csv, Mode,
    RunConfig,
};
use subgcn::{Error, Result};

/// Environment variable holding the worker thread count.
const THREADS_VAR: &str = "SUBGCN_THREADS";

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    #[value(name = "se")]
    Se,
    #[value(name = "se+ae")]
    SeAe,
    #[value(name = "sub-gcn")]
    SubGcn,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Se => Mode::Se,
            ModeArg::SeAe => Mode::SeAe,
            ModeArg::SubGcn => Mode::SubGcn,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "subgcn", version, about = "Knowledge-graph entity alignment with subgraph-network GCNs")]
struct Cli {
    /// Run configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    mode: Option<ModeArg>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Validate a dataset directory and print its counts.
    Ingest {
        dataset: PathBuf,
        /// Also write a densely re-indexed copy to --out.
        #[arg(long)]
        write: bool,
    },
    /// Generate a synthetic dataset into --out.
    Synth {
        /// Generator spec (TOML); flags below override it.
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        entities: Option<usize>,
        #[arg(long)]
        relations: Option<usize>,
        #[arg(long)]
        triples: Option<usize>,
        #[arg(long)]
        attributes: Option<usize>,
        #[arg(long)]
        perturbation: Option<f64>,
    },
    /// Build the subgraph networks and export them.
    BuildSgn {
        #[arg(long)]
        dataset: Option<PathBuf>,
    },
    /// Train the channels of the selected mode.
    Train {
        #[arg(long)]
        dataset: Option<PathBuf>,
        #[arg(long)]
        epochs: Option<usize>,
    },
    /// Evaluate a trained run.
    Eval {
        #[arg(long)]
        dataset: Option<PathBuf>,
    },
    /// Train and evaluate once per seed fraction.
    Sweep {
        #[arg(long)]
        dataset: Option<PathBuf>,
        #[arg(long, value_delimiter = ',')]
        fractions: Option<Vec<f64>>,
        #[arg(long)]
        epochs: Option<usize>,
        /// Run the fractions concurrently.
        #[arg(long)]
        parallel: bool,
    },
}

fn run_config(cli: &Cli, dataset: Option<&PathBuf>, epochs: Option<usize>) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(o) = &cli.out {
        cfg.out = o.clone();
    }
    if let Some(m) = cli.mode {
        cfg.mode = m.into();
    }
    if let Some(d) = dataset {
        cfg.dataset = Some(d.clone());
    }
    if let Some(e) = epochs {
        cfg.epochs = e;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn configure_threads() -> Result<()> {
    let Ok(value) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = value
        .parse()
        .map_err(|_| Error::Config(format!("{THREADS_VAR}={value:?} is not a thread count")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::Config(e.to_string()))
}

fn run(cli: Cli) -> Result<()> {
    configure_threads()?;
    match &cli.command {
        Command::Ingest { dataset, write } => {
            let out = if *write {
                Some(cli.out.clone().ok_or_else(|| Error::Config("--write needs --out".into()))?)
            } else {
                None
            };
            let report = cmd_ingest(dataset, out.as_deref())?;
            print!("{}", report.table());
        }
        Command::Synth {
            spec,
            entities,
            relations,
            triples,
            attributes,
            perturbation,
        } => {
            let mut s = match spec {
                Some(p) => {
                    let text = std::fs::read_to_string(p).map_err(|e| Error::Config(format!("{}: {e}", p.display())))?;
                    toml::from_str(&text).map_err(|e| Error::Config(e.to_string()))?
                }
                None => SyntheticSpec::default(),
            };
            s.n_entities = entities.unwrap_or(s.n_entities);
            s.n_relations = relations.unwrap_or(s.n_relations);
            s.n_rel_triples = triples.unwrap_or(s.n_rel_triples);
            s.n_attributes = attributes.unwrap_or(s.n_attributes);
            s.perturbation_rate = perturbation.unwrap_or(s.perturbation_rate);
            s.rng_seed = cli.seed.unwrap_or(s.rng_seed);
            let out = cli.out.clone().ok_or_else(|| Error::Config("synth needs --out".into()))?;
            let data = cmd_synth(&s, &out)?;
            println!(
                "wrote {}: {} + {} entities, {} links",
                out.display(),
                data.kg1.num_entities(),
                data.kg2.num_entities(),
                data.seeds.len()
            );
        }
        Command::BuildSgn { dataset } => {
            let cfg = run_config(&cli, dataset.as_ref(), None)?;
            let sgn = cmd_build_sgn(&cfg)?;
            for (i, s) in sgn.iter().enumerate() {
                println!("KG{}: {} lines, {} links", i + 1, s.num_lines(), s.links().len());
            }
        }
        Command::Train { dataset, epochs } => {
            let cfg = run_config(&cli, dataset.as_ref(), *epochs)?;
            let report = cmd_train(&cfg)?;
            for c in &report.channels {
                let last = c.losses.last().copied().unwrap_or(0.0);
                println!("{}: final loss {last:.4} ({:.1?})", c.kind, c.wall_time);
            }
        }
        Command::Eval { dataset } => {
            let cfg = run_config(&cli, dataset.as_ref(), None)?;
            let results = cmd_eval(&cfg)?;
            print!("{}", comparison_csv(&results));
        }
        Command::Sweep {
            dataset,
            fractions,
            epochs,
            parallel,
        } => {
            let mut cfg = run_config(&cli, dataset.as_ref(), *epochs)?;
            if let Some(f) = fractions {
                cfg.sweep_fractions = f.clone();
                cfg.validate()?;
            }
            let rows = cmd_sweep(&cfg, *parallel)?;
            for r in rows {
                let hits: Vec<String> = r.hits.iter().map(|(k, v)| format!("@{k}={v:.2}")).collect();
                println!("{} {} {} {}", r.fraction, r.mode, r.direction.name(), hits.join(" "));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = e.to_string().replace('\n', " ");
            eprintln!("error: {}: {msg}", e.category());
            ExitCode::FAILURE
        }
    }
}
