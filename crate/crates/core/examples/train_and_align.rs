//! Trains all three channels on a synthetic pair and reports Hits@k for the
//! SE, SE+AE and sub-GCN distance settings.
//!
//! ```text
//! cargo run --release --example train_and_align -- 500
//! ```

use subgcn::kg::{generate_synthetic_pair, split_seeds, SyntheticSpec};
use subgcn::pipeline::{comparison_csv, run_in_memory, RunConfig};

fn main() -> subgcn::Result<()> {
    let epochs = std::env::args().nth(1).and_then(|e| e.parse().ok()).unwrap_or(300);
    let spec = SyntheticSpec {
        perturbation_rate: 0.05,
        ..SyntheticSpec::default()
    };
    let mut data = generate_synthetic_pair(&spec)?;
    data.seeds = split_seeds(&data.seeds, 0.3, 42)?;

    let cfg = RunConfig {
        epochs,
        ..RunConfig::default()
    };
    let out = run_in_memory(&data, &cfg, None)?;
    for c in &out.report.channels {
        let s = c.smoothed(50);
        println!(
            "{:<9} loss {:>9.2} -> {:>7.3}  ({:.1?})",
            c.kind.name(),
            c.losses[0],
            s[s.len() - 1],
            c.wall_time
        );
    }
    print!("{}", comparison_csv(&out.results));
    Ok(())
}
