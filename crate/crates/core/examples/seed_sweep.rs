//! Hits@1 as a function of the share of seed links used for training.

use subgcn::align::Direction;
use subgcn::kg::{generate_synthetic_pair, split_seeds, SyntheticSpec};
use subgcn::pipeline::{monotonicity_warnings, run_in_memory, Mode, RunConfig, SweepRow};

fn main() -> subgcn::Result<()> {
    let spec = SyntheticSpec {
        perturbation_rate: 0.05,
        ..SyntheticSpec::default()
    };
    let base = generate_synthetic_pair(&spec)?;
    let cfg = RunConfig {
        epochs: 200,
        ..RunConfig::default()
    };

    let mut rows = Vec::new();
    println!("fraction  se      se+ae   sub-gcn   (hits@1, kg1->kg2)");
    for fraction in [0.1, 0.2, 0.3, 0.4, 0.5, 0.6] {
        let mut data = base.clone();
        data.seeds = split_seeds(&base.seeds, fraction, cfg.seed)?;
        let out = run_in_memory(&data, &cfg, None)?;
        let h1 = |m: Mode| out.result(m).unwrap().direction(Direction::Forward).hits_at(1).unwrap();
        println!(
            "{fraction:<9} {:<7.2} {:<7.2} {:<7.2}",
            h1(Mode::Se),
            h1(Mode::SeAe),
            h1(Mode::SubGcn)
        );
        for (mode, r) in &out.results {
            for d in &r.directions {
                rows.push(SweepRow {
                    fraction,
                    mode: *mode,
                    direction: d.direction,
                    hits: d.hits.clone(),
                });
            }
        }
    }
    for w in monotonicity_warnings(&rows) {
        println!("warning: {w}");
    }
    Ok(())
}
