//! Generates a synthetic KG pair, writes it in the DBP15K layout and reads
//! it back.
//!
//! ```text
//! cargo run --example synthetic_dataset -- /tmp/synthetic
//! ```

use subgcn::kg::{generate_synthetic_pair, load_dbp15k, write_dbp15k, SyntheticSpec};

fn main() -> subgcn::Result<()> {
    let dir = std::env::args().nth(1).unwrap_or_else(|| "synthetic".into());
    let spec = SyntheticSpec {
        perturbation_rate: 0.05,
        ..SyntheticSpec::default()
    };
    let data = generate_synthetic_pair(&spec)?;
    write_dbp15k(&dir, &data)?;

    let back = load_dbp15k(&dir)?;
    assert_eq!(back, data);
    for (name, kg) in [("KG1", &back.kg1), ("KG2", &back.kg2)] {
        let c = kg.counts();
        println!(
            "{name}: {} entities, {} relations, {} relation triples, {} attribute triples",
            c.entities, c.relations, c.relation_triples, c.attribute_triples
        );
    }
    println!("{} reference links written to {dir}", back.seeds.len());
    Ok(())
}
