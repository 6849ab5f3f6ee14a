//! Relation functionality, the weighted adjacency and its symmetric
//! normalization for a toy graph.

use subgcn::kg::{KnowledgeGraph, RelationTriple};
use subgcn::matrix::{build_adjacency, normalize, relation_stats, DEFAULT_WEIGHT_FLOOR};

fn main() -> subgcn::Result<()> {
    let names = |p: &str, n: usize| (0..n).map(|i| format!("{p}{i}")).collect::<Vec<_>>();
    // capital_of is one-to-one; borders has two heads pointing at entity 3.
    let triples = vec![
        RelationTriple::new(0, 0, 3),
        RelationTriple::new(1, 0, 4),
        RelationTriple::new(3, 1, 4),
        RelationTriple::new(4, 1, 3),
        RelationTriple::new(2, 1, 3),
    ];
    let kg = KnowledgeGraph::new(names("e", 5), vec!["capital_of".into(), "borders".into()], vec![], triples, vec![])?;

    let stats = relation_stats(&kg);
    for (r, s) in stats.iter() {
        println!(
            "{}: {} triples, fun {:.3}, ifun {:.3}",
            kg.relation_labels()[r],
            s.triple_count,
            s.fun(),
            s.ifun()
        );
    }
    let a = normalize(&build_adjacency(&kg, &stats, DEFAULT_WEIGHT_FLOOR)?)?;
    let d = a.to_dense();
    println!("normalized adjacency:");
    for r in 0..d.rows() {
        let row: Vec<String> = d.row(r).iter().map(|v| format!("{v:.3}")).collect();
        println!("  {}", row.join(" "));
    }
    println!("symmetric: {}", a.is_symmetric(0.0));
    Ok(())
}
