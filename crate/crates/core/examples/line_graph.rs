//! Builds the first-order subgraph network of a small graph and prints the
//! entity-by-line feature matrix.

use subgcn::kg::KnowledgeGraph;
use subgcn::sgn::{build_sgn, build_skeleton, subgraph_features};

fn main() -> subgcn::Result<()> {
    // A triangle 0-1-2 with a tail 2-3; the duplicate and the loop vanish in
    // the skeleton.
    let kg = KnowledgeGraph::from_edges(4, &[(0, 1), (1, 2), (2, 0), (2, 3), (1, 0), (3, 3)])?;
    let skeleton = build_skeleton(&kg);
    let sgn = build_sgn(&skeleton, 1)?;

    println!("lines:");
    for (i, (u, v)) in sgn.lines().iter().enumerate() {
        println!("  L{i} = {u}-{v}");
    }
    println!("links:");
    for (i, j) in sgn.links() {
        println!("  L{i} ~ L{j}");
    }

    let f = subgraph_features(&kg, &sgn)?.to_dense();
    println!("features (entity x line):");
    for e in 0..f.rows() {
        let row: Vec<String> = f.row(e).iter().map(|v| format!("{v}")).collect();
        println!("  {e}: [{}]  degree {}", row.join(" "), skeleton.degrees()[e]);
    }
    Ok(())
}
