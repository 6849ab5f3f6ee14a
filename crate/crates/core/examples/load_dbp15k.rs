//! Loads a DBP15K pair and prints its counts next to the published ones.
//!
//! ```text
//! cargo run --release --example load_dbp15k -- data/DBP15K/zh_en
//! ```

use std::path::PathBuf;

use subgcn::pipeline::cmd_ingest;

fn main() {
    let Some(dir) = std::env::args().nth(1).map(PathBuf::from) else {
        eprintln!("usage: load_dbp15k <dataset dir>");
        std::process::exit(2);
    };
    match cmd_ingest(&dir, None) {
        Ok(report) => {
            print!("{}", report.table());
            if report.pair.is_some() && report.is_consistent() {
                println!("counts match the published figures");
            }
        }
        Err(e) => {
            eprintln!("error: {}: {e}", e.category());
            std::process::exit(1);
        }
    }
}
