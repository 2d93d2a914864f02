//! Loads a graph file, validates it and prints its total S-matrix.
//!
//! `cargo run --example graph_from_json -- data/loop_star.json 1.5`

use qgs::graph::{validate_graph, GraphSpec};
use qgs::smatrix::GraphScatterer;

fn main() -> qgs::Result<()> {
    let mut args = std::env::args().skip(1);
    let path = args.next().unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/data/loop_star.json").into());
    let k: f64 = args.next().map(|s| s.parse().expect("k must be a number")).unwrap_or(1.5);
    let spec = GraphSpec::from_json_file(&path)?;
    let report = validate_graph(&spec);
    if !report.is_valid() {
        for v in &report.violations {
            eprintln!("{v}");
        }
        std::process::exit(1);
    }
    let s = GraphScatterer::new(spec)?.total_s(k)?;
    println!("S({k}) =");
    for row in s.matrix.row_iter() {
        let cells: Vec<String> = row.iter().map(|z| format!("{:+.6}{:+.6}i", z.re, z.im)).collect();
        println!("  {}", cells.join("  "));
    }
    println!("unitarity residual {:.2e}", s.unitarity_residual());
    Ok(())
}
