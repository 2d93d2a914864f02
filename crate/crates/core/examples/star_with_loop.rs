//! Two-lead graph with a magnetic loop, assembled in code.

use std::collections::BTreeMap;

use qgs::graph::{ExternalEdge, GraphSpec, InternalEdge, LocalScattering};
use qgs::smatrix::GraphScatterer;

fn main() -> qgs::Result<()> {
    let mut local = BTreeMap::new();
    local.insert(1, LocalScattering::ScaleInvariantC { t: 0.4 });
    local.insert(2, LocalScattering::ScaleInvariantC { t: 0.7 });
    let spec = GraphSpec {
        vertices: 2,
        internal: vec![
            InternalEdge { a: 1, b: 2, j: 1, length: 1.3, theta: 0.0 },
            InternalEdge { a: 2, b: 2, j: 1, length: 2.0, theta: 0.9 },
        ],
        external: vec![ExternalEdge { a: 1, j: 1 }, ExternalEdge { a: 1, j: 2 }],
        local,
    };
    let g = GraphScatterer::new(spec)?;
    println!("{:>6} {:>10} {:>10} {:>10}", "k", "|S11|^2", "|S21|^2", "unitarity");
    for i in 1..=12 {
        let k = 0.25 * i as f64;
        let s = g.total_s(k)?;
        let m = &s.matrix;
        println!("{k:6.2} {:10.6} {:10.6} {:10.1e}", m[(0, 0)].norm_sqr(), m[(1, 0)].norm_sqr(), s.unitarity_residual());
    }
    Ok(())
}
