//! Steady currents through a graph driven out of equilibrium.

use qgs::graph::GraphSpec;
use qgs::smatrix::GraphScatterer;
use qgs::transport::{current_bound, steady_current, Dynamics, QuadratureConfig, Reservoir};

fn main() -> qgs::Result<()> {
    let spec = GraphSpec::from_json_file(concat!(env!("CARGO_MANIFEST_DIR"), "/data/loop_star.json"))?;
    let g = GraphScatterer::new(spec)?;
    let dynamics = Dynamics::Schrodinger { mass: 0.5 };
    let cfg = QuadratureConfig::default();
    for (mu1, mu2) in [(0.5, 0.5), (0.6, 0.4), (1.0, 0.0)] {
        let res = [Reservoir::new(8.0, mu1), Reservoir::new(8.0, mu2)];
        let j = steady_current(&g, &res, &dynamics, &cfg)?;
        let bound = current_bound(&res);
        println!(
            "mu = ({mu1}, {mu2}): J = [{:+.6e}, {:+.6e}], bound {:.4}, quadrature error {:.1e}",
            j.values[0], j.values[1], bound[0], j.diagnostics.error_estimate
        );
    }
    Ok(())
}
