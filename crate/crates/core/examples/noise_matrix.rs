//! Equilibrium noise matrix of a three-lead ring and its reduced first row.

use std::f64::consts::PI;

use qgs::graph::LocalScattering;
use qgs::ring::RingSpec;
use qgs::transport::{noise_matrix, pn_bound, ring_noise_pn, Dynamics, QuadratureConfig, Reservoir};

fn main() -> qgs::Result<()> {
    let ring = RingSpec::new(3, 1.0, -PI / 2.0, LocalScattering::ScaleInvariantC { t: 0.5 })?;
    let r = Reservoir::new(100.0, 0.0);
    let dynamics = Dynamics::Schrodinger { mass: 0.5 };
    let cfg = QuadratureConfig::default();
    let p = noise_matrix(&ring, &[r; 3], &dynamics, &cfg)?;
    println!("P =\n{:.6e}", p.matrix);
    println!(
        "row sums {:.1e}, symmetry {:.1e}, circulant {:.1e}",
        p.kirchhoff_residual(),
        p.symmetry_residual(),
        p.circulant_residual()
    );
    for n in 0..3 {
        println!("P_{n} = {:+.6e}", ring_noise_pn(&ring, n, &r, &dynamics, &cfg)?);
    }
    println!("|P_n| <= {:.6e}", pn_bound(&r));
    Ok(())
}
