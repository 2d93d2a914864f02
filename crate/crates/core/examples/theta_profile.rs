//! Exponent of the Dirac ring noise as a function of the flux per edge.

use std::f64::consts::PI;

use qgs::graph::LocalScattering;
use qgs::ring::RingSpec;
use qgs::scaling::{geometric_grid, theta_profile};
use qgs::transport::{Dynamics, QuadratureConfig};

fn main() -> qgs::Result<()> {
    let ring = RingSpec::new(3, 1.0, 0.0, LocalScattering::DiracStep { t: 0.5 })?;
    let thetas: Vec<f64> = (0..=24).map(|i| i as f64 * PI / 48.0).collect();
    let betas = geometric_grid(1e3, 1e5, 25)?;
    let profile = theta_profile(&ring, 0.0, 0, &Dynamics::DiracMassless, &thetas, &betas, &QuadratureConfig::default())?;
    println!("{:>8} {:>8} {:>9}", "theta", "g", "stderr");
    for p in profile {
        println!("{:8.4} {:8.4} {:9.1e}", p.theta, p.g, p.stderr);
    }
    Ok(())
}
