//! Low-temperature power law of the ring noise with and without flux.

use std::f64::consts::PI;

use qgs::graph::LocalScattering;
use qgs::ring::RingSpec;
use qgs::scaling::{beta_sweep, extract_coefficient, geometric_grid, MuRule};
use qgs::transport::{Dynamics, QuadratureConfig};

fn main() -> qgs::Result<()> {
    let cfg = QuadratureConfig::default();
    let betas = geometric_grid(1e2, 1e4, 25)?;
    let schrodinger = Dynamics::Schrodinger { mass: 0.5 };
    for (n, theta) in [(2, 0.0), (3, 0.0), (2, PI / 4.0), (3, PI / 6.0)] {
        let ring = RingSpec::new(n, 1.0, 0.0, LocalScattering::ScaleInvariantC { t: 0.5 })?.with_theta(theta);
        let sweep = beta_sweep(&ring, MuRule::Fixed(0.0), 0, &schrodinger, &betas, &cfg)?;
        let c = extract_coefficient(&sweep, sweep.fit.exponent.round())?;
        println!(
            "N={n} theta={theta:.4}: P_0 ~ {:.4} / beta^{:.3} (stderr {:.1e}, local slope {:.3})",
            c.coefficient, sweep.fit.exponent, sweep.fit.stderr, sweep.fit.local_slope
        );
    }
    let warm = beta_sweep(
        &RingSpec::new(3, 1.0, 0.0, LocalScattering::ScaleInvariantC { t: 0.5 })?.with_theta(PI / 6.0),
        MuRule::Fixed(0.5),
        0,
        &schrodinger,
        &betas,
        &cfg,
    )?;
    println!("mu=0.5, theta=pi/6: exponent {:.3}", warm.fit.exponent);
    Ok(())
}
