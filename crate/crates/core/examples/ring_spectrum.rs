//! Fundamental eigenvalue of a ring and the Fourier coefficients of its row.

use std::f64::consts::PI;

use qgs::graph::LocalScattering;
use qgs::ring::{sigmas, RingSpec};

fn main() -> qgs::Result<()> {
    let ring = RingSpec::new(3, 1.0, -PI / 2.0, LocalScattering::ScaleInvariantC { t: 0.5 })?;
    println!("theta = {:.4}", ring.theta());
    println!("{:>6} {:>10} {:>10} {:>9} {:>9} {:>9}", "kd", "Re lam", "Im lam", "|s0|^2", "|s1|^2", "|s2|^2");
    for i in 0..=16 {
        let kd = 0.02 + i as f64 * (2.0 * PI - 0.04) / 16.0;
        let lam = ring.lambda(kd, ring.theta())?;
        let s = sigmas(&ring, kd)?;
        println!(
            "{kd:6.3} {:10.6} {:10.6} {:9.5} {:9.5} {:9.5}",
            lam.re,
            lam.im,
            s[0].norm_sqr(),
            s[1].norm_sqr(),
            s[2].norm_sqr()
        );
    }
    Ok(())
}
