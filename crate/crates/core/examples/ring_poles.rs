//! Complex resonance positions of the scale-invariant ring.

use std::f64::consts::PI;

use qgs::ring::ring_poles_c;

fn main() {
    for t in [0.3, 0.5, 0.8] {
        for theta in [0.0, PI / 6.0, PI / 3.0] {
            for (i, p) in ring_poles_c(t, theta).iter().enumerate() {
                match p.kd {
                    Some(kd) => println!(
                        "t={t:.1} theta={theta:.3} branch {i}: kd = {:+.6} {:+.6}i  (residual {:.1e})",
                        kd.re, kd.im, p.residual
                    ),
                    None => println!("t={t:.1} theta={theta:.3} branch {i}: pole at infinity"),
                }
            }
        }
    }
}
