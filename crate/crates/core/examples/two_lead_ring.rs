//! Reflection and transmission of the two-lead ring as the flux varies.

use std::f64::consts::PI;

use qgs::ring::two_lead_quantities;

fn main() -> qgs::Result<()> {
    let (t, kd) = (0.4, 1.1);
    println!("{:>8} {:>10} {:>10}", "theta", "rho", "tau");
    for i in 0..=12 {
        let theta = -PI + i as f64 * PI / 6.0;
        let q = two_lead_quantities(t, kd, theta)?;
        println!("{theta:8.4} {:10.6} {:10.6}", q.rho, q.tau);
    }
    Ok(())
}
