//! Reference values checked against independent evaluations.

use std::f64::consts::{LN_2, PI};

use qgs::graph::LocalScattering;
use qgs::quadrature::{integrate, QuadOptions};
use qgs::ring::{chi, expansion_coeffs, lambda_c, ring_poles_c, sigmas, two_lead_quantities, RingSpec};
use qgs::scaling::{beta_sweep, extract_coefficient, fit_exponent, geometric_grid, theta_profile, MuRule, SweepRow};
use qgs::transport::{
    current_bound, noise_matrix, pn_bound, ring_noise_pn, steady_current, Dynamics, QuadratureConfig, Reservoir,
};

fn ring_c(n: usize, t: f64, theta: f64) -> RingSpec {
    RingSpec::new(n, 1.0, 0.0, LocalScattering::ScaleInvariantC { t }).unwrap().with_theta(theta)
}

fn ring_dirac(n: usize, t: f64, theta: f64) -> RingSpec {
    RingSpec::new(n, 1.0, 0.0, LocalScattering::DiracStep { t }).unwrap().with_theta(theta)
}

fn sch() -> Dynamics {
    Dynamics::Schrodinger { mass: 0.5 }
}

/// `2 Σ (−1)^{n+1}/n²`, summed in pairs from the tail.
fn alternating_zeta2() -> f64 {
    let terms = 2_000_000u64;
    let mut s = 0.0;
    for n in (1..=terms).rev() {
        let x = 1.0 / (n as f64 * n as f64);
        s += if n % 2 == 1 { x } else { -x };
    }
    2.0 * s
}

/// `lim (1 − |σ₀(k)|²)/k²` from two small momenta.
fn k2_coefficient(ring: &RingSpec) -> f64 {
    let deficit = |k: f64| -> f64 { sigmas(ring, k).unwrap()[1..].iter().map(|s| s.norm_sqr()).sum::<f64>() / (k * k) };
    let h = 1e-4;
    (4.0 * deficit(h) - deficit(2.0 * h)) / 3.0
}

#[test]
fn fermi_moment_integrals() {
    let o = QuadOptions::default();
    let w = |z: f64| (-z.abs()).exp() / (1.0 + (-z.abs()).exp()).powi(2);
    let (a, _) = integrate(|z| z * w(z), 0.0, 80.0, &o).unwrap();
    let (b, _) = integrate(|z| z * z * w(z), 0.0, 80.0, &o).unwrap();
    assert!((a - LN_2).abs() < 1e-11);
    let series = alternating_zeta2();
    assert!((series - PI * PI / 6.0).abs() < 1e-11);
    assert!((b - series).abs() < 1e-10);
}

#[test]
fn expansion_examples() {
    let e = expansion_coeffs(&ring_c(3, 0.5, PI)).unwrap();
    assert_eq!(e.chi0, -1.0);
    assert!((e.chi_theta.unwrap() + 1.0).abs() < 1e-15);
    let e = expansion_coeffs(&ring_c(3, 0.5, PI / 2.0)).unwrap();
    let want = chi(0.5, 1.0, PI / 2.0);
    assert!((e.slope_fd.im - want).abs() / want.abs() < 1e-6 && e.slope_fd.re.abs() < 1e-6);
}

#[test]
fn second_order_coefficient_is_half_chi_squared() {
    for (t, theta) in [(0.5, PI / 2.0), (0.3, 1.0), (0.7, 2.5)] {
        let e = expansion_coeffs(&ring_c(3, t, theta)).unwrap();
        let c = chi(t, 1.0, theta);
        let got = e.second_order_fd;
        assert!((got.re - c * c / 2.0).abs() < 1e-5 * c * c, "{got} vs {}", c * c / 2.0);
        assert!((got.re - 2.0 * c * c).abs() > 0.5 * c * c);
    }
    let e = expansion_coeffs(&ring_c(3, 0.5, 0.0)).unwrap();
    assert!((e.second_order_fd.re + e.chi0 * e.chi0 / 2.0).abs() < 1e-5);
}

#[test]
fn energy_dependent_slope_for_all_theta() {
    let (t, eta, d) = (0.4, 0.7, 1.3);
    let ring = RingSpec::new(3, d, 0.0, LocalScattering::EnergyDependentE { t, eta }).unwrap();
    for theta in [0.0, 0.5, 2.0] {
        let h = 1e-5 / d;
        let fd = (ring.lambda(h, theta).unwrap() - ring.lambda(-h, theta).unwrap()) / (2.0 * h);
        let want = 2.0 * (t - 1.0) * d / (t * (1.0 - theta.cos()) + d * eta);
        assert!((fd.im - want).abs() < 1e-6 * want.abs() && fd.re.abs() < 1e-6);
        assert!((ring.lambda(0.0, theta).unwrap() + 1.0).norm() < 1e-15);
    }
}

#[test]
fn small_k_deficit_at_zero_flux() {
    for n in [2, 3, 4, 7] {
        let s = sigmas(&ring_c(n, 0.37, 0.0), 1e-9).unwrap();
        let deficit = 1.0 - s[0].norm_sqr();
        let want = 4.0 * (n as f64 - 1.0) / (n * n) as f64;
        assert!((deficit - want).abs() < 1e-6, "N={n}");
    }
}

#[test]
fn k2_coefficient_is_variance_of_chi() {
    let (n, t, theta) = (3, 0.5, PI / 12.0);
    let chis: Vec<f64> = (0..n).map(|l| chi(t, 1.0, theta + 2.0 * PI * l as f64 / n as f64)).collect();
    let mean = chis.iter().sum::<f64>() / n as f64;
    let var = chis.iter().map(|c| c * c).sum::<f64>() / n as f64 - mean * mean;
    let fd = k2_coefficient(&ring_c(n, t, theta));
    assert!((fd - var).abs() < 1e-5 * var, "{fd} vs {var}");
}

#[test]
fn non_commuting_limits() {
    // k → 0 at θ = 0 gives +1; θ → 0 at k = 0⁺ (θ first, fixed small θ) gives −1
    let t = 0.5;
    assert!((lambda_c(t, 1e-9, 0.0) - 1.0).norm() < 1e-8);
    assert!((lambda_c(t, 1e-12, 1e-4) + 1.0).norm() < 1e-3);
    assert!((lambda_c(t, PI, 0.0) + 1.0).norm() < 1e-15);
    assert!((lambda_c(t, PI / 2.0, PI / 2.0) - 1.0).norm() < 1e-15);
}

#[test]
fn transmission_nested_limits() {
    let theta = 0.6;
    // t → 1 after cos kd → cos θ
    let inner_first = |t: f64| two_lead_quantities(t, theta + 1e-9, theta).unwrap().tau;
    assert!((inner_first(1.0 - 1e-6) - 1.0).abs() < 1e-6);
    // cos kd → cos θ after t → 1
    let t = 1.0 - 1e-13;
    let outer_first = two_lead_quantities(t, theta + 1e-3, theta).unwrap().tau;
    assert!(outer_first < 1e-12);
}

#[test]
fn pole_examples() {
    let p = ring_poles_c(0.5, 0.0);
    assert!((p[0].u - 1.0).norm() < 1e-15 && p[0].kd.unwrap().norm() < 1e-15);
    assert!(p[1].kd.is_none());
    for pole in ring_poles_c(0.3, PI / 4.0).iter().chain(ring_poles_c(0.8, PI / 4.0).iter()) {
        assert!(pole.kd.unwrap().im.abs() > 1e-6);
        assert!(pole.residual < 1e-12);
        let re = pole.kd.unwrap().re;
        assert!((-PI..PI).contains(&re));
    }
}

#[test]
fn current_bound_examples() {
    let b = current_bound(&[Reservoir::new(1.0, 0.0), Reservoir::new(1.0, 0.0)]);
    assert!((b[0] - LN_2 / PI).abs() < 1e-15 && (b[1] - LN_2 / PI).abs() < 1e-15);
    let b = current_bound(&[Reservoir::new(1.0, 50.0), Reservoir::new(1.0, -3.0), Reservoir::new(2.0, 0.1)]);
    assert!(b.iter().all(|x| *x >= 0.0));
}

#[test]
fn equilibrium_and_dirac_null_currents() {
    let cfg = QuadratureConfig::default();
    let ring = ring_c(3, 0.4, 0.5);
    let res = vec![Reservoir::new(5.0, 0.3); 3];
    let j = steady_current(&ring, &res, &sch(), &cfg).unwrap();
    assert!(j.values.iter().all(|v| v.abs() < 1e-14), "{:?}", j.values);
    let dirac = ring_dirac(3, 0.4, 0.5);
    let j = steady_current(&dirac, &res, &Dynamics::DiracMassless, &cfg).unwrap();
    assert!(j.values.iter().all(|v| *v == 0.0));
}

#[test]
fn noise_reduction_and_structure() {
    let cfg = QuadratureConfig::default();
    for (ring, dynamics) in [
        (ring_c(2, 0.5, PI / 4.0), sch()),
        (ring_c(3, 0.3, 0.4), sch()),
        (ring_c(4, 0.6, 1.1), sch()),
        (ring_dirac(3, 0.5, 0.3), Dynamics::DiracMassless),
    ] {
        for mu in [0.0, 0.4] {
            let r = Reservoir::new(20.0, mu);
            let p = noise_matrix(&ring, &vec![r; ring.n], &dynamics, &cfg).unwrap();
            assert!(p.kirchhoff_residual() < 1e-8);
            assert!(p.symmetry_residual() < 1e-10);
            assert!(p.circulant_residual() < 1e-10);
            let row = p.first_row();
            for n in 0..=ring.n / 2 {
                let pn = ring_noise_pn(&ring, n, &r, &dynamics, &cfg).unwrap();
                assert!((pn - row[n]).abs() <= 1e-6 * pn.abs(), "N={} n={n}: {pn} vs {}", ring.n, row[n]);
                let bound = pn_bound(&r);
                if n == 0 {
                    assert!(pn >= 0.0 && pn <= bound);
                } else {
                    assert!(pn <= 0.0 && -pn <= bound);
                }
            }
        }
    }
}

#[test]
fn two_lead_noise_shape_and_zero_flux_value() {
    let cfg = QuadratureConfig::default();
    let ring = ring_c(2, 0.5, 0.0);
    let r = Reservoir::new(1e3, 0.0);
    let p = noise_matrix(&ring, &[r, r], &sch(), &cfg).unwrap();
    let p11 = p.matrix[(0, 0)];
    for (i, j, sign) in [(0, 1, -1.0), (1, 0, -1.0), (1, 1, 1.0)] {
        assert!((p.matrix[(i, j)] - sign * p11).abs() < 1e-12 * p11);
    }
    assert!((1e3 * p11 * 2.0 * PI - 1.0).abs() < 0.01);
}

#[test]
fn schrodinger_two_lead_coefficient() {
    let cfg = QuadratureConfig::default();
    let (t, theta, d) = (0.5, PI / 4.0, 1.0);
    let want = 4.0 * (1.0f64 - t).powi(2) * d * d * theta.cos().powi(2) * LN_2 / (PI * t * t * theta.sin().powi(4));
    assert!((want - 8.0 * LN_2 / PI).abs() < 1e-12);
    let betas = geometric_grid(1e2, 1e4, 25).unwrap();
    let sweep = beta_sweep(&ring_c(2, t, theta), MuRule::Fixed(0.0), 0, &sch(), &betas, &cfg).unwrap();
    let c = extract_coefficient(&sweep, 2.0).unwrap();
    assert!((c.coefficient - want).abs() < 0.02 * want, "{c:?} vs {want}");
}

#[test]
fn general_n_zero_flux_coefficient() {
    let cfg = QuadratureConfig::default();
    let betas = geometric_grid(1e2, 1e4, 25).unwrap();
    let sweep = beta_sweep(&ring_c(3, 0.5, 0.0), MuRule::Fixed(0.0), 0, &sch(), &betas, &cfg).unwrap();
    let c = extract_coefficient(&sweep, 1.0).unwrap();
    let want = 4.0 / (9.0 * PI);
    assert!((c.coefficient - want).abs() < 0.01 * want);
    assert!(sweep.rows.windows(2).all(|w| w[1].value < w[0].value));
}

#[test]
fn dirac_coefficient_matches_series_oracle() {
    let cfg = QuadratureConfig::default();
    let ring = ring_dirac(3, 0.5, PI / 12.0);
    let want = 4.0 / (2.0 * PI) * k2_coefficient(&ring) * alternating_zeta2();
    let betas = geometric_grid(1e3, 1e5, 25).unwrap();
    let sweep = beta_sweep(&ring, MuRule::Fixed(0.0), 0, &Dynamics::DiracMassless, &betas, &cfg).unwrap();
    let c = extract_coefficient(&sweep, 3.0).unwrap();
    assert!((c.coefficient - want).abs() < 0.02 * want, "{c:?} vs {want}");
}

#[test]
fn fixed_mu_beta_keeps_flux_law() {
    let cfg = QuadratureConfig::default();
    let betas = geometric_grid(1e2, 1e4, 25).unwrap();
    let ring = ring_c(3, 0.5, PI / 6.0);
    let s = beta_sweep(&ring, MuRule::FixedProduct(1.0), 0, &sch(), &betas, &cfg).unwrap();
    assert!((s.fit.exponent - 2.0).abs() < 0.10, "{:?}", s.fit);
}

#[test]
fn dispersion_changes_the_sweep() {
    let cfg = QuadratureConfig::default();
    let betas = geometric_grid(1e2, 1e4, 9).unwrap();
    let a = beta_sweep(&ring_c(3, 0.5, 0.3), MuRule::Fixed(0.0), 0, &sch(), &betas, &cfg).unwrap();
    let b =
        beta_sweep(&ring_dirac(3, 0.5, 0.3), MuRule::Fixed(0.0), 0, &Dynamics::DiracMassless, &betas, &cfg).unwrap();
    assert!(a.rows.iter().zip(&b.rows).all(|(x, y)| (x.value - y.value).abs() > 1e-3 * x.value.abs()));
}

#[test]
fn local_slope_approaches_plateau() {
    let cfg = QuadratureConfig::default();
    let ring = ring_c(3, 0.5, PI / 6.0);
    let mut distances = Vec::new();
    for lo in [1e2, 1e3, 1e4] {
        let betas = geometric_grid(lo, lo * 100.0, 13).unwrap();
        let s = beta_sweep(&ring, MuRule::Fixed(0.0), 0, &sch(), &betas, &cfg).unwrap();
        distances.push((s.fit.local_slope - 2.0).abs());
    }
    assert!(distances.windows(2).all(|w| w[1] <= w[0]), "{distances:?}");
}

#[test]
fn noise_is_flux_periodic() {
    let cfg = QuadratureConfig::default();
    let base = RingSpec::new(3, 1.0, 0.0, LocalScattering::ScaleInvariantC { t: 0.4 }).unwrap();
    let r = Reservoir::new(30.0, 0.0);
    for flux in [-2.5, -0.3, 0.7, 1.9, 4.0] {
        let a = ring_noise_pn(&base.with_flux(flux), 1, &r, &sch(), &cfg).unwrap();
        let b = ring_noise_pn(&base.with_flux(flux + 2.0 * PI), 1, &r, &sch(), &cfg).unwrap();
        assert!((a - b).abs() <= 1e-8 * a.abs());
    }
}

#[test]
fn profile_is_even_in_theta() {
    let cfg = QuadratureConfig::default();
    let betas = geometric_grid(1e2, 1e4, 13).unwrap();
    let thetas = [0.2, -0.2, 0.7, -0.7];
    let p = theta_profile(&ring_c(3, 0.5, 0.0), 0.0, 0, &sch(), &thetas, &betas, &cfg).unwrap();
    assert!((p[0].g - p[1].g).abs() < 1e-8 && (p[2].g - p[3].g).abs() < 1e-8);
}

#[test]
fn fit_rejects_sign_changes() {
    let rows: Vec<SweepRow> = [1.0, -1.0, 1.0]
        .iter()
        .enumerate()
        .map(|(i, v)| SweepRow { beta: 10f64.powi(i as i32), mu: 0.0, value: *v })
        .collect();
    assert!(fit_exponent(&rows).is_err());
}
