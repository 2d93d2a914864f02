//! Landauer–Büttiker currents and zero-frequency noise.
//!
//! Integrals over momentum are carried out in the dimensionless energy
//! variable `z = β_ref ω`, so `QuadratureConfig` tolerances are independent of
//! the temperature scale.

use std::cell::Cell;
use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::quadrature::{integrate_vec, QuadOptions};
use crate::ring::{dft_of_eigenvalues, RingSpec};
use crate::smatrix::ScatteringEvaluator;
use crate::{unitarity_residual, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Reservoir {
    pub beta: f64,
    pub mu: f64,
    /// Antiparticle chemical potential; only read under Dirac dynamics.
    #[serde(default)]
    pub mu_tilde: Option<f64>,
}

impl Reservoir {
    /// Reservoir with `μ̃ = −μ`.
    pub fn new(beta: f64, mu: f64) -> Reservoir {
        Reservoir { beta, mu, mu_tilde: None }
    }

    pub fn with_mu_tilde(self, mu_tilde: f64) -> Reservoir {
        Reservoir { mu_tilde: Some(mu_tilde), ..self }
    }

    pub fn mu_tilde(&self) -> f64 {
        self.mu_tilde.unwrap_or(-self.mu)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta.is_finite() && self.beta > 0.0) {
            return Err(Error::InvalidArgument(format!("beta must be positive, got {}", self.beta)));
        }
        if !self.mu.is_finite() || !self.mu_tilde().is_finite() {
            return Err(Error::InvalidArgument("chemical potentials must be finite".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Dynamics {
    Schrodinger { mass: f64 },
    DiracMassless,
}

impl Default for Dynamics {
    fn default() -> Self {
        Dynamics::Schrodinger { mass: 0.5 }
    }
}

impl Dynamics {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Dynamics::Schrodinger { mass } if !(mass.is_finite() && mass > 0.0) => {
                Err(Error::InvalidArgument(format!("mass must be positive, got {mass}")))
            }
            _ => Ok(()),
        }
    }

    pub fn omega(&self, k: f64) -> f64 {
        match *self {
            Dynamics::Schrodinger { mass } => k * k / (2.0 * mass),
            Dynamics::DiracMassless => k.abs(),
        }
    }

    /// Non-negative momentum with `ω(k) = omega`.
    pub fn momentum(&self, omega: f64) -> f64 {
        match *self {
            Dynamics::Schrodinger { mass } => (2.0 * mass * omega.max(0.0)).sqrt(),
            Dynamics::DiracMassless => omega.max(0.0),
        }
    }

    pub fn is_dirac(&self) -> bool {
        matches!(self, Dynamics::DiracMassless)
    }

    pub fn name(&self) -> &'static str {
        match self {
            Dynamics::Schrodinger { .. } => "schrodinger",
            Dynamics::DiracMassless => "dirac",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Species {
    Particle,
    Antiparticle,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Upper cutoff in `z`; `None` selects `max(50, β·μ + 50)`.
    pub z_max: Option<f64>,
    pub max_subdivisions: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig { rel_tol: 1e-10, abs_tol: 1e-14, z_max: None, max_subdivisions: 2000 }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return Err(Error::InvalidArgument("tolerances must be positive".into()));
        }
        if self.max_subdivisions == 0 {
            return Err(Error::InvalidArgument("max_subdivisions must be positive".into()));
        }
        Ok(())
    }

    fn options(&self) -> QuadOptions {
        QuadOptions { abs_tol: self.abs_tol, rel_tol: self.rel_tol, max_subdivisions: self.max_subdivisions }
    }

    /// Width of the thermal tail kept above the Fermi level, chosen so that
    /// `e^{−tail} < abs_tol`.
    fn tail(&self) -> f64 {
        50f64.max(1.0 - self.abs_tol.ln())
    }

    /// `z`-cutoff for a Fermi factor at `β`, `μ`: `max(tail, βμ + tail)`.
    pub fn z_cutoff(&self, beta: f64, mu: f64) -> f64 {
        self.z_max.unwrap_or_else(|| self.tail().max(beta * mu + self.tail()))
    }
}

fn fermi(x: f64) -> f64 {
    // 1/(1+e^x) without overflow
    if x > 0.0 {
        let e = (-x).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + x.exp())
    }
}

/// `e^z/(1+e^z)² = f(1−f)`.
fn fermi_weight(z: f64) -> f64 {
    let e = (-z.abs()).exp();
    e / ((1.0 + e) * (1.0 + e))
}

/// `ln(1 + e^x)` without overflow.
fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// Fermi occupation at momentum `k`. Antiparticles use `|k| + μ̃` in place of
/// `ω − μ` and exist only for Dirac dynamics.
pub fn occupation(k: f64, r: &Reservoir, dynamics: &Dynamics, species: Species) -> Result<f64> {
    match species {
        Species::Particle => Ok(fermi(r.beta * (dynamics.omega(k) - r.mu))),
        Species::Antiparticle if dynamics.is_dirac() => Ok(fermi(r.beta * (k.abs() + r.mu_tilde()))),
        Species::Antiparticle => {
            Err(Error::InvalidArgument("antiparticle occupation requested under Schrodinger dynamics".into()))
        }
    }
}

fn check_inputs(leads: usize, reservoirs: &[Reservoir], dynamics: &Dynamics, cfg: &QuadratureConfig) -> Result<()> {
    if reservoirs.len() != leads {
        return Err(Error::InvalidArgument(format!("{} reservoirs given for {} leads", reservoirs.len(), leads)));
    }
    for r in reservoirs {
        r.validate()?;
    }
    dynamics.validate()?;
    cfg.validate()
}

/// Reference scale and breakpoints for the `z = β_ref ω` integration.
struct EnergyGrid {
    beta_ref: f64,
    points: Vec<f64>,
}

impl EnergyGrid {
    fn new(reservoirs: &[Reservoir], dynamics: &Dynamics, cfg: &QuadratureConfig) -> EnergyGrid {
        let beta_ref = reservoirs.iter().map(|r| r.beta).fold(0.0, f64::max);
        let mut edges = Vec::new();
        let mut top: f64 = 0.0;
        for r in reservoirs {
            let mut levels = vec![r.mu];
            if dynamics.is_dirac() {
                levels.push(-r.mu_tilde());
            }
            for level in levels {
                let scale = beta_ref / r.beta;
                top = top.max(scale * cfg.z_cutoff(r.beta, level));
                for off in [-10.0, -2.0, 0.0, 2.0, 10.0] {
                    edges.push(beta_ref * level + off * scale);
                }
            }
        }
        if let Some(z) = cfg.z_max {
            top = z;
        }
        let mut points = vec![0.0];
        points.extend(edges.into_iter().filter(|&z| z > 0.0 && z < top));
        points.push(top);
        points.sort_by(f64::total_cmp);
        points.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * top);
        EnergyGrid { beta_ref, points }
    }
}

/// Momentum integrals share `∫ dk/2π (k/m) ↦ ∫ dω/2π` (Schrödinger) and
/// `∫ dk/2π ↦ ∫ dω/2π` (Dirac), so both reduce to `(1/β_ref) ∫ dz/2π`.
fn integrate_energy<F>(
    grid: &EnergyGrid,
    dim: usize,
    cfg: &QuadratureConfig,
    dynamics: &Dynamics,
    mut f: F,
) -> Result<(Vec<f64>, f64)>
where
    F: FnMut(f64, f64) -> Result<Vec<f64>>,
{
    let r = integrate_vec(
        |z| {
            let omega = z / grid.beta_ref;
            f(dynamics.momentum(omega), omega)
        },
        &grid.points,
        dim,
        &cfg.options(),
    )?;
    let scale = 1.0 / (2.0 * PI * grid.beta_ref);
    Ok((r.value.iter().map(|v| v * scale).collect(), r.error * scale))
}

#[derive(Debug, Clone)]
pub struct TransportDiagnostics {
    pub max_unitarity_residual: f64,
    pub error_estimate: f64,
}

#[derive(Debug, Clone)]
pub struct Currents {
    pub values: Vec<f64>,
    pub diagnostics: TransportDiagnostics,
}

fn particle_minus_antiparticle(k: f64, r: &Reservoir, dynamics: &Dynamics) -> f64 {
    let f = fermi(r.beta * (dynamics.omega(k) - r.mu));
    if dynamics.is_dirac() {
        f - fermi(r.beta * (k + r.mu_tilde()))
    } else {
        f
    }
}

/// Steady current in every lead,
/// `j_a = ∫₀^∞ dk/2π (k/m) Σ_b [δ_ab − |S_ab|²] d_b` (Schrödinger) or
/// `∫₀^∞ dk/2π Σ_b [δ_ab − |S_ab|²][f_b − f̃_b]` (Dirac).
pub fn steady_current(
    s: &dyn ScatteringEvaluator,
    reservoirs: &[Reservoir],
    dynamics: &Dynamics,
    cfg: &QuadratureConfig,
) -> Result<Currents> {
    let n = s.leads();
    check_inputs(n, reservoirs, dynamics, cfg)?;
    let grid = EnergyGrid::new(reservoirs, dynamics, cfg);
    let worst = Cell::new(0.0f64);
    let (values, err) = integrate_energy(&grid, n, cfg, dynamics, |k, _| {
        let m = s.s_matrix(k)?;
        worst.set(worst.get().max(unitarity_residual(&m)));
        let occ: Vec<f64> = reservoirs.iter().map(|r| particle_minus_antiparticle(k, r, dynamics)).collect();
        Ok((0..n)
            .map(|a| {
                (0..n)
                    .map(|b| {
                        let delta = if a == b { 1.0 } else { 0.0 };
                        (delta - m[(a, b)].norm_sqr()) * occ[b]
                    })
                    .sum()
            })
            .collect())
    })?;
    Ok(Currents {
        values,
        diagnostics: TransportDiagnostics { max_unitarity_residual: worst.get(), error_estimate: err },
    })
}

/// Per-lead bound `Σ_{b≠a} [ln(1+e^{μ_a β_a})/(2πβ_a) + ln(1+e^{μ_b β_b})/(2πβ_b)]`.
pub fn current_bound(reservoirs: &[Reservoir]) -> Vec<f64> {
    let term = |r: &Reservoir| softplus(r.mu * r.beta) / (2.0 * PI * r.beta);
    (0..reservoirs.len())
        .map(|a| (0..reservoirs.len()).filter(|&b| b != a).map(|b| term(&reservoirs[a]) + term(&reservoirs[b])).sum())
        .collect()
}

#[derive(Debug, Clone)]
pub struct NoiseMatrix {
    pub matrix: DMatrix<f64>,
    pub dynamics: Dynamics,
    pub reservoirs: Vec<Reservoir>,
    pub flux: Option<f64>,
    pub diagnostics: TransportDiagnostics,
}

impl NoiseMatrix {
    /// Largest `|Σ_b P_ab|`.
    pub fn kirchhoff_residual(&self) -> f64 {
        self.matrix.row_iter().map(|r| r.sum().abs()).fold(0.0, f64::max)
    }

    pub fn symmetry_residual(&self) -> f64 {
        (&self.matrix - self.matrix.transpose()).abs().max()
    }

    /// Largest deviation of `P_ab` from `P_{1, 1+((b−a) mod N)}`.
    pub fn circulant_residual(&self) -> f64 {
        let n = self.matrix.nrows();
        let mut worst: f64 = 0.0;
        for a in 0..n {
            for b in 0..n {
                worst = worst.max((self.matrix[(a, b)] - self.matrix[(0, (b + n - a) % n)]).abs());
            }
        }
        worst
    }

    /// First row `P_{1,1+n}`.
    pub fn first_row(&self) -> Vec<f64> {
        self.matrix.row(0).iter().copied().collect()
    }
}

/// Zero-frequency noise matrix from the full double-sum integrand, with
/// `d c` weights (Schrödinger, `c = 1 − d`) or `F_ab = f_a(1−f_b) + f̃_a(1−f̃_b)`
/// (Dirac).
pub fn noise_matrix(
    s: &dyn ScatteringEvaluator,
    reservoirs: &[Reservoir],
    dynamics: &Dynamics,
    cfg: &QuadratureConfig,
) -> Result<NoiseMatrix> {
    let n = s.leads();
    check_inputs(n, reservoirs, dynamics, cfg)?;
    let grid = EnergyGrid::new(reservoirs, dynamics, cfg);
    let worst = Cell::new(0.0f64);
    let (values, err) = integrate_energy(&grid, n * n, cfg, dynamics, |k, _| {
        let m = s.s_matrix(k)?;
        worst.set(worst.get().max(unitarity_residual(&m)));
        let f: Vec<f64> = reservoirs.iter().map(|r| fermi(r.beta * (dynamics.omega(k) - r.mu))).collect();
        let fa: Vec<f64> = if dynamics.is_dirac() {
            reservoirs.iter().map(|r| fermi(r.beta * (k + r.mu_tilde()))).collect()
        } else {
            vec![0.0; n]
        };
        // w[e][f] = F_ef; under Schrödinger dynamics this is d_e c_f.
        let w = |e: usize, g: usize| f[e] * (1.0 - f[g]) + fa[e] * (1.0 - fa[g]);
        let mut out = vec![0.0; n * n];
        for a in 0..n {
            for b in 0..n {
                let mut v = -m[(a, b)].norm_sqr() * w(b, b) - m[(b, a)].norm_sqr() * w(a, a);
                if a == b {
                    v += w(a, a);
                }
                let mut cross = 0.0;
                for e in 0..n {
                    let ae = m[(a, e)] * m[(b, e)].conj();
                    for g in 0..n {
                        let term = ae * m[(b, g)] * m[(a, g)].conj();
                        cross += term.re * (w(g, e) + w(e, g));
                    }
                }
                out[a * n + b] = v + 0.5 * cross;
            }
        }
        Ok(out)
    })?;
    Ok(NoiseMatrix {
        matrix: DMatrix::from_row_slice(n, n, &values),
        dynamics: *dynamics,
        reservoirs: reservoirs.to_vec(),
        flux: None,
        diagnostics: TransportDiagnostics { max_unitarity_residual: worst.get(), error_estimate: err },
    })
}

/// `δ_{n0} − ½(|σ_n|² + |σ_{N−n}|²)` at momentum `k`, with range checks.
/// The `n = 0` value is summed from the other components so that it keeps full
/// relative precision as `|σ₀| → 1`.
pub fn ring_noise_kernel(ring: &RingSpec, n: usize, k: f64) -> Result<f64> {
    let lam = ring.eigenvalues(k)?;
    let sig = dft_of_eigenvalues(&lam);
    let nn = ring.n;
    let abs2: Vec<f64> = sig.iter().map(|s| s.norm_sqr()).collect();
    for (i, &v) in abs2.iter().enumerate() {
        if !(-1e-12..=1.0 + 1e-12).contains(&v) {
            return Err(Error::IntegrandRange {
                k,
                what: if i == 0 { "|sigma_0|^2" } else { "|sigma_n|^2" },
                value: v,
            });
        }
    }
    if n == 0 {
        let deficit: f64 = abs2[1..].iter().sum();
        if !(-1e-12..=1.0 + 1e-12).contains(&deficit) {
            return Err(Error::IntegrandRange { k, what: "1-|sigma_0|^2", value: deficit });
        }
        Ok(deficit)
    } else {
        Ok(-0.5 * (abs2[n] + abs2[nn - n]))
    }
}

/// Which form of the reduced ring integral to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PnForm {
    /// Substitution `ω = z/β + μ`.
    ZSpace,
    /// Direct momentum integral (Schrödinger only).
    KSpace,
}

fn check_pn(ring: &RingSpec, n: usize, r: &Reservoir, dynamics: &Dynamics, cfg: &QuadratureConfig) -> Result<()> {
    ring.validate()?;
    r.validate()?;
    dynamics.validate()?;
    cfg.validate()?;
    if n > ring.n / 2 {
        return Err(Error::InvalidArgument(format!("n={n} outside 0..={}", ring.n / 2)));
    }
    Ok(())
}

/// `(1/β) ∫_{−βμ}^{z_max} dz/2π e^z/(1+e^z)² K((z/β + μ))`.
fn thermal_z_integral<F>(beta: f64, mu: f64, cfg: &QuadratureConfig, kernel: F) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let top = cfg.z_cutoff(beta, mu) - beta * mu.max(0.0);
    let lo = (-beta * mu).max(-top);
    let top = top.max(lo + 1.0);
    let mut pts = vec![lo];
    pts.extend([-10.0, -2.0, 0.0, 2.0, 10.0].into_iter().filter(|&z| z > lo && z < top));
    pts.push(top);
    let r = integrate_vec(|z| Ok(vec![fermi_weight(z) * kernel(z / beta + mu)?]), &pts, 1, &cfg.options())?;
    Ok(r.value[0] / (2.0 * PI * beta))
}

/// Independent noise element `P_n` of a ring attached to identical reservoirs.
pub fn ring_noise_pn(
    ring: &RingSpec,
    n: usize,
    r: &Reservoir,
    dynamics: &Dynamics,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    ring_noise_pn_with(ring, n, r, dynamics, cfg, PnForm::ZSpace)
}

pub fn ring_noise_pn_with(
    ring: &RingSpec,
    n: usize,
    r: &Reservoir,
    dynamics: &Dynamics,
    cfg: &QuadratureConfig,
    form: PnForm,
) -> Result<f64> {
    check_pn(ring, n, r, dynamics, cfg)?;
    let (beta, mu) = (r.beta, r.mu);
    match (*dynamics, form) {
        (Dynamics::Schrodinger { mass }, PnForm::ZSpace) => {
            // (2/m) ∫ dk/2π k d c K = 2 ∫ dω/2π d c K
            let v = thermal_z_integral(beta, mu, cfg, |omega| {
                ring_noise_kernel(ring, n, (2.0 * mass * omega.max(0.0)).sqrt())
            })?;
            Ok(2.0 * v)
        }
        (Dynamics::Schrodinger { mass }, PnForm::KSpace) => {
            let kf = (2.0 * mass * mu.max(0.0)).sqrt();
            let top = (2.0 * mass * (cfg.z_cutoff(beta, mu) / beta)).sqrt();
            let width = |x: f64| (2.0 * mass * (mu.max(0.0) + x / beta)).sqrt();
            let mut pts = vec![0.0, top];
            for x in [2.0, 10.0] {
                pts.push(width(x));
                if mu > 0.0 {
                    pts.push((2.0 * mass * (mu - x / beta).max(0.0)).sqrt());
                }
            }
            pts.push(kf);
            pts.retain(|&p| p >= 0.0 && p <= top);
            pts.sort_by(f64::total_cmp);
            pts.dedup_by(|a, b| (*a - *b).abs() <= 1e-15 * top);
            // The integrand is scaled by β so the tolerances act on a
            // dimensionless quantity.
            let res = integrate_vec(
                |k| {
                    let z = beta * (k * k / (2.0 * mass) - mu);
                    Ok(vec![beta * k * fermi_weight(z) * ring_noise_kernel(ring, n, k)?])
                },
                &pts,
                1,
                &cfg.options(),
            )?;
            Ok(2.0 / mass * res.value[0] / (2.0 * PI * beta))
        }
        (Dynamics::DiracMassless, PnForm::ZSpace) => {
            // F = f(1−f) + f̃(1−f̃); each term is a thermal window at μ
            // (particles) or −μ̃ (antiparticles).
            let kernel = |k: f64| ring_noise_kernel(ring, n, k);
            let part = thermal_z_integral(beta, mu, cfg, kernel)?;
            let mt = r.mu_tilde();
            let anti = if (mt + mu).abs() <= f64::EPSILON * mu.abs().max(1.0) {
                part
            } else {
                thermal_z_integral(beta, -mt, cfg, kernel)?
            };
            Ok(2.0 * (part + anti))
        }
        (Dynamics::DiracMassless, PnForm::KSpace) => {
            Err(Error::InvalidArgument("the k-space form is defined for Schrodinger dynamics only".into()))
        }
    }
}

/// Bound `|P_n| ≤ [2/(1+e^{−βμ})]/(πβ)`.
pub fn pn_bound(r: &Reservoir) -> f64 {
    2.0 * fermi(-r.beta * r.mu) / (PI * r.beta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::LocalScattering;

    fn ring(n: usize, t: f64, theta: f64) -> RingSpec {
        RingSpec::new(n, 1.0, 0.0, LocalScattering::ScaleInvariantC { t }).unwrap().with_theta(theta)
    }

    #[test]
    fn occupations() {
        let sch = Dynamics::default();
        let r = Reservoir::new(3.0, 0.0);
        assert_eq!(occupation(0.0, &r, &sch, Species::Particle).unwrap(), 0.5);
        let cold = Reservoir::new(1e6, 1.0);
        assert!(occupation(0.5, &cold, &sch, Species::Particle).unwrap() >= 1.0 - 1e-15);
        assert!(occupation(1.5, &cold, &sch, Species::Particle).unwrap() < 1e-300);
        assert!(occupation(0.5, &r, &sch, Species::Antiparticle).is_err());
        let r = Reservoir::new(2.0, 0.7);
        for k in [0.0, 0.3, 1.9] {
            let p = occupation(k, &r, &Dynamics::DiracMassless, Species::Particle).unwrap();
            let a = occupation(k, &r, &Dynamics::DiracMassless, Species::Antiparticle).unwrap();
            assert_eq!(p, a);
        }
    }

    #[test]
    fn bound_values() {
        let b = current_bound(&[Reservoir::new(1.0, 0.0), Reservoir::new(1.0, 0.0)]);
        assert!((b[0] - std::f64::consts::LN_2 / PI).abs() < 1e-15);
        let b = current_bound(&[Reservoir::new(1.0, 50.0), Reservoir::new(1.0, 50.0)]);
        assert!((b[0] - 100.0 / (2.0 * PI)).abs() < 1e-12);
    }

    #[test]
    fn z_and_k_space_agree() {
        let cfg = QuadratureConfig::default();
        let sch = Dynamics::default();
        for (theta, mu, beta) in [(0.0, 0.0, 50.0), (0.4, 0.0, 200.0), (0.3, 0.5, 30.0)] {
            let rg = ring(3, 0.5, theta);
            let r = Reservoir::new(beta, mu);
            for n in 0..=1 {
                let z = ring_noise_pn_with(&rg, n, &r, &sch, &cfg, PnForm::ZSpace).unwrap();
                let k = ring_noise_pn_with(&rg, n, &r, &sch, &cfg, PnForm::KSpace).unwrap();
                assert!((z - k).abs() <= 1e-8 * z.abs(), "{theta} {mu} {n}: {z} {k}");
            }
        }
    }

    #[test]
    fn pn_argument_checks() {
        let rg = ring(3, 0.5, 0.0);
        let cfg = QuadratureConfig::default();
        assert!(ring_noise_pn(&rg, 2, &Reservoir::new(1.0, 0.0), &Dynamics::default(), &cfg).is_err());
        assert!(ring_noise_pn(&rg, 0, &Reservoir::new(-1.0, 0.0), &Dynamics::default(), &cfg).is_err());
    }
}
