//! Low-temperature scaling of the ring noise: β sweeps, power-law fits and
//! extraction of the leading coefficient.

use rayon::prelude::*;
use serde::Serialize;

use crate::ring::RingSpec;
use crate::transport::{ring_noise_pn, Dynamics, QuadratureConfig, Reservoir};
use crate::{Error, Result};

/// Points per requested β range used by the command-line sweeps.
pub const DEFAULT_GRID_POINTS: usize = 25;

/// Largest allowed gap between the fitted exponent and the one passed to
/// [`extract_coefficient`].
pub const EXPONENT_MATCH_TOL: f64 = 0.15;

/// Largest last-two-point relative change accepted by [`extract_coefficient`].
pub const COEFFICIENT_DIAGNOSTIC_MAX: f64 = 0.05;

/// `points` values from `min` to `max`, evenly spaced in `ln β`.
pub fn geometric_grid(min: f64, max: f64, points: usize) -> Result<Vec<f64>> {
    if !(min > 0.0 && max > min && min.is_finite() && max.is_finite()) || points < 2 {
        return Err(Error::InvalidArgument(format!("bad geometric grid [{min}, {max}] with {points} points")));
    }
    let (a, b) = (min.ln(), max.ln());
    Ok((0..points)
        .map(|i| {
            if i == 0 {
                min
            } else if i == points - 1 {
                max
            } else {
                (a + (b - a) * i as f64 / (points - 1) as f64).exp()
            }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub beta: f64,
    pub mu: f64,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExponentFit {
    /// `g` in `|P| ∝ β^{−g}`.
    pub exponent: f64,
    pub stderr: f64,
    /// Intercept of `ln|P|` against `ln β`.
    pub intercept: f64,
    pub r_squared: f64,
    /// `−Δ ln|P| / Δ ln β` between the last two points.
    pub local_slope: f64,
    pub points: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepResult {
    pub theta: f64,
    /// Chemical potential of the first row (it varies under [`MuRule::FixedProduct`]).
    pub mu: f64,
    pub n: usize,
    pub dynamics: Dynamics,
    pub rows: Vec<SweepRow>,
    /// Fit over the top decade of the grid.
    pub fit: ExponentFit,
}

/// How the chemical potential follows the sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MuRule {
    Fixed(f64),
    /// `μ = L/β`, keeping `μβ = L`.
    FixedProduct(f64),
}

impl MuRule {
    fn at(&self, beta: f64) -> f64 {
        match *self {
            MuRule::Fixed(mu) => mu,
            MuRule::FixedProduct(l) => l / beta,
        }
    }
}

fn check_grid(betas: &[f64]) -> Result<()> {
    if betas.len() < 8 {
        return Err(Error::InvalidArgument(format!("sweep needs at least 8 points, got {}", betas.len())));
    }
    if betas.windows(2).any(|w| !(w[1] > w[0])) || betas[0] <= 0.0 {
        return Err(Error::InvalidArgument("beta grid must be positive and strictly increasing".into()));
    }
    if betas[betas.len() - 1] / betas[0] < 100.0 * (1.0 - 1e-12) {
        return Err(Error::InvalidArgument("beta grid must span at least two decades".into()));
    }
    Ok(())
}

/// `P_n(β)` on a grid, evaluated in parallel and collected in grid order.
pub fn beta_sweep(
    ring: &RingSpec,
    mu: MuRule,
    n: usize,
    dynamics: &Dynamics,
    betas: &[f64],
    cfg: &QuadratureConfig,
) -> Result<SweepResult> {
    check_grid(betas)?;
    let rows: Vec<SweepRow> = betas
        .par_iter()
        .map(|&beta| {
            let m = mu.at(beta);
            let r = Reservoir::new(beta, m);
            ring_noise_pn(ring, n, &r, dynamics, cfg)
                .map(|value| SweepRow { beta, mu: m, value })
                .map_err(|e| Error::SweepPoint { beta, source: Box::new(e) })
        })
        .collect::<Result<_>>()?;
    if let Some(bad) = rows.iter().find(|r| !r.value.is_finite()) {
        return Err(Error::SweepPoint {
            beta: bad.beta,
            source: Box::new(Error::Fit(format!("non-finite P_n = {}", bad.value))),
        });
    }
    let fit = fit_top_decade(&rows)?;
    Ok(SweepResult { theta: ring.theta(), mu: rows[0].mu, n, dynamics: *dynamics, rows, fit })
}

/// Least-squares slope of `ln|P|` against `ln β`, negated.
pub fn fit_exponent(rows: &[SweepRow]) -> Result<ExponentFit> {
    if rows.len() < 3 {
        return Err(Error::Fit(format!("need at least 3 points, got {}", rows.len())));
    }
    let sign = rows[0].value.signum();
    if rows.iter().any(|r| r.value == 0.0 || r.value.signum() != sign) {
        return Err(Error::Fit("P_n changes sign or vanishes within the sweep".into()));
    }
    let xs: Vec<f64> = rows.iter().map(|r| r.beta.ln()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.value.abs().ln()).collect();
    let m = xs.len() as f64;
    let xm = xs.iter().sum::<f64>() / m;
    let ym = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - xm).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - xm) * (y - ym)).sum();
    let syy: f64 = ys.iter().map(|y| (y - ym).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = ym - slope * xm;
    let sse: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let stderr = (sse / (m - 2.0) / sxx).sqrt();
    let r_squared = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
    let l = xs.len();
    let local_slope = -(ys[l - 1] - ys[l - 2]) / (xs[l - 1] - xs[l - 2]);
    Ok(ExponentFit { exponent: -slope, stderr, intercept, r_squared, local_slope, points: l })
}

/// Rows with `β ≥ β_max/10`.
pub fn top_decade(rows: &[SweepRow]) -> &[SweepRow] {
    let Some(last) = rows.last() else { return rows };
    let cut = last.beta / 10.0 * (1.0 - 1e-12);
    let start = rows.iter().position(|r| r.beta >= cut).unwrap_or(0);
    &rows[start..]
}

pub fn fit_top_decade(rows: &[SweepRow]) -> Result<ExponentFit> {
    fit_exponent(top_decade(rows))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoefficientResult {
    pub exponent: f64,
    /// Extrapolated `lim β^g P_n`.
    pub coefficient: f64,
    /// `β^g P_n` at the largest β.
    pub last_value: f64,
    /// Relative change of `β^g P_n` between the last two points.
    pub diagnostic: f64,
}

/// Extrapolates `β^g P_n` to `β → ∞`. The last step is Richardson-extrapolated
/// with the correction order read off the preceding step; when that order is
/// not resolvable the last value is kept.
pub fn extract_coefficient(sweep: &SweepResult, exponent: f64) -> Result<CoefficientResult> {
    if (sweep.fit.exponent - exponent).abs() > EXPONENT_MATCH_TOL {
        return Err(Error::Fit(format!(
            "fitted exponent {:.4} is not within {EXPONENT_MATCH_TOL} of {exponent}",
            sweep.fit.exponent
        )));
    }
    let c: Vec<f64> = sweep.rows.iter().map(|r| r.beta.powf(exponent) * r.value).collect();
    let l = c.len();
    if l < 3 {
        return Err(Error::Fit("need at least 3 sweep points".into()));
    }
    let last = c[l - 1];
    let diagnostic = ((last - c[l - 2]) / last).abs();
    if !(diagnostic <= COEFFICIENT_DIAGNOSTIC_MAX) {
        return Err(Error::Fit(format!("coefficient not converged: last relative change {diagnostic:.3e}")));
    }
    let d1 = c[l - 2] - c[l - 3];
    let d2 = last - c[l - 2];
    let ratio = d2 / d1;
    let coefficient = if d1 != 0.0 && ratio > 0.0 && ratio < 0.95 { last + d2 * ratio / (1.0 - ratio) } else { last };
    Ok(CoefficientResult { exponent, coefficient, last_value: last, diagnostic })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProfilePoint {
    pub theta: f64,
    pub g: f64,
    pub stderr: f64,
    pub local_slope: f64,
}

/// `g(θ)` from one sweep per angle.
pub fn theta_profile(
    ring: &RingSpec,
    mu: f64,
    n: usize,
    dynamics: &Dynamics,
    thetas: &[f64],
    betas: &[f64],
    cfg: &QuadratureConfig,
) -> Result<Vec<ProfilePoint>> {
    thetas
        .iter()
        .map(|&theta| {
            let s = beta_sweep(&ring.with_theta(theta), MuRule::Fixed(mu), n, dynamics, betas, cfg)?;
            Ok(ProfilePoint { theta, g: s.fit.exponent, stderr: s.fit.stderr, local_slope: s.fit.local_slope })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rows(g: f64, c: f64, corr: f64) -> Vec<SweepRow> {
        geometric_grid(10.0, 1e4, 19)
            .unwrap()
            .into_iter()
            .map(|beta| SweepRow { beta, mu: 0.0, value: c * beta.powf(-g) * (1.0 + corr / beta) })
            .collect()
    }

    #[test]
    fn grid_shape() {
        let g = geometric_grid(1e2, 1e4, 25).unwrap();
        assert_eq!(g.len(), 25);
        assert_eq!(g[0], 1e2);
        assert_eq!(g[24], 1e4);
        assert!((g[12] - 1e3).abs() < 1e-9);
        assert!(geometric_grid(1.0, 1.0, 5).is_err());
    }

    #[test]
    fn exact_power_law() {
        let f = fit_exponent(&rows(2.0, 3.0, 0.0)).unwrap();
        assert!((f.exponent - 2.0).abs() < 1e-12);
        assert!((f.intercept - 3f64.ln()).abs() < 1e-10);
        assert!(f.stderr < 1e-10 && (f.r_squared - 1.0).abs() < 1e-12);
        let neg: Vec<SweepRow> = rows(1.0, -2.0, 0.0);
        assert!((fit_exponent(&neg).unwrap().exponent - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sign_change_rejected() {
        let mut r = rows(1.0, 1.0, 0.0);
        r[3].value = -r[3].value;
        assert!(matches!(fit_exponent(&r), Err(Error::Fit(_))));
    }

    #[test]
    fn top_decade_selection() {
        let r = rows(1.0, 1.0, 0.0);
        let top = top_decade(&r);
        assert!((top[0].beta - 1e3).abs() < 1e-9);
        assert_eq!(top.len(), 7);
    }

    #[test]
    fn richardson_removes_leading_correction() {
        let r = rows(2.0, 5.0, 30.0);
        let sweep = SweepResult {
            theta: 0.1,
            mu: 0.0,
            n: 0,
            dynamics: Dynamics::default(),
            fit: fit_top_decade(&r).unwrap(),
            rows: r,
        };
        let c = extract_coefficient(&sweep, 2.0).unwrap();
        assert!((c.coefficient - 5.0).abs() < 1e-9);
        assert!((c.last_value - 5.0).abs() > 1e-3);
        assert!(extract_coefficient(&sweep, 1.0).is_err());
    }
}
