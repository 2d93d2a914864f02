//! Closed forms for the regular ring with `N` leads.
//!
//! `N` identical three-channel vertices are glued into a polygon with edges of
//! common length `d`; vertex `a` carries lead `a`. A total flux `Φ` threads the
//! ring and every edge `a → a+1` carries the line integral `Φ/N`, so the
//! phase per edge is `θ = −Φ/N`. All observables are periodic in `Φ` with
//! period `Φ₀ = 2π`.
//!
//! The total scattering matrix is circulant, `S = W⁻¹ Λ W`, with `W` the
//! unitary DFT matrix and `Λ = diag λ(k, θ + 2π(b−1)/N)`. Everything about the
//! ring is encoded in the fundamental eigenvalue `λ`.

use std::f64::consts::PI;

use crate::graph::{ExternalEdge, GraphSpec, InternalEdge, LocalScattering};
use crate::smatrix::{local_s, ScatteringEvaluator, TotalSMatrix};
use crate::{max_abs, CMatrix, Error, Result, C64};

/// Below this modulus the denominator of the fundamental eigenvalue is a pole.
pub const EIGEN_POLE_TOL: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq)]
pub struct RingSpec {
    pub n: usize,
    pub d: f64,
    /// Total flux `Φ`.
    pub flux: f64,
    pub local: LocalScattering,
}

impl RingSpec {
    pub fn new(n: usize, d: f64, flux: f64, local: LocalScattering) -> Result<RingSpec> {
        let r = RingSpec { n, d, flux, local };
        r.validate()?;
        Ok(r)
    }

    /// Flux per edge, `θ = −Φ/N`.
    pub fn theta(&self) -> f64 {
        -self.flux / self.n as f64
    }

    /// Same ring with the flux chosen so that `θ` takes the given value.
    pub fn with_theta(&self, theta: f64) -> RingSpec {
        RingSpec { flux: -theta * self.n as f64, ..self.clone() }
    }

    pub fn with_flux(&self, flux: f64) -> RingSpec {
        RingSpec { flux, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidArgument(format!("ring needs N >= 2 leads, got {}", self.n)));
        }
        if !(self.d.is_finite() && self.d > 0.0) {
            return Err(Error::InvalidArgument(format!("edge length must be positive, got {}", self.d)));
        }
        if !self.flux.is_finite() {
            return Err(Error::InvalidArgument("flux must be finite".into()));
        }
        if let Some(t) = self.local.transmission_parameter() {
            if !(t > 0.0 && t < 1.0) {
                return Err(Error::InvalidArgument(format!("t={t} outside (0,1)")));
            }
        }
        let s = local_s(&self.local, 1.0)?;
        if s.nrows() != 3 || s.ncols() != 3 {
            return Err(Error::InvalidArgument("ring vertices need a 3x3 local matrix".into()));
        }
        // P S P⁻¹ = S with P swapping channels 2 and 3.
        let mut swapped = s.clone();
        swapped.swap_rows(1, 2);
        swapped.swap_columns(1, 2);
        if max_abs(&(swapped - &s)) > 1e-12 {
            return Err(Error::InvalidArgument("local matrix is not parity symmetric".into()));
        }
        Ok(())
    }

    /// The ring as a general graph, for the assembly route.
    pub fn to_graph(&self) -> GraphSpec {
        let n = self.n;
        let edge_theta = self.flux / n as f64;
        let internal = (1..=n)
            .map(|a| {
                let b = a % n + 1;
                // For N = 2 both edges join vertices 1 and 2.
                let j = if n == 2 { a } else { 1 };
                InternalEdge { a, b, j, length: self.d, theta: edge_theta }
            })
            .collect();
        GraphSpec {
            vertices: n,
            internal,
            external: (1..=n).map(|a| ExternalEdge { a, j: 1 }).collect(),
            local: (1..=n).map(|a| (a, self.local.clone())).collect(),
        }
    }

    /// Fundamental eigenvalue `λ(k, θ)` at an arbitrary angle.
    pub fn lambda(&self, k: f64, theta: f64) -> Result<C64> {
        let kd = k * self.d;
        match self.local {
            LocalScattering::ScaleInvariantC { t } | LocalScattering::DiracStep { t } => Ok(lambda_c(t, kd, theta)),
            LocalScattering::EnergyDependentE { t, eta } => Ok(lambda_e(t, eta, k, self.d, theta)),
            LocalScattering::Constant(ref m) => fundamental_lambda(m, kd, theta),
        }
    }

    /// `λ_b = λ(k, θ + 2π(b−1)/N)` for `b = 1..N`.
    pub fn eigenvalues(&self, k: f64) -> Result<Vec<C64>> {
        let theta = self.theta();
        (0..self.n).map(|b| self.lambda(k, theta + 2.0 * PI * b as f64 / self.n as f64)).collect()
    }

    pub fn omega(&self) -> C64 {
        C64::from_polar(1.0, 2.0 * PI / self.n as f64)
    }
}

impl ScatteringEvaluator for RingSpec {
    fn leads(&self) -> usize {
        self.n
    }

    fn s_matrix(&self, k: f64) -> Result<CMatrix> {
        Ok(ring_total_s(self, k)?.matrix)
    }
}

/// Evaluates the quotient giving the fundamental eigenvalue for any 3×3 local
/// matrix (entries at the same `k` as `kd`).
pub fn fundamental_lambda(s: &CMatrix, kd: f64, theta: f64) -> Result<C64> {
    let e1 = C64::from_polar(1.0, kd);
    let e2 = e1 * e1;
    let et = C64::from_polar(1.0, theta);
    let etc = et.conj();
    let (s11, s12, s13) = (s[(0, 0)], s[(0, 1)], s[(0, 2)]);
    let (s21, s22, s23) = (s[(1, 0)], s[(1, 1)], s[(1, 2)]);
    let (s31, s32, s33) = (s[(2, 0)], s[(2, 1)], s[(2, 2)]);
    let det = s.determinant();
    let num = e2 * det + e1 * ((s11 * s23 - s13 * s21) * et + (s11 * s32 - s31 * s12) * etc) - s11;
    let den = e2 * (s22 * s33 - s23 * s32) + e1 * (s23 * et + s32 * etc) - C64::from(1.0);
    if den.norm() < EIGEN_POLE_TOL {
        return Err(Error::EigenvaluePole { kd, theta, denominator: den.norm() });
    }
    Ok(num / den)
}

/// Angle reduced to `(−π, π]`.
pub fn reduce_angle(theta: f64) -> f64 {
    let r = theta.rem_euclid(2.0 * PI);
    if r > PI {
        r - 2.0 * PI
    } else {
        r
    }
}

/// Fundamental eigenvalue for the scale-invariant vertex `S^C(t)`:
/// `λ = −[t(cos θ − cos kd) + i(t−1) sin kd] / [t(cos θ − cos kd) − i(t−1) sin kd]`.
///
/// At the removable points `kd ≡ θ (mod 2π)` with `sin kd = 0` the value of
/// the limit `k → kd` at fixed `θ`, which is `+1`, is returned.
pub fn lambda_c(t: f64, kd: f64, theta: f64) -> C64 {
    let th = reduce_angle(theta);
    // cos θ − cos kd without cancellation near kd ≈ ±θ
    let c = 2.0 * ((kd + th) / 2.0).sin() * ((kd - th) / 2.0).sin();
    let re = t * c;
    let im = (t - 1.0) * kd.sin();
    // Away from the exact 0/0 the quotient already tends to the fixed-θ limit;
    // a box guard would also catch small θ ≠ 0, where the value is near −1.
    if re == 0.0 && im == 0.0 {
        return C64::from(1.0);
    }
    -C64::new(re, im) / C64::new(re, -im)
}

/// Fundamental eigenvalue for the energy-dependent vertex `S^E(t, η)`,
/// `λ = −[tk(cos kd − cos θ) + η sin kd − i(t−1)k sin kd] / [… + i(t−1)k sin kd]`,
/// evaluated with the common factor `k` removed so that `k = 0` is regular.
pub fn lambda_e(t: f64, eta: f64, k: f64, d: f64, theta: f64) -> C64 {
    if eta == 0.0 {
        return lambda_c(t, k * d, theta);
    }
    let kd = k * d;
    let th = reduce_angle(theta);
    let c = -2.0 * ((kd + th) / 2.0).sin() * ((kd - th) / 2.0).sin(); // cos kd − cos θ
    let sinc = if kd.abs() < 1e-4 { 1.0 - kd * kd / 6.0 } else { kd.sin() / kd };
    let mut re = t * c + eta * d * sinc;
    let mut im = (t - 1.0) * kd.sin();
    if re.abs() < 1e-14 && im.abs() < 1e-14 {
        // l'Hôpital in k at sin kd = 0, cos kd = cos θ
        let dsinc = (kd * kd.cos() - kd.sin()) / (kd * kd);
        re = -t * d * kd.sin() + eta * d * d * dsinc;
        im = (t - 1.0) * d * kd.cos();
    }
    -C64::new(re, -im) / C64::new(re, im)
}

/// `g(k, θ) = e^{ikd} − (S₂₃(−k)e^{iθ} + S₃₂(−k)e^{−iθ}) − det S(−k) S₁₁(k) e^{−ikd}`,
/// with `λ = −det S(k) g(k,θ)/g(−k,θ)`.
pub fn g_function(ring: &RingSpec, k: f64, theta: f64) -> Result<C64> {
    let sp = local_s(&ring.local, k)?;
    let sm = local_s(&ring.local, -k)?;
    let e = C64::from_polar(1.0, k * ring.d);
    let et = C64::from_polar(1.0, theta);
    Ok(e - (sm[(1, 2)] * et + sm[(2, 1)] * et.conj()) - sm.determinant() * sp[(0, 0)] / e)
}

/// `λ` from the symmetric `g`-function form.
pub fn lambda_from_g(ring: &RingSpec, k: f64, theta: f64) -> Result<C64> {
    let det = local_s(&ring.local, k)?.determinant();
    Ok(-det * g_function(ring, k, theta)? / g_function(ring, -k, theta)?)
}

/// Diagonalisation data of the ring's circulant scattering matrix.
///
/// `omega` is `diag(1, ω, …, ω^{N−1})`; shifting the flux per edge by `2π/N`
/// conjugates the matrix, `S(θ + 2π/N) = Ω S(θ) Ω⁻¹`.
#[derive(Debug, Clone)]
pub struct EigenStructure {
    /// `W_ab = ω^{(a−1)(b−1)}/√N`.
    pub w: CMatrix,
    pub lambda: Vec<C64>,
    /// Cyclic shift `D = E_{N1} + Σ E_{a,a+1}`.
    pub shift: CMatrix,
    /// `Ω = diag(1, ω, …, ω^{N−1})`.
    pub omega: CMatrix,
}

impl EigenStructure {
    pub fn new(ring: &RingSpec, k: f64) -> Result<EigenStructure> {
        let n = ring.n;
        let om = ring.omega();
        let norm = 1.0 / (n as f64).sqrt();
        let w = CMatrix::from_fn(n, n, |a, b| om.powu((a * b) as u32) * norm);
        let shift = CMatrix::from_fn(n, n, |a, b| C64::from(if b == (a + 1) % n { 1.0 } else { 0.0 }));
        let omega = CMatrix::from_diagonal(&nalgebra::DVector::from_fn(n, |a, _| om.powu(a as u32)));
        Ok(EigenStructure { w, lambda: ring.eigenvalues(k)?, shift, omega })
    }

    /// `W⁻¹ Λ W`.
    pub fn s_matrix(&self) -> CMatrix {
        let lam = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(self.lambda.clone()));
        self.w.adjoint() * lam * &self.w
    }
}

/// Total scattering matrix of the ring from its eigenvalues.
pub fn ring_total_s(ring: &RingSpec, k: f64) -> Result<TotalSMatrix> {
    let es = EigenStructure::new(ring, k)?;
    Ok(TotalSMatrix { matrix: es.s_matrix(), k, thetas: vec![ring.flux / ring.n as f64; ring.n] })
}

/// `σ_n = (1/N) Σ_ℓ ω^{(ℓ−1)n} λ(k, θ + 2π(ℓ−1)/N)` for `n = 0..N−1`.
/// `σ_n` is the first-row entry `S_{1,1+n}`.
pub fn sigmas(ring: &RingSpec, k: f64) -> Result<Vec<C64>> {
    let lam = ring.eigenvalues(k)?;
    Ok(dft_of_eigenvalues(&lam))
}

pub(crate) fn dft_of_eigenvalues(lam: &[C64]) -> Vec<C64> {
    let n = lam.len();
    (0..n)
        .map(|m| {
            lam.iter()
                .enumerate()
                .map(|(l, z)| C64::from_polar(1.0, 2.0 * PI * ((l * m) % n) as f64 / n as f64) * z)
                .sum::<C64>()
                / n as f64
        })
        .collect()
}

pub fn sigma_n(ring: &RingSpec, k: f64, n: usize) -> Result<C64> {
    if n >= ring.n {
        return Err(Error::InvalidArgument(format!("n={n} out of range 0..{}", ring.n)));
    }
    Ok(sigmas(ring, k)?[n])
}

/// Eigenvalues, reflection and transmission of the two-lead ring.
#[derive(Debug, Clone, Copy)]
pub struct TwoLead {
    pub lambda: C64,
    pub lambda2: C64,
    /// `|λ + λ₂|²/4`
    pub rho: f64,
    /// `|λ − λ₂|²/4`
    pub tau: f64,
    /// `n(k, θ)`
    pub n_theta: f64,
    /// `n(k, π − θ)`
    pub n_pi_minus_theta: f64,
    /// Rational closed forms of ρ and τ over `n(k,θ) n(k,π−θ)`.
    pub rho_closed: f64,
    pub tau_closed: f64,
}

pub fn two_lead_quantities(t: f64, kd: f64, theta: f64) -> Result<TwoLead> {
    let n_of = |th: f64| {
        let c = th.cos() + kd.cos();
        t * t * c * c + (1.0 - t) * (1.0 - t) * kd.sin().powi(2)
    };
    let n_theta = n_of(theta);
    let n_pi = n_of(PI - theta);
    let den = n_theta * n_pi;
    if den < 1e-28 {
        return Err(Error::EigenvaluePole { kd, theta, denominator: den });
    }
    let lambda = lambda_c(t, kd, theta);
    let lambda2 = lambda_c(t, kd, theta + PI);
    let cth2 = theta.cos().powi(2);
    let rho_num = t * t * cth2 - (t - 1.0).powi(2) + (1.0 - 2.0 * t) * kd.cos().powi(2);
    Ok(TwoLead {
        lambda,
        lambda2,
        rho: (lambda + lambda2).norm_sqr() / 4.0,
        tau: (lambda - lambda2).norm_sqr() / 4.0,
        n_theta,
        n_pi_minus_theta: n_pi,
        rho_closed: rho_num * rho_num / den,
        tau_closed: 4.0 * t * t * (t - 1.0).powi(2) * cth2 * kd.sin().powi(2) / den,
    })
}

/// A root of the pole equation `e^{−2ikd} − 2S₂₃ cos θ e^{−ikd} + S₂₃² − S₂₂² = 0`.
#[derive(Debug, Clone, Copy)]
pub struct RingPole {
    /// `u = e^{−ikd}`
    pub u: C64,
    /// `kd = i Log u` with `−π ≤ Re kd < π`; `None` when `u = 0` (pole at infinity).
    pub kd: Option<C64>,
    pub residual: f64,
}

/// Left side of the pole equation as a polynomial in `u = e^{−ikd}`.
pub fn pole_equation(s22: C64, s23: C64, theta: f64, u: C64) -> C64 {
    u * u - s23 * u * (2.0 * theta.cos()) + s23 * s23 - s22 * s22
}

/// Closed-form poles `u± = t cos θ ± √(1 − 2t + t² cos²θ)` for `S^C(t)`.
pub fn ring_poles_c(t: f64, theta: f64) -> Vec<RingPole> {
    let ct = theta.cos();
    let root = C64::from(1.0 - 2.0 * t + t * t * ct * ct).sqrt();
    let (s22, s23) = (C64::from(t - 1.0), C64::from(t));
    [C64::from(t * ct) + root, C64::from(t * ct) - root]
        .into_iter()
        .map(|u| {
            if u.norm() < 1e-15 {
                return RingPole { u, kd: None, residual: pole_equation(s22, s23, theta, u).norm() };
            }
            let mut kd = C64::i() * u.ln();
            if kd.re >= PI {
                kd.re -= 2.0 * PI;
            }
            let back = (-C64::i() * kd).exp();
            RingPole { u, kd: Some(kd), residual: pole_equation(s22, s23, theta, back).norm() }
        })
        .collect()
}

/// Small-momentum data of the scale-invariant ring.
#[derive(Debug, Clone)]
pub struct ExpansionCoefficients {
    /// `χ₀ = td/(t−1)`: `λ(k, 0) = 1 − iχ₀k + O(k²)`.
    pub chi0: f64,
    /// `χ(θ) = (t−1)d/(t sin²(θ/2))`: `λ(k, θ) = −1 + iχ(θ)k + O(k²)`; `None` at `θ ≡ 0`.
    pub chi_theta: Option<f64>,
    /// `A_n = Σ_{ℓ≥2} ω^{n(ℓ−1)} χ(2π(ℓ−1)/N) − χ₀`, `n = 0..p−1`.
    pub a_n: Vec<f64>,
    /// `C_n(θ) = Σ_ℓ ω^{n(ℓ−1)} s(θ + 2π(ℓ−1)/N)` where `s` is `χ`, or `−χ₀`
    /// on an angle `≡ 0`. Complex for `n ≠ 0` once the flux is on.
    pub c_n: Vec<C64>,
    /// Central-difference `dλ/dk` at `k = 0`, angle `θ`.
    pub slope_fd: C64,
    /// Central-difference `½ d²λ/dk²` at `k = 0`, angle `θ`.
    pub second_order_fd: C64,
}

fn is_zero_angle(theta: f64) -> bool {
    reduce_angle(theta).abs() < 1e-12
}

/// `χ(θ) = (t−1)d/(t sin²(θ/2))`.
pub fn chi(t: f64, d: f64, theta: f64) -> f64 {
    (t - 1.0) * d / (t * (theta / 2.0).sin().powi(2))
}

pub fn expansion_coeffs(ring: &RingSpec) -> Result<ExpansionCoefficients> {
    let t = match ring.local {
        LocalScattering::ScaleInvariantC { t } | LocalScattering::DiracStep { t } => t,
        _ => return Err(Error::InvalidArgument("expansion coefficients need a scale-invariant ring".into())),
    };
    let (d, n) = (ring.d, ring.n);
    let chi0 = t * d / (t - 1.0);
    let slope = |angle: f64| if is_zero_angle(angle) { -chi0 } else { chi(t, d, angle) };
    let om = ring.omega();
    let p = n / 2;
    let transform = |theta: f64, m: usize| -> C64 {
        (0..n).map(|l| om.powu((m * l) as u32) * slope(theta + 2.0 * PI * l as f64 / n as f64)).sum()
    };
    let a_n = (0..p).map(|m| transform(0.0, m).re).collect();
    let theta = ring.theta();
    let c_n = (0..p).map(|m| transform(theta, m)).collect();

    let h = 1e-5 / d;
    let lam = |k: f64| ring.lambda(k, theta);
    let slope_fd = (lam(h)? - lam(-h)?) / (2.0 * h);
    let h2 = 1e-4 / d;
    let second_order_fd = (lam(h2)? - lam(0.0)? * 2.0 + lam(-h2)?) / (2.0 * h2 * h2);

    Ok(ExpansionCoefficients {
        chi0,
        chi_theta: (!is_zero_angle(theta)).then(|| chi(t, d, theta)),
        a_n,
        c_n,
        slope_fd,
        second_order_fd,
    })
}
