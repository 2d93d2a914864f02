//! Exact scattering matrices of finite quantum graphs threaded by a magnetic
//! field, and the Landauer–Büttiker transport quantities built on them.
//!
//! The crate is organised bottom-up:
//!
//! * [`graph`] describes metric graphs, their magnetic line integrals and the
//!   per-vertex scattering data, and fixes the mode ordering.
//! * [`smatrix`] assembles the propagation matrix, the four vertex blocks and
//!   the total scattering matrix of an arbitrary graph.
//! * [`ring`] holds the closed forms for the regular ring with `N` leads.
//! * [`transport`] evaluates currents and zero-frequency noise.
//! * [`scaling`] sweeps the inverse temperature and fits low-temperature
//!   power laws of the thermal noise.
//! * [`cli`] is the command-line front end used by the `qgs` binary.

pub mod cli;
pub mod error;
pub mod graph;
pub mod quadrature;
pub mod ring;
pub mod scaling;
pub mod smatrix;
pub mod transport;

pub use error::{Error, Result};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex<f64>;

/// Dense complex matrix.
pub type CMatrix = nalgebra::DMatrix<C64>;

/// Dense complex vector.
pub type CVector = nalgebra::DVector<C64>;

/// Largest entry modulus of `m`.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

/// `‖m†m − 1‖_max`.
pub fn unitarity_residual(m: &CMatrix) -> f64 {
    let n = m.nrows();
    max_abs(&(m.adjoint() * m - CMatrix::identity(n, n)))
}
