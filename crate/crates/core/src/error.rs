use thiserror::Error;

use crate::graph::Violation;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid graph: {}", format_violations(.0))]
    InvalidGraph(Vec<Violation>),

    #[error("local scattering matrix at vertex {vertex}: {reason}")]
    LocalMatrix { vertex: usize, reason: String },

    #[error("step discontinuity at k=0")]
    StepDiscontinuity,

    #[error("scattering pole at k={k} (reciprocal condition estimate {rcond:e})")]
    ScatteringPole { k: f64, rcond: f64 },

    #[error("eigenvalue pole at kd={kd}, theta={theta} (|denominator|={denominator:e})")]
    EigenvaluePole { kd: f64, theta: f64, denominator: f64 },

    #[error("quadrature failed on [{a}, {b}]: {reason}")]
    Quadrature { a: f64, b: f64, reason: String },

    #[error("integrand out of range at k={k}: {what}={value}")]
    IntegrandRange { k: f64, what: &'static str, value: f64 },

    #[error("sweep failed at beta={beta}: {source}")]
    SweepPoint { beta: f64, source: Box<Error> },

    #[error("fit rejected: {0}")]
    Fit(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(#[from] serde_json::Error),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Momentum or inverse temperature at which a numerical failure happened.
    pub fn location(&self) -> Option<(&'static str, f64)> {
        match self {
            Error::ScatteringPole { k, .. } => Some(("k", *k)),
            Error::IntegrandRange { k, .. } => Some(("k", *k)),
            Error::EigenvaluePole { kd, .. } => Some(("kd", *kd)),
            Error::SweepPoint { beta, .. } => Some(("beta", *beta)),
            _ => None,
        }
    }
}

fn format_violations(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}
