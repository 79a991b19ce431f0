use thiserror::Error;

/// Failure modes shared by every module. The variant name is the stable,
/// machine-readable identifier reported by the command-line driver.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid field specification: {0}")]
    InvalidField(String),
    #[error("invalid potential specification: {0}")]
    InvalidPotential(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("Wronskian drift {drift:e} exceeds {tol:e}; refine the step")]
    StepTooCoarse { drift: f64, tol: f64 },
    #[error("extension power N = {n} would exceed the safe magnitude ({magnitude:e})")]
    OverflowRisk { n: i64, magnitude: f64 },
    #[error("zero at t = {t} has derivative {derivative:e}")]
    DegenerateZero { t: f64, derivative: f64 },
    #[error("interval ({a}, {b}) contains a zero of the denominator at {t}")]
    IntervalContainsZero { a: f64, b: f64, t: f64 },
    #[error("growth fit needs at least {needed} points, got {got}")]
    InsufficientData { needed: usize, got: usize },
    #[error("Gamma = {gamma:e} is below the caustic threshold {threshold:e}")]
    CausticProximity { gamma: f64, threshold: f64 },
    #[error("grid under-resolves the wave: {0}")]
    AliasingRisk(String),
    #[error("weight is not in L^{p}: the radial integral diverges")]
    DivergentWeight { p: f64 },
    #[error("field is not hyperbolic (D = {discriminant})")]
    NotHyperbolic { discriminant: f64 },
    #[error("imaginary shift {tau} violates the convergence bound {bound}")]
    EpsilonTooLarge { tau: f64, bound: f64 },
    #[error("{fraction:e} of the l2 mass reached the grid frame")]
    GridEscape { fraction: f64 },
    #[error("quadrature did not converge: {0}")]
    Quadrature(String),
}

impl Error {
    /// Stable identifier, identical to the variant name.
    pub fn name(&self) -> &'static str {
        match self {
            Error::InvalidField(_) => "InvalidField",
            Error::InvalidPotential(_) => "InvalidPotential",
            Error::InvalidArgument(_) => "InvalidArgument",
            Error::StepTooCoarse { .. } => "StepTooCoarse",
            Error::OverflowRisk { .. } => "OverflowRisk",
            Error::DegenerateZero { .. } => "DegenerateZero",
            Error::IntervalContainsZero { .. } => "IntervalContainsZero",
            Error::InsufficientData { .. } => "InsufficientData",
            Error::CausticProximity { .. } => "CausticProximity",
            Error::AliasingRisk(_) => "AliasingRisk",
            Error::DivergentWeight { .. } => "DivergentWeight",
            Error::NotHyperbolic { .. } => "NotHyperbolic",
            Error::EpsilonTooLarge { .. } => "EpsilonTooLarge",
            Error::GridEscape { .. } => "GridEscape",
            Error::Quadrature(_) => "Quadrature",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
