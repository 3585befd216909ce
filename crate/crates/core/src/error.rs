use thiserror::Error;

/// Errors raised anywhere in the simulation pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("imaginary Xi: eps_map^2 - 4|mu|^2 = {0} < 0")]
    ImaginaryXi(f64),

    #[error("degenerate denominator in {context} (|value| = {value:e})")]
    DegenerateDenominator { context: &'static str, value: f64 },

    #[error("division by zero: {0}")]
    DivisionByZero(&'static str),

    #[error("out of domain: {0}")]
    OutOfDomain(String),

    #[error("non-positive Lambda = {0}")]
    NonPositiveLambda(f64),

    #[error("Lambda is zero")]
    ZeroLambda,

    #[error("chi = {chi} is within the guard {guard:e} of 1 (or crossed it)")]
    ChiSingular { chi: f64, guard: f64 },

    #[error("Phi = {0:e} is too close to zero")]
    PhiZero(f64),

    #[error("negative mean photon number {0:e}; inconsistent initial moments")]
    NegativeMeanPhoton(f64),

    #[error("not on resonance: kappa = {kappa}, 2*omega0 = {two_omega0}")]
    NotOnResonance { kappa: f64, two_omega0: f64 },

    #[error("step rejected at t = {t}: step size {h:e} fell below the minimum")]
    StepRejected { t: f64, h: f64 },

    #[error("non-finite state encountered at t = {0}")]
    NonFiniteState(f64),

    #[error("matrix norm {0} exceeds the supported range")]
    NormTooLarge(f64),

    #[error("truncation untrusted: {0}")]
    TruncationUntrusted(String),

    #[error("Dyson matrix is numerically singular on the trusted block")]
    SingularEta,

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
