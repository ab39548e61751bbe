use thiserror::Error;

/// Errors raised by the numeric substrate and the derivation pipeline.
///
/// Audit checks never surface these directly: a failing relation is a
/// residual, not an error. These are reserved for inputs outside an
/// operation's domain.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("integrator exceeded {max_steps} steps before reaching t = {t_end}")]
    StepLimitExceeded { max_steps: usize, t_end: f64 },

    #[error("non-finite state encountered at t = {t}")]
    NonFiniteState { t: f64 },

    #[error("quadrature recursion exceeded depth {depth} near t = {at}")]
    DepthExceeded { depth: u32, at: f64 },

    #[error("polynomial degree {0} is not supported (max 4)")]
    DegreeUnsupported(usize),

    #[error("leading coefficient is zero")]
    ZeroLeadingCoefficient,

    #[error("power overflow: y^{p} y'^{q} exceeds the degree cap")]
    DegreeOverflow { p: u32, q: u32 },

    #[error("trajectory carries no first derivatives")]
    MissingDerivatives,

    #[error("invalid trajectory: {0}")]
    InvalidTrajectory(String),

    #[error("singular gauge at t = {t}: |alpha * theta'| = {magnitude:e}")]
    SingularGauge { t: f64, magnitude: f64 },

    #[error("base velocity vanishes at t = {t}")]
    VanishingVelocity { t: f64 },

    #[error("t = {t} is not a node of the gauge grid")]
    OffGrid { t: f64 },

    #[error("near a pole of the closed-form solution at t = {t} (|denominator| = {magnitude:e})")]
    NearPole { t: f64, magnitude: f64 },

    #[error("omega vanishes at t = {t}")]
    VanishingOmega { t: f64 },

    #[error("c = {c} is not a root of the amplitude cubic (residual {residual:e})")]
    NotARoot { c: String, residual: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
