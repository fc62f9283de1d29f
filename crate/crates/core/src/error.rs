use thiserror::Error;

/// Everything that can go wrong inside the models, bounds and simulator.
#[derive(Debug, Error)]
pub enum Error {
    #[error("damping function degenerate ({value:.3e}) at angle {angle}")]
    DegenerateDamping { angle: f64, value: f64 },

    #[error("no root of B1(theta) = {ell} on (0, {upper}); max attainable is {max}")]
    NoRoot { ell: f64, upper: f64, max: f64 },

    #[error("B1 is not increasing at the lower end of the bracket (B1'(0) = {slope})")]
    NonMonotoneBracket { slope: f64 },

    #[error("sampled signal {what} violates its bound at t = {t}: {value} > {bound}")]
    RateViolation { what: &'static str, t: f64, value: f64, bound: f64 },

    #[error("invalid sampled signal: {0}")]
    BadSamples(String),

    #[error("target speed error {target} must lie in (0, {omega0})")]
    InvalidTarget { target: f64, omega0: f64 },

    #[error("gain k = {k} must exceed D^2/4 = {min}")]
    GainTooSmall { k: f64, min: f64 },

    #[error("operating set is empty")]
    EmptyDomain,

    #[error("stator current elimination is singular ({0})")]
    SingularStatorAlgebra(&'static str),

    #[error("composite constant {name} has degenerate denominator {value:.3e}")]
    DegenerateComposite { name: &'static str, value: f64 },

    #[error("non-finite state at t = {t} in mode {mode}: {detail}")]
    NonFiniteState { t: f64, mode: &'static str, detail: String },

    #[error("equilibrium solve failed: {0}")]
    Equilibrium(String),

    #[error("invalid parameter {field}: {reason}")]
    InvalidParam { field: String, reason: String },

    #[error("config error at `{path}`: {reason}")]
    Config { path: String, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn param(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParam { field: field.into(), reason: reason.into() }
    }

    /// True for errors caused by a bad input description rather than by the numerics.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::InvalidParam { .. }
                | Error::Config { .. }
                | Error::BadSamples(_)
                | Error::RateViolation { .. }
                | Error::GainTooSmall { .. }
                | Error::InvalidTarget { .. }
                | Error::EmptyDomain
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
