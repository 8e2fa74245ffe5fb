use crate::bell::ValidationReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// The protocol success probability vanishes, so no output state exists.
    #[error("degenerate normalization N = {n:e} (success probability vanishes)")]
    DegenerateNormalization { n: f64 },

    #[error("step {step}: {source}")]
    AtStep {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid density matrix: {0}")]
    InvalidDensity(ValidationReport),

    #[error("invalid X state: {0}")]
    InvalidXState(String),

    /// A mapped coherence exceeded `sqrt(r_j r_k)` by more than rounding.
    #[error("coherence r{pair} exceeds its positivity bound by {excess:e}")]
    CoherenceBound { pair: &'static str, excess: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("vector is not normalized (norm = {0})")]
    NormError(f64),

    #[error("parameter {name} = {value} outside {range}")]
    ParamRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("{0}")]
    Format(String),
}

impl Error {
    pub(crate) fn at_step(self, step: usize) -> Self {
        Error::AtStep {
            step,
            source: Box::new(self),
        }
    }

    /// True when this error (or the error it wraps) is a vanishing normalization.
    pub fn is_degenerate(&self) -> bool {
        match self {
            Error::DegenerateNormalization { .. } => true,
            Error::AtStep { source, .. } => source.is_degenerate(),
            _ => false,
        }
    }
}
