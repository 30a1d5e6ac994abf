use thiserror::Error;

/// Errors raised while constructing or querying the objects of this crate.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("delta^sigma = {0} is not a dyadic rational; use delta = 2^-a and sigma = c/a")]
    NonDyadic(String),

    #[error("1/delta must be an integer for levels k >= 2 (delta = {0})")]
    NonIntegerReciprocal(String),

    #[error("profile intervals overlap: 2 delta^(1-sigma) = {0} is not < 1")]
    Overlap(String),

    #[error("self-similar reconstruction mismatch: {0}")]
    DecompositionMismatch(String),

    #[error("degenerate lattice: p_max = q_max = 0 at delta = 2^-{delta_log2}; decrease delta (increase delta_log2)")]
    EmptyLattice { delta_log2: u32 },

    #[error("thickening radius {rho} overlaps neighbours (minimal spacing {spacing})")]
    ThickeningOverlap { rho: String, spacing: String },

    #[error("boxes {0} and {1} overlap")]
    BoxOverlap(usize, usize),

    #[error("phase certificate inapplicable: theta = {theta} >= 1/4 in coordinate {coordinate}")]
    CertificateInapplicable { theta: f64, coordinate: usize },

    #[error("Knapp tube fails the phase-variation check: variation {variation} >= {limit} cycles")]
    KnappPhaseVariation { variation: f64, limit: f64 },

    #[error("brute-force oracle too large: {evaluations} evaluations exceed {limit}")]
    OracleTooLarge { evaluations: u128, limit: u128 },

    #[error("exponent fit needs at least 3 samples with distinct scales: {0}")]
    DegenerateFit(String),

    #[error("serialized object does not match its parameters: {0}")]
    Deserialize(String),

    #[error("I/O failure: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Deserialize(e.to_string())
    }
}
