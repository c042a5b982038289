use thiserror::Error;

/// Errors raised by the library.
///
/// Validation problems (a malformed complex or function handed in by the
/// caller) are kept apart from internal invariant violations, which signal a
/// bug in the engine. The CLI maps these onto distinct exit codes.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unknown cell `{0}`")]
    UnknownCell(String),
    #[error("duplicate cell id `{0}`")]
    DuplicateCell(String),
    #[error("invalid complex: {0}")]
    InvalidComplex(String),
    #[error("missing value for cell `{0}`")]
    MissingValue(String),
    #[error("invalid discrete Morse function: {0}")]
    InvalidDmf(String),
    #[error("vector field is not acyclic")]
    NotAcyclic,
    #[error("invalid vector field: {0}")]
    InvalidField(String),
    #[error("`{facet}` is not a facet of `{cofacet}`")]
    NotAFacet { facet: String, cofacet: String },
    #[error("endpoints of the path are not both critical")]
    EndpointsNotCritical,
    #[error("not reversible: {0} gradient paths between the endpoints")]
    NotReversible(u64),
    #[error("invalid gradient path: {0}")]
    InvalidPath(String),
    #[error("transposition not allowed: {0}")]
    BadTransposition(String),
    #[error("invalid move: {0}")]
    InvalidMove(String),
    #[error("no valid gap: {0}")]
    NoGap(String),
    #[error("pair is not eligible: {0}")]
    Ineligible(String),
    #[error("move blocked: {0}")]
    Blocked(String),
    #[error("criterion hypotheses violated: {0}")]
    CriterionHypotheses(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("unknown format `{0}`")]
    UnknownFormat(String),
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error("oracle scale exceeded: {0}")]
    OracleScale(String),
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

impl Error {
    /// True for errors that indicate an engine bug rather than bad input.
    pub fn is_internal(&self) -> bool {
        matches!(self, Error::Internal(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
