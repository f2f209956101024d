use thiserror::Error;

/// Reasons a DIMACS document is rejected.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("missing `p cnf` header")]
    MissingHeader,
    #[error("duplicate `p cnf` header")]
    DuplicateHeader,
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("malformed token `{0}`")]
    BadToken(String),
    #[error("literal {lit} out of range for {num_vars} variables")]
    LiteralOutOfRange { lit: i64, num_vars: usize },
    #[error("clause is not terminated by 0")]
    UnterminatedClause,
    #[error("clause before `p cnf` header")]
    ClauseBeforeHeader,
    #[error("header declares {declared} clauses but {found} were read")]
    ClauseCountMismatch { declared: usize, found: usize },
    #[error("sampling-set line is not terminated by 0")]
    UnterminatedSamplingSet,
    #[error("sampling-set variable {var} out of range for {num_vars} variables")]
    SamplingVarOutOfRange { var: i64, num_vars: usize },
    #[error("sampling set is empty")]
    EmptySamplingSet,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("enumeration over {vars} variables exceeds the cap of {cap}")]
    EnumerationCap { vars: usize, cap: usize },
    #[error("hash family of dimension {n} is too large to enumerate (max {max})")]
    FamilyTooLarge { n: usize, max: usize },
    #[error("bounds p_L={p_l}, p_U={p_u} cannot be amplified (need both < 1/2)")]
    NonAmplifiable { p_l: f64, p_u: f64 },
    #[error("iteration count exceeds the safety cap of {cap}")]
    IterationCap { cap: u64 },
    #[error("no a_U in the search interval is amplifiable at thresh={thresh}")]
    ThreshTooSmall { thresh: u64 },
    #[error("contract violated: {0}")]
    Contract(String),
    #[error("invalid formula: {0}")]
    InvalidFormula(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
