use thiserror::Error;

/// Errors raised by the exact-arithmetic kernel.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum KernelError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("unsupported function `{0}` in derivative")]
    UnsupportedFunction(String),
    #[error("collection error: {0}")]
    Collection(String),
    #[error("malformed S-expression at offset {offset}: {msg}")]
    SExpr { offset: usize, msg: String },
}

/// Pipeline-level error. Every variant carries a stable machine-readable code
/// (see [`Error::code`]).
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error("{what} index {value} is out of range")]
    OutOfRange { what: &'static str, value: i64 },
    #[error("syntax error at line {line}, column {col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("unknown symbol `{name}`; declared symbols: {}", declared.join(", "))]
    UnknownSymbol { name: String, declared: Vec<String> },
    #[error("reduction invariant violated: {0}")]
    Reduction(String),
    #[error("no ansatz order N <= {n_max} admits a branch with nonzero top coefficient")]
    BalanceFailure { n_max: u32 },
    #[error("no admissible index in the candidate range")]
    NoAdmissibleIndex,
    #[error("Groebner budget of {budget} S-polynomial reductions exceeded")]
    GroebnerBudget { budget: usize },
    #[error("out of domain at `{node}`")]
    OutOfDomain { node: String },
    #[error("hypergeometric pole: c = {c} is a nonpositive integer")]
    Pole { c: f64 },
    #[error("every grid point is out of domain")]
    EmptyReport,
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("json error: {0}")]
    Json(String),
}

impl Error {
    pub fn code(&self) -> &'static str {
        match self {
            Error::Kernel(KernelError::DivisionByZero) => "E_DIV_ZERO",
            Error::Kernel(KernelError::UnsupportedFunction(_)) => "E_UNSUPPORTED_FUNCTION",
            Error::Kernel(KernelError::Collection(_)) => "E_COLLECTION",
            Error::Kernel(KernelError::SExpr { .. }) => "E_SEXPR",
            Error::OutOfRange { .. } => "E_OUT_OF_RANGE",
            Error::Syntax { .. } => "E_SYNTAX",
            Error::UnknownSymbol { .. } => "E_UNKNOWN_SYMBOL",
            Error::Reduction(_) => "E_REDUCTION",
            Error::BalanceFailure { .. } => "E_BALANCE",
            Error::NoAdmissibleIndex => "E_NO_ADMISSIBLE_INDEX",
            Error::GroebnerBudget { .. } => "E_GROEBNER_BUDGET",
            Error::OutOfDomain { .. } => "E_OUT_OF_DOMAIN",
            Error::Pole { .. } => "E_POLE",
            Error::EmptyReport => "E_EMPTY_REPORT",
            Error::Unsupported(_) => "E_UNSUPPORTED",
            Error::Config(_) => "E_CONFIG",
            Error::Io(_) => "E_IO",
            Error::Json(_) => "E_JSON",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
