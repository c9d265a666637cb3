use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,

    #[error("parse error at position {position}: {message}")]
    Parse { position: usize, message: String },

    #[error("{what} = {value} is outside {range}")]
    OutOfRange {
        what: &'static str,
        value: String,
        range: &'static str,
    },

    #[error("conditional box undefined: P(a={a}|x={x}) = 0")]
    UndefinedConditional { x: u8, a: u8 },

    #[error("degenerate coupler range: X_b = {x_bottom} must be below X_t = {x_top}")]
    DegenerateRange { x_top: String, x_bottom: String },

    #[error("box is not on the PR/anti-PR segment")]
    NotIsotropic,

    #[error("swap undefined: success probability {p_success} leaves a conditional box undefined")]
    DegenerateSwap { p_success: String },

    #[error("square root of {0} is not in Q(2^(1/4))")]
    Unrepresentable(String),

    #[error("no classical strategy reproduces the functional")]
    Unclassifiable,

    #[error("invalid JSON document: {0}")]
    Json(String),
}

impl Error {
    /// Stable machine-readable tag, used as the CLI error prefix.
    pub fn code(&self) -> &'static str {
        match self {
            Error::DivisionByZero => "E_DIV_ZERO",
            Error::Parse { .. } => "E_PARSE",
            Error::OutOfRange { .. } => "E_RANGE",
            Error::UndefinedConditional { .. } => "E_CONDITIONAL",
            Error::DegenerateRange { .. } => "E_DEGENERATE_RANGE",
            Error::NotIsotropic => "E_NOT_ISOTROPIC",
            Error::DegenerateSwap { .. } => "E_DEGENERATE_SWAP",
            Error::Unrepresentable(_) => "E_UNREPRESENTABLE",
            Error::Unclassifiable => "E_UNCLASSIFIABLE",
            Error::Json(_) => "E_JSON",
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(err: serde_json::Error) -> Self {
        Error::Json(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
