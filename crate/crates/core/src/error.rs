use thiserror::Error;

/// Error taxonomy shared by the whole crate.
///
/// `Config` covers precondition violations caught at parse or call time,
/// `Operator` covers broken operator contracts (undefined symbol values,
/// assembly asymmetry), `State` is the blow-up detector, and `Numerical`
/// covers diagnostics that could not produce a meaningful answer
/// (non-monotone convergence data, eigensolver failure).
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("operator error: {0}")]
    Operator(String),
    #[error("state error: {0}")]
    State(String),
    #[error("numerical error: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("format error: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Exit status for the CLI: 0 pass, 1 contract failure, 2 config error.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Io(_) | Error::Format(_) => 2,
            _ => 1,
        }
    }
}
