use thiserror::Error;

/// Crate-wide error type.
///
/// The variants map onto the process exit codes used by the command-line
/// front end: argument/precondition/parse problems exit with 2, enumeration
/// refusals with 3, solver non-convergence with 4.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument violates the operation's contract.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A documented precondition does not hold for the given data.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// The requested computation would exceed an enumeration cap.
    #[error("refused: {0}")]
    Refusal(String),

    /// An iterative method failed to reach its tolerance.
    #[error("did not converge: {0}")]
    NonConvergence(String),

    /// The linear system has no solution within tolerance.
    #[error("infeasible: {0}")]
    Infeasible(String),

    /// Malformed input file.
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Exit code for the CLI: 2 argument/precondition/parse, 3 refusal,
    /// 4 non-convergence.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Refusal(_) => 3,
            Error::NonConvergence(_) => 4,
            _ => 2,
        }
    }
}
