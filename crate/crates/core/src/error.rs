use thiserror::Error;

/// Errors raised by constructions and checks.
///
/// Axiom failures of a well-formed input are *not* errors: they come back
/// as a failing [`crate::report::VerificationReport`] with a witness.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    /// Malformed input: indices out of range, bad shapes, zero torsion orders.
    #[error("structural error: {0}")]
    Structural(String),
    /// A degree assignment or regrading is incompatible with multiplication.
    #[error("grading error: {0}")]
    Grading(String),
    /// An operation's precondition does not hold.
    #[error("precondition failed: {0}")]
    Precondition(String),
    /// An evaluation was asked with a variable missing from the assignment.
    #[error("variable {0} has no assigned value")]
    MissingAssignment(String),
    /// A variable was assigned an element of the wrong homogeneous degree.
    #[error("degree mismatch for {variable}: expected {expected}, got {found}")]
    DegreeMismatch { variable: String, expected: String, found: String },
    /// A computation would exceed its configured budget.
    #[error("budget exceeded: {0}")]
    Budget(String),
    /// A polynomial-forms product would exceed the arena's degree cap.
    #[error("polynomial degree cap exceeded: {0}")]
    CapOverflow(String),
    /// Two inputs are graded by different groups.
    #[error("grading group mismatch: {0}")]
    GroupMismatch(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Stable diagnostic code used by the command-line front end.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Structural(_) => "E-STRUCT",
            Error::Grading(_) => "E-GRADING",
            Error::Precondition(_) => "E-PRECOND",
            Error::MissingAssignment(_) => "E-ASSIGN",
            Error::DegreeMismatch { .. } => "E-DEGREE",
            Error::Budget(_) => "E-BUDGET",
            Error::CapOverflow(_) => "E-CAP",
            Error::GroupMismatch(_) => "E-GROUP",
            Error::Parse(_) => "E-PARSE",
            Error::Io(_) => "E-IO",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
