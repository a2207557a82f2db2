use std::fmt;
use std::process::ExitCode;

/// Command outcome other than success, mapped onto the exit codes.
#[derive(Debug)]
pub enum Failure {
    /// Bad arguments or inputs (exit 1).
    Usage(String),
    /// Newton did not converge (exit 2).
    NonConvergence(String),
    /// Solution artifact does not belong to the given domain/mesh (exit 3).
    Mismatch(String),
    /// A requested check ran and failed (exit 4).
    Check(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::NonConvergence(_) => 2,
            Failure::Mismatch(_) => 3,
            Failure::Check(_) => 4,
        }
    }

    pub fn exit(&self) -> ExitCode {
        ExitCode::from(self.code())
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (label, msg) = match self {
            Failure::Usage(m) => ("error", m),
            Failure::NonConvergence(m) => ("not converged", m),
            Failure::Mismatch(m) => ("artifact mismatch", m),
            Failure::Check(m) => ("check failed", m),
        };
        write!(f, "{label}: {msg}")
    }
}

impl From<hypgraph::Error> for Failure {
    fn from(e: hypgraph::Error) -> Self {
        use hypgraph::Error as E;
        match e {
            E::Analysis(_) => Failure::Check(e.to_string()),
            E::NonPositive { .. } | E::Linear(_) => Failure::NonConvergence(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

impl From<hypgraph::geometry::GeometryError> for Failure {
    fn from(e: hypgraph::geometry::GeometryError) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

pub type Outcome<T = ()> = Result<T, Failure>;
