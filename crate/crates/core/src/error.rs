use crate::compat::CompatReport;
use crate::linsolve::SolveStats;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("topology error: {0}")]
    Topology(String),

    #[error("tag error: {0}")]
    Tag(String),

    #[error("cohomology mismatch: {cuts} cut surfaces but first Betti number is {betti1}")]
    Cohomology { cuts: usize, betti1: usize },

    #[error("degenerate parameters: {0}")]
    Degenerate(String),

    #[error("coefficient error: {0}")]
    Coefficient(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("index {index} out of range (have {count})")]
    BadId { index: usize, count: usize },

    #[error("{stage}: solver did not converge ({} iterations, relative residual {:.3e})", stats.iterations, stats.residual)]
    NonConvergence { stage: String, stats: SolveStats },

    #[error("{stage}: incompatible constraint (residual floor {floor:.3e})")]
    Incompatible { stage: String, floor: f64 },

    #[error("data fails compatibility conditions: {}", .0.failed().join(", "))]
    Compat(Box<CompatReport>),
}

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse { line, msg: msg.into() }
    }

    /// Attach a pipeline stage to a solver error.
    pub fn at_stage(self, stage: &str) -> Self {
        match self {
            Error::NonConvergence { stats, .. } => Error::NonConvergence { stage: stage.into(), stats },
            Error::Incompatible { floor, .. } => Error::Incompatible { stage: stage.into(), floor },
            other => other,
        }
    }
}
