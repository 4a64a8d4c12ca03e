use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("typical set is empty (n = {n}, delta = {delta})")]
    EmptyTypicalSet { n: usize, delta: f64 },

    #[error("problem too large: {0}")]
    ProblemTooLarge(String),

    #[error("solver did not converge: {0}")]
    NonConvergence(String),

    #[error("degenerate channel: {0}")]
    DegenerateChannel(String),

    #[error("codebook needs {entries:.3e} stored symbols, cap is {cap}; reduce n or the rates")]
    CodebookTooLarge { entries: f64, cap: u64 },

    #[error("linear program failed: {0}")]
    LpFailure(String),

    #[error("power backoff eps1 = {eps1} must lie strictly between 0 and P = {power}")]
    InvalidBackoff { eps1: f64, power: f64 },

    #[error("argument outside the domain: {0}")]
    Domain(String),

    #[error("jammer `{id}` emitted energy {energy:.6} above the budget {budget:.6}")]
    JammerPowerViolation { id: String, energy: f64, budget: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
