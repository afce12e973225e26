use std::path::PathBuf;

/// Errors raised anywhere in the estimation pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("qubit count mismatch: {left} vs {right}")]
    QubitMismatch { left: usize, right: usize },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid Pauli letter {letter:?} in {string:?}")]
    InvalidPauliLetter { letter: char, string: String },

    #[error("Pauli strings support at most {max} qubits, got {n}")]
    TooManyQubits { n: usize, max: usize },

    #[error("Hamiltonian has no terms")]
    EmptyHamiltonian,

    #[error("Hamiltonian has zero total weight")]
    ZeroWeight,

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dense diagonalization is capped at {cap} qubits, got {n}")]
    DiagonalizationCap { n: usize, cap: usize },

    #[error("{path}:{line}: {reason}")]
    Parse {
        path: PathBuf,
        line: usize,
        reason: String,
    },

    #[error("binary search did not converge within {max_iters} iterations")]
    NonConvergence { max_iters: usize },

    #[error("no significant changepoint (deviation drop {drop:.3e} <= threshold {threshold:.3e})")]
    NoChangepoint { drop: f64, threshold: f64 },

    #[error("gate budget {budget} is infeasible (minimum achievable N_g is {min_gates})")]
    InfeasibleBudget { budget: f64, min_gates: f64 },

    #[error("empty sample set")]
    EmptySampleSet,

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
