use thiserror::Error;

use crate::circuit::Diagnostic;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("basis index {index} out of range for dimension {dimension}")]
    IndexOutOfRange { index: usize, dimension: usize },

    #[error("expected {expected} bits, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("bit position {0} out of range")]
    BitOutOfRange(usize),

    #[error("bit position {0} listed twice")]
    DuplicateBit(usize),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("unknown gate `{0}`")]
    UnknownGate(String),

    #[error("gate `{0}` requires a parameter")]
    MissingParameter(String),

    #[error("gate is not an isometry of its local metric (residual {residual:.3e})")]
    NotIsometric { residual: f64 },

    #[error("state has non-positive pseudo-norm {0}")]
    NonPositiveNorm(f64),

    #[error("no observable component: all amplitude sits on hybit-excited states")]
    ZeroObservableMass,

    #[error("register with {0} bits exceeds the size guard")]
    TooLarge(usize),

    #[error("numeric guard: {0}")]
    NumericGuard(String),

    #[error("{0}")]
    InvalidArgument(String),

    #[error("invalid instruction: {0}")]
    InvalidInstruction(String),

    #[error("cross-block pivot breakdown: |a| = {pivot:.6e} <= |b| = {other:.6e}")]
    PivotBreakdown { pivot: f64, other: f64 },

    #[error("no k <= {k_max} reaches tolerance {tol:e}")]
    PowerNotFound { k_max: u64, tol: f64 },

    #[error("matrix format: line {line}: {message}")]
    MatrixFormat { line: usize, message: String },

    #[error("{}", format_diagnostics(.0))]
    Parse(Vec<Diagnostic>),
}

fn format_diagnostics(diags: &[Diagnostic]) -> String {
    diags
        .iter()
        .map(|d| d.to_string())
        .collect::<Vec<_>>()
        .join("\n")
}
