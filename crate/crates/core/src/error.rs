use thiserror::Error;

/// Errors shared by all modules.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid lattice: {0}")]
    InvalidLattice(String),

    #[error("unsupported spin structure: {0}")]
    UnsupportedSpin(String),

    #[error("moduli reduction failed: {0}")]
    ReductionFailed(String),

    #[error("enumeration limit exceeded: {entries} candidate modes (cap {cap})")]
    EnumerationLimit { entries: usize, cap: usize },

    #[error("grid resolution {got} below oversampling floor {need}")]
    Resolution { got: usize, need: usize },

    #[error("degenerate pairing: |integral <D psi, psi>| = {0:.3e}")]
    DegeneratePairing(f64),

    #[error("spin parity error: {0}")]
    Parity(String),

    #[error("support error: {0}")]
    Support(String),

    #[error("unbounded elliptic ratio: parallel component with trivial spin structure")]
    UnboundedRatio,

    #[error("optimization failed: {0}")]
    OptimizationFailed(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("gradient mismatch: relative deviation {deviation:.3e} at field {field}, direction {direction}")]
    GradientMismatch {
        deviation: f64,
        field: String,
        direction: String,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("internal inconsistency: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
