use thiserror::Error;

/// Errors raised by the mode algebra, layer construction, evolution and
/// propagation routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum QfoError {
    #[error("mode window needs at least 2 modes, got {0}")]
    WindowTooSmall(usize),

    #[error("mode label {label} falls outside the {modes}-mode window")]
    ModeOutOfWindow { label: i64, modes: usize },

    #[error("qubit {0} is not part of the layout")]
    UnknownQubit(i64),

    #[error("qubit layout reuses mode label {0}")]
    OverlappingQubits(i64),

    #[error("amplitudes are not normalized: |a|^2 + |b|^2 = {0}")]
    NotNormalized(f64),

    #[error("state factors overlap on mode {0}")]
    OverlappingSupport(usize),

    #[error("photon number {got} exceeds the configured cap {cap}")]
    PhotonCapExceeded { got: usize, cap: usize },

    #[error("photon number mismatch: expected {expected}, got {got}")]
    PhotonNumberMismatch { expected: usize, got: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("{modes} samples cannot resolve {harmonics} harmonics (need at least {needed})")]
    BelowNyquist {
        modes: usize,
        harmonics: usize,
        needed: usize,
    },

    #[error("pupil sample {index} has modulus {modulus}, expected 1")]
    NotUnimodular { index: usize, modulus: f64 },

    #[error("layer {0} has the same kind as the layer before it")]
    NotAlternating(usize),

    #[error("empty layer stack")]
    EmptyStack,

    #[error("permanent of a {0}x{0} matrix exceeds the supported size")]
    PermanentTooLarge(usize),

    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("fidelity is undefined for a zero operator")]
    ZeroOperator,

    #[error("state has no photons")]
    Vacuum,

    #[error("qubit pairs overlap")]
    OverlappingPairs,

    #[error("parameter vector has length {got}, expected {expected}")]
    ParameterLength { expected: usize, got: usize },

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("invalid scene: {0}")]
    InvalidScene(String),

    #[error("paraxial bound violated: (kx/k)^2 = {0:.4} >= 0.01")]
    Paraxial(f64),

    #[error("field energy at the grid boundary is {0:.3e} of the total")]
    Aliasing(f64),

    #[error("no source defined for occupied mode label {0}")]
    Unsourced(i64),
}

pub type Result<T> = std::result::Result<T, QfoError>;
