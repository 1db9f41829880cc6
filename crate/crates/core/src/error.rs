use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("qubit index {index} out of range for a {n_qubits}-qubit register")]
    QubitOutOfRange { index: usize, n_qubits: usize },

    #[error("qubit {0} appears more than once")]
    RepeatedQubit(usize),

    #[error("empty qubit selection")]
    EmptySelection,

    #[error("matrix is not unitary (deviation {0:.3e})")]
    NotUnitary(f64),

    #[error("matrix is not Hermitian (deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("state is not normalized (squared norm {0})")]
    NotNormalized(f64),

    #[error("negative eigenvalue {0:.3e} in density matrix")]
    NegativeEigenvalue(f64),

    #[error("total outcome probability {0:.3e} too small to measure")]
    VanishingState(f64),

    #[error("jump probability {0:.4} per sub-step is too large; increase n_sub")]
    StepTooLarge(f64),

    #[error("schedule step {step}: qubit {qubit} is driven by two terms")]
    OverlappingTerms { step: usize, qubit: usize },

    #[error("schedule step {0} contains a measurement")]
    MeasurementInUnitaryRange(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("fit rejected: {0}")]
    FitRejected(String),

    #[error("flow row {row} sums to {sum}")]
    FlowRowSum { row: usize, sum: f64 },

    #[error("accumulator holds no trajectories")]
    EmptyAccumulator,
}

pub type Result<T> = std::result::Result<T, Error>;
