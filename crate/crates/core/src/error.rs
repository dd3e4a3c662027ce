use thiserror::Error;

/// Errors raised by the simulation library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("expected {expected} amplitudes for {num_qubits} qubits, got {actual}")]
    AmplitudeCount {
        num_qubits: usize,
        expected: usize,
        actual: usize,
    },
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("dimension {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("qubit index {index} out of range for a {num_qubits}-qubit state")]
    QubitOutOfRange { index: usize, num_qubits: usize },
    #[error("qubit {0} listed more than once")]
    DuplicateQubit(usize),
    #[error("keep set is empty")]
    EmptyKeep,
    #[error("not a permutation of 0..{0}")]
    InvalidPermutation(usize),
    #[error("Pauli label {0} outside 0..=3")]
    PauliLabel(u8),
    #[error("matrix is not unitary (max deviation {deviation:e})")]
    NotUnitary { deviation: f64 },
    #[error("malformed angle schedule: {0}")]
    MalformedSchedule(String),
    #[error("measurement outcome {0} has zero probability")]
    ZeroProbability(String),
    #[error("state is not a codeword (best squared overlap {best:.9})")]
    Undecodable { best: f64 },
    #[error("{requested} joint qubits exceed the cap of {cap}")]
    QubitCap { requested: usize, cap: usize },
    #[error("cannot normalize a zero vector")]
    ZeroVector,
    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
