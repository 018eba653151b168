use thiserror::Error;

use crate::circuit::GateKind;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CircuitError {
    #[error("{kind} expects {expected} qubit(s), got {found}")]
    Arity { kind: GateKind, expected: usize, found: usize },
    #[error("qubit index {qubit} out of range (circuit has {num_qubits} qubits)")]
    QubitOutOfRange { qubit: usize, num_qubits: usize },
    #[error("classical bit {clbit} out of range (circuit has {num_clbits} bits)")]
    ClbitOutOfRange { clbit: usize, num_clbits: usize },
    #[error("{kind} uses qubit {qubit} more than once")]
    RepeatedQubit { kind: GateKind, qubit: usize },
    #[error("measure without a classical target")]
    MissingClbit,
    #[error("{kind} cannot carry a classical target")]
    UnexpectedClbit { kind: GateKind },
    #[error("dummy marker set on a {kind} gate; only swap may carry one")]
    MarkerOnNonSwap { kind: GateKind },
    #[error("qubit {qubit} is measured into bit {clbit} more than once")]
    DuplicateMeasure { qubit: usize, clbit: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QasmError {
    #[error("syntax error at {line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("unsupported gate `{name}` at {line}:{col}")]
    UnsupportedGate { name: String, line: usize, col: usize },
    #[error("index {index} out of range for register `{register}` of size {size} at {line}:{col}")]
    IndexOutOfRange { register: String, index: usize, size: usize, line: usize, col: usize },
    #[error("unknown register `{name}` at {line}:{col}")]
    UnknownRegister { name: String, line: usize, col: usize },
    #[error("duplicate register name `{name}` at {line}:{col}")]
    DuplicateRegister { name: String, line: usize, col: usize },
    #[error("invalid statement at {line}:{col}: {source}")]
    Invalid { line: usize, col: usize, source: CircuitError },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SliceError {
    #[error("barrier region {region} uses qubit {qubit} in more than one gate")]
    OverlapInRegion { region: usize, qubit: usize },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DistributionError {
    #[error("distribution is empty")]
    Empty,
    #[error("bitstring lengths differ ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("invalid distribution: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("circuit has {num_qubits} qubits; simulator cap is {cap}")]
    QubitCapExceeded { num_qubits: usize, cap: usize },
    #[error("circuit measures nothing")]
    NoMeasurements,
    #[error("input has {found} bits, circuit has {expected} qubits")]
    InputLength { expected: usize, found: usize },
    #[error("input contains non-binary character `{0}`")]
    InputChar(char),
    #[error("circuits differ in layout: {0}")]
    LayoutMismatch(String),
    #[error("invalid noise spec: {0}")]
    InvalidNoise(String),
    #[error(transparent)]
    Distribution(#[from] DistributionError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricError {
    #[error("metric id must be in 1..=6, got {0}")]
    InvalidId(u8),
    #[error("circuit has no legal dummy-swap insertion point")]
    NoCandidates,
    #[error(transparent)]
    Slice(#[from] SliceError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ObfuscationError {
    #[error("qubit {qubit} is not free in slice {slice}")]
    OccupiedQubit { slice: usize, qubit: usize },
    #[error("slice {slice} does not exist (circuit has {num_slices})")]
    NoSuchSlice { slice: usize, num_slices: usize },
    #[error("key mismatch: {0}")]
    KeyMismatch(String),
    #[error(transparent)]
    Slice(#[from] SliceError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Qasm(#[from] QasmError),
    #[error(transparent)]
    Slice(#[from] SliceError),
    #[error(transparent)]
    Distribution(#[from] DistributionError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Obfuscation(#[from] ObfuscationError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
