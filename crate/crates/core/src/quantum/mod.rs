//! Statevector simulation primitives.

mod gate;
mod rdm;
mod state;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use gate::{make_gate, GateKind, GateMatrix};
pub use rdm::{frobenius_distance, OneQubitRdm, RdmKind};
pub use state::{sample_measurement, BornSampler, StateVector};

#[derive(Debug, Error, PartialEq)]
pub enum QuantumError {
    #[error("unknown gate `{0}`")]
    UnknownGate(String),
    #[error("gate {gate} takes {expected} angle(s), got {got}")]
    ParamCount {
        gate: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("non-finite rotation angle {0}")]
    NonFiniteAngle(f64),
    #[error("gate acts on {expected} qubit(s) but {got} target(s) were given")]
    ArityMismatch { expected: usize, got: usize },
    #[error("gate matrix must have {expected} entries, got {got}")]
    BadMatrixSize { expected: usize, got: usize },
    #[error("qubit {qubit} out of range for a {num_qubits}-qubit state")]
    QubitOutOfRange { qubit: usize, num_qubits: usize },
    #[error("qubit {0} targeted twice")]
    RepeatedTarget(usize),
    #[error("unsupported qubit count {0}")]
    QubitCount(usize),
    #[error("amplitude vector length {0} is not a power of two >= 2")]
    BadAmplitudeLength(usize),
    #[error("state norm {0} differs from 1")]
    NotNormalized(f64),
    #[error("expected {expected} measurement bases, got {got}")]
    BasisLength { expected: usize, got: usize },
}

/// Single-qubit measurement basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PauliBasis {
    X,
    Y,
    Z,
}

impl PauliBasis {
    pub const ALL: [PauliBasis; 3] = [PauliBasis::X, PauliBasis::Y, PauliBasis::Z];
}
