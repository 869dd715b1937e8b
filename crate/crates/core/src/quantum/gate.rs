//! Native gate alphabet and unitary construction.
//!
//! Two-qubit matrices are written in the basis `|a b⟩` where `a` is the first
//! listed target (the more significant tensor factor) and `b` the second. For
//! `CX`, `ECR` and `RZX` the first target is the control.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::QuantumError;

const C0: Complex64 = Complex64::new(0.0, 0.0);
const C1: Complex64 = Complex64::new(1.0, 0.0);

/// Gate identifiers understood by [`make_gate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GateKind {
    H,
    Sdg,
    X,
    Sx,
    Rx,
    Rz,
    Cx,
    Ecr,
    Rxx,
    Rzx,
}

impl GateKind {
    pub const ALL: [GateKind; 10] = [
        GateKind::H,
        GateKind::Sdg,
        GateKind::X,
        GateKind::Sx,
        GateKind::Rx,
        GateKind::Rz,
        GateKind::Cx,
        GateKind::Ecr,
        GateKind::Rxx,
        GateKind::Rzx,
    ];

    pub fn arity(self) -> usize {
        match self {
            GateKind::Cx | GateKind::Ecr | GateKind::Rxx | GateKind::Rzx => 2,
            _ => 1,
        }
    }

    pub fn num_params(self) -> usize {
        match self {
            GateKind::Rx | GateKind::Rz | GateKind::Rxx | GateKind::Rzx => 1,
            _ => 0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GateKind::H => "H",
            GateKind::Sdg => "SDG",
            GateKind::X => "X",
            GateKind::Sx => "SX",
            GateKind::Rx => "RX",
            GateKind::Rz => "RZ",
            GateKind::Cx => "CX",
            GateKind::Ecr => "ECR",
            GateKind::Rxx => "RXX",
            GateKind::Rzx => "RZX",
        }
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GateKind {
    type Err = QuantumError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        GateKind::ALL
            .iter()
            .copied()
            .find(|g| g.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| QuantumError::UnknownGate(s.to_string()))
    }
}

/// A 2×2 or 4×4 unitary stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct GateMatrix {
    matrix: Vec<Complex64>,
    arity: usize,
}

impl GateMatrix {
    /// Wraps a row-major matrix of dimension `2^arity`. Unitarity is the
    /// caller's responsibility; see [`GateMatrix::unitarity_error`].
    pub fn from_raw(arity: usize, matrix: Vec<Complex64>) -> Result<Self, QuantumError> {
        if !(1..=2).contains(&arity) {
            return Err(QuantumError::ArityMismatch {
                expected: arity,
                got: arity,
            });
        }
        let dim = 1usize << arity;
        if matrix.len() != dim * dim {
            return Err(QuantumError::BadMatrixSize {
                expected: dim * dim,
                got: matrix.len(),
            });
        }
        Ok(Self { matrix, arity })
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn dim(&self) -> usize {
        1 << self.arity
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.matrix
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.matrix[row * self.dim() + col]
    }

    /// Matrix product `self · rhs`.
    pub fn matmul(&self, rhs: &GateMatrix) -> Result<GateMatrix, QuantumError> {
        if self.arity != rhs.arity {
            return Err(QuantumError::ArityMismatch {
                expected: self.arity,
                got: rhs.arity,
            });
        }
        let d = self.dim();
        let mut out = vec![C0; d * d];
        for i in 0..d {
            for k in 0..d {
                let a = self.get(i, k);
                for j in 0..d {
                    out[i * d + j] += a * rhs.get(k, j);
                }
            }
        }
        Ok(GateMatrix {
            matrix: out,
            arity: self.arity,
        })
    }

    pub fn adjoint(&self) -> GateMatrix {
        let d = self.dim();
        let mut out = vec![C0; d * d];
        for i in 0..d {
            for j in 0..d {
                out[j * d + i] = self.get(i, j).conj();
            }
        }
        GateMatrix {
            matrix: out,
            arity: self.arity,
        }
    }

    /// Largest entrywise deviation of `U†U` from the identity.
    pub fn unitarity_error(&self) -> f64 {
        let d = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                let mut acc = C0;
                for k in 0..d {
                    acc += self.get(k, i).conj() * self.get(k, j);
                }
                let target = if i == j { C1 } else { C0 };
                worst = worst.max((acc - target).norm());
            }
        }
        worst
    }

    /// Largest entrywise deviation after removing the best global phase.
    pub fn phase_distance(&self, other: &GateMatrix) -> f64 {
        if self.arity != other.arity {
            return f64::INFINITY;
        }
        // Phase from the overlap Tr(A†B); exact when B = e^{iφ}A.
        let overlap: Complex64 = self
            .matrix
            .iter()
            .zip(&other.matrix)
            .map(|(a, b)| a.conj() * b)
            .sum();
        if overlap.norm() == 0.0 {
            return f64::INFINITY;
        }
        let phase = overlap / overlap.norm();
        self.matrix
            .iter()
            .zip(&other.matrix)
            .map(|(a, b)| (a * phase - b).norm())
            .fold(0.0, f64::max)
    }

    /// Largest entrywise deviation, phase-sensitive.
    pub fn max_abs_diff(&self, other: &GateMatrix) -> f64 {
        self.matrix
            .iter()
            .zip(&other.matrix)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

fn one(m: [Complex64; 4]) -> GateMatrix {
    GateMatrix {
        matrix: m.to_vec(),
        arity: 1,
    }
}

fn two(m: [Complex64; 16]) -> GateMatrix {
    GateMatrix {
        matrix: m.to_vec(),
        arity: 2,
    }
}

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn im(x: f64) -> Complex64 {
    Complex64::new(0.0, x)
}

/// `exp(-i θ/2 · P⊗Q)` for a Pauli product whose square is the identity:
/// `cos(θ/2) I − i sin(θ/2) P⊗Q`.
fn pauli_rotation(theta: f64, pq: &[Complex64; 16]) -> GateMatrix {
    let c = (theta / 2.0).cos();
    let s = (theta / 2.0).sin();
    let mut m = [C0; 16];
    for i in 0..4 {
        for j in 0..4 {
            let id = if i == j { re(c) } else { C0 };
            m[i * 4 + j] = id - im(s) * pq[i * 4 + j];
        }
    }
    two(m)
}

// X⊗X: flips both bits.
const XX: [Complex64; 16] = [
    C0, C0, C0, C1, //
    C0, C0, C1, C0, //
    C0, C1, C0, C0, //
    C1, C0, C0, C0,
];

// Z⊗X: sign from the first qubit, flip on the second.
const ZX: [Complex64; 16] = [
    C0,
    C1,
    C0,
    C0,
    C1,
    C0,
    C0,
    C0,
    C0,
    C0,
    C0,
    Complex64::new(-1.0, 0.0),
    C0,
    C0,
    Complex64::new(-1.0, 0.0),
    C0,
];

/// Builds the unitary for `kind` with rotation angles in radians.
pub fn make_gate(kind: GateKind, params: &[f64]) -> Result<GateMatrix, QuantumError> {
    if params.len() != kind.num_params() {
        return Err(QuantumError::ParamCount {
            gate: kind.name(),
            expected: kind.num_params(),
            got: params.len(),
        });
    }
    if let Some(bad) = params.iter().find(|p| !p.is_finite()) {
        return Err(QuantumError::NonFiniteAngle(*bad));
    }
    let h = FRAC_1_SQRT_2;
    let gate = match kind {
        GateKind::H => one([re(h), re(h), re(h), re(-h)]),
        GateKind::Sdg => one([C1, C0, C0, im(-1.0)]),
        GateKind::X => one([C0, C1, C1, C0]),
        GateKind::Sx => {
            let a = Complex64::new(0.5, 0.5);
            let b = Complex64::new(0.5, -0.5);
            one([a, b, b, a])
        }
        GateKind::Rx => {
            let (s, c) = (params[0] / 2.0).sin_cos();
            one([re(c), im(-s), im(-s), re(c)])
        }
        GateKind::Rz => {
            let half = params[0] / 2.0;
            one([
                Complex64::from_polar(1.0, -half),
                C0,
                C0,
                Complex64::from_polar(1.0, half),
            ])
        }
        GateKind::Cx => two([
            C1, C0, C0, C0, //
            C0, C1, C0, C0, //
            C0, C0, C0, C1, //
            C0, C0, C1, C0,
        ]),
        GateKind::Ecr => {
            // Closed form of RZX(-π/4)·(RX(π)⊗I)·RZX(π/4) = (-i/√2)(X⊗I − Y⊗X).
            let a = re(h);
            let b = im(h);
            let s = Complex64::new(0.0, -1.0);
            two([
                C0,
                C0,
                s * a,
                s * b,
                C0,
                C0,
                s * b,
                s * a,
                s * a,
                -s * b,
                C0,
                C0,
                -s * b,
                s * a,
                C0,
                C0,
            ])
        }
        GateKind::Rxx => pauli_rotation(params[0], &XX),
        GateKind::Rzx => pauli_rotation(params[0], &ZX),
    };
    Ok(gate)
}
