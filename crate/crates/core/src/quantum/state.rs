//! Dense statevector with little-endian qubit ordering: qubit `k` is bit `k`
//! of the amplitude index.

use num_complex::Complex64;
use rand::Rng;

use super::gate::{make_gate, GateKind, GateMatrix};
use super::rdm::OneQubitRdm;
use super::{PauliBasis, QuantumError};

const NORM_TOL: f64 = 1e-10;

/// Normalized pure state over `num_qubits` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: Vec<Complex64>,
    num_qubits: usize,
}

impl StateVector {
    /// `|0…0⟩`.
    pub fn zero(num_qubits: usize) -> Result<Self, QuantumError> {
        if num_qubits == 0 || num_qubits > 30 {
            return Err(QuantumError::QubitCount(num_qubits));
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << num_qubits];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        Ok(Self {
            amplitudes,
            num_qubits,
        })
    }

    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self, QuantumError> {
        let len = amplitudes.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(QuantumError::BadAmplitudeLength(len));
        }
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(QuantumError::NotNormalized(norm));
        }
        Ok(Self {
            num_qubits: len.trailing_zeros() as usize,
            amplitudes,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(|a| a.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    fn check_qubit(&self, q: usize) -> Result<(), QuantumError> {
        if q >= self.num_qubits {
            Err(QuantumError::QubitOutOfRange {
                qubit: q,
                num_qubits: self.num_qubits,
            })
        } else {
            Ok(())
        }
    }

    /// Applies `gate` to `targets` in place. For two-qubit gates the first
    /// target is the more significant factor of the gate's 4×4 basis.
    pub fn apply_mut(&mut self, targets: &[usize], gate: &GateMatrix) -> Result<(), QuantumError> {
        if targets.len() != gate.arity() {
            return Err(QuantumError::ArityMismatch {
                expected: gate.arity(),
                got: targets.len(),
            });
        }
        for &t in targets {
            self.check_qubit(t)?;
        }
        match *targets {
            [q] => self.apply_1q(q, gate),
            [a, b] => {
                if a == b {
                    return Err(QuantumError::RepeatedTarget(a));
                }
                self.apply_2q(a, b, gate)
            }
            _ => unreachable!("arity is 1 or 2"),
        }
        Ok(())
    }

    /// Pure variant of [`StateVector::apply_mut`].
    pub fn apply(&self, targets: &[usize], gate: &GateMatrix) -> Result<Self, QuantumError> {
        let mut out = self.clone();
        out.apply_mut(targets, gate)?;
        Ok(out)
    }

    fn apply_1q(&mut self, q: usize, gate: &GateMatrix) {
        let (u00, u01, u10, u11) = (gate.get(0, 0), gate.get(0, 1), gate.get(1, 0), gate.get(1, 1));
        let bit = 1usize << q;
        for i in 0..self.amplitudes.len() {
            if i & bit != 0 {
                continue;
            }
            let j = i | bit;
            let (a0, a1) = (self.amplitudes[i], self.amplitudes[j]);
            self.amplitudes[i] = u00 * a0 + u01 * a1;
            self.amplitudes[j] = u10 * a0 + u11 * a1;
        }
    }

    fn apply_2q(&mut self, a: usize, b: usize, gate: &GateMatrix) {
        let (ba, bb) = (1usize << a, 1usize << b);
        let m = gate.as_slice();
        for base in 0..self.amplitudes.len() {
            if base & (ba | bb) != 0 {
                continue;
            }
            let idx = [base, base | bb, base | ba, base | ba | bb];
            let v = idx.map(|i| self.amplitudes[i]);
            for (r, &i) in idx.iter().enumerate() {
                let row = &m[r * 4..r * 4 + 4];
                self.amplitudes[i] = row[0] * v[0] + row[1] * v[1] + row[2] * v[2] + row[3] * v[3];
            }
        }
    }

    /// Reduced density matrix of one qubit.
    pub fn partial_trace_1q(&self, qubit: usize) -> Result<OneQubitRdm, QuantumError> {
        self.check_qubit(qubit)?;
        let bit = 1usize << qubit;
        let (mut p0, mut p1) = (0.0, 0.0);
        let mut coh = Complex64::new(0.0, 0.0);
        for i in 0..self.amplitudes.len() {
            if i & bit != 0 {
                continue;
            }
            let (a0, a1) = (self.amplitudes[i], self.amplitudes[i | bit]);
            p0 += a0.norm_sqr();
            p1 += a1.norm_sqr();
            coh += a0 * a1.conj();
        }
        // Renormalize so the trace is 1 up to a single rounding.
        let total = p0 + p1;
        let (p0, coh) = (p0 / total, coh / total);
        Ok(OneQubitRdm::exact_from_parts(p0, 1.0 - p0, coh))
    }

    pub fn all_rdms(&self) -> Vec<OneQubitRdm> {
        (0..self.num_qubits)
            .map(|q| self.partial_trace_1q(q).expect("qubit in range"))
            .collect()
    }

    /// Rotates every qubit so that a computational-basis measurement reads
    /// out `basis`: X via H, Y via H·S†, Z unchanged.
    pub fn rotate_to_basis(&self, basis: &[PauliBasis]) -> Result<Self, QuantumError> {
        if basis.len() != self.num_qubits {
            return Err(QuantumError::BasisLength {
                expected: self.num_qubits,
                got: basis.len(),
            });
        }
        let h = make_gate(GateKind::H, &[]).expect("static gate");
        let sdg = make_gate(GateKind::Sdg, &[]).expect("static gate");
        let mut out = self.clone();
        for (q, b) in basis.iter().enumerate() {
            match b {
                PauliBasis::Z => {}
                PauliBasis::X => out.apply_1q(q, &h),
                PauliBasis::Y => {
                    out.apply_1q(q, &sdg);
                    out.apply_1q(q, &h);
                }
            }
        }
        Ok(out)
    }
}

/// Draws computational-basis outcomes from a fixed Born distribution.
#[derive(Debug, Clone)]
pub struct BornSampler {
    cumulative: Vec<f64>,
    num_qubits: usize,
}

impl BornSampler {
    pub fn new(state: &StateVector) -> Self {
        let mut acc = 0.0;
        let cumulative = state
            .amplitudes
            .iter()
            .map(|a| {
                acc += a.norm_sqr();
                acc
            })
            .collect();
        Self {
            cumulative,
            num_qubits: state.num_qubits,
        }
    }

    /// Samples a basis index; bit `k` of the result is qubit `k`'s outcome.
    pub fn sample_index<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let total = *self.cumulative.last().expect("nonempty");
        let u = rng.random::<f64>() * total;
        let idx = self.cumulative.partition_point(|&c| c <= u);
        // Skip trailing zero-probability indices reached through rounding.
        let mut idx = idx.min(self.cumulative.len() - 1);
        while idx > 0 && self.cumulative[idx] == self.cumulative[idx - 1] {
            idx -= 1;
        }
        idx
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }
}

/// Measures every qubit in its assigned Pauli basis once and returns the
/// outcome bits, index `k` holding qubit `k`.
pub fn sample_measurement<R: Rng + ?Sized>(
    state: &StateVector,
    basis_per_qubit: &[PauliBasis],
    rng: &mut R,
) -> Result<Vec<u8>, QuantumError> {
    let rotated = state.rotate_to_basis(basis_per_qubit)?;
    let idx = BornSampler::new(&rotated).sample_index(rng);
    Ok((0..state.num_qubits).map(|k| ((idx >> k) & 1) as u8).collect())
}
