use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Whether a reduced density matrix came from exact simulation or from
/// averaging measurement snapshots.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RdmKind {
    Exact,
    Estimated,
}

/// 2×2 one-qubit reduced density matrix, row-major.
///
/// Exact matrices are positive semidefinite. Estimated ones are raw snapshot
/// averages: Hermitian with unit trace, eigenvalues in `[-1, 2]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OneQubitRdm {
    m: [Complex64; 4],
    kind: RdmKind,
}

impl OneQubitRdm {
    pub(crate) fn exact_from_parts(p0: f64, p1: f64, coherence: Complex64) -> Self {
        Self {
            m: [
                Complex64::new(p0, 0.0),
                coherence,
                coherence.conj(),
                Complex64::new(p1, 0.0),
            ],
            kind: RdmKind::Exact,
        }
    }

    pub fn new(m: [Complex64; 4], kind: RdmKind) -> Self {
        Self { m, kind }
    }

    /// Builds `(I + x X + y Y + z Z) / 2`.
    pub fn from_bloch(x: f64, y: f64, z: f64, kind: RdmKind) -> Self {
        Self {
            m: [
                Complex64::new((1.0 + z) / 2.0, 0.0),
                Complex64::new(x / 2.0, -y / 2.0),
                Complex64::new(x / 2.0, y / 2.0),
                Complex64::new((1.0 - z) / 2.0, 0.0),
            ],
            kind,
        }
    }

    pub fn kind(&self) -> RdmKind {
        self.kind
    }

    pub fn matrix(&self) -> &[Complex64; 4] {
        &self.m
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.m[row * 2 + col]
    }

    pub fn trace(&self) -> Complex64 {
        self.m[0] + self.m[3]
    }

    /// Largest deviation from Hermiticity.
    pub fn hermiticity_error(&self) -> f64 {
        let off = (self.m[1] - self.m[2].conj()).norm();
        off.max(self.m[0].im.abs()).max(self.m[3].im.abs())
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> [f64; 2] {
        let a = self.m[0].re;
        let d = self.m[3].re;
        let b = (self.m[1] + self.m[2].conj()) / 2.0;
        let mean = (a + d) / 2.0;
        let rad = (((a - d) / 2.0).powi(2) + b.norm_sqr()).sqrt();
        [mean - rad, mean + rad]
    }

    /// `Tr(ρ²)`.
    pub fn purity(&self) -> f64 {
        self.m.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Bloch vector `(⟨X⟩, ⟨Y⟩, ⟨Z⟩)`.
    pub fn bloch(&self) -> [f64; 3] {
        [
            self.m[1].re + self.m[2].re,
            self.m[2].im - self.m[1].im,
            self.m[0].re - self.m[3].re,
        ]
    }

    /// Row-major real/imaginary interleaving: `[re00, im00, re01, im01, …]`.
    pub fn to_flat(&self) -> [f64; 8] {
        let mut out = [0.0; 8];
        for (i, z) in self.m.iter().enumerate() {
            out[2 * i] = z.re;
            out[2 * i + 1] = z.im;
        }
        out
    }

    pub fn from_flat(flat: &[f64; 8], kind: RdmKind) -> Self {
        let mut m = [Complex64::new(0.0, 0.0); 4];
        for (i, z) in m.iter_mut().enumerate() {
            *z = Complex64::new(flat[2 * i], flat[2 * i + 1]);
        }
        Self { m, kind }
    }

    pub fn squared_frobenius_distance(&self, other: &OneQubitRdm) -> f64 {
        self.m
            .iter()
            .zip(&other.m)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum()
    }
}

/// `√Tr[(a−b)†(a−b)]`.
pub fn frobenius_distance(a: &OneQubitRdm, b: &OneQubitRdm) -> f64 {
    a.squared_frobenius_distance(b).sqrt()
}
