//! Hardware-efficient data-encoding circuits.
//!
//! Each layer encodes two features per qubit (`RX` then `RZ`) and then runs a
//! nearest-neighbour entangling chain `(0,1), (1,2), …` with the variant's
//! native two-qubit gate. `CX`/`ECR` use the lower index as control; `RXX` is
//! symmetric and fixed at the maximally entangling angle `π/2`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::quantum::{make_gate, GateKind, QuantumError, StateVector};

#[derive(Debug, Error, PartialEq)]
pub enum FeatureMapError {
    #[error("empty sample")]
    EmptySample,
    #[error("sample has {len} features but {num_qubits} qubits encode at most {max}")]
    SampleTooLong {
        len: usize,
        num_qubits: usize,
        max: usize,
    },
    #[error("feature {index} is not finite ({value})")]
    NonFinite { index: usize, value: f64 },
    #[error("invalid feature map spec: {0}")]
    InvalidSpec(String),
    #[error("unknown feature map variant `{0}` (expected cx, ecr or rxx)")]
    UnknownVariant(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Quantum(#[from] QuantumError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Cx,
    Ecr,
    Rxx,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::Cx, Variant::Ecr, Variant::Rxx];

    pub fn entangler(self) -> GateKind {
        match self {
            Variant::Cx => GateKind::Cx,
            Variant::Ecr => GateKind::Ecr,
            Variant::Rxx => GateKind::Rxx,
        }
    }

    /// The platform's native alphabet.
    pub fn native_gates(self) -> &'static [GateKind] {
        match self {
            Variant::Cx => &[GateKind::X, GateKind::Sx, GateKind::Rz, GateKind::Cx],
            Variant::Ecr => &[GateKind::X, GateKind::Sx, GateKind::Rz, GateKind::Ecr],
            Variant::Rxx => &[GateKind::Rx, GateKind::Rz, GateKind::Rxx],
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Variant::Cx => "qrbf-CX",
            Variant::Ecr => "qrbf-ECR",
            Variant::Rxx => "qrbf-RXX",
        }
    }

    pub fn short(self) -> &'static str {
        match self {
            Variant::Cx => "cx",
            Variant::Ecr => "ecr",
            Variant::Rxx => "rxx",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short())
    }
}

impl FromStr for Variant {
    type Err = FeatureMapError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "cx" | "qrbf-cx" => Ok(Variant::Cx),
            "ecr" | "qrbf-ecr" => Ok(Variant::Ecr),
            "rxx" | "qrbf-rxx" => Ok(Variant::Rxx),
            _ => Err(FeatureMapError::UnknownVariant(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureMapSpec {
    pub variant: Variant,
    pub num_qubits: usize,
    pub layers: usize,
    /// Radians per unit of (scaled) feature value.
    pub angle_scale: f64,
}

impl FeatureMapSpec {
    /// Two features per qubit, one layer, angle scale π.
    pub fn for_features(variant: Variant, num_features: usize) -> Self {
        Self {
            variant,
            num_qubits: num_features.div_ceil(2).max(1),
            layers: 1,
            angle_scale: PI,
        }
    }

    pub fn with_layers(mut self, layers: usize) -> Self {
        self.layers = layers;
        self
    }

    pub fn validate(&self) -> Result<(), FeatureMapError> {
        if self.num_qubits == 0 {
            return Err(FeatureMapError::InvalidSpec("num_qubits must be >= 1".into()));
        }
        if self.layers == 0 {
            return Err(FeatureMapError::InvalidSpec("layers must be >= 1".into()));
        }
        if !self.angle_scale.is_finite() {
            return Err(FeatureMapError::InvalidSpec("angle_scale must be finite".into()));
        }
        Ok(())
    }
}

/// One gate application.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instruction {
    pub gate: GateKind,
    pub targets: Vec<usize>,
    pub angles: Vec<f64>,
}

impl Instruction {
    fn one(gate: GateKind, q: usize, angles: Vec<f64>) -> Self {
        Self {
            gate,
            targets: vec![q],
            angles,
        }
    }
}

impl fmt::Display for Instruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ", self.gate)?;
        let targets: Vec<String> = self.targets.iter().map(|t| t.to_string()).collect();
        f.write_str(&targets.join(","))?;
        for a in &self.angles {
            write!(f, " {a:?}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMapCircuit {
    pub spec: FeatureMapSpec,
    pub gates: Vec<Instruction>,
}

/// Encodes `sample` into the feature map described by `spec`. Features past
/// the end of the sample encode as angle 0.
pub fn build_feature_map(
    spec: &FeatureMapSpec,
    sample: &[f64],
) -> Result<FeatureMapCircuit, FeatureMapError> {
    spec.validate()?;
    if sample.is_empty() {
        return Err(FeatureMapError::EmptySample);
    }
    let max = 2 * spec.num_qubits;
    if sample.len() > max {
        return Err(FeatureMapError::SampleTooLong {
            len: sample.len(),
            num_qubits: spec.num_qubits,
            max,
        });
    }
    if let Some((index, &value)) = sample.iter().enumerate().find(|(_, v)| !v.is_finite()) {
        return Err(FeatureMapError::NonFinite { index, value });
    }
    let feature = |i: usize| sample.get(i).copied().unwrap_or(0.0);
    let n = spec.num_qubits;
    let mut gates = Vec::with_capacity(spec.layers * (3 * n));
    for _ in 0..spec.layers {
        for k in 0..n {
            gates.push(Instruction::one(
                GateKind::Rx,
                k,
                vec![spec.angle_scale * feature(2 * k)],
            ));
            gates.push(Instruction::one(
                GateKind::Rz,
                k,
                vec![spec.angle_scale * feature(2 * k + 1)],
            ));
        }
        for k in 0..n.saturating_sub(1) {
            let angles = match spec.variant {
                Variant::Rxx => vec![FRAC_PI_2],
                _ => vec![],
            };
            gates.push(Instruction {
                gate: spec.variant.entangler(),
                targets: vec![k, k + 1],
                angles,
            });
        }
    }
    Ok(FeatureMapCircuit { spec: *spec, gates })
}

/// `RX(θ)` as `RZ(π/2) · SX · RZ(θ+π) · SX · RZ(π/2)` in application order,
/// equal to `RX(θ)` up to global phase.
pub fn decompose_rx(angle: f64) -> Vec<(GateKind, Vec<f64>)> {
    vec![
        (GateKind::Rz, vec![FRAC_PI_2]),
        (GateKind::Sx, vec![]),
        (GateKind::Rz, vec![angle + PI]),
        (GateKind::Sx, vec![]),
        (GateKind::Rz, vec![FRAC_PI_2]),
    ]
}

/// First gate outside the variant's native alphabet.
#[derive(Debug, Clone, PartialEq)]
pub struct NativeViolation {
    pub index: usize,
    pub instruction: Instruction,
}

impl fmt::Display for NativeViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "gate #{} `{}` is not native",
            self.index, self.instruction
        )
    }
}

impl FeatureMapCircuit {
    pub fn num_qubits(&self) -> usize {
        self.spec.num_qubits
    }

    /// Checks every gate against the variant's native alphabet.
    pub fn validate_native(&self) -> Result<(), NativeViolation> {
        let allowed = self.spec.variant.native_gates();
        match self
            .gates
            .iter()
            .enumerate()
            .find(|(_, g)| !allowed.contains(&g.gate))
        {
            Some((index, g)) => Err(NativeViolation {
                index,
                instruction: g.clone(),
            }),
            None => Ok(()),
        }
    }

    /// Rewrites `RX` gates into `RZ`/`SX` for the superconducting variants;
    /// the `RXX` variant is already native and is returned unchanged.
    pub fn transpile_native(&self) -> FeatureMapCircuit {
        if self.spec.variant == Variant::Rxx {
            return self.clone();
        }
        let mut gates = Vec::with_capacity(self.gates.len() * 3);
        for g in &self.gates {
            if g.gate == GateKind::Rx {
                let q = g.targets[0];
                gates.extend(
                    decompose_rx(g.angles[0])
                        .into_iter()
                        .map(|(gate, angles)| Instruction::one(gate, q, angles)),
                );
            } else {
                gates.push(g.clone());
            }
        }
        FeatureMapCircuit {
            spec: self.spec,
            gates,
        }
    }

    /// Number of time steps when gates on disjoint qubits run in parallel.
    pub fn depth(&self) -> usize {
        let mut busy = vec![0usize; self.spec.num_qubits];
        for g in &self.gates {
            let start = g.targets.iter().map(|&t| busy[t]).max().unwrap_or(0);
            for &t in &g.targets {
                busy[t] = start + 1;
            }
        }
        busy.into_iter().max().unwrap_or(0)
    }

    pub fn simulate(&self) -> Result<StateVector, FeatureMapError> {
        let mut state = StateVector::zero(self.spec.num_qubits)?;
        for g in &self.gates {
            let m = make_gate(g.gate, &g.angles)?;
            state.apply_mut(&g.targets, &m)?;
        }
        Ok(state)
    }

    /// One `GATE q0[,q1][ angle…]` line per instruction.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for g in &self.gates {
            out.push_str(&g.to_string());
            out.push('\n');
        }
        out
    }
}

/// Parses the line format written by [`FeatureMapCircuit::to_text`]. Blank
/// lines and `#` comments are skipped.
pub fn parse_instructions(text: &str) -> Result<Vec<Instruction>, FeatureMapError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |msg: String| FeatureMapError::Parse { line: i + 1, msg };
        let mut parts = line.split_whitespace();
        let gate: GateKind = parts
            .next()
            .ok_or_else(|| err("missing gate".into()))?
            .parse()
            .map_err(|e: QuantumError| err(e.to_string()))?;
        let targets = parts
            .next()
            .ok_or_else(|| err("missing targets".into()))?
            .split(',')
            .map(|t| t.parse::<usize>().map_err(|e| err(format!("bad target `{t}`: {e}"))))
            .collect::<Result<Vec<_>, _>>()?;
        let angles = parts
            .map(|a| a.parse::<f64>().map_err(|e| err(format!("bad angle `{a}`: {e}"))))
            .collect::<Result<Vec<_>, _>>()?;
        if targets.len() != gate.arity() || angles.len() != gate.num_params() {
            return Err(err(format!("wrong operand count for {gate}")));
        }
        out.push(Instruction {
            gate,
            targets,
            angles,
        });
    }
    Ok(out)
}
