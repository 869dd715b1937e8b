//! Partial state tomography of one-qubit reduced density matrices.
//!
//! Every shot measures all qubits in the same Pauli basis. A single-qubit
//! outcome `b` in basis `U` becomes the snapshot `3·U†|b⟩⟨b|U − I`. The
//! estimate of each qubit's RDM averages the snapshots of each basis and then
//! averages the three basis means, which equals the plain snapshot average for
//! an equal split and stays unbiased when the split is uneven. No positivity
//! projection is applied.
//!
//! Shots execute in basis blocks `X`, `Y`, `Z`; the optional noise channel
//! indexes time by the global shot counter in that order.

use std::f64::consts::FRAC_PI_4;
use std::io::Write;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::featuremap::{FeatureMapCircuit, FeatureMapError};
use crate::quantum::{
    frobenius_distance, BornSampler, OneQubitRdm, PauliBasis, RdmKind, StateVector,
};
use crate::seeding::task_rng;

#[derive(Debug, Error)]
pub enum TomographyError {
    #[error("shot plan needs at least 3 shots, got {0}")]
    TooFewShots(usize),
    #[error("every basis needs at least one shot, got {0:?}")]
    EmptyBasis([usize; 3]),
    #[error("noise parameter {name} = {value} outside its range")]
    BadNoise { name: &'static str, value: f64 },
    #[error("shot grid must be non-empty and strictly ascending")]
    BadShotGrid,
    #[error("precision sweep needs at least 2 repeats, got {0}")]
    TooFewRepeats(usize),
    #[error(transparent)]
    Circuit(#[from] FeatureMapError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Shots per measurement basis, stored in the order `X, Y, Z`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShotPlan {
    per_basis: [usize; 3],
}

impl ShotPlan {
    /// Explicit split; every basis must receive at least one shot.
    pub fn from_counts(x: usize, y: usize, z: usize) -> Result<Self, TomographyError> {
        if x == 0 || y == 0 || z == 0 {
            return Err(TomographyError::EmptyBasis([x, y, z]));
        }
        Ok(Self { per_basis: [x, y, z] })
    }

    pub fn total(&self) -> usize {
        self.per_basis.iter().sum()
    }

    pub fn per_basis(&self) -> [usize; 3] {
        self.per_basis
    }

    pub fn shots(&self, basis: PauliBasis) -> usize {
        match basis {
            PauliBasis::X => self.per_basis[0],
            PauliBasis::Y => self.per_basis[1],
            PauliBasis::Z => self.per_basis[2],
        }
    }
}

/// Equal split of `total` shots; the remainder goes to Z first, then X.
pub fn plan_shots(total: usize) -> Result<ShotPlan, TomographyError> {
    if total < 3 {
        return Err(TomographyError::TooFewShots(total));
    }
    let base = total / 3;
    let rem = total % 3;
    let z = base + usize::from(rem >= 1);
    let x = base + usize::from(rem >= 2);
    Ok(ShotPlan {
        per_basis: [x, base, z],
    })
}

/// Readout noise applied per qubit per shot.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct NoiseConfig {
    /// Depolarizing probability at the start of the experiment.
    pub depolarizing_p: f64,
    /// Independent classical bit-flip probability on readout.
    pub readout_flip_p: f64,
    /// Depolarizing probability added per executed shot.
    pub drift_rate: f64,
}

impl NoiseConfig {
    pub fn validate(&self) -> Result<(), TomographyError> {
        let check = |name, value: f64, hi: f64| {
            if value.is_finite() && (0.0..=hi).contains(&value) {
                Ok(())
            } else {
                Err(TomographyError::BadNoise { name, value })
            }
        };
        check("depolarizing_p", self.depolarizing_p, 1.0)?;
        check("readout_flip_p", self.readout_flip_p, 1.0)?;
        check("drift_rate", self.drift_rate, f64::INFINITY)?;
        Ok(())
    }

    pub fn is_noiseless(&self) -> bool {
        self.depolarizing_p == 0.0 && self.readout_flip_p == 0.0 && self.drift_rate == 0.0
    }

    /// Depolarizing probability in effect for the shot with index `t`,
    /// clamped to 1.
    pub fn depolarizing_at(&self, t: usize) -> f64 {
        (self.depolarizing_p + self.drift_rate * t as f64).min(1.0)
    }
}

/// One single-qubit measurement result.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SnapshotRecord {
    pub qubit: usize,
    pub basis: PauliBasis,
    pub outcome: u8,
}

/// `3·U†|b⟩⟨b|U − I` with `U ∈ {H, H·S†, I}` for bases `X, Y, Z`, written in
/// the closed form `(I + 3s·σ_B)/2` with `s = ±1` for outcome `0`/`1`.
pub fn snapshot_matrix(basis: PauliBasis, outcome: u8) -> [Complex64; 4] {
    let s = if outcome & 1 == 0 { 1.0 } else { -1.0 };
    let z = Complex64::new(0.0, 0.0);
    let half = Complex64::new(0.5, 0.0);
    match basis {
        PauliBasis::Z => [
            Complex64::new((1.0 + 3.0 * s) / 2.0, 0.0),
            z,
            z,
            Complex64::new((1.0 - 3.0 * s) / 2.0, 0.0),
        ],
        PauliBasis::X => {
            let off = Complex64::new(1.5 * s, 0.0);
            [half, off, off, half]
        }
        PauliBasis::Y => [
            half,
            Complex64::new(0.0, -1.5 * s),
            Complex64::new(0.0, 1.5 * s),
            half,
        ],
    }
}

impl SnapshotRecord {
    pub fn matrix(&self) -> [Complex64; 4] {
        snapshot_matrix(self.basis, self.outcome)
    }
}

/// Exact RDMs of the simulated circuit, one per qubit.
pub fn exact_rdms(circuit: &FeatureMapCircuit) -> Result<Vec<OneQubitRdm>, TomographyError> {
    Ok(circuit.simulate()?.all_rdms())
}

/// Per-qubit outcome tallies, indexed `[qubit][basis][bit]`.
type Tally = Vec<[[u64; 2]; 3]>;

fn collect_counts<R: Rng + ?Sized>(
    state: &StateVector,
    plan: &ShotPlan,
    noise: Option<&NoiseConfig>,
    rng: &mut R,
) -> Tally {
    let n = state.num_qubits();
    let mut tally: Tally = vec![[[0; 2]; 3]; n];
    let noise = noise.filter(|c| !c.is_noiseless());
    let mut t = 0usize;
    for (b_idx, basis) in PauliBasis::ALL.iter().enumerate() {
        let rotated = state
            .rotate_to_basis(&vec![*basis; n])
            .expect("basis length matches");
        let sampler = BornSampler::new(&rotated);
        for _ in 0..plan.shots(*basis) {
            let idx = sampler.sample_index(rng);
            match noise {
                None => {
                    for (k, q) in tally.iter_mut().enumerate() {
                        q[b_idx][(idx >> k) & 1] += 1;
                    }
                }
                Some(cfg) => {
                    let p_dep = cfg.depolarizing_at(t);
                    for (k, q) in tally.iter_mut().enumerate() {
                        let mut bit = (idx >> k) & 1;
                        // Depolarizing: the qubit is replaced by I/2, so the
                        // outcome becomes a fair coin.
                        if p_dep > 0.0 && rng.random::<f64>() < p_dep {
                            bit = usize::from(rng.random::<bool>());
                        }
                        if cfg.readout_flip_p > 0.0 && rng.random::<f64>() < cfg.readout_flip_p {
                            bit ^= 1;
                        }
                        q[b_idx][bit] += 1;
                    }
                }
            }
            t += 1;
        }
    }
    tally
}

fn average_snapshots(tally: &Tally) -> Vec<OneQubitRdm> {
    let snaps: Vec<[[Complex64; 4]; 2]> = PauliBasis::ALL
        .iter()
        .map(|&b| [snapshot_matrix(b, 0), snapshot_matrix(b, 1)])
        .collect();
    tally
        .iter()
        .map(|q| {
            let mut m = [Complex64::new(0.0, 0.0); 4];
            for (b, pair) in snaps.iter().enumerate() {
                let shots = (q[b][0] + q[b][1]) as f64;
                let mut basis_mean = [Complex64::new(0.0, 0.0); 4];
                for (bit, snap) in pair.iter().enumerate() {
                    let c = q[b][bit] as f64;
                    for (acc, s) in basis_mean.iter_mut().zip(snap) {
                        *acc += c * s;
                    }
                }
                for (acc, s) in m.iter_mut().zip(&basis_mean) {
                    *acc += s / shots;
                }
            }
            for z in &mut m {
                *z /= 3.0;
            }
            OneQubitRdm::new(m, RdmKind::Estimated)
        })
        .collect()
}

/// Snapshot-averaged RDM estimates for a prepared state.
pub fn estimate_rdms_from_state<R: Rng + ?Sized>(
    state: &StateVector,
    plan: &ShotPlan,
    noise: Option<&NoiseConfig>,
    rng: &mut R,
) -> Vec<OneQubitRdm> {
    let tally = collect_counts(state, plan, noise, rng);
    average_snapshots(&tally)
}

/// Simulates `circuit` and estimates every qubit's RDM from `plan.total()`
/// snapshots.
pub fn estimate_rdms<R: Rng + ?Sized>(
    circuit: &FeatureMapCircuit,
    plan: &ShotPlan,
    noise: Option<&NoiseConfig>,
    rng: &mut R,
) -> Result<Vec<OneQubitRdm>, TomographyError> {
    if let Some(cfg) = noise {
        cfg.validate()?;
    }
    let state = circuit.simulate()?;
    Ok(estimate_rdms_from_state(&state, plan, noise, rng))
}

/// States prepared for the precision sweep.
#[derive(Debug, Clone)]
pub enum SweepTarget {
    /// `(|0⟩ + |1⟩)/√2`
    Plus,
    /// `(|0⟩ + e^{iπ/4}|1⟩)/√2`
    T,
    Circuit(FeatureMapCircuit),
}

impl SweepTarget {
    pub fn label(&self) -> &'static str {
        match self {
            SweepTarget::Plus => "plus",
            SweepTarget::T => "T",
            SweepTarget::Circuit(_) => "circuit",
        }
    }

    pub fn prepare(&self) -> Result<StateVector, TomographyError> {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        match self {
            SweepTarget::Plus => Ok(StateVector::from_amplitudes(vec![
                Complex64::new(s, 0.0),
                Complex64::new(s, 0.0),
            ])
            .expect("normalized")),
            SweepTarget::T => Ok(StateVector::from_amplitudes(vec![
                Complex64::new(s, 0.0),
                Complex64::from_polar(s, FRAC_PI_4),
            ])
            .expect("normalized")),
            SweepTarget::Circuit(c) => Ok(c.simulate()?),
        }
    }
}

/// One row of a precision sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub shots: usize,
    pub mean_d: f64,
    pub std_d: f64,
}

/// Distance between estimated and exact RDM lists: `√Σ_k d(ρ_k, ρ̂_k)²`,
/// which is the plain Frobenius distance for a single qubit.
pub fn rdm_list_distance(exact: &[OneQubitRdm], estimated: &[OneQubitRdm]) -> f64 {
    exact
        .iter()
        .zip(estimated)
        .map(|(a, b)| frobenius_distance(a, b).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Raw distances of each repeat, indexed `[grid point][repeat]`. Repeat `r`
/// at `shots` uses the child seed `shots=<shots>/repeat=<r>` of `seed`.
pub fn precision_sweep_samples(
    target: &SweepTarget,
    shot_grid: &[usize],
    repeats: usize,
    noise: Option<&NoiseConfig>,
    seed: u64,
) -> Result<Vec<Vec<f64>>, TomographyError> {
    if shot_grid.is_empty() || shot_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(TomographyError::BadShotGrid);
    }
    if repeats < 2 {
        return Err(TomographyError::TooFewRepeats(repeats));
    }
    if let Some(cfg) = noise {
        cfg.validate()?;
    }
    let state = target.prepare()?;
    let exact = state.all_rdms();
    shot_grid
        .iter()
        .map(|&shots| {
            let plan = plan_shots(shots)?;
            Ok((0..repeats)
                .into_par_iter()
                .map(|r| {
                    let mut rng = task_rng(seed, &format!("shots={shots}/repeat={r}"));
                    let est = estimate_rdms_from_state(&state, &plan, noise, &mut rng);
                    rdm_list_distance(&exact, &est)
                })
                .collect())
        })
        .collect()
}

/// Mean and sample standard deviation of the tomography error per shot count.
pub fn precision_sweep(
    target: &SweepTarget,
    shot_grid: &[usize],
    repeats: usize,
    noise: Option<&NoiseConfig>,
    seed: u64,
) -> Result<Vec<SweepRow>, TomographyError> {
    let samples = precision_sweep_samples(target, shot_grid, repeats, noise, seed)?;
    Ok(shot_grid
        .iter()
        .zip(samples)
        .map(|(&shots, d)| {
            let n = d.len() as f64;
            let mean = d.iter().sum::<f64>() / n;
            let var = d.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
            SweepRow {
                shots,
                mean_d: mean,
                std_d: var.sqrt(),
            }
        })
        .collect())
}

/// Least-squares slope of `ln(mean_d)` against `ln(shots)`.
pub fn log_log_slope(rows: &[SweepRow]) -> f64 {
    let xs: Vec<f64> = rows.iter().map(|r| (r.shots as f64).ln()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.mean_d.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// Writes `shots,mean_d,std_d` rows with a header.
pub fn write_sweep_csv<W: Write>(mut w: W, rows: &[SweepRow]) -> std::io::Result<()> {
    writeln!(w, "shots,mean_d,std_d")?;
    for r in rows {
        writeln!(w, "{},{:?},{:?}", r.shots, r.mean_d, r.std_d)?;
    }
    Ok(())
}
