//! ν-one-class SVM: dual solver, offset recovery and decision function.
//!
//! The dual is `min ½ αᵀKα` subject to `0 ≤ α_i ≤ 1` and `Σ α_i = νl`.
//! It is solved by two-coordinate descent on the maximal violating pair,
//! which keeps the equality constraint exact at every step.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kernels::{KernelKind, KernelMatrix, KernelSource};

/// Floor on the pair curvature, guarding against indefinite or degenerate pairs.
const TAU: f64 = 1e-12;
const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum OcsvmError {
    #[error("nu must lie in (0, 1], got {0}")]
    BadNu(f64),
    #[error("need at least 2 training samples, got {0}")]
    TooFewSamples(usize),
    #[error("kernel matrix is not symmetric (max deviation {0:e})")]
    NotSymmetric(f64),
    #[error("invalid solver settings: {0}")]
    BadSettings(String),
    #[error(
        "solver stopped after {iterations} iterations with KKT violation {violation:e} (objective {objective})"
    )]
    NotConverged {
        iterations: u64,
        violation: f64,
        objective: f64,
    },
    #[error("kernel row has length {got}, expected {expected}")]
    LengthMismatch { expected: usize, got: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverSettings {
    pub kkt_tolerance: f64,
    /// Budget of pair updates.
    pub max_iterations: u64,
    pub alpha_tol: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            kkt_tolerance: 1e-6,
            max_iterations: 10_000_000,
            alpha_tol: 1e-8,
        }
    }
}

impl SolverSettings {
    pub fn validate(&self) -> Result<(), OcsvmError> {
        let ok = |v: f64| v > 0.0 && v.is_finite();
        if !ok(self.kkt_tolerance) || !ok(self.alpha_tol) || self.max_iterations == 0 {
            return Err(OcsvmError::BadSettings(format!("{self:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitDiagnostics {
    pub iterations: u64,
    pub kkt_violation: f64,
    pub objective: f64,
    /// Whether ρ came from free support vectors or the bound fallback.
    pub rho_from_free: bool,
}

/// A fitted model. Decision values need kernel rows against the training
/// samples in their original order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OcsvmModel {
    pub nu: f64,
    pub gamma: Option<f64>,
    pub rho: f64,
    pub alphas: Vec<f64>,
    pub support_indices: Vec<usize>,
    pub kernel_kind: KernelKind,
    /// Decision values within this distance of zero count as zero.
    pub tie_tolerance: f64,
    pub diagnostics: FitDiagnostics,
}

fn check_nu(nu: f64) -> Result<(), OcsvmError> {
    if nu > 0.0 && nu <= 1.0 {
        Ok(())
    } else {
        Err(OcsvmError::BadNu(nu))
    }
}

/// Fits on a dense Gram matrix.
pub fn fit(k: &KernelMatrix, nu: f64, settings: &SolverSettings) -> Result<OcsvmModel, OcsvmError> {
    fit_source(k, nu, settings)
}

/// Fits on any row-addressable symmetric kernel.
pub fn fit_source<S: KernelSource + ?Sized>(
    k: &S,
    nu: f64,
    settings: &SolverSettings,
) -> Result<OcsvmModel, OcsvmError> {
    check_nu(nu)?;
    settings.validate()?;
    let l = k.len();
    if l < 2 {
        return Err(OcsvmError::TooFewSamples(l));
    }
    let asym = k.asymmetry();
    if asym > SYMMETRY_TOL {
        return Err(OcsvmError::NotSymmetric(asym));
    }

    let mut alpha = vec![nu; l];
    let mut grad: Vec<f64> = (0..l)
        .into_par_iter()
        .map(|i| nu * k.row(i).iter().sum::<f64>())
        .collect();
    let diag: Vec<f64> = (0..l).map(|i| k.diag(i)).collect();

    let mut iterations = 0u64;
    let violation = loop {
        // i: can increase, smallest gradient; j: can decrease, largest gradient.
        let mut i_best = None;
        let mut g_min = f64::INFINITY;
        let mut j_best = None;
        let mut g_max = f64::NEG_INFINITY;
        for t in 0..l {
            if alpha[t] < 1.0 && grad[t] < g_min {
                g_min = grad[t];
                i_best = Some(t);
            }
            if alpha[t] > 0.0 && grad[t] > g_max {
                g_max = grad[t];
                j_best = Some(t);
            }
        }
        let (i, j) = match (i_best, j_best) {
            (Some(i), Some(j)) if g_max - g_min > settings.kkt_tolerance => (i, j),
            _ => break (g_max - g_min).max(0.0),
        };
        if iterations >= settings.max_iterations {
            return Err(OcsvmError::NotConverged {
                iterations,
                violation: g_max - g_min,
                objective: objective(&alpha, &grad),
            });
        }
        iterations += 1;

        let row_i = k.row(i);
        let row_j = k.row(j);
        let eta = (diag[i] + diag[j] - 2.0 * row_i[j]).max(TAU);
        let step = ((grad[j] - grad[i]) / eta).min(1.0 - alpha[i]).min(alpha[j]);
        if step == 1.0 - alpha[i] {
            alpha[i] = 1.0;
        } else {
            alpha[i] += step;
        }
        if step == alpha[j] {
            alpha[j] = 0.0;
        } else {
            alpha[j] -= step;
        }
        for (g, (a, b)) in grad.iter_mut().zip(row_i.iter().zip(row_j.iter())) {
            *g += step * (a - b);
        }
    };

    let support_indices: Vec<usize> = (0..l).filter(|&i| alpha[i] > settings.alpha_tol).collect();
    let fresh = fresh_gradient(k, &alpha, &support_indices);
    let (rho, rho_from_free) = rho_from_gradient(&alpha, &fresh, settings.alpha_tol);
    Ok(OcsvmModel {
        nu,
        gamma: k.gamma(),
        rho,
        kernel_kind: k.kind(),
        tie_tolerance: settings.kkt_tolerance,
        diagnostics: FitDiagnostics {
            iterations,
            kkt_violation: violation,
            objective: objective(&alpha, &fresh),
            rho_from_free,
        },
        alphas: alpha,
        support_indices,
    })
}

fn objective(alpha: &[f64], grad: &[f64]) -> f64 {
    0.5 * alpha.iter().zip(grad).map(|(a, g)| a * g).sum::<f64>()
}

/// `G_i = Σ_j α_j K_ji`, accumulated from support-vector rows only.
fn fresh_gradient<S: KernelSource + ?Sized>(k: &S, alpha: &[f64], support: &[usize]) -> Vec<f64> {
    let mut g = vec![0.0; k.len()];
    for &j in support {
        let row = k.row(j);
        for (gi, kji) in g.iter_mut().zip(row.iter()) {
            *gi += alpha[j] * kji;
        }
    }
    g
}

/// Mean gradient over free coordinates; otherwise the midpoint between the
/// largest gradient at the upper bound and the smallest at the lower bound.
/// When one of those sets is empty the other's extreme is used.
fn rho_from_gradient(alpha: &[f64], grad: &[f64], alpha_tol: f64) -> (f64, bool) {
    let mut free_sum = 0.0;
    let mut free_n = 0usize;
    let mut upper_max = f64::NEG_INFINITY;
    let mut lower_min = f64::INFINITY;
    for (&a, &g) in alpha.iter().zip(grad) {
        if a > alpha_tol && a < 1.0 - alpha_tol {
            free_sum += g;
            free_n += 1;
        } else if a >= 1.0 - alpha_tol {
            upper_max = upper_max.max(g);
        } else {
            lower_min = lower_min.min(g);
        }
    }
    if free_n > 0 {
        return (free_sum / free_n as f64, true);
    }
    let rho = match (upper_max.is_finite(), lower_min.is_finite()) {
        (true, true) => 0.5 * (upper_max + lower_min),
        (true, false) => upper_max,
        (false, true) => lower_min,
        (false, false) => unreachable!("l >= 2"),
    };
    (rho, false)
}

/// Recomputes ρ for `model` against the training kernel.
pub fn compute_rho<S: KernelSource + ?Sized>(model: &OcsvmModel, k: &S, alpha_tol: f64) -> f64 {
    let g = fresh_gradient(k, &model.alphas, &model.support_indices);
    rho_from_gradient(&model.alphas, &g, alpha_tol).0
}

impl OcsvmModel {
    pub fn len(&self) -> usize {
        self.alphas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alphas.is_empty()
    }

    /// `Σ_i α_i K(x_i, x) − ρ` for `k_row[i] = K(x_i, x)`.
    pub fn decision_value(&self, k_row: &[f64]) -> Result<f64, OcsvmError> {
        if k_row.len() != self.alphas.len() {
            return Err(OcsvmError::LengthMismatch {
                expected: self.alphas.len(),
                got: k_row.len(),
            });
        }
        let s: f64 = self
            .support_indices
            .iter()
            .map(|&i| self.alphas[i] * k_row[i])
            .sum();
        Ok(s - self.rho)
    }

    /// +1 for normal, −1 for anomaly. A decision value of zero, up to the
    /// solver's KKT tolerance, counts as normal.
    pub fn predict(&self, k_row: &[f64]) -> Result<i8, OcsvmError> {
        self.decision_value(k_row)
            .map(|v| if v.abs() <= self.tie_tolerance { 1 } else { sign(v) })
    }

    pub fn predict_many(&self, k_rows: &[Vec<f64>]) -> Result<Vec<i8>, OcsvmError> {
        k_rows.iter().map(|r| self.predict(r)).collect()
    }

    /// Decision values of the training samples themselves.
    pub fn training_decision_values<S: KernelSource + ?Sized>(&self, k: &S) -> Vec<f64> {
        fresh_gradient(k, &self.alphas, &self.support_indices)
            .into_iter()
            .map(|g| g - self.rho)
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// `sign` with `sign(0) = +1`.
pub fn sign(v: f64) -> i8 {
    if v >= 0.0 {
        1
    } else {
        -1
    }
}
