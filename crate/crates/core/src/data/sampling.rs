use rand::seq::{index, SliceRandom};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{DataError, NUM_FEATURES};

pub const DEFAULT_TEST_FRACTION: f64 = 0.1;
/// Standardized values are clipped to `[−CLIP, CLIP]` then divided by `CLIP`.
pub const CLIP: f64 = 3.0;

fn anomaly_indices(labels: &[u8]) -> (Vec<usize>, Vec<usize>) {
    (0..labels.len()).partition(|&i| labels[i] == 1)
}

/// Indices of `n_anomalies` anomalies plus `round(n_anomalies·(1−r)/r)`
/// normals, drawn without replacement; returned in ascending order.
pub fn subsample_to_ratio<R: Rng + ?Sized>(
    labels: &[u8],
    r: f64,
    n_anomalies: usize,
    rng: &mut R,
) -> Result<Vec<usize>, DataError> {
    if !(r > 0.0 && r <= 1.0) {
        return Err(DataError::BadRatio(r));
    }
    let (anom, norm) = anomaly_indices(labels);
    let n_normal = (n_anomalies as f64 * (1.0 - r) / r).round() as usize;
    if anom.len() < n_anomalies {
        return Err(DataError::InsufficientPool {
            kind: "anomalous",
            needed: n_anomalies,
            have: anom.len(),
        });
    }
    if norm.len() < n_normal {
        return Err(DataError::InsufficientPool {
            kind: "normal",
            needed: n_normal,
            have: norm.len(),
        });
    }
    let mut out: Vec<usize> = index::sample(rng, anom.len(), n_anomalies)
        .into_iter()
        .map(|i| anom[i])
        .chain(index::sample(rng, norm.len(), n_normal).into_iter().map(|i| norm[i]))
        .collect();
    out.sort_unstable();
    Ok(out)
}

/// Train/test partition of positions `0..labels.len()`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSplit {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
    pub anomaly_ratio: f64,
}

fn ratio(labels: &[u8]) -> f64 {
    labels.iter().filter(|&&l| l == 1).count() as f64 / labels.len() as f64
}

/// Stratified split: each class contributes `round(n_class · test_fraction)`
/// to the test part, adjusted so the test size is `round(n · test_fraction)`.
pub fn split<R: Rng + ?Sized>(
    labels: &[u8],
    test_fraction: f64,
    rng: &mut R,
) -> Result<DatasetSplit, DataError> {
    let n = labels.len();
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(DataError::BadSplit {
            n,
            reason: format!("test fraction {test_fraction} outside (0, 1)"),
        });
    }
    let n_test = (n as f64 * test_fraction).round() as usize;
    if n_test == 0 || n_test == n {
        return Err(DataError::BadSplit {
            n,
            reason: "a part would be empty".into(),
        });
    }
    let (mut anom, mut norm) = anomaly_indices(labels);
    anom.shuffle(rng);
    norm.shuffle(rng);
    let mut t_anom = ((anom.len() as f64 * test_fraction).round() as usize).min(anom.len());
    t_anom = t_anom.clamp(n_test.saturating_sub(norm.len()), n_test);
    let t_norm = n_test - t_anom;
    let mut test: Vec<usize> = anom[..t_anom].iter().chain(&norm[..t_norm]).copied().collect();
    let mut train: Vec<usize> = anom[t_anom..].iter().chain(&norm[t_norm..]).copied().collect();
    test.sort_unstable();
    train.sort_unstable();
    Ok(DatasetSplit {
        train,
        test,
        anomaly_ratio: ratio(labels),
    })
}

/// Stratified k-fold partition: shuffled anomalies are dealt round-robin,
/// then shuffled normals continue the deal, so fold sizes differ by at most one.
pub fn kfold<R: Rng + ?Sized>(labels: &[u8], k: usize, rng: &mut R) -> Result<Vec<Vec<usize>>, DataError> {
    let n = labels.len();
    if k < 2 || k > n {
        return Err(DataError::BadSplit {
            n,
            reason: format!("k = {k} folds"),
        });
    }
    let (mut anom, mut norm) = anomaly_indices(labels);
    anom.shuffle(rng);
    norm.shuffle(rng);
    let mut folds = vec![Vec::with_capacity(n / k + 1); k];
    for (pos, i) in anom.into_iter().chain(norm).enumerate() {
        folds[pos % k].push(i);
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    Ok(folds)
}

/// Per-feature standardization fitted on a training set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
    /// Features whose variance was zero on the fit set (scale left at 1).
    pub constant_features: Vec<usize>,
}

impl Standardizer {
    pub fn fit(rows: &[[f64; NUM_FEATURES]]) -> Result<Self, DataError> {
        Self::fit_dyn(&rows.iter().map(|r| r.as_slice()).collect::<Vec<_>>())
    }

    /// Fits on rows of any common width.
    pub fn fit_dyn(rows: &[&[f64]]) -> Result<Self, DataError> {
        let n = rows.len();
        if n == 0 {
            return Err(DataError::EmptyFitSet);
        }
        let d = rows[0].len();
        if let Some(r) = rows.iter().find(|r| r.len() != d) {
            return Err(DataError::LengthMismatch(d, r.len()));
        }
        let mut mean = vec![0.0; d];
        for r in rows {
            for (m, v) in mean.iter_mut().zip(r.iter()) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n as f64);
        let mut var = vec![0.0; d];
        for r in rows {
            for ((s, v), m) in var.iter_mut().zip(r.iter()).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        let mut constant_features = Vec::new();
        let scale = var
            .iter()
            .enumerate()
            .map(|(j, s)| {
                let sd = (s / n as f64).sqrt();
                if sd > 0.0 {
                    sd
                } else {
                    constant_features.push(j);
                    1.0
                }
            })
            .collect();
        if !constant_features.is_empty() {
            log::warn!("constant features left unscaled: {constant_features:?}");
        }
        Ok(Self {
            mean,
            scale,
            constant_features,
        })
    }

    /// Standardized value before clipping.
    pub fn standardize(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(&self.mean)
            .zip(&self.scale)
            .map(|((v, m), s)| (v - m) / s)
            .collect()
    }

    /// Standardize, clip to `[−3, 3]`, divide by 3.
    pub fn apply(&self, row: &[f64]) -> Vec<f64> {
        self.standardize(row)
            .into_iter()
            .map(|z| z.clamp(-CLIP, CLIP) / CLIP)
            .collect()
    }
}
