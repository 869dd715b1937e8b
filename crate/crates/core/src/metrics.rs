//! Classification metrics and the outperformance probability between two
//! F1 score distributions.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Floor applied to a zero fold standard deviation.
pub const SIGMA_FLOOR: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("sigma must be positive and finite, got {0}")]
    BadSigma(f64),
    #[error("mu must be finite, got {0}")]
    BadMu(f64),
    #[error("interval must satisfy lo < hi, got [{lo}, {hi}]")]
    BadInterval { lo: f64, hi: f64 },
    #[error("need at least 2 scores, got {0}")]
    TooFewScores(usize),
    #[error("label vectors differ in length: {0} vs {1}")]
    LengthMismatch(usize, usize),
}

/// Counts with anomaly as the positive class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
    pub tn: u64,
}

impl ConfusionCounts {
    /// Tallies predictions against truth; labels are +1 normal, −1 anomaly.
    pub fn from_labels(truth: &[i8], predicted: &[i8]) -> Result<Self, MetricsError> {
        if truth.len() != predicted.len() {
            return Err(MetricsError::LengthMismatch(truth.len(), predicted.len()));
        }
        let mut c = ConfusionCounts::default();
        for (&t, &p) in truth.iter().zip(predicted) {
            match (t < 0, p < 0) {
                (true, true) => c.tp += 1,
                (false, true) => c.fp += 1,
                (true, false) => c.fn_ += 1,
                (false, false) => c.tn += 1,
            }
        }
        Ok(c)
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Precision, recall and F1; any zero denominator yields 0.
pub fn precision_recall_f1(c: &ConfusionCounts) -> Scores {
    let ratio = |num: u64, den: u64| if den == 0 { 0.0 } else { num as f64 / den as f64 };
    let precision = ratio(c.tp, c.tp + c.fp);
    let recall = ratio(c.tp, c.tp + c.fn_);
    let f1 = if precision > 0.0 && recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    Scores {
        precision,
        recall,
        f1,
    }
}

/// F1 of the classifier that flags every sample as an anomaly, at anomaly ratio `r`.
pub fn all_anomalous_f1(r: f64) -> f64 {
    2.0 * r / (r + 1.0)
}

/// Standard normal CDF.
pub fn phi_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Mean and spread of an F1 score across folds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreDistribution {
    pub mu: f64,
    pub sigma: f64,
    /// Set when the sample deviation was zero and [`SIGMA_FLOOR`] was substituted.
    pub sigma_floored: bool,
}

impl ScoreDistribution {
    pub fn new(mu: f64, sigma: f64) -> Result<Self, MetricsError> {
        if !mu.is_finite() {
            return Err(MetricsError::BadMu(mu));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(MetricsError::BadSigma(sigma));
        }
        Ok(Self {
            mu,
            sigma,
            sigma_floored: false,
        })
    }
}

/// Sample mean and (n−1) standard deviation.
pub fn fold_statistics(scores: &[f64]) -> Result<ScoreDistribution, MetricsError> {
    let n = scores.len();
    if n < 2 {
        return Err(MetricsError::TooFewScores(n));
    }
    let mean = scores.iter().sum::<f64>() / n as f64;
    let var = scores.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let sd = var.sqrt();
    if sd > 0.0 {
        ScoreDistribution::new(mean, sd)
    } else {
        Ok(ScoreDistribution {
            mu: mean,
            sigma: SIGMA_FLOOR,
            sigma_floored: true,
        })
    }
}

/// Default truncation interval for a difference of two F1 scores.
pub const DIFFERENCE_INTERVAL: (f64, f64) = (-1.0, 1.0);

/// `Pr[D > 0]` for `D ~ N(μ_q − μ_r, σ_q² + σ_r²)` truncated to `[lo, hi]`.
pub fn outperformance_probability(
    q: &ScoreDistribution,
    r: &ScoreDistribution,
    interval: (f64, f64),
) -> Result<f64, MetricsError> {
    for d in [q, r] {
        if !(d.sigma > 0.0 && d.sigma.is_finite()) {
            return Err(MetricsError::BadSigma(d.sigma));
        }
    }
    let (lo, hi) = interval;
    if lo.is_nan() || hi.is_nan() || lo >= hi {
        return Err(MetricsError::BadInterval { lo, hi });
    }
    let mu = q.mu - r.mu;
    let sigma = q.sigma.hypot(r.sigma);
    if hi <= 0.0 {
        return Ok(0.0);
    }
    let a = (lo - mu) / sigma;
    let z = (lo.max(0.0) - mu) / sigma;
    let b = (hi - mu) / sigma;
    // Differences of CDFs lose precision in the upper tail; mirror to the
    // lower tail there, where Φ is accurate to full relative precision.
    let mass = |x: f64, y: f64| {
        if x > 0.0 {
            phi_cdf(-x) - phi_cdf(-y)
        } else {
            phi_cdf(y) - phi_cdf(x)
        }
    };
    let total = mass(a, b);
    if total <= 0.0 {
        // All mass collapsed onto a point outside the interval numerically.
        return Ok(if mu > 0.0 { 1.0 } else { 0.0 });
    }
    Ok((mass(z, b) / total).clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn counts(tp: u64, fp: u64, fn_: u64, tn: u64) -> ConfusionCounts {
        ConfusionCounts { tp, fp, fn_, tn }
    }

    #[test]
    fn metric_examples() {
        let s = precision_recall_f1(&counts(1, 0, 0, 0));
        assert_eq!((s.precision, s.recall, s.f1), (1.0, 1.0, 1.0));
        let s = precision_recall_f1(&counts(0, 0, 5, 0));
        assert_eq!((s.precision, s.recall, s.f1), (0.0, 0.0, 0.0));
        // all-anomalous classifier on 20 anomalies and 80 normals
        let s = precision_recall_f1(&counts(20, 80, 0, 0));
        assert_eq!(s.precision, 0.2);
        assert_eq!(s.recall, 1.0);
        assert!((s.f1 - 1.0 / 3.0).abs() < 1e-15);
        assert!((all_anomalous_f1(0.2) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn labels_to_counts() {
        let c = ConfusionCounts::from_labels(&[-1, -1, 1, 1, 1], &[-1, 1, -1, 1, 1]).unwrap();
        assert_eq!(c, counts(1, 1, 1, 2));
        assert_eq!(c.total(), 5);
        assert!(ConfusionCounts::from_labels(&[1], &[]).is_err());
    }

    #[test]
    fn phi_examples() {
        assert_eq!(phi_cdf(0.0), 0.5);
        assert!((phi_cdf(1.0) - 0.841345).abs() < 1e-6);
        assert!(phi_cdf(-40.0) >= 0.0 && phi_cdf(40.0) == 1.0);
    }

    #[test]
    fn fold_statistics_examples() {
        let d = fold_statistics(&[0.5, 0.5, 0.5]).unwrap();
        assert_eq!(d.mu, 0.5);
        assert_eq!(d.sigma, SIGMA_FLOOR);
        assert!(d.sigma_floored);
        let d = fold_statistics(&[0.0, 1.0]).unwrap();
        assert_eq!(d.mu, 0.5);
        assert!((d.sigma - 0.5f64.sqrt()).abs() < 1e-15);
        assert!(!d.sigma_floored);
        assert_eq!(fold_statistics(&[0.3]).unwrap_err(), MetricsError::TooFewScores(1));
    }

    #[test]
    fn outperformance_examples() {
        let q = ScoreDistribution::new(0.7, 0.05).unwrap();
        let p = outperformance_probability(&q, &q, DIFFERENCE_INTERVAL).unwrap();
        assert!((p - 0.5).abs() < 1e-15);
        let tight_q = ScoreDistribution::new(0.8, 1e-9).unwrap();
        let tight_r = ScoreDistribution::new(0.7, 1e-9).unwrap();
        assert_eq!(outperformance_probability(&tight_q, &tight_r, DIFFERENCE_INTERVAL).unwrap(), 1.0);
        assert_eq!(outperformance_probability(&tight_r, &tight_q, DIFFERENCE_INTERVAL).unwrap(), 0.0);
        assert!(ScoreDistribution::new(0.5, 0.0).is_err());
        let bad = ScoreDistribution { mu: 0.5, sigma: -1.0, sigma_floored: false };
        assert_eq!(
            outperformance_probability(&bad, &q, DIFFERENCE_INTERVAL).unwrap_err(),
            MetricsError::BadSigma(-1.0)
        );
        assert!(outperformance_probability(&q, &q, (1.0, -1.0)).is_err());
    }
}
