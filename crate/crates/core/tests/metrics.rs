use proptest::prelude::*;
use qocsvm::metrics::{
    fold_statistics, outperformance_probability, phi_cdf, precision_recall_f1, ConfusionCounts,
    ScoreDistribution, DIFFERENCE_INTERVAL,
};

/// `½ + ∫₀ˣ φ(t) dt` by composite Simpson with a fixed step.
fn phi_quadrature(x: f64) -> f64 {
    let density = |t: f64| (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let n = 2 * ((x.abs() / 1e-3).ceil() as usize).max(1);
    let h = x / n as f64;
    let mut s = density(0.0) + density(x);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * density(i as f64 * h);
    }
    0.5 + s * h / 3.0
}

/// Welford's running mean and variance.
fn welford(xs: &[f64]) -> (f64, f64) {
    let (mut mean, mut m2) = (0.0, 0.0);
    for (k, &x) in xs.iter().enumerate() {
        let d = x - mean;
        mean += d / (k + 1) as f64;
        m2 += d * (x - mean);
    }
    (mean, (m2 / (xs.len() - 1) as f64).sqrt())
}

#[test]
fn phi_matches_quadrature_on_grid() {
    for i in 0..1000 {
        let x = -6.0 + 12.0 * i as f64 / 999.0;
        assert!((phi_cdf(x) - phi_quadrature(x)).abs() < 1e-10, "x = {x}");
    }
    assert!((phi_quadrature(1.0) - 0.841345).abs() < 1e-6);
}

#[test]
fn fold_statistics_match_running_oracle() {
    let scores = [0.71, 0.83, 0.64, 0.9, 0.77, 0.58, 0.81, 0.69, 0.74, 0.88];
    let d = fold_statistics(&scores).unwrap();
    let (mean, sd) = welford(&scores);
    assert!((d.mu - mean).abs() < 1e-14);
    assert!((d.sigma - sd).abs() < 1e-14);
}

#[test]
fn reference_table_rows_reported() {
    // Published cross-validation summaries; the published probabilities are
    // printed for comparison only.
    let rbf = ScoreDistribution::new(0.757, 0.062).unwrap();
    for (name, mu, sigma, published) in [
        ("qrbf-CX", 0.833, 0.068, 0.692),
        ("qrbf-ECR", 0.847, 0.059, 0.747),
        ("qrbf-RXX", 0.815, 0.066, 0.648),
    ] {
        let q = ScoreDistribution::new(mu, sigma).unwrap();
        let p = outperformance_probability(&q, &rbf, DIFFERENCE_INTERVAL).unwrap();
        println!("{name}: computed {p:.3}, published {published:.3}");
        assert!(p > 0.5 && p < 1.0);
    }
}

proptest! {
    #[test]
    fn phi_symmetry(x in -30.0f64..30.0) {
        prop_assert!((phi_cdf(x) + phi_cdf(-x) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn phi_monotone(x in -8.0f64..8.0, dx in 1e-6f64..1.0) {
        prop_assert!(phi_cdf(x + dx) >= phi_cdf(x));
    }

    #[test]
    fn f1_between_precision_and_recall(tp in 1u64..1000, fp in 0u64..1000, fn_ in 0u64..1000, tn in 0u64..1000) {
        let c = ConfusionCounts { tp, fp, fn_, tn };
        let s = precision_recall_f1(&c);
        prop_assert!(s.f1 >= s.precision.min(s.recall) - 1e-15);
        prop_assert!(s.f1 <= s.precision.max(s.recall) + 1e-15);
        prop_assert!((s.f1 - 2.0 / (1.0 / s.precision + 1.0 / s.recall)).abs() < 1e-14);
    }

    #[test]
    fn outperformance_increases_with_mean_gap(
        mu_r in 0.0f64..1.0, gap in -0.5f64..0.5, delta in 1e-3f64..0.3,
        sq in 0.01f64..0.2, sr in 0.01f64..0.2,
    ) {
        let r = ScoreDistribution::new(mu_r, sr).unwrap();
        let lo = ScoreDistribution::new(mu_r + gap, sq).unwrap();
        let hi = ScoreDistribution::new(mu_r + gap + delta, sq).unwrap();
        let a = outperformance_probability(&lo, &r, DIFFERENCE_INTERVAL).unwrap();
        let b = outperformance_probability(&hi, &r, DIFFERENCE_INTERVAL).unwrap();
        prop_assert!(b > a || (a == 1.0 && b == 1.0));
    }

    #[test]
    fn outperformance_complement(
        mq in 0.0f64..1.0, mr in 0.0f64..1.0, sq in 1e-3f64..0.5, sr in 1e-3f64..0.5, half in 0.05f64..3.0,
    ) {
        let q = ScoreDistribution::new(mq, sq).unwrap();
        let r = ScoreDistribution::new(mr, sr).unwrap();
        let p = outperformance_probability(&q, &r, (-half, half)).unwrap();
        let p_rev = outperformance_probability(&r, &q, (-half, half)).unwrap();
        prop_assert!((p + p_rev - 1.0).abs() < 1e-10, "{} + {}", p, p_rev);
    }
}
