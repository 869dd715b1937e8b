use std::collections::HashMap;
use std::hash::Hash;

use super::DataError;

/// Pearson correlation coefficient.
pub fn pearson_corr(x: &[f64], y: &[f64]) -> Result<f64, DataError> {
    if x.len() != y.len() {
        return Err(DataError::LengthMismatch(x.len(), y.len()));
    }
    let n = x.len();
    if n < 2 {
        return Err(DataError::TooShort { needed: 2, got: n });
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Err(DataError::ZeroVariance("x"));
    }
    if syy == 0.0 {
        return Err(DataError::ZeroVariance("y"));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Cramér's V from the contingency table of `a` against `b`.
pub fn cramers_v<A: Hash + Eq, B: Hash + Eq>(a: &[A], b: &[B]) -> Result<f64, DataError> {
    if a.len() != b.len() {
        return Err(DataError::LengthMismatch(a.len(), b.len()));
    }
    let mut rows: HashMap<&A, usize> = HashMap::new();
    let mut cols: HashMap<&B, usize> = HashMap::new();
    let mut cells: HashMap<(usize, usize), f64> = HashMap::new();
    for (x, y) in a.iter().zip(b) {
        let nr = rows.len();
        let r = *rows.entry(x).or_insert(nr);
        let nc = cols.len();
        let c = *cols.entry(y).or_insert(nc);
        *cells.entry((r, c)).or_default() += 1.0;
    }
    let (nr, nc) = (rows.len(), cols.len());
    if nr < 2 || nc < 2 {
        return Err(DataError::Degenerate { rows: nr, cols: nc });
    }
    let n = a.len() as f64;
    let mut row_tot = vec![0.0; nr];
    let mut col_tot = vec![0.0; nc];
    for (&(r, c), &v) in &cells {
        row_tot[r] += v;
        col_tot[c] += v;
    }
    let mut chi2 = 0.0;
    for (r, rt) in row_tot.iter().enumerate() {
        for (c, ct) in col_tot.iter().enumerate() {
            let expected = rt * ct / n;
            let observed = cells.get(&(r, c)).copied().unwrap_or(0.0);
            chi2 += (observed - expected).powi(2) / expected;
        }
    }
    let k = (nr.min(nc) - 1) as f64;
    Ok((chi2 / (n * k)).sqrt().min(1.0))
}
