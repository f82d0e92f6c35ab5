//! Path and independence statistics used by the verification suites.

use statrs::function::gamma::gamma_ur;

use crate::error::{Error, Result};

/// Realized quadratic variation: sum of squared increments along a uniformly
/// spaced path.
pub fn quadratic_variation(values: &[f64]) -> Result<f64> {
    if values.len() < 2 {
        return Err(Error::EmptySample);
    }
    Ok(values.windows(2).map(|w| (w[1] - w[0]) * (w[1] - w[0])).sum())
}

/// Sample mean and standard error of the mean.
pub fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0).max(1.0);
    (mean, (var / n).sqrt())
}

/// Pearson correlation coefficient.
pub fn correlation(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    sxy / (sxx * syy).sqrt()
}

/// Empirical quantile-bin edges splitting `values` into `bins` equal-count
/// cells. Returns the interior edges (bins - 1 of them).
pub fn quantile_edges(values: &[f64], bins: usize) -> Vec<f64> {
    let mut s = values.to_vec();
    s.sort_by(|a, b| a.total_cmp(b));
    (1..bins)
        .map(|k| s[(k * s.len()) / bins])
        .collect()
}

fn bin_index(edges: &[f64], v: f64) -> usize {
    edges.iter().take_while(|&&e| v >= e).count()
}

/// Chi-square independence test on a bins x bins quantile-binned contingency
/// table. Returns (statistic, p_value) with (bins-1)^2 degrees of freedom.
pub fn chi2_independence(x: &[f64], y: &[f64], bins: usize) -> Result<(f64, f64)> {
    if x.len() != y.len() || x.len() < bins * bins * 5 {
        return Err(Error::InvalidParameter(
            "need matched samples with >= 5 expected per cell".into(),
        ));
    }
    let ex = quantile_edges(x, bins);
    let ey = quantile_edges(y, bins);
    let mut counts = vec![0.0_f64; bins * bins];
    let mut row = vec![0.0_f64; bins];
    let mut col = vec![0.0_f64; bins];
    for (a, b) in x.iter().zip(y) {
        let i = bin_index(&ex, *a);
        let j = bin_index(&ey, *b);
        counts[i * bins + j] += 1.0;
        row[i] += 1.0;
        col[j] += 1.0;
    }
    let n = x.len() as f64;
    let mut stat = 0.0;
    for i in 0..bins {
        for j in 0..bins {
            let expected = row[i] * col[j] / n;
            if expected > 0.0 {
                let d = counts[i * bins + j] - expected;
                stat += d * d / expected;
            }
        }
    }
    let df = ((bins - 1) * (bins - 1)) as f64;
    let p = gamma_ur(df / 2.0, stat / 2.0);
    Ok((stat, p))
}
