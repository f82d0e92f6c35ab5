//! Kolmogorov-Smirnov tests with asymptotic p-values.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    /// sup-norm distance between the compared CDFs.
    pub statistic: f64,
    /// Asymptotic Kolmogorov-distribution p-value.
    pub p_value: f64,
    /// Sample size (first sample).
    pub n: usize,
    /// Second sample size, for two-sample tests.
    pub n2: Option<usize>,
}

/// Survival function Q(lambda) of the Kolmogorov distribution:
/// Q = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 lambda^2), with the dual
/// theta-function series for small lambda.
pub fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.18 {
        // Q = 1 - sqrt(2 pi)/lambda * sum_{k odd} exp(-k^2 pi^2 / (8 lambda^2))
        let f = std::f64::consts::PI * std::f64::consts::PI / (8.0 * lambda * lambda);
        let mut s = 0.0;
        let mut k = 1.0;
        loop {
            let term = (-k * k * f).exp();
            s += term;
            if term < 1e-18 * s.max(1e-300) || k > 199.0 {
                break;
            }
            k += 2.0;
        }
        (1.0 - (2.0 * std::f64::consts::PI).sqrt() / lambda * s).clamp(0.0, 1.0)
    } else {
        let mut s = 0.0;
        let mut sign = 1.0;
        for k in 1..=100 {
            let term = (-2.0 * (k as f64 * lambda) * (k as f64 * lambda)).exp();
            s += sign * term;
            if term < 1e-18 {
                break;
            }
            sign = -sign;
        }
        (2.0 * s).clamp(0.0, 1.0)
    }
}

fn sorted(samples: &[f64]) -> Vec<f64> {
    let mut s = samples.to_vec();
    s.sort_by(|a, b| a.total_cmp(b));
    s
}

/// One-sample KS test of `samples` against a monotone CDF with range [0, 1].
pub fn ks_one_sample<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> Result<KsResult> {
    if samples.is_empty() {
        return Err(Error::EmptySample);
    }
    let s = sorted(samples);
    let n = s.len();
    let nf = n as f64;
    let mut d = 0.0_f64;
    for (i, &x) in s.iter().enumerate() {
        let f = cdf(x);
        d = d.max((f - i as f64 / nf).abs());
        d = d.max((f - (i + 1) as f64 / nf).abs());
    }
    Ok(KsResult {
        statistic: d,
        p_value: kolmogorov_q(nf.sqrt() * d),
        n,
        n2: None,
    })
}

/// Two-sample KS test with the effective-n p-value
/// Q(sqrt(n1 n2 / (n1 + n2)) D).
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<KsResult> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySample);
    }
    let sa = sorted(a);
    let sb = sorted(b);
    let (na, nb) = (sa.len(), sb.len());
    let (mut ia, mut ib) = (0usize, 0usize);
    let mut d = 0.0_f64;
    while ia < na && ib < nb {
        let v = sa[ia].min(sb[ib]);
        while ia < na && sa[ia] <= v {
            ia += 1;
        }
        while ib < nb && sb[ib] <= v {
            ib += 1;
        }
        let diff = (ia as f64 / na as f64 - ib as f64 / nb as f64).abs();
        if diff > d {
            d = diff;
        }
    }
    let n_eff = (na as f64 * nb as f64) / (na as f64 + nb as f64);
    Ok(KsResult {
        statistic: d,
        p_value: kolmogorov_q(n_eff.sqrt() * d),
        n: na,
        n2: Some(nb),
    })
}

/// One-sample KS against an unnormalized-free density known pointwise: the
/// CDF is built by cumulative Gauss-Legendre quadrature between consecutive
/// order statistics. `lower` is the left end of the support; the head mass
/// below the smallest sample is integrated on a refined subgrid.
/// Used where no closed-form CDF exists, e.g. three-parameter GIG.
pub fn ks_one_sample_vs_density<F: Fn(f64) -> f64>(
    samples: &[f64],
    density: F,
    lower: f64,
) -> Result<KsResult> {
    if samples.is_empty() {
        return Err(Error::EmptySample);
    }
    let s = sorted(samples);
    let n = s.len();
    // 5-point Gauss-Legendre nodes/weights on [-1, 1]
    const GL_X: [f64; 5] = [
        -0.906_179_845_938_664,
        -0.538_469_310_105_683,
        0.0,
        0.538_469_310_105_683,
        0.906_179_845_938_664,
    ];
    const GL_W: [f64; 5] = [
        0.236_926_885_056_189,
        0.478_628_670_499_366,
        0.568_888_888_888_889,
        0.478_628_670_499_366,
        0.236_926_885_056_189,
    ];
    let segment = |a: f64, b: f64| -> f64 {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let mut acc = 0.0;
        for k in 0..5 {
            acc += GL_W[k] * density(c + h * GL_X[k]);
        }
        acc * h
    };
    // head: integrate lower..s[0] on 64 pieces (the density may vary rapidly)
    let mut cum = 0.0;
    let head_steps = 64;
    let h0 = (s[0] - lower) / head_steps as f64;
    if h0 > 0.0 {
        for k in 0..head_steps {
            cum += segment(lower + k as f64 * h0, lower + (k + 1) as f64 * h0);
        }
    }
    let nf = n as f64;
    let mut d = (cum - 0.0_f64).max(0.0);
    d = d.max((cum - 1.0 / nf).abs());
    let mut prev = s[0];
    for (i, &x) in s.iter().enumerate().skip(1) {
        cum += segment(prev, x);
        prev = x;
        let f = cum.min(1.0);
        d = d.max((f - i as f64 / nf).abs());
        d = d.max((f - (i + 1) as f64 / nf).abs());
    }
    Ok(KsResult {
        statistic: d,
        p_value: kolmogorov_q(nf.sqrt() * d),
        n,
        n2: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::{ig_cdf, sample_ig};
    use crate::rng::RngStream;
    use rand::Rng;

    #[test]
    fn kolmogorov_q_reference_points() {
        // Q(0.8276) ~ 0.5 (median), Q large -> 0, Q small -> 1
        assert!((kolmogorov_q(0.82757) - 0.5).abs() < 1e-3);
        assert!(kolmogorov_q(2.0) < 1e-3);
        assert!((kolmogorov_q(0.3) - 1.0).abs() < 1e-6);
        // continuity across the series switch
        let below = kolmogorov_q(1.1799);
        let above = kolmogorov_q(1.1801);
        assert!((below - above).abs() < 1e-6);
    }

    #[test]
    fn null_case_passes() {
        let mut rng = RngStream::new(51, 0).rng();
        let samples: Vec<f64> = (0..100_000).map(|_| rng.gen::<f64>()).collect();
        let r = ks_one_sample(&samples, |x| x.clamp(0.0, 1.0)).unwrap();
        assert!(r.p_value > 0.01, "p = {}", r.p_value);
    }

    #[test]
    fn gross_mismatch_rejected() {
        let mut rng = RngStream::new(52, 0).rng();
        let samples: Vec<f64> = (0..100_000).map(|_| sample_ig(1.0, 1.0, &mut rng)).collect();
        let r = ks_one_sample(&samples, |x| ig_cdf(x, 2.0, 1.0)).unwrap();
        assert!(r.p_value < 1e-6, "p = {}", r.p_value);
    }

    #[test]
    fn constant_samples_have_large_statistic() {
        let samples = vec![0.5; 100];
        let r = ks_one_sample(&samples, |x| x.clamp(0.0, 1.0)).unwrap();
        assert!(r.statistic >= 0.5);
    }

    #[test]
    fn two_sample_identical_is_zero() {
        let a = vec![0.1, 0.4, 0.9, 2.3];
        let r = ks_two_sample(&a, &a).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert!((r.p_value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_sample_null_and_alternative() {
        let mut rng = RngStream::new(53, 0).rng();
        let a: Vec<f64> = (0..50_000).map(|_| sample_ig(1.0, 1.0, &mut rng)).collect();
        let b: Vec<f64> = (0..60_000).map(|_| sample_ig(1.0, 1.0, &mut rng)).collect();
        let r = ks_two_sample(&a, &b).unwrap();
        assert!(r.p_value > 0.01, "null p = {}", r.p_value);

        let c: Vec<f64> = (0..50_000).map(|_| sample_ig(1.3, 1.0, &mut rng)).collect();
        let r = ks_two_sample(&a, &c).unwrap();
        assert!(r.p_value < 1e-6, "alt p = {}", r.p_value);
    }

    #[test]
    fn empty_inputs_error() {
        assert!(ks_one_sample(&[], |_| 0.5).is_err());
        assert!(ks_two_sample(&[], &[1.0]).is_err());
    }

    #[test]
    fn density_backed_cdf_agrees_with_closed_form() {
        let mut rng = RngStream::new(54, 0).rng();
        let samples: Vec<f64> = (0..20_000).map(|_| sample_ig(1.0, 2.0, &mut rng)).collect();
        let via_density = ks_one_sample_vs_density(
            &samples,
            |t| crate::dist::ig_density_mu_lambda(t, 1.0, 2.0),
            0.0,
        )
        .unwrap();
        let via_cdf = ks_one_sample(&samples, |t| ig_cdf(t, 1.0, 2.0)).unwrap();
        assert!((via_density.statistic - via_cdf.statistic).abs() < 1e-4);
        assert!(via_density.p_value > 0.01);
    }
}
