//! The random beta potential: density evaluation, quadrature normalization on
//! small graphs, an independent Metropolis sampler used as an oracle, the
//! bridge beta = 1/(2 T0) from hitting times, and the pathwise martingale
//! quantities of the time-changed system.

pub mod martingale;
pub mod mcmc;
pub mod quadrature;

pub use martingale::{exp_martingale_check, girsanov_density};
pub use mcmc::{sample_nu_mcmc, McmcConfig, McmcOutput};
pub use quadrature::quadrature_normalization;

use crate::error::{Error, Result};
use crate::graph::{ModelParams, TimeVector};
use crate::linalg::{dot, Cholesky};

/// Parameters of the beta-potential measure (just the model triple; the type
/// exists so density-related call sites read naturally).
#[derive(Debug, Clone)]
pub struct NuDensityParams {
    pub params: ModelParams,
}

impl NuDensityParams {
    pub fn new(params: ModelParams) -> Self {
        NuDensityParams { params }
    }

    pub fn n(&self) -> usize {
        self.params.n()
    }
}

/// Log density of the beta potential at `beta`:
///
///   (n/2) log(2/pi) - 1/2 <theta, H_beta theta> - 1/2 <eta, H_beta^{-1} eta>
///   + <eta, theta> + sum_i log theta_i - 1/2 log det H_beta
///
/// on {H_beta > 0}, and -inf outside. Total function: any real vector is a
/// valid input.
pub fn nu_log_density(p: &NuDensityParams, beta: &[f64]) -> f64 {
    let params = &p.params;
    let n = params.n();
    debug_assert_eq!(beta.len(), n);
    let h = match params.h_beta(beta) {
        Ok(h) => h,
        Err(_) => return f64::NEG_INFINITY,
    };
    let chol = match Cholesky::new(&h) {
        Some(c) => c,
        None => return f64::NEG_INFINITY,
    };
    let theta = &params.theta;
    let eta = &params.eta;
    let h_theta = h.matvec(theta);
    let quad_theta = dot(theta, &h_theta);
    let quad_eta = chol.quad_form_inv(eta);
    let ln_theta_sum: f64 = theta.iter().map(|t| t.ln()).sum();
    0.5 * n as f64 * (2.0 / std::f64::consts::PI).ln() - 0.5 * quad_theta - 0.5 * quad_eta
        + dot(eta, theta)
        + ln_theta_sum
        - 0.5 * chol.ln_det()
}

/// Marginal law of 1/(2 beta_i - W_ii) under the beta potential, which is also
/// the law of the i-th hitting time when W_ii = 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HittingMarginal {
    /// Inverse Gaussian with the stated (mu, lambda).
    InverseGaussian { mu: f64, lambda: f64 },
    /// Degenerate drift case (eta_i + sum_{j != i} W_ij theta_j = 0):
    /// the law of 1/(2 gamma) with gamma ~ Gamma(1/2, theta^2).
    ReciprocalHalfGamma { theta: f64 },
}

/// Median of Gamma(1/2, 1), used as the scale of the heavy-tailed marginal.
const GAMMA_HALF_MEDIAN: f64 = 0.227_468_211_559_786_4;

impl HittingMarginal {
    pub fn cdf(&self, t: f64) -> f64 {
        match *self {
            HittingMarginal::InverseGaussian { mu, lambda } => crate::dist::ig_cdf(t, mu, lambda),
            HittingMarginal::ReciprocalHalfGamma { theta } => {
                crate::dist::ig_hitting_cdf(t, theta, 0.0)
            }
        }
    }

    pub fn density(&self, t: f64) -> f64 {
        match *self {
            HittingMarginal::InverseGaussian { mu, lambda } => {
                crate::dist::ig_density_mu_lambda(t, mu, lambda)
            }
            HittingMarginal::ReciprocalHalfGamma { theta } => {
                crate::dist::ig_density(t, theta, 0.0).unwrap_or(0.0)
            }
        }
    }

    /// A typical magnitude: the mean where it exists, the median in the
    /// heavy-tailed degenerate case.
    pub fn scale(&self) -> f64 {
        match *self {
            HittingMarginal::InverseGaussian { mu, .. } => mu,
            HittingMarginal::ReciprocalHalfGamma { theta } => {
                theta * theta / (2.0 * GAMMA_HALF_MEDIAN)
            }
        }
    }
}

/// The (mu, lambda) of Prop-B-style marginals: mu = theta_i / (eta_i +
/// sum_{j != i} W_ij theta_j), lambda = theta_i^2, with the degenerate
/// zero-denominator case tagged separately.
pub fn hitting_marginal(params: &ModelParams, i: usize) -> HittingMarginal {
    let theta_i = params.theta[i];
    let mut denom = params.eta[i];
    for j in 0..params.n() {
        if j != i {
            denom += params.w.matrix()[(i, j)] * params.theta[j];
        }
    }
    if denom > 0.0 {
        HittingMarginal::InverseGaussian {
            mu: theta_i / denom,
            lambda: theta_i * theta_i,
        }
    } else {
        HittingMarginal::ReciprocalHalfGamma { theta: theta_i }
    }
}

/// beta = 1/(2 T0) from a vector of hitting times; all entries must be finite
/// and strictly positive.
pub fn beta_from_hitting(t0: &TimeVector) -> Result<Vec<f64>> {
    let mut beta = Vec::with_capacity(t0.len());
    for i in 0..t0.len() {
        let t = t0[i];
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "hitting time t0[{i}] = {t} must be finite and positive"
            )));
        }
        beta.push(1.0 / (2.0 * t));
    }
    Ok(beta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{one_vertex_params, two_vertex_params};

    #[test]
    fn one_vertex_density_value() {
        // W = 0, theta = 1, eta = 0, beta = 1/2: density = sqrt(2/pi) e^{-1/2}
        let p = NuDensityParams::new(one_vertex_params(0.0, 1.0, 0.0));
        let v = nu_log_density(&p, &[0.5]).exp();
        assert!((v - 0.483941).abs() < 1e-6, "{v}");
    }

    #[test]
    fn change_of_variables_to_hitting_density() {
        // Under t = 1/(2 beta), nu density times the Jacobian 1/(2 t^2) must
        // reproduce the hitting-time density (1-vertex, W = 0).
        let (theta, eta) = (1.3, 0.6);
        let p = NuDensityParams::new(one_vertex_params(0.0, theta, eta));
        for &t in &[0.3, 1.0, 2.7] {
            let beta = 1.0 / (2.0 * t);
            let nu = nu_log_density(&p, &[beta]).exp();
            let via_t = nu / (2.0 * t * t);
            let direct = crate::dist::ig_density(t, theta, eta).unwrap();
            assert!(
                ((via_t - direct) / direct).abs() < 1e-12,
                "t={t}: {via_t} vs {direct}"
            );
        }
    }

    #[test]
    fn density_is_minus_infinity_outside_domain() {
        let p = NuDensityParams::new(two_vertex_params(1.0, [1.0, 1.0], [0.0, 0.0]));
        assert_eq!(nu_log_density(&p, &[0.4, 0.4]), f64::NEG_INFINITY);
        assert_eq!(nu_log_density(&p, &[-1.0, 1.0]), f64::NEG_INFINITY);
        assert!(nu_log_density(&p, &[1.0, 1.0]).is_finite());
    }

    #[test]
    fn density_blows_down_at_the_boundary() {
        // along a ray toward the boundary det H -> 0 and log density -> -inf
        let p = NuDensityParams::new(two_vertex_params(1.0, [1.0, 1.0], [0.3, 0.0]));
        let at = |eps: f64| nu_log_density(&p, &[0.5 + eps, 0.5 + eps]);
        let far = at(0.5);
        let near = at(1e-6);
        let nearer = at(1e-10);
        assert!(far > near && near > nearer);
        assert!(nearer < far - 4.0);
    }

    #[test]
    fn marginal_parameters() {
        // W = 0 single vertex, eta = 2: (theta/2, theta^2)
        let p = one_vertex_params(0.0, 1.5, 2.0);
        match hitting_marginal(&p, 0) {
            HittingMarginal::InverseGaussian { mu, lambda } => {
                assert!((mu - 0.75).abs() < 1e-15);
                assert!((lambda - 2.25).abs() < 1e-15);
            }
            _ => panic!("expected IG"),
        }

        // 2-vertex, theta = (1, 3), eta = 0: vertex 0 -> (1/3, 1)
        let p = two_vertex_params(1.0, [1.0, 3.0], [0.0, 0.0]);
        match hitting_marginal(&p, 0) {
            HittingMarginal::InverseGaussian { mu, lambda } => {
                assert!((mu - 1.0 / 3.0).abs() < 1e-15);
                assert!((lambda - 1.0).abs() < 1e-15);
            }
            _ => panic!("expected IG"),
        }

        // degenerate: W = 0, eta = 0
        let p = one_vertex_params(0.0, 1.0, 0.0);
        assert_eq!(
            hitting_marginal(&p, 0),
            HittingMarginal::ReciprocalHalfGamma { theta: 1.0 }
        );
    }

    #[test]
    fn beta_from_hitting_arithmetic() {
        let t0 = TimeVector::new(vec![0.5, 0.25]).unwrap();
        assert_eq!(beta_from_hitting(&t0).unwrap(), vec![1.0, 2.0]);
        let bad = TimeVector::new(vec![0.0, 1.0]).unwrap();
        assert!(beta_from_hitting(&bad).is_err());
        let inf = TimeVector::new(vec![f64::INFINITY, 1.0]).unwrap();
        assert!(beta_from_hitting(&inf).is_err());
    }
}
