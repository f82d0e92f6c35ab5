//! Splitting the matrices (H_beta, K_t) at an intermediate time vector.
//!
//! Fix beta with H_beta > 0 and a split time vector T with 0 < T_i < 1/(2
//! beta_i). The split defines a "seen so far" system (beta^T, H^T, K^T) and a
//! "remaining" system (W~, eta~, T~, H~, K~), and three exact matrix
//! identities tie them together:
//!
//!   (i)   K_{1/(2 beta)}           = K~ K^T
//!   (ii)  eta~                     = T^{-1} (H^T)^{-1} eta
//!   (iii) <eta~, (H~)^{-1} eta~>   = <eta, H_beta^{-1} eta> - <eta, (H^T)^{-1} eta>
//!
//! These identities are what make the restart map of the absorbing SDE and the
//! Girsanov density of the time-changed system consistent; the checker below
//! evaluates both sides of each identity independently and reports max-norm
//! residuals, which should sit at floating-point error for admissible inputs.

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{BetaPoint, ModelParams, TimeVector};
use crate::linalg::{dot, Cholesky, Lu, SquareMat};
use crate::rng::RngStream;

/// The derived matrices of a split, kept around for reuse by callers.
#[derive(Debug, Clone)]
pub struct SplitSystem {
    /// K^T = Id - diag(T) W, factored.
    pub k: SquareMat,
    /// H^T = diag(1/T) - W.
    pub h: SquareMat,
    /// W~ = W (K^T)^{-1}, symmetric in exact arithmetic.
    pub w_tilde: SquareMat,
    /// eta~ = W~ (T eta) + eta.
    pub eta_tilde: Vec<f64>,
}

impl SplitSystem {
    /// Build the split system at time vector `t`. Requires all t_i > 0 finite
    /// and K^T invertible.
    pub fn new(params: &ModelParams, t: &TimeVector) -> Result<Self> {
        let n = params.n();
        if t.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: t.len(),
            });
        }
        for i in 0..n {
            if !(t[i] > 0.0 && t[i].is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "split time t[{i}] = {} must be strictly positive",
                    t[i]
                )));
            }
        }
        let w = params.w.matrix();
        let k = params.k_t(t)?;
        let lu = Lu::new(&k)?;
        let beta_t: Vec<f64> = (0..n).map(|i| 1.0 / (2.0 * t[i])).collect();
        let h = crate::graph::h_beta(w, &beta_t)?;
        // W~ = W (K^T)^{-1}; the full inverse is materialized because callers
        // reuse it across evaluations.
        let k_inv = lu.solve_mat(&SquareMat::identity(n));
        let w_tilde = w.matmul(&k_inv);
        let t_eta: Vec<f64> = (0..n).map(|i| t[i] * params.eta[i]).collect();
        let mut eta_tilde = w_tilde.matvec(&t_eta);
        for i in 0..n {
            eta_tilde[i] += params.eta[i];
        }
        Ok(SplitSystem {
            k,
            h,
            w_tilde,
            eta_tilde,
        })
    }
}

/// Max-norm residuals of the three split identities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitResiduals {
    /// (i): factorization of K_{1/(2 beta)} across the split.
    pub factorization: f64,
    /// (ii): the shifted drift vector eta~.
    pub drift_vector: f64,
    /// (iii): the quadratic-form balance of <eta, . eta>.
    pub quadratic_form: f64,
}

impl SplitResiduals {
    pub fn max(&self) -> f64 {
        self.factorization.max(self.drift_vector).max(self.quadratic_form)
    }
}

/// Evaluate both sides of the three split identities independently.
///
/// Preconditions: `beta` admissible (carried by `BetaPoint`), and
/// 0 < t_i < 1/(2 beta_i) per coordinate.
pub fn split_identity_residuals(
    params: &ModelParams,
    beta: &BetaPoint,
    t: &TimeVector,
) -> Result<SplitResiduals> {
    let n = params.n();
    let b = beta.beta();
    for i in 0..n {
        if !(t[i] > 0.0 && t[i] < 1.0 / (2.0 * b[i])) {
            return Err(Error::InvalidParameter(format!(
                "split time t[{i}] = {} outside (0, 1/(2 beta_{i})) = (0, {})",
                t[i],
                1.0 / (2.0 * b[i])
            )));
        }
    }
    let sys = SplitSystem::new(params, t)?;
    let eta = &params.eta;

    // Remaining system: T~ = 1/(2 beta) - T, beta~ = 1/(2 T~), H~ = 2 beta~ - W~.
    let t_rem: Vec<f64> = (0..n).map(|i| 1.0 / (2.0 * b[i]) - t[i]).collect();
    let beta_rem: Vec<f64> = (0..n).map(|i| 1.0 / (2.0 * t_rem[i])).collect();
    let h_rem = crate::graph::h_beta(&sys.w_tilde, &beta_rem)?;
    let mut k_rem = SquareMat::zeros(n);
    for i in 0..n {
        for j in 0..n {
            k_rem[(i, j)] = -t_rem[i] * sys.w_tilde[(i, j)];
        }
        k_rem[(i, i)] += 1.0;
    }

    // (i) K_{1/(2 beta)} = K~ K^T
    let half_beta = TimeVector::new((0..n).map(|i| 1.0 / (2.0 * b[i])).collect())?;
    let lhs = params.k_t(&half_beta)?;
    let rhs = k_rem.matmul(&sys.k);
    let factorization = lhs.max_abs_diff(&rhs);

    // (ii) eta~ = T^{-1} (H^T)^{-1} eta
    let h_chol = Cholesky::new(&sys.h).ok_or(Error::NotPositiveDefinite)?;
    let y = h_chol.solve(eta);
    let mut drift_vector = 0.0_f64;
    for i in 0..n {
        drift_vector = drift_vector.max((sys.eta_tilde[i] - y[i] / t[i]).abs());
    }

    // (iii) quadratic-form balance
    let mut h_rem_sym = h_rem.clone();
    h_rem_sym.symmetrize();
    let rem_chol = Cholesky::new(&h_rem_sym).ok_or(Error::NotPositiveDefinite)?;
    let lhs_q = dot(&sys.eta_tilde, &rem_chol.solve(&sys.eta_tilde));
    let rhs_q = beta.factor().quad_form_inv(eta) - h_chol.quad_form_inv(eta);
    let quadratic_form = (lhs_q - rhs_q).abs();

    Ok(SplitResiduals {
        factorization,
        drift_vector,
        quadratic_form,
    })
}

/// Draw a random admissible (beta, T) pair for `params`: beta is made
/// diagonally dominant (hence H_beta > 0), and each T_i a uniform fraction of
/// its ceiling 1/(2 beta_i).
pub fn random_admissible_split(
    params: &ModelParams,
    stream: RngStream,
) -> (BetaPoint, TimeVector) {
    let mut rng = stream.rng();
    let n = params.n();
    let w = params.w.matrix();
    let beta: Vec<f64> = (0..n)
        .map(|i| {
            let dominance = 0.5 * (w[(i, i)] + params.w.offdiag_row_sum(i));
            dominance + 0.05 + 2.0 * rng.gen::<f64>()
        })
        .collect();
    let point = BetaPoint::new(params, beta).expect("diagonally dominant H_beta");
    let t: Vec<f64> = point
        .beta()
        .iter()
        .map(|&b| (0.05 + 0.9 * rng.gen::<f64>()) / (2.0 * b))
        .collect();
    (point, TimeVector::new(t).unwrap())
}
