//! Euler-Maruyama simulation of the time-changed system
//!
//!   d rho_i = dB~_i + (-1/2 - e^{rho_i} (W K_{T}^{-1} (e^{rho} + T eta) + eta)_i) du,
//!   dT_i    = e^{2 rho_i} du,
//!
//! started from rho_i(0) = log theta_i, T(0) = 0. The continuum solution keeps
//! K_{T(u)} positive definite for all u; the discrete stepper verifies that
//! certificate every step and aborts (never silently continues) if the step
//! size let T escape the admissible region.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::graph::ModelParams;
use crate::linalg::{Lu, SquareMat};
use crate::rng::RngStream;
use crate::sde::absorbing::clamp_matrix_pd;
use crate::sde::path::TimeChangedPath;

#[derive(Debug, Clone, Copy)]
pub struct RhoOptions {
    pub du: f64,
    pub u_max: f64,
    pub store_increments: bool,
}

impl RhoOptions {
    pub fn new(du: f64, u_max: f64) -> Self {
        RhoOptions {
            du,
            u_max,
            store_increments: false,
        }
    }
}

pub fn simulate_rho(
    params: &ModelParams,
    opt: &RhoOptions,
    stream: RngStream,
) -> Result<TimeChangedPath> {
    let n = params.n();
    let du = opt.du;
    if !(du > 0.0 && opt.u_max > 0.0 && opt.u_max.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "du = {du} and u_max = {} must be positive and finite",
            opt.u_max
        )));
    }
    let w = params.w.matrix();
    let w_is_zero = params.w.is_zero();
    let mut rng = stream.rng();
    let sqrt_du = du.sqrt();
    let steps = (opt.u_max / du).round() as usize;

    let mut rho: Vec<f64> = params.theta.iter().map(|t| t.ln()).collect();
    let mut t_acc = vec![0.0_f64; n];
    let mut rho_path: Vec<Vec<f64>> = (0..n).map(|i| vec![rho[i]]).collect();
    let mut t_path: Vec<Vec<f64>> = (0..n).map(|_| vec![0.0]).collect();
    let mut increments: Option<Vec<Vec<f64>>> = if opt.store_increments {
        Some(vec![Vec::new(); n])
    } else {
        None
    };

    let mut lu = Lu::with_capacity(n);
    let mut k = SquareMat::zeros(n);
    let mut v = vec![0.0_f64; n];

    for step in 0..steps {
        // drift of rho at the left point
        let mut drift = vec![-0.5_f64; n];
        if w_is_zero {
            for i in 0..n {
                drift[i] -= rho[i].exp() * params.eta[i];
            }
        } else {
            if !clamp_matrix_pd(w, &t_acc) {
                return Err(Error::SimulationAborted {
                    step,
                    reason: "K_T lost positive definiteness (step size too coarse)".into(),
                });
            }
            for i in 0..n {
                for j in 0..n {
                    k[(i, j)] = -t_acc[i] * w[(i, j)];
                }
                k[(i, i)] += 1.0;
            }
            lu.factor(&k).map_err(|e| Error::SimulationAborted {
                step,
                reason: format!("time-changed interaction solve failed: {e}"),
            })?;
            for i in 0..n {
                v[i] = rho[i].exp() + t_acc[i] * params.eta[i];
            }
            lu.solve_in_place(&mut v);
            for i in 0..n {
                let mut wv = 0.0;
                for j in 0..n {
                    wv += w[(i, j)] * v[j];
                }
                drift[i] -= rho[i].exp() * (wv + params.eta[i]);
            }
        }

        for i in 0..n {
            let growth = (2.0 * rho[i]).exp();
            t_acc[i] += growth * du;
            let z: f64 = rng.sample(StandardNormal);
            let db = sqrt_du * z;
            if let Some(inc) = increments.as_mut() {
                inc[i].push(db);
            }
            rho[i] += drift[i] * du + db;
            if !rho[i].is_finite() || !t_acc[i].is_finite() {
                return Err(Error::SimulationAborted {
                    step,
                    reason: format!("coordinate {i} became non-finite"),
                });
            }
            rho_path[i].push(rho[i]);
            t_path[i].push(t_acc[i]);
        }
    }

    let len = steps + 1;
    Ok(TimeChangedPath {
        du,
        rho: rho_path,
        t: t_path,
        valid_len: vec![len; n],
        driving_increments: increments,
    })
}

/// Standard Brownian motions started at log theta_i, with T_i the left-point
/// integral of e^{2 rho_i}: the reference measure of the Girsanov density.
pub fn simulate_reference_rho(
    params: &ModelParams,
    opt: &RhoOptions,
    stream: RngStream,
) -> TimeChangedPath {
    let n = params.n();
    let du = opt.du;
    let mut rng: ChaCha8Rng = stream.rng();
    let sqrt_du = du.sqrt();
    let steps = (opt.u_max / du).round() as usize;
    let mut rho: Vec<f64> = params.theta.iter().map(|t| t.ln()).collect();
    let mut t_acc = vec![0.0_f64; n];
    let mut rho_path: Vec<Vec<f64>> = (0..n).map(|i| vec![rho[i]]).collect();
    let mut t_path: Vec<Vec<f64>> = (0..n).map(|_| vec![0.0]).collect();
    for _ in 0..steps {
        for i in 0..n {
            t_acc[i] += (2.0 * rho[i]).exp() * du;
            let z: f64 = rng.sample(StandardNormal);
            rho[i] += sqrt_du * z;
            rho_path[i].push(rho[i]);
            t_path[i].push(t_acc[i]);
        }
    }
    TimeChangedPath {
        du,
        rho: rho_path,
        t: t_path,
        valid_len: vec![steps + 1; n],
        driving_increments: None,
    }
}
