//! Euler-Maruyama simulation of the absorbing interacting SDE system
//!
//!   dX_i = 1_{t < T0_i} dB_i - 1_{t < T0_i} ((W psi)(t) + eta)_i dt,
//!   psi(t) = K_{t ∧ T0}^{-1} (X(t) + (t ∧ T0) eta),
//!
//! with per-coordinate absorption at 0. A Brownian-bridge barrier correction
//! catches sub-grid crossings, which are the dominant discretization error of
//! the hitting times.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use statrs::function::erf::{erfc, erfc_inv};

use crate::error::{Error, Result};
use crate::graph::{ModelParams, TimeVector};
use crate::linalg::{Cholesky, Lu, SquareMat};
use crate::rng::RngStream;
use crate::sde::path::{Absorption, MultiPath};

/// One absorbing SDE system: conductances, start state, drift vector. Start
/// entries equal to 0 denote coordinates absorbed from the outset, which is
/// what the restart map produces for already-hit coordinates.
#[derive(Debug, Clone)]
pub struct AbsorbingSystem {
    w: SquareMat,
    x0: Vec<f64>,
    eta: Vec<f64>,
    w_is_zero: bool,
}

impl AbsorbingSystem {
    pub fn new(mut w: SquareMat, x0: Vec<f64>, eta: Vec<f64>) -> Result<Self> {
        let n = w.n();
        if x0.len() != n || eta.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: x0.len().max(eta.len()),
            });
        }
        if !w.is_symmetric(1e-9) {
            return Err(Error::NonSymmetric {
                max_asym: w.max_asymmetry(),
            });
        }
        w.symmetrize();
        // restart conductances come out of a solve; clamp roundoff negatives
        let floor = -1e-12 * w.max_abs().max(1.0);
        for i in 0..n {
            for j in 0..n {
                let v = w[(i, j)];
                if v < 0.0 {
                    if v < floor {
                        return Err(Error::InvalidParameter(format!(
                            "W[{i},{j}] = {v} is negative"
                        )));
                    }
                    w[(i, j)] = 0.0;
                }
            }
        }
        for (i, &x) in x0.iter().enumerate() {
            if !(x >= 0.0 && x.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "start value x0[{i}] = {x} must be nonnegative"
                )));
            }
        }
        for (i, &e) in eta.iter().enumerate() {
            if !(e >= 0.0 && e.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "eta[{i}] = {e} must be nonnegative"
                )));
            }
        }
        let w_is_zero = w.max_abs() == 0.0;
        Ok(AbsorbingSystem {
            w,
            x0,
            eta,
            w_is_zero,
        })
    }

    pub fn from_params(p: &ModelParams) -> Self {
        AbsorbingSystem {
            w: p.w.matrix().clone(),
            x0: p.theta.clone(),
            eta: p.eta.clone(),
            w_is_zero: p.w.is_zero(),
        }
    }

    pub fn from_restart(r: &RestartParams) -> Result<Self> {
        AbsorbingSystem::new(r.w_tilde.clone(), r.x_t.clone(), r.eta_tilde.clone())
    }

    pub fn n(&self) -> usize {
        self.w.n()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SimOptions {
    pub dt: f64,
    pub t_max: f64,
    /// Brownian-bridge sub-grid crossing correction (on by default).
    pub barrier_correction: bool,
    pub store_increments: bool,
}

impl SimOptions {
    pub fn new(dt: f64, t_max: f64) -> Self {
        SimOptions {
            dt,
            t_max,
            barrier_correction: true,
            store_increments: false,
        }
    }
}

/// The interaction term psi(t) = K_{t_clamped}^{-1} (x + t_clamped * eta).
/// A singular K signals that the state left the admissible region.
pub fn psi(params: &ModelParams, x: &[f64], t_clamped: &TimeVector) -> Result<Vec<f64>> {
    let k = params.k_t(t_clamped)?;
    let lu = Lu::new(&k).map_err(|e| match e {
        Error::SingularMatrix { pivot, index } => Error::SimulationAborted {
            step: 0,
            reason: format!("singular K at coordinate {index} (pivot {pivot:e})"),
        },
        other => other,
    })?;
    let mut rhs: Vec<f64> = x.to_vec();
    for i in 0..rhs.len() {
        rhs[i] += t_clamped[i] * params.eta[i];
    }
    lu.solve_in_place(&mut rhs);
    Ok(rhs)
}

/// Sub-grid absorption detection for one coordinate over one step.
///
/// With `x_next <= 0` the crossing is certain and located by linear
/// interpolation. With `x_next > 0` the step crosses with the Brownian-bridge
/// minimum probability exp(-2 x_prev x_next / dt) (drift ignored within the
/// step), and the crossing instant is drawn from the first-passage law of the
/// free Brownian motion truncated to the step.
pub fn detect_hitting(
    x_prev: f64,
    x_next: f64,
    dt: f64,
    rng: &mut ChaCha8Rng,
) -> (bool, f64) {
    debug_assert!(x_prev > 0.0);
    if x_next <= 0.0 {
        return (true, x_prev / (x_prev - x_next));
    }
    let p_cross = (-2.0 * x_prev * x_next / dt).exp();
    let u: f64 = rng.gen();
    if u >= p_cross {
        return (false, 1.0);
    }
    // conditional first-passage instant: F(s) = erfc(x_prev / sqrt(2 s)),
    // inverted at a uniform point of [0, F(dt)]
    let v: f64 = rng.gen();
    let target = v * erfc(x_prev / (2.0 * dt).sqrt());
    let frac = if target <= 0.0 {
        1.0
    } else {
        let z = erfc_inv(target);
        if z <= 0.0 {
            1.0
        } else {
            (x_prev * x_prev / (2.0 * z * z) / dt).clamp(0.0, 1.0)
        }
    };
    (true, frac)
}

/// Simulate the absorbing system from `params` (the standard entry point).
pub fn simulate_x(
    params: &ModelParams,
    opt: &SimOptions,
    stream: RngStream,
) -> Result<MultiPath> {
    simulate_system(&AbsorbingSystem::from_params(params), opt, stream)
}

/// Simulate an arbitrary absorbing system (used directly by the restart map).
pub fn simulate_system(
    sys: &AbsorbingSystem,
    opt: &SimOptions,
    stream: RngStream,
) -> Result<MultiPath> {
    let n = sys.n();
    let dt = opt.dt;
    if !(dt > 0.0 && opt.t_max > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "dt = {dt} and t_max = {} must be positive",
            opt.t_max
        )));
    }
    let mut rng = stream.rng();
    let sqrt_dt = dt.sqrt();

    let mut x = sys.x0.clone();
    let mut absorption: Vec<Absorption> = x
        .iter()
        .map(|&v| {
            if v == 0.0 {
                Absorption::Absorbed(0.0)
            } else {
                Absorption::Pending
            }
        })
        .collect();
    let mut alive: Vec<bool> = x.iter().map(|&v| v > 0.0).collect();
    let mut values: Vec<Vec<f64>> = (0..n).map(|i| vec![x[i]]).collect();
    let mut increments: Option<Vec<Vec<f64>>> = if opt.store_increments {
        Some(vec![Vec::new(); n])
    } else {
        None
    };

    let mut lu = Lu::with_capacity(n);
    let mut k = SquareMat::zeros(n);
    let mut rhs = vec![0.0_f64; n];
    let mut drift = vec![0.0_f64; n];
    let mut clamped = vec![0.0_f64; n];

    let steps = (opt.t_max / dt).ceil() as usize;
    let mut t = 0.0_f64;
    for step in 0..steps {
        if !alive.iter().any(|&a| a) {
            break;
        }
        // drift from the interaction term at the left point
        if sys.w_is_zero {
            for i in 0..n {
                drift[i] = -sys.eta[i];
            }
        } else {
            for i in 0..n {
                clamped[i] = t.min(absorption[i].time());
            }
            for i in 0..n {
                for j in 0..n {
                    k[(i, j)] = -clamped[i] * sys.w[(i, j)];
                }
                k[(i, i)] += 1.0;
            }
            lu.factor(&k).map_err(|e| Error::SimulationAborted {
                step,
                reason: format!("interaction solve failed: {e}"),
            })?;
            for i in 0..n {
                rhs[i] = x[i] + clamped[i] * sys.eta[i];
            }
            lu.solve_in_place(&mut rhs);
            for i in 0..n {
                let mut wpsi = 0.0;
                for j in 0..n {
                    wpsi += sys.w[(i, j)] * rhs[j];
                }
                drift[i] = -(wpsi + sys.eta[i]);
            }
        }

        for i in 0..n {
            if !alive[i] {
                if let Some(inc) = increments.as_mut() {
                    inc[i].push(0.0);
                }
                values[i].push(0.0);
                continue;
            }
            let z: f64 = rng.sample(StandardNormal);
            let db = sqrt_dt * z;
            if let Some(inc) = increments.as_mut() {
                inc[i].push(db);
            }
            let prev = x[i];
            let next = prev + drift[i] * dt + db;
            if !next.is_finite() {
                return Err(Error::SimulationAborted {
                    step,
                    reason: format!("coordinate {i} became non-finite"),
                });
            }
            let (hit, frac) = if opt.barrier_correction {
                detect_hitting(prev, next, dt, &mut rng)
            } else if next <= 0.0 {
                (true, prev / (prev - next))
            } else {
                (false, 1.0)
            };
            if hit {
                absorption[i] = Absorption::Absorbed(t + frac * dt);
                alive[i] = false;
                x[i] = 0.0;
                values[i].push(0.0);
            } else {
                x[i] = next;
                values[i].push(next);
            }
        }
        t += dt;
    }

    Ok(MultiPath {
        dt,
        values,
        absorption,
        brownian_increments: increments,
    })
}

/// Restarted-system parameters at a multi-time T:
/// W~ = W (K_{T ∧ T0})^{-1}, eta~ = eta + W~((T ∧ T0) eta), X(T) read off the
/// path coordinatewise at its own time.
#[derive(Debug, Clone)]
pub struct RestartParams {
    pub w_tilde: SquareMat,
    pub x_t: Vec<f64>,
    pub eta_tilde: Vec<f64>,
}

pub fn restart_params(
    params: &ModelParams,
    path: &MultiPath,
    t: &TimeVector,
) -> Result<RestartParams> {
    let n = params.n();
    if t.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: t.len(),
        });
    }
    let t0: Vec<f64> = path.absorption.iter().map(Absorption::time).collect();
    let clamped = TimeVector::new(
        (0..n)
            .map(|i| {
                let c = t[i].min(t0[i]);
                if c.is_finite() {
                    Ok(c)
                } else {
                    Err(Error::InfiniteTimeEntry { index: i })
                }
            })
            .collect::<Result<Vec<_>>>()?,
    )?;
    let k = params.k_t(&clamped)?;
    let lu = Lu::new(&k)?;
    // W~ is materialized: the restarted system reuses it every step.
    let k_inv = lu.solve_mat(&SquareMat::identity(n));
    let mut w_tilde = params.w.matrix().matmul(&k_inv);
    if !w_tilde.is_symmetric(1e-9) {
        return Err(Error::NonSymmetric {
            max_asym: w_tilde.max_asymmetry(),
        });
    }
    w_tilde.symmetrize();
    let t_eta: Vec<f64> = (0..n).map(|i| clamped[i] * params.eta[i]).collect();
    let mut eta_tilde = w_tilde.matvec(&t_eta);
    for i in 0..n {
        eta_tilde[i] += params.eta[i];
    }
    let mut x_t = Vec::with_capacity(n);
    for i in 0..n {
        x_t.push(path.value_at(i, t[i])?);
    }
    Ok(RestartParams {
        w_tilde,
        x_t,
        eta_tilde,
    })
}

/// Positive definiteness of the symmetrized clamp matrix
/// Id - sqrt(t) W sqrt(t), the certificate that K_t is admissible.
pub fn clamp_matrix_pd(w: &SquareMat, t: &[f64]) -> bool {
    let n = w.n();
    let mut s = SquareMat::zeros(n);
    for i in 0..n {
        for j in 0..n {
            s[(i, j)] = -(t[i].sqrt()) * w[(i, j)] * t[j].sqrt();
        }
        s[(i, i)] += 1.0;
    }
    Cholesky::new(&s).is_some()
}
