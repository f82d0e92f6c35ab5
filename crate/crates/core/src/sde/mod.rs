//! Time-stepping simulation of the interacting absorbing SDE system, the
//! time-changed system, the Lamperti transform linking them, and the restart
//! map.

pub mod absorbing;
pub mod lamperti;
pub mod path;
pub mod timechange;

pub use absorbing::{
    detect_hitting, psi, restart_params, simulate_system, simulate_x, AbsorbingSystem,
    RestartParams, SimOptions,
};
pub use lamperti::{lamperti_transform, lamperti_u, opposite_drift_residual};
pub use path::{Absorption, MultiPath, TimeChangedPath};
pub use timechange::{simulate_rho, RhoOptions};

use crate::graph::ModelParams;
use crate::potential::hitting_marginal;

/// Default forward step: dt = 1e-4 * min(theta)^2.
pub fn default_dt(params: &ModelParams) -> f64 {
    let tmin = params.theta.iter().cloned().fold(f64::INFINITY, f64::min);
    1e-4 * tmin * tmin
}

/// Default time-changed step.
pub const DEFAULT_DU: f64 = 1e-3;

/// Default horizon: 50 x the largest marginal hitting-time scale. The scale is
/// the marginal mean where it exists (drifted case) and the marginal median in
/// the heavy-tailed driftless case, whose mean is infinite.
pub fn default_t_max(params: &ModelParams) -> f64 {
    let mut scale = 0.0_f64;
    for i in 0..params.n() {
        scale = scale.max(hitting_marginal(params, i).scale());
    }
    50.0 * scale
}
