//! The Lamperti time change U_i(t) = \int_0^t 1_{s < T0_i} / X_i(s)^2 ds,
//! its inverse T_i(u), and the transform from an absorbed path to the
//! time-changed pair (rho, T). Also the opposite-drift residual that strips
//! rho down to its driving Brownian motion.

use crate::error::{Error, Result};
use crate::graph::TimeVector;
use crate::sde::path::{MultiPath, TimeChangedPath};

/// The clock U_i on the grid of `path`, by trapezoidal quadrature of 1/X^2,
/// stopped at the last grid point strictly before absorption. Returns the
/// clock values U[0..=m] where m is that last index.
pub fn lamperti_u(path: &MultiPath, vertex: usize) -> Result<Vec<f64>> {
    let x = &path.values[vertex];
    if !path.absorption[vertex].is_absorbed() {
        return Err(Error::Unabsorbed { vertex });
    }
    let mut u = Vec::with_capacity(x.len());
    u.push(0.0);
    let mut prev_inv = 1.0 / (x[0] * x[0]);
    for k in 1..x.len() {
        if x[k] <= 0.0 {
            break;
        }
        let inv = 1.0 / (x[k] * x[k]);
        let inc = 0.5 * (prev_inv + inv) * path.dt;
        if !(inc > 0.0) {
            return Err(Error::NonMonotoneClock { vertex });
        }
        u.push(u[u.len() - 1] + inc);
        prev_inv = inv;
    }
    Ok(u)
}

/// Transform an absorbed path onto a uniform u-grid with step `du`, giving
/// rho_i(u) = log X_i(T_i(u)). Each coordinate is truncated where its
/// computed clock range ends (the clock diverges only in the continuum).
pub fn lamperti_transform(path: &MultiPath, du: f64, u_max: f64) -> Result<TimeChangedPath> {
    if !(du > 0.0 && u_max > 0.0) {
        return Err(Error::MalformedGrid(format!(
            "du = {du} and u_max = {u_max} must be positive"
        )));
    }
    let n = path.n();
    let len = (u_max / du).round() as usize + 1;
    let mut rho = Vec::with_capacity(n);
    let mut t_out = Vec::with_capacity(n);
    let mut valid_len = Vec::with_capacity(n);
    for i in 0..n {
        let u = lamperti_u(path, i)?;
        let x = &path.values[i];
        let mut rho_i = Vec::with_capacity(len);
        let mut t_i = Vec::with_capacity(len);
        let u_top = *u.last().unwrap();
        let mut j = 0usize; // bracket pointer into the clock array
        for k in 0..len {
            let uk = k as f64 * du;
            if uk > u_top {
                break;
            }
            while j + 1 < u.len() && u[j + 1] < uk {
                j += 1;
            }
            // u[j] <= uk <= u[j+1] (with equality handling at the top end)
            let (t_val, x_val) = if j + 1 >= u.len() {
                (path.grid_time(u.len() - 1), x[u.len() - 1])
            } else {
                let span = u[j + 1] - u[j];
                let frac = if span > 0.0 { (uk - u[j]) / span } else { 0.0 };
                let t_val = path.grid_time(j) + frac * path.dt;
                let x_val = x[j] + frac * (x[j + 1] - x[j]);
                (t_val, x_val)
            };
            if !(x_val > 0.0) {
                break;
            }
            t_i.push(t_val);
            rho_i.push(x_val.ln());
            debug_assert!(t_i.len() < 2 || t_i[t_i.len() - 1] >= t_i[t_i.len() - 2]);
        }
        valid_len.push(rho_i.len());
        rho.push(rho_i);
        t_out.push(t_i);
    }
    Ok(TimeChangedPath {
        du,
        rho,
        t: t_out,
        valid_len,
        driving_increments: None,
    })
}

/// The opposite-drift residual
/// Bhat_i(u) = rho_i(u) - log theta_i - u/2 - log((T0_i - T_i(u)) / T0_i),
/// per coordinate up to its valid range. Errors where T_i(u) >= T0_i.
pub fn opposite_drift_residual(
    tc: &TimeChangedPath,
    t0: &TimeVector,
    theta: &[f64],
) -> Result<Vec<Vec<f64>>> {
    let n = tc.n();
    if t0.len() != n || theta.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: t0.len().min(theta.len()),
        });
    }
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut res = Vec::with_capacity(tc.valid_len[i]);
        for k in 0..tc.valid_len[i] {
            let remaining = t0[i] - tc.t[i][k];
            if !(remaining > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "T_{i}(u) = {} reached T0_{i} = {} inside the requested range",
                    tc.t[i][k], t0[i]
                )));
            }
            let u = tc.grid_u(k);
            res.push(tc.rho[i][k] - theta[i].ln() - 0.5 * u - (remaining / t0[i]).ln());
        }
        out.push(res);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{one_vertex_params, two_vertex_params};
    use crate::rng::RngStream;
    use crate::sde::absorbing::{simulate_x, SimOptions};

    fn absorbed_path(seed: u64) -> (crate::graph::ModelParams, MultiPath) {
        let p = two_vertex_params(1.0, [1.0, 1.0], [1.0, 1.0]);
        let opt = SimOptions::new(1e-3, 100.0);
        let path = simulate_x(&p, &opt, RngStream::new(seed, 0)).unwrap();
        assert!(path.fully_absorbed());
        (p, path)
    }

    #[test]
    fn clock_round_trip_on_grid_points() {
        let (_, path) = absorbed_path(91);
        for i in 0..2 {
            let u = lamperti_u(&path, i).unwrap();
            // invert the clock at its own grid values: T(U(t_k)) = t_k
            let tc = lamperti_transform(&path, u[u.len() / 2] / 100.0, u[u.len() / 2]).unwrap();
            // walk the transform's (u, T) pairs and cross-check monotonicity
            for k in 1..tc.valid_len[i] {
                assert!(tc.t[i][k] >= tc.t[i][k - 1]);
            }
            // direct round trip at interior grid points
            for (k, &uk) in u.iter().enumerate().skip(1).step_by(37) {
                // find T(uk) by the same interpolation the transform uses
                let t_expect = path.grid_time(k);
                let tc1 = lamperti_transform(&path, uk, uk).unwrap();
                if tc1.valid_len[i] > 1 {
                    let got = tc1.t[i][1];
                    assert!(
                        (got - t_expect).abs() <= 1e-6 * t_expect.max(1e-9),
                        "T(U(t)) = {got} vs t = {t_expect}"
                    );
                }
            }
        }
    }

    #[test]
    fn unabsorbed_path_is_rejected() {
        let p = one_vertex_params(0.0, 1.0, 0.0);
        let opt = SimOptions::new(1e-3, 0.01); // far too short to absorb
        let path = simulate_x(&p, &opt, RngStream::new(92, 0)).unwrap();
        if !path.fully_absorbed() {
            assert!(matches!(
                lamperti_transform(&path, 1e-2, 1.0),
                Err(Error::Unabsorbed { .. })
            ));
        }
    }

    #[test]
    fn residual_starts_at_zero_and_errors_past_t0() {
        let (p, path) = absorbed_path(93);
        let tc = lamperti_transform(&path, 1e-2, 3.0).unwrap();
        let t0 = path.hitting_times().unwrap();
        let res = opposite_drift_residual(&tc, &t0, &p.theta).unwrap();
        for i in 0..2 {
            assert_eq!(res[i][0], 0.0);
        }
        // shrink T0 below the realized clock range: must error
        let bad = TimeVector::new(vec![tc.t[0][1] * 0.5, t0[1]]).unwrap();
        assert!(opposite_drift_residual(&tc, &bad, &p.theta).is_err());
    }

    #[test]
    fn transform_truncates_at_clock_range() {
        let (_, path) = absorbed_path(94);
        let tc = lamperti_transform(&path, 1e-2, 1e9).unwrap();
        for i in 0..2 {
            let u = lamperti_u(&path, i).unwrap();
            let top = *u.last().unwrap();
            assert!(tc.valid_len[i] as f64 * 1e-2 <= top + 1e-2 + 1e-12);
            assert!(tc.valid_len[i] > 0);
        }
    }
}
