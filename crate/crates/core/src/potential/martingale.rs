//! Pathwise martingale quantities of the time-changed system: the quenched
//! exponential-martingale identity and the annealed Girsanov density D(u).

use crate::dist::Bessel3Bridge;
use crate::error::{Error, Result};
use crate::graph::ModelParams;
use crate::linalg::{dot, Cholesky, Lu, SquareMat};
use crate::potential::NuDensityParams;
use crate::rng::RngStream;
use crate::sde::path::TimeChangedPath;

/// Closed-form side of the quenched identity:
/// E(u) = exp(-theta^2 beta + beta e^{2 rho}/phi - rho/2 + u/8) phi^{3/2} sqrt(theta).
fn closed_form_e(u: f64, rho: f64, phi: f64, beta: f64, theta: f64) -> f64 {
    (-theta * theta * beta + beta * (2.0 * rho).exp() / phi - 0.5 * rho + u / 8.0).exp()
        * phi.powf(1.5)
        * theta.sqrt()
}

/// Max relative discrepancy over the grid between the closed form E and the
/// stochastic exponential of L(u) = \int (-1/2 + 2 beta e^{2 rho}/phi) dBhat,
/// both reconstructed from one (u, rho) path. The grid may be non-uniform;
/// stochastic integrals are left-point (Ito) sums.
///
/// Preconditions: u starts at 0 and increases; phi = 1 - 2 beta T(u) must stay
/// positive along the path (otherwise the supplied beta is inconsistent with
/// the path and an error is returned).
pub fn exp_martingale_check(u: &[f64], rho: &[f64], beta: f64, theta: f64) -> Result<f64> {
    if u.len() != rho.len() || u.len() < 2 {
        return Err(Error::MalformedGrid(
            "need matched u/rho arrays with at least 2 points".into(),
        ));
    }
    if u[0] != 0.0 {
        return Err(Error::MalformedGrid("u grid must start at 0".into()));
    }
    let m = u.len();
    // T(u) by trapezoid, phi, and the reconstructed driving motion
    let mut t_acc = 0.0_f64;
    let mut phi = Vec::with_capacity(m);
    let mut bhat = Vec::with_capacity(m);
    phi.push(1.0);
    bhat.push(rho[0] - theta.ln()); // = 0 when rho starts at log theta
    for k in 1..m {
        let du = u[k] - u[k - 1];
        if !(du > 0.0) {
            return Err(Error::MalformedGrid("u grid must increase".into()));
        }
        t_acc += 0.5 * ((2.0 * rho[k - 1]).exp() + (2.0 * rho[k]).exp()) * du;
        let p = 1.0 - 2.0 * beta * t_acc;
        if !(p > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "phi became nonpositive at u = {} (beta inconsistent with path)",
                u[k]
            )));
        }
        phi.push(p);
        bhat.push(rho[k] - theta.ln() - 0.5 * u[k] - p.ln());
    }

    let mut l_acc = 0.0_f64;
    let mut l_qv = 0.0_f64;
    let mut worst: f64 = 0.0;
    for k in 0..m {
        let e = closed_form_e(u[k], rho[k], phi[k], beta, theta);
        let stoch = (l_acc - 0.5 * l_qv).exp();
        worst = worst.max(((e - stoch) / e).abs());
        if k + 1 < m {
            let integrand = -0.5 + 2.0 * beta * (2.0 * rho[k]).exp() / phi[k];
            l_acc += integrand * (bhat[k + 1] - bhat[k]);
            l_qv += integrand * integrand * (u[k + 1] - u[k]);
        }
    }
    Ok(worst)
}

/// Convenience wrapper over one coordinate of a uniform-grid path.
pub fn exp_martingale_check_path(
    tc: &TimeChangedPath,
    vertex: usize,
    beta: f64,
    theta: f64,
) -> Result<f64> {
    let len = tc.valid_len[vertex];
    let u: Vec<f64> = (0..len).map(|k| tc.grid_u(k)).collect();
    exp_martingale_check(&u, &tc.rho[vertex][..len], beta, theta)
}

/// A 3-dimensional Bessel bridge from theta to 0 over 1/(2 beta), sampled on
/// an adaptive grid whose steps target du in clock time, together with its
/// Lamperti image (u_k, rho_k). The bridge is returned so callers can refine
/// it exactly and recompute the image on a finer grid.
pub fn time_changed_bridge(
    theta: f64,
    beta: f64,
    du_target: f64,
    u_max: f64,
    stream: RngStream,
) -> Result<(Bessel3Bridge, QuenchedPath)> {
    let t0 = 1.0 / (2.0 * beta);
    let mut bridge = Bessel3Bridge::new(theta, t0)?;
    let mut rng = stream.rng();
    let mut u = 0.0_f64;
    let mut x = theta;
    let mut t = 0.0_f64;
    while u < u_max {
        // a clock step of ~du_target is a time step of du * X^2, capped so the
        // grid never reaches the absorption endpoint
        let dt = (du_target * x * x).min(0.5 * (t0 - t));
        let x_next = bridge.extend_to(t + dt, &mut rng)?;
        u += 0.5 * dt * (1.0 / (x * x) + 1.0 / (x_next * x_next));
        t += dt;
        x = x_next;
    }
    let path = quenched_path(&bridge, u_max);
    Ok((bridge, path))
}

#[derive(Debug, Clone)]
pub struct QuenchedPath {
    pub u: Vec<f64>,
    pub rho: Vec<f64>,
}

/// Recompute the Lamperti image of a (possibly refined) bridge, truncated at
/// clock value `u_max`.
pub fn quenched_path(bridge: &Bessel3Bridge, u_max: f64) -> QuenchedPath {
    let times = bridge.times();
    let mut u = Vec::with_capacity(times.len());
    let mut rho = Vec::with_capacity(times.len());
    let mut x_prev = bridge.value(0);
    u.push(0.0);
    rho.push(x_prev.ln());
    let mut acc = 0.0_f64;
    for k in 1..times.len() {
        let x = bridge.value(k);
        if x <= 0.0 {
            break;
        }
        let dt = times[k] - times[k - 1];
        acc += 0.5 * dt * (1.0 / (x_prev * x_prev) + 1.0 / (x * x));
        if acc > u_max {
            break;
        }
        u.push(acc);
        rho.push(x.ln());
        x_prev = x;
    }
    QuenchedPath { u, rho }
}

/// Closed-form annealed Girsanov density D(u) evaluated from the state
/// (rho(u), T(u)) of a time-changed path:
///
///   D(u) = 1_{H^{(u)} > 0} exp(-1/2 <th~, W~ th~> - 1/2 <eta, (H^{(u)})^{-1} eta>
///          - <eta~, th~>) prod_i e^{-rho_i/2 - u/8} / sqrt(det K^{(u)})
///          * exp(1/2 <theta, W theta> + <eta, theta>) prod_i sqrt(theta_i)
///
/// with th~ = e^{rho(u)}, K^{(u)} = Id - T(u) W, H^{(u)} = 1/T(u) - W,
/// W~ = W (K^{(u)})^{-1}, eta~ = W~ T(u) eta + eta. Returns 0 where H^{(u)}
/// loses positive definiteness.
pub fn girsanov_density(p: &NuDensityParams, rho_u: &[f64], t_u: &[f64], u: f64) -> Result<f64> {
    let params = &p.params;
    let n = params.n();
    if rho_u.len() != n || t_u.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: rho_u.len().min(t_u.len()),
        });
    }
    for (i, &t) in t_u.iter().enumerate() {
        if !(t > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "T_{i}(u) = {t} must be strictly positive"
            )));
        }
    }
    let w = params.w.matrix();
    // indicator: H^{(u)} = diag(1/T) - W positive definite
    let beta_u: Vec<f64> = t_u.iter().map(|&t| 1.0 / (2.0 * t)).collect();
    let h_u = crate::graph::h_beta(w, &beta_u)?;
    let h_chol = match Cholesky::new(&h_u) {
        Some(c) => c,
        None => return Ok(0.0),
    };
    let mut k = SquareMat::zeros(n);
    for i in 0..n {
        for j in 0..n {
            k[(i, j)] = -t_u[i] * w[(i, j)];
        }
        k[(i, i)] += 1.0;
    }
    let lu = Lu::new(&k)?;
    let det_k = lu.det();
    debug_assert!(det_k > 0.0, "det K must be positive on the PD domain");

    let theta_tilde: Vec<f64> = rho_u.iter().map(|r| r.exp()).collect();
    // <th~, W~ th~> = th~^T W K^{-1} th~
    let y = lu.solve(&theta_tilde);
    let quad_theta_tilde = dot(&theta_tilde, &w.matvec(&y));
    // eta~ = W K^{-1} (T eta) + eta
    let t_eta: Vec<f64> = (0..n).map(|i| t_u[i] * params.eta[i]).collect();
    let mut eta_tilde = w.matvec(&lu.solve(&t_eta));
    for i in 0..n {
        eta_tilde[i] += params.eta[i];
    }
    let quad_eta = h_chol.quad_form_inv(&params.eta);

    let theta = &params.theta;
    let ln_d = -0.5 * quad_theta_tilde - 0.5 * quad_eta - dot(&eta_tilde, &theta_tilde)
        + 0.5 * dot(theta, &w.matvec(theta))
        + dot(&params.eta, theta)
        + rho_u.iter().map(|r| -0.5 * r).sum::<f64>()
        - n as f64 * u / 8.0
        - 0.5 * det_k.ln()
        + theta.iter().map(|t| 0.5 * t.ln()).sum::<f64>();
    Ok(ln_d.exp())
}

/// D(u) read off a time-changed path at an on-grid u.
pub fn girsanov_density_path(
    p: &NuDensityParams,
    tc: &TimeChangedPath,
    u: f64,
) -> Result<f64> {
    let k = tc.index_of(u);
    for i in 0..tc.n() {
        if k >= tc.valid_len[i] {
            return Err(Error::MalformedGrid(format!(
                "u = {u} beyond the valid range of coordinate {i}"
            )));
        }
    }
    let rho_u: Vec<f64> = (0..tc.n()).map(|i| tc.rho[i][k]).collect();
    let t_u: Vec<f64> = (0..tc.n()).map(|i| tc.t[i][k]).collect();
    girsanov_density(p, &rho_u, &t_u, tc.grid_u(k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{one_vertex_params, two_vertex_params};
    use crate::potential::quadrature::integrate_adaptive;
    use crate::potential::nu_log_density;
    use crate::sde::timechange::{simulate_reference_rho, RhoOptions};
    use crate::verify::stats::mean_and_se;

    #[test]
    fn closed_form_is_one_at_start() {
        // at theta = 1 every term cancels exactly
        let e0 = closed_form_e(0.0, 0.0, 1.0, 0.7, 1.0);
        assert_eq!(e0, 1.0);
        // general theta cancels to rounding
        let theta = 1.9_f64;
        let e0 = closed_form_e(0.0, theta.ln(), 1.0, 0.33, theta);
        assert!((e0 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn quenched_identity_small_discrepancy() {
        let (theta, beta) = (1.0, 0.5);
        let (_, path) =
            time_changed_bridge(theta, beta, 1e-4, 2.0, RngStream::new(111, 0)).unwrap();
        let disc = exp_martingale_check(&path.u, &path.rho, beta, theta).unwrap();
        assert!(disc < 0.05, "discrepancy {disc}");
    }

    #[test]
    fn quenched_identity_beta_sweep() {
        for (k, &beta) in [0.5, 1.0, 2.0].iter().enumerate() {
            let (_, path) =
                time_changed_bridge(1.0, beta, 1e-4, 2.0, RngStream::new(112, k as u64)).unwrap();
            let disc = exp_martingale_check(&path.u, &path.rho, beta, 1.0).unwrap();
            assert!(disc < 0.05, "beta = {beta}: discrepancy {disc}");
        }
    }

    #[test]
    fn discrepancy_shrinks_under_refinement() {
        let (theta, beta) = (1.0, 0.5);
        let mut ratios = Vec::new();
        for r in 0..6 {
            let (mut bridge, coarse) =
                time_changed_bridge(theta, beta, 4e-4, 1.5, RngStream::new(113, r)).unwrap();
            let d_coarse = exp_martingale_check(&coarse.u, &coarse.rho, beta, theta).unwrap();
            let mut rng = RngStream::new(114, r).rng();
            bridge.insert_midpoints(&mut rng);
            bridge.insert_midpoints(&mut rng);
            let fine = quenched_path(&bridge, 1.5);
            let d_fine = exp_martingale_check(&fine.u, &fine.rho, beta, theta).unwrap();
            ratios.push(d_fine / d_coarse);
        }
        let (mean_ratio, _) = mean_and_se(&ratios);
        // quartering du should roughly halve the discrepancy
        assert!(
            mean_ratio > 0.2 && mean_ratio < 0.85,
            "mean ratio {mean_ratio}, ratios {ratios:?}"
        );
    }

    #[test]
    fn inconsistent_beta_is_rejected() {
        let (theta, beta) = (1.0, 0.5);
        let (_, path) = time_changed_bridge(theta, beta, 1e-3, 2.0, RngStream::new(115, 0)).unwrap();
        // a much larger beta makes phi go negative along the same path
        assert!(exp_martingale_check(&path.u, &path.rho, 40.0, theta).is_err());
    }

    #[test]
    fn girsanov_density_tends_to_one_at_small_u() {
        let p2 = NuDensityParams::new(two_vertex_params(1.0, [1.0, 1.0], [0.5, 0.5]));
        let opt = RhoOptions::new(1e-4, 0.01);
        for r in 0..5 {
            let tc = simulate_reference_rho(&p2.params, &opt, RngStream::new(116, r));
            let d = girsanov_density_path(&p2, &tc, 0.01).unwrap();
            assert!((d - 1.0).abs() < 0.05, "D(0.01) = {d}");
        }
    }

    #[test]
    fn one_vertex_closed_form_matches_defining_integral() {
        // D(u) = int E_beta(u)^{-1} nu(d beta): quadrature on the 1-vertex
        // graph against the closed form, relative error < 1e-3.
        let (theta, eta) = (1.0, 0.7);
        let p = NuDensityParams::new(one_vertex_params(0.0, theta, eta));
        let opt = RhoOptions::new(1e-4, 0.5);
        let tc = simulate_reference_rho(&p.params, &opt, RngStream::new(117, 3));
        let k = tc.index_of(0.5);
        let (rho_u, t_u, u) = (tc.rho[0][k], tc.t[0][k], 0.5);
        let closed = girsanov_density(&p, &[rho_u], &[t_u], u).unwrap();

        let beta_max = 1.0 / (2.0 * t_u);
        let mut f = |s: f64| {
            // beta = s^2 flattens the left edge of the nu density
            let beta = s * s;
            if beta >= beta_max {
                return 0.0;
            }
            let phi = 1.0 - 2.0 * beta * t_u;
            let ln_e_inv = theta * theta * beta - beta * (2.0 * rho_u).exp() / phi + 0.5 * rho_u
                - u / 8.0
                - 1.5 * phi.ln()
                - 0.5 * theta.ln();
            let ld = nu_log_density(&p, &[beta]);
            if ld == f64::NEG_INFINITY {
                0.0
            } else {
                2.0 * s * (ln_e_inv + ld).exp()
            }
        };
        let (integral, _) = integrate_adaptive(&mut f, 0.0, beta_max.sqrt(), 1e-9).unwrap();
        assert!(
            ((integral - closed) / closed).abs() < 1e-3,
            "integral {integral} vs closed form {closed}"
        );
    }

    #[test]
    fn reference_measure_mean_is_one_smoke() {
        // small-N version of the unit-mean martingale property
        let p = NuDensityParams::new(two_vertex_params(1.0, [1.0, 1.0], [0.5, 0.5]));
        let opt = RhoOptions::new(1e-3, 0.5);
        let mut ds = Vec::new();
        for r in 0..2000 {
            let tc = simulate_reference_rho(&p.params, &opt, RngStream::new(118, r));
            ds.push(girsanov_density_path(&p, &tc, 0.5).unwrap());
        }
        let (mean, se) = mean_and_se(&ds);
        assert!((mean - 1.0).abs() < 4.0 * se, "mean {mean} +- {se}");
    }

    #[test]
    fn rejects_zero_clock() {
        let p = NuDensityParams::new(one_vertex_params(0.0, 1.0, 0.0));
        assert!(girsanov_density(&p, &[0.0], &[0.0], 0.0).is_err());
    }
}
