//! Quadrature normalization of the beta potential on graphs with up to three
//! vertices.
//!
//! The domain {H_beta > 0} is peeled one coordinate at a time: for a fixed
//! prefix (beta_1, ..., beta_{k-1}) the admissible range of beta_k is bounded
//! below by the Schur-complement condition
//! 2 beta_k > W_kk + v^T H_{<k}^{-1} v. The innermost integral substitutes
//! beta_n = lower + s^2 to flatten the 1/sqrt(det) edge singularity; the
//! outer levels see smooth integrands and use plain adaptive Gauss-Kronrod.

use crate::error::{Error, Result};
use crate::linalg::{Cholesky, SquareMat};
use crate::potential::{nu_log_density, NuDensityParams};

// Gauss-Kronrod 7-15 nodes (positive half) and weights on [-1, 1].
const XGK: [f64; 8] = [
    0.991_455_371_120_813,
    0.949_107_912_342_759,
    0.864_864_423_359_769,
    0.741_531_185_599_394,
    0.586_087_235_467_691,
    0.405_845_151_377_397,
    0.207_784_955_007_898,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529,
    0.063_092_092_629_979,
    0.104_790_010_322_250,
    0.140_653_259_715_525,
    0.169_004_726_639_267,
    0.190_350_578_064_785,
    0.204_432_940_075_298,
    0.209_482_141_084_728,
];
const WG: [f64; 4] = [
    0.129_484_966_168_870,
    0.279_705_391_489_277,
    0.381_830_050_505_119,
    0.417_959_183_673_469,
];

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut kronrod = 0.0;
    let mut gauss = 0.0;
    for (j, (&x, &wk)) in XGK.iter().zip(WGK.iter()).enumerate() {
        if x == 0.0 {
            let v = f(c);
            kronrod += wk * v;
            gauss += WG[3] * v;
        } else {
            let v1 = f(c - h * x);
            let v2 = f(c + h * x);
            kronrod += wk * (v1 + v2);
            if j % 2 == 1 {
                gauss += WG[j / 2] * (v1 + v2);
            }
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Adaptive Gauss-Kronrod on [a, b] to absolute tolerance `tol`.
pub fn integrate_adaptive<F: FnMut(f64) -> f64>(
    f: &mut F,
    a: f64,
    b: f64,
    tol: f64,
) -> Result<(f64, f64)> {
    if !(b > a) {
        return Ok((0.0, 0.0));
    }
    // worklist of (a, b, value, err)
    let (v, e) = gk15(f, a, b);
    let mut work = vec![(a, b, v, e)];
    let mut budget = 4000;
    loop {
        let total_err: f64 = work.iter().map(|w| w.3).sum();
        if total_err <= tol {
            break;
        }
        // split the worst interval
        let (idx, _) = work
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .unwrap();
        let (a0, b0, _, _) = work.swap_remove(idx);
        let m = 0.5 * (a0 + b0);
        let (v1, e1) = gk15(f, a0, m);
        let (v2, e2) = gk15(f, m, b0);
        work.push((a0, m, v1, e1));
        work.push((m, b0, v2, e2));
        budget -= 1;
        if budget == 0 {
            let est: f64 = work.iter().map(|w| w.3).sum();
            if est > 100.0 * tol {
                return Err(Error::QuadratureBudget { estimate: est });
            }
            break;
        }
    }
    let value: f64 = work.iter().map(|w| w.2).sum();
    let err: f64 = work.iter().map(|w| w.3).sum();
    Ok((value, err))
}

/// Lower admissibility bound for beta_k given the prefix beta_{<k}: the
/// Schur-complement condition on the leading (k+1)-minor of H_beta. Returns
/// None when the prefix itself is inadmissible.
fn schur_lower_bound(w: &SquareMat, prefix: &[f64], k: usize) -> Option<f64> {
    if k == 0 {
        return Some(0.5 * w[(0, 0)]);
    }
    let mut h = SquareMat::zeros(k);
    for i in 0..k {
        for j in 0..k {
            h[(i, j)] = -w[(i, j)];
        }
        h[(i, i)] += 2.0 * prefix[i];
    }
    let chol = Cholesky::new(&h)?;
    let v: Vec<f64> = (0..k).map(|i| w[(i, k)]).collect();
    let quad = chol.quad_form_inv(&v);
    Some(0.5 * (w[(k, k)] + quad))
}

/// Mass of the beta potential over `box_bounds` intersected with the domain
/// {H_beta > 0}. Returns (mass, error_estimate). Limited to n <= 3.
pub fn quadrature_normalization(
    p: &NuDensityParams,
    box_bounds: &[(f64, f64)],
    tol: f64,
) -> Result<(f64, f64)> {
    let n = p.n();
    if n > 3 {
        return Err(Error::QuadratureDimension { max: 3, got: n });
    }
    if box_bounds.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: box_bounds.len(),
        });
    }
    let mut prefix = vec![0.0_f64; n];
    let err_cell = std::cell::Cell::new(0.0_f64);
    let mass = integrate_level(p, box_bounds, &mut prefix, 0, tol, &err_cell)?;
    Ok((mass, err_cell.get()))
}

fn integrate_level(
    p: &NuDensityParams,
    bounds: &[(f64, f64)],
    prefix: &mut Vec<f64>,
    level: usize,
    tol: f64,
    err_acc: &std::cell::Cell<f64>,
) -> Result<f64> {
    let n = p.n();
    let w = p.params.w.matrix().clone();
    let (lo_box, hi_box) = bounds[level];
    let lower = match schur_lower_bound(&w, &prefix[..level], level) {
        Some(l) => l.max(lo_box),
        None => return Ok(0.0),
    };
    if lower >= hi_box {
        return Ok(0.0);
    }
    if level + 1 == n {
        // innermost: substitute beta = lower + s^2 to tame the edge
        let mut prefix_local = prefix.clone();
        let mut f = |s: f64| {
            prefix_local[level] = lower + s * s;
            let ld = nu_log_density(p, &prefix_local[..]);
            if ld == f64::NEG_INFINITY {
                0.0
            } else {
                2.0 * s * ld.exp()
            }
        };
        let (v, e) = integrate_adaptive(&mut f, 0.0, (hi_box - lower).sqrt(), tol)?;
        err_acc.set(err_acc.get() + e);
        Ok(v)
    } else {
        let mut prefix_local = prefix.clone();
        let sub_tol = tol / (2.0 * (hi_box - lower)).max(1.0);
        let mut f = |b: f64| -> f64 {
            prefix_local[level] = b;
            integrate_level(p, bounds, &mut prefix_local, level + 1, sub_tol, err_acc)
                .unwrap_or(0.0)
        };
        let (v, e) = integrate_adaptive(&mut f, lower, hi_box, tol)?;
        err_acc.set(err_acc.get() + e);
        Ok(v)
    }
}

/// Truncation box where the Gaussian factor exp(-theta_i^2 beta_i) has dropped
/// below 1e-12 of its peak plus a wide safety margin; the truncated tail mass
/// is negligible against the quadrature tolerances in use.
pub fn default_box(p: &NuDensityParams) -> Vec<(f64, f64)> {
    let params = &p.params;
    (0..p.n())
        .map(|i| {
            let lo = 0.0;
            let hi = 0.5 * params.w.matrix()[(i, i)]
                + 0.5 * params.w.offdiag_row_sum(i)
                + 60.0 / (params.theta[i] * params.theta[i])
                + 5.0;
            (lo, hi)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{one_vertex_params, two_vertex_params};

    #[test]
    fn adaptive_integrator_on_known_integral() {
        let mut f = |x: f64| (-x).exp();
        let (v, e) = integrate_adaptive(&mut f, 0.0, 30.0, 1e-12).unwrap();
        assert!((v - 1.0).abs() < 1e-10, "value {v}, err {e}");
    }

    #[test]
    fn one_vertex_mass_is_one() {
        // reduces to the IG normalization under t = 1/(2 beta)
        let p = NuDensityParams::new(one_vertex_params(0.0, 1.0, 1.0));
        let bx = default_box(&p);
        let (mass, _) = quadrature_normalization(&p, &bx, 1e-9).unwrap();
        assert!((mass - 1.0).abs() < 1e-6, "mass {mass}");
    }

    #[test]
    fn one_vertex_mass_driftless() {
        let p = NuDensityParams::new(one_vertex_params(0.0, 1.0, 0.0));
        let bx = default_box(&p);
        let (mass, _) = quadrature_normalization(&p, &bx, 1e-9).unwrap();
        // the driftless law is heavy-tailed in t but light-tailed in beta on
        // the right; the beta -> 0 edge carries the t-tail and the sqrt
        // substitution handles it
        assert!((mass - 1.0).abs() < 1e-6, "mass {mass}");
    }

    #[test]
    fn two_vertex_mass_is_one() {
        let p = NuDensityParams::new(two_vertex_params(1.0, [1.0, 1.0], [0.5, 0.5]));
        let bx = default_box(&p);
        let (mass, _) = quadrature_normalization(&p, &bx, 1e-6).unwrap();
        assert!((mass - 1.0).abs() < 1e-3, "mass {mass}");
    }

    #[test]
    fn empty_box_gives_zero() {
        let p = NuDensityParams::new(one_vertex_params(0.0, 1.0, 1.0));
        let (mass, _) = quadrature_normalization(&p, &[(10.0, 10.0)], 1e-9).unwrap();
        assert_eq!(mass, 0.0);
    }

    #[test]
    fn dimension_guard() {
        let p = NuDensityParams::new(
            crate::graph::path_graph_params(4, vec![1.0; 4], vec![0.0; 4]).unwrap(),
        );
        assert!(matches!(
            quadrature_normalization(&p, &[(0.0, 1.0); 4], 1e-6),
            Err(Error::QuadratureDimension { .. })
        ));
    }
}
