//! The Gamma/GIG transformation identity for the pair (first zero, last zero)
//! of a drifted Brownian motion, tested by sampling: draw the product law of
//! statement (i), push it through the bijection
//!
//!   (u, v) -> (s, w) = (u - 1/(1/u + v), 1/u + v),
//!
//! and test the image against statement (ii)'s product law (marginal KS plus a
//! binned chi-square independence proxy); then the reverse direction.
//!
//! Two parameter conventions are wired in. `Anchored` is calibrated so that
//! the hitting-time law is GIG(-1/2, eta^2, theta^2) under this crate's GIG
//! density; it is the convention under which the identity holds and the suite
//! expects it to pass. `PaperLiteral` takes the printed halved parameters at
//! face value and serves as the documented negative control: it fails grossly,
//! which is recorded, not patched.

use rand_chacha::ChaCha8Rng;

use crate::dist::{gamma_cdf, ig_hitting_cdf, sample_gamma, sample_gig, GigParams};
use crate::error::Result;
use crate::rng::RngStream;
use crate::verify::ks::ks_one_sample;
use crate::verify::stats::chi2_independence;
use crate::verify::{CheckKind, VerificationReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MyPropConvention {
    Anchored,
    PaperLiteral,
}

/// CDF of GIG(1/2, a, b) through the reciprocal identity: if X ~ GIG(1/2,a,b)
/// then 1/X ~ GIG(-1/2, b, a), which is the hitting-time law with start
/// sqrt(a) and drift sqrt(b).
fn gig_half_cdf(x: f64, a: f64, b: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    1.0 - ig_hitting_cdf(1.0 / x, a.sqrt(), b.sqrt())
}

/// The two product laws of the identity under a convention, as samplers and
/// CDFs. Coordinates: (i) = (1/T0, T1 - T0), (ii) = (1/T0 - 1/T1, T1).
struct ConventionLaws {
    gig_i: GigParams,
    gamma_i_rate: f64,
    gamma_ii_rate: f64,
    gig_ii: GigParams,
}

fn laws(theta: f64, eta: f64, convention: MyPropConvention) -> Result<ConventionLaws> {
    let (t2, e2) = (theta * theta, eta * eta);
    Ok(match convention {
        MyPropConvention::Anchored => ConventionLaws {
            gig_i: GigParams::new(0.5, t2, e2)?,
            gamma_i_rate: e2 / 2.0,
            gamma_ii_rate: t2 / 2.0,
            gig_ii: GigParams::new(0.5, e2, t2)?,
        },
        MyPropConvention::PaperLiteral => ConventionLaws {
            gig_i: GigParams::new(0.5, t2 / 2.0, e2 / 2.0)?,
            gamma_i_rate: t2,
            gamma_ii_rate: e2,
            gig_ii: GigParams::new(0.5, e2 / 2.0, t2 / 2.0)?,
        },
    })
}

fn forward(u: f64, v: f64) -> (f64, f64) {
    let w = 1.0 / u + v;
    (u - 1.0 / w, w)
}

fn reverse(s: f64, w: f64) -> (f64, f64) {
    let u = s + 1.0 / w;
    (u, w - 1.0 / u)
}

struct DirectionOutcome {
    p_first: f64,
    p_second: f64,
    p_indep: f64,
}

fn run_direction(
    laws: &ConventionLaws,
    n: usize,
    rng: &mut ChaCha8Rng,
    forward_direction: bool,
) -> Result<DirectionOutcome> {
    let mut first = Vec::with_capacity(n);
    let mut second = Vec::with_capacity(n);
    if forward_direction {
        for _ in 0..n {
            let u = sample_gig(laws.gig_i, rng);
            let v = sample_gamma(0.5, laws.gamma_i_rate, rng);
            let (s, w) = forward(u, v);
            first.push(s);
            second.push(w);
        }
        let ks_s = ks_one_sample(&first, |x| gamma_cdf(x, 0.5, laws.gamma_ii_rate))?;
        let ks_w = ks_one_sample(&second, |x| gig_half_cdf(x, laws.gig_ii.a, laws.gig_ii.b))?;
        let (_, p_indep) = chi2_independence(&first, &second, 4)?;
        Ok(DirectionOutcome {
            p_first: ks_s.p_value,
            p_second: ks_w.p_value,
            p_indep,
        })
    } else {
        for _ in 0..n {
            let s = sample_gamma(0.5, laws.gamma_ii_rate, rng);
            let w = sample_gig(laws.gig_ii, rng);
            let (u, v) = reverse(s, w);
            first.push(u);
            second.push(v);
        }
        let ks_u = ks_one_sample(&first, |x| gig_half_cdf(x, laws.gig_i.a, laws.gig_i.b))?;
        let ks_v = ks_one_sample(&second, |x| gamma_cdf(x, 0.5, laws.gamma_i_rate))?;
        let (_, p_indep) = chi2_independence(&first, &second, 4)?;
        Ok(DirectionOutcome {
            p_first: ks_u.p_value,
            p_second: ks_v.p_value,
            p_indep,
        })
    }
}

/// Run the transformation identity in both directions under the anchored
/// convention (expected to pass at alpha = 0.01) and under the paper-literal
/// convention (the negative control, expected to reject below 1e-6), and
/// report which convention passes.
pub fn my_property_check(
    theta: f64,
    eta: f64,
    n: usize,
    stream: RngStream,
) -> Result<VerificationReport> {
    let mut report = VerificationReport::new(
        "my_prop_transformation_identity",
        "Prop my-prop (2.4): Gamma/GIG product-law equivalence",
    );
    report.seed(stream);
    report.tol("alpha", 0.01).tol("reject_below", 1e-6);

    let mut rng = stream.rng();
    let anchored = laws(theta, eta, MyPropConvention::Anchored)?;
    let fwd = run_direction(&anchored, n, &mut rng, true)?;
    let rev = run_direction(&anchored, n, &mut rng, false)?;
    report
        .stat("anchored_fwd_p_first", fwd.p_first)
        .stat("anchored_fwd_p_second", fwd.p_second)
        .stat("anchored_fwd_p_indep", fwd.p_indep)
        .stat("anchored_rev_p_first", rev.p_first)
        .stat("anchored_rev_p_second", rev.p_second)
        .stat("anchored_rev_p_indep", rev.p_indep);
    let anchored_min = fwd
        .p_first
        .min(fwd.p_second)
        .min(fwd.p_indep)
        .min(rev.p_first)
        .min(rev.p_second)
        .min(rev.p_indep);

    let literal = laws(theta, eta, MyPropConvention::PaperLiteral)?;
    let lit_fwd = run_direction(&literal, n, &mut rng, true)?;
    let lit_min = lit_fwd.p_first.min(lit_fwd.p_second);
    report
        .stat("paper_literal_fwd_p_first", lit_fwd.p_first)
        .stat("paper_literal_fwd_p_second", lit_fwd.p_second)
        .stat("anchored_min_p", anchored_min)
        .stat("paper_literal_min_p", lit_min);

    report.pass = anchored_min > 0.01 && lit_min < 1e-6;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn transform_and_inverse_are_mutual() {
        let (u, v) = (0.7, 1.9);
        let (s, w) = forward(u, v);
        let (u2, v2) = reverse(s, w);
        assert!((u - u2).abs() < 1e-14);
        assert!((v - v2).abs() < 1e-14);
    }

    #[test]
    fn anchored_passes_literal_fails_symmetric_case() {
        // theta = eta: the map is an involution in distribution
        let report = my_property_check(1.0, 1.0, 100_000, RngStream::new(121, 0)).unwrap();
        assert!(report.pass, "stats: {:?}", report.statistics);
        assert!(report.statistics["anchored_min_p"] > 0.01);
        assert!(report.statistics["paper_literal_min_p"] < 1e-6);
    }

    #[test]
    fn anchored_passes_asymmetric_case() {
        let report = my_property_check(1.3, 0.8, 100_000, RngStream::new(122, 0)).unwrap();
        assert!(
            report.statistics["anchored_min_p"] > 0.01,
            "stats: {:?}",
            report.statistics
        );
    }

    #[test]
    fn gig_half_cdf_is_a_cdf() {
        let (a, b) = (1.3, 0.7);
        let mut prev = 0.0;
        for k in 1..200 {
            let x = k as f64 * 0.1;
            let c = gig_half_cdf(x, a, b);
            assert!((0.0..=1.0).contains(&c));
            assert!(c >= prev);
            prev = c;
        }
        assert!(gig_half_cdf(1e9, a, b) > 0.999);
    }
}
