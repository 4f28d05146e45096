//! Closed-form asymptotics of the robust Wald detector.
//!
//! The detector statistic converges to a central chi-squared with two degrees
//! of freedom under the null and to a noncentral one under alternatives, so
//! the reference curves here are the chi-squared tail, the Marcum Q function
//! of order 1, and the noncentrality parameter built from the steering vector
//! and the clutter autocovariance. Monte Carlo runs validate against these
//! curves rather than against other simulations.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma_ur, ln_gamma};

use crate::detector::threshold_for_pfa;
use crate::disturbance::Autocovariance;
use crate::error::{Error, Result};
use crate::geometry::SteeringVector;

/// Series terms whose Poisson weight falls below this bound contribute less
/// than the 1e-10 accuracy target and are dropped.
const MARCUM_TERM_FLOOR: f64 = 1e-18;

/// Predicted operating point of the detector for one scenario cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticPrediction {
    /// Nominal false-alarm probability the threshold was set for.
    pub pfa: f64,
    /// Predicted detection probability.
    pub pd: f64,
    /// Noncentrality parameter of the limiting chi-squared law.
    pub varsigma: f64,
    /// Detection threshold.
    pub threshold: f64,
}

impl AsymptoticPrediction {
    /// Prediction at the threshold calibrated for `pfa`.
    ///
    /// # Panics
    /// If `pfa` is outside `(0, 1]` or `varsigma` is negative.
    pub fn new(pfa: f64, varsigma: f64) -> Self {
        assert!(pfa > 0.0 && pfa <= 1.0, "pfa must lie in (0, 1], got {pfa}");
        assert!(varsigma >= 0.0, "varsigma must be nonnegative, got {varsigma}");
        let threshold = threshold_for_pfa(pfa);
        let pd = asymptotic_pd(varsigma, threshold);
        Self { pfa, pd, varsigma, threshold }
    }
}

/// Survival function of the central chi-squared distribution with two degrees
/// of freedom: `exp(-t/2)`.
///
/// # Panics
/// If `t` is negative or not finite.
pub fn chi2_2_sf(t: f64) -> f64 {
    assert!(t >= 0.0 && t.is_finite(), "chi2_2_sf needs finite t >= 0, got {t}");
    (-0.5 * t).exp()
}

/// Marcum Q function of order 1, accurate to 1e-10 absolute for arguments up
/// to 40.
///
/// Evaluated as the Poisson-weighted sum of upper regularized gamma tails,
/// `sum_k e^{-a^2/2} (a^2/2)^k / k! * Q(k+1, b^2/2)`. The sum starts at the
/// Poisson mode, where the weight is computed in log space, and extends in
/// both directions by multiplicative recurrences until the weights fall below
/// [`MARCUM_TERM_FLOOR`]; this stays finite even when the weight at k = 0
/// underflows.
///
/// # Panics
/// If either argument is negative or not finite.
pub fn marcum_q1(a: f64, b: f64) -> f64 {
    assert!(a >= 0.0 && a.is_finite(), "marcum_q1 needs finite a >= 0, got {a}");
    assert!(b >= 0.0 && b.is_finite(), "marcum_q1 needs finite b >= 0, got {b}");
    let mu = 0.5 * a * a;
    let y = 0.5 * b * b;
    if y == 0.0 {
        return 1.0;
    }
    if mu == 0.0 {
        return (-y).exp();
    }

    // Poisson mode and the shared state at it. q_k is the gamma tail
    // Q(k+1, y) and t_k = e^{-y} y^k / k! is its increment, so that
    // q_{k+1} = q_k + t_{k+1}.
    let k0 = mu.floor();
    let p0 = (-mu + k0 * mu.ln() - ln_gamma(k0 + 1.0)).exp();
    let q0 = gamma_ur(k0 + 1.0, y);
    let t0 = (-y + k0 * y.ln() - ln_gamma(k0 + 1.0)).exp();

    let mut total = p0 * q0;

    let (mut p, mut q, mut t, mut k) = (p0, q0, t0, k0);
    while p > MARCUM_TERM_FLOOR {
        k += 1.0;
        p *= mu / k;
        t *= y / k;
        q = (q + t).min(1.0);
        total += p * q;
    }

    let (mut p, mut q, mut t, mut k) = (p0, q0, t0, k0);
    while k > 0.0 && p > MARCUM_TERM_FLOOR {
        p *= k / mu;
        q = (q - t).max(0.0);
        t *= k / y;
        k -= 1.0;
        total += p * q;
    }

    total.clamp(0.0, 1.0)
}

/// Noncentrality parameter `2 |alpha|^2 ||v||^4 / (v^H Gamma v)` with the
/// clutter covariance built as a Hermitian Toeplitz matrix from the
/// autocovariance; lags beyond the stored horizon are treated as zero.
///
/// The quadratic form is accumulated lag by lag in O(N·L) instead of
/// materializing the matrix.
pub fn noncentrality(
    alpha: Complex64,
    v: &SteeringVector,
    acov: &Autocovariance,
) -> Result<f64> {
    let values = v.values();
    let n = values.len();
    let mut form = acov.r0() * v.norm_sqr();
    let max_lag = acov.max_lag().min(n.saturating_sub(1));
    for m in 1..=max_lag {
        let mut overlap = Complex64::ZERO;
        for k in m..n {
            overlap += values[k].conj() * values[k - m];
        }
        form += 2.0 * (acov.at(m as i64) * overlap).re;
    }
    noncentrality_from_form(alpha, v.norm_sqr(), form)
}

/// Noncentrality parameter against an explicit Hermitian covariance matrix.
///
/// # Panics
/// If the matrix dimension does not match the steering vector.
pub fn noncentrality_dense(
    alpha: Complex64,
    v: &SteeringVector,
    gamma: &DMatrix<Complex64>,
) -> Result<f64> {
    let n = v.len();
    assert_eq!(gamma.nrows(), n, "covariance rows must match steering length");
    assert_eq!(gamma.ncols(), n, "covariance columns must match steering length");
    let values = v.values();
    let mut form = Complex64::ZERO;
    for i in 0..n {
        for j in 0..n {
            form += values[i].conj() * gamma[(i, j)] * values[j];
        }
    }
    noncentrality_from_form(alpha, v.norm_sqr(), form.re)
}

fn noncentrality_from_form(alpha: Complex64, norm_sqr: f64, form: f64) -> Result<f64> {
    if !(form > 0.0) {
        return Err(Error::NonPositiveQuadraticForm);
    }
    Ok(2.0 * alpha.norm_sqr() * norm_sqr * norm_sqr / form)
}

/// Predicted detection probability `Q_1(sqrt(varsigma), sqrt(threshold))` of
/// the limiting noncentral chi-squared law.
///
/// # Panics
/// If `varsigma` or `threshold` is negative or not finite.
pub fn asymptotic_pd(varsigma: f64, threshold: f64) -> f64 {
    assert!(varsigma >= 0.0 && varsigma.is_finite(), "varsigma must be >= 0, got {varsigma}");
    assert!(threshold >= 0.0 && threshold.is_finite(), "threshold must be >= 0, got {threshold}");
    marcum_q1(varsigma.sqrt(), threshold.sqrt())
}
