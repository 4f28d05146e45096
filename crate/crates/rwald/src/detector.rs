//! The robust Wald-type detector for a single snapshot.
//!
//! The statistic is Lambda = 2 |v^H x|^2 / (v^H Gamma_hat_l v), where the
//! denominator is a truncated-lag (banded) covariance quadratic form built
//! from the least-squares residuals. It needs no secondary data and no
//! knowledge of the clutter law beyond short-range correlation; its null
//! distribution converges to a chi-squared with two degrees of freedom, which
//! fixes the threshold at -2 ln(pfa).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::SteeringVector;

/// Scale factor of the degenerate-denominator floor: the quadratic form is
/// compared against `eps * ||v||^2 * (||x||^2 / N)`.
pub const DEGENERATE_FLOOR_EPS: f64 = 1e-12;

/// Truncation lag of the banded covariance estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "TruncationLagRepr", into = "TruncationLagRepr")]
pub enum TruncationLag {
    /// Resolve to `floor(N^{1/4})` at call time.
    Auto,
    /// Use this lag regardless of the snapshot length (clamped below N).
    Fixed(usize),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum TruncationLagRepr {
    Fixed(u64),
    Word(String),
}

impl TryFrom<TruncationLagRepr> for TruncationLag {
    type Error = Error;

    fn try_from(repr: TruncationLagRepr) -> Result<Self> {
        match repr {
            TruncationLagRepr::Fixed(l) => Ok(TruncationLag::Fixed(l as usize)),
            TruncationLagRepr::Word(w) if w == "auto" => Ok(TruncationLag::Auto),
            TruncationLagRepr::Word(w) => Err(Error::InvalidParameter(format!(
                "truncation lag must be \"auto\" or a nonnegative integer, got \"{w}\""
            ))),
        }
    }
}

impl From<TruncationLag> for TruncationLagRepr {
    fn from(lag: TruncationLag) -> Self {
        match lag {
            TruncationLag::Auto => TruncationLagRepr::Word("auto".into()),
            TruncationLag::Fixed(l) => TruncationLagRepr::Fixed(l as u64),
        }
    }
}

/// What to do when the denominator quadratic form collapses. The rectangular
/// kernel does not guarantee positivity in finite samples, so this event is
/// possible and has to be observable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DegeneratePolicy {
    /// Fail the call.
    Error,
    /// Decide H0, report statistic 0, and flag the outcome.
    #[default]
    CountAsReject,
}

/// Detector configuration: truncation lag, nominal false-alarm probability,
/// and the degenerate-denominator policy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DetectorConfigRepr", into = "DetectorConfigRepr")]
pub struct DetectorConfig {
    truncation_lag: TruncationLag,
    pfa_nominal: f64,
    degenerate_policy: DegeneratePolicy,
}

#[derive(Serialize, Deserialize)]
struct DetectorConfigRepr {
    #[serde(default = "default_lag")]
    truncation_lag: TruncationLag,
    pfa_nominal: f64,
    #[serde(default)]
    degenerate_policy: DegeneratePolicy,
}

fn default_lag() -> TruncationLag {
    TruncationLag::Auto
}

impl TryFrom<DetectorConfigRepr> for DetectorConfig {
    type Error = Error;

    fn try_from(repr: DetectorConfigRepr) -> Result<Self> {
        DetectorConfig::new(repr.pfa_nominal).map(|cfg| {
            cfg.with_truncation_lag(repr.truncation_lag)
                .with_degenerate_policy(repr.degenerate_policy)
        })
    }
}

impl From<DetectorConfig> for DetectorConfigRepr {
    fn from(cfg: DetectorConfig) -> Self {
        DetectorConfigRepr {
            truncation_lag: cfg.truncation_lag,
            pfa_nominal: cfg.pfa_nominal,
            degenerate_policy: cfg.degenerate_policy,
        }
    }
}

impl DetectorConfig {
    /// Automatic truncation lag and the count-as-reject degenerate policy.
    pub fn new(pfa_nominal: f64) -> Result<Self> {
        if !(pfa_nominal > 0.0 && pfa_nominal < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "pfa_nominal must lie in (0, 1), got {pfa_nominal}"
            )));
        }
        Ok(Self {
            truncation_lag: TruncationLag::Auto,
            pfa_nominal,
            degenerate_policy: DegeneratePolicy::default(),
        })
    }

    pub fn with_truncation_lag(mut self, lag: TruncationLag) -> Self {
        self.truncation_lag = lag;
        self
    }

    pub fn with_degenerate_policy(mut self, policy: DegeneratePolicy) -> Self {
        self.degenerate_policy = policy;
        self
    }

    pub fn truncation_lag(&self) -> TruncationLag {
        self.truncation_lag
    }

    pub fn pfa_nominal(&self) -> f64 {
        self.pfa_nominal
    }

    pub fn degenerate_policy(&self) -> DegeneratePolicy {
        self.degenerate_policy
    }

    /// Lag used for a snapshot of length `n`: the automatic rule or the fixed
    /// override, clamped below `n`.
    pub fn resolve_lag(&self, n: usize) -> usize {
        match self.truncation_lag {
            TruncationLag::Auto => default_truncation_lag(n),
            TruncationLag::Fixed(l) => l.min(n.saturating_sub(1)),
        }
    }

    /// Warns when a fixed lag violates the growth condition l = o(N^{1/3})
    /// that underpins the asymptotics; the lag is still honored.
    pub fn lag_warning(&self, n: usize) -> Option<String> {
        if let TruncationLag::Fixed(l) = self.truncation_lag {
            let cube_root = (n as f64).cbrt();
            if l as f64 >= cube_root {
                return Some(format!(
                    "truncation lag {l} is not small against N^(1/3) = {cube_root:.1} \
                     at N = {n}; the chi-squared calibration may be off"
                ));
            }
        }
        None
    }
}

/// One detector evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionOutcome {
    /// Wald statistic; 0 when the outcome is degenerate.
    pub statistic: f64,
    /// Least-squares amplitude estimate.
    pub alpha_hat: Complex64,
    /// Denominator quadratic form `v^H Gamma_hat_l v`.
    pub denominator: f64,
    /// Threshold the statistic was compared against.
    pub threshold: f64,
    /// True when the statistic exceeded the threshold (strictly; ties decide
    /// H0).
    pub decide_h1: bool,
    /// True when the denominator fell below the numerical floor.
    pub degenerate: bool,
}

/// Least-squares amplitude estimate `v^H x / ||v||^2`.
///
/// # Panics
/// If the lengths differ or the steering vector has zero norm.
pub fn ls_estimate(x: &[Complex64], v: &SteeringVector) -> Complex64 {
    assert_eq!(x.len(), v.len(), "snapshot and steering lengths must match");
    assert!(v.norm_sqr() > 0.0, "steering vector must have nonzero norm");
    let mut inner = Complex64::ZERO;
    for (xi, vi) in x.iter().zip(v.values()) {
        inner += vi.conj() * xi;
    }
    inner / v.norm_sqr()
}

/// Residual vector `x - alpha_hat * v`.
///
/// # Panics
/// If the lengths differ.
pub fn residuals(x: &[Complex64], v: &SteeringVector, alpha_hat: Complex64) -> Vec<Complex64> {
    assert_eq!(x.len(), v.len(), "snapshot and steering lengths must match");
    x.iter()
        .zip(v.values())
        .map(|(xi, vi)| xi - alpha_hat * vi)
        .collect()
}

/// Quadratic form `v^H Gamma_hat_l v` of the banded residual covariance
/// estimate, accumulated lag by lag in O(N*l) time and O(1) extra space:
/// `sum_n |v_n|^2 |c_n|^2 + 2 sum_{m=1}^{l} sum_{n=m}^{N-1} Re{conj(v_n) v_{n-m} c_n conj(c_{n-m})}`.
///
/// # Panics
/// If the lengths differ or `l >= N`.
pub fn hac_quadratic_form(v: &SteeringVector, c_hat: &[Complex64], l: usize) -> f64 {
    let n = v.len();
    assert_eq!(c_hat.len(), n, "residual and steering lengths must match");
    assert!(l < n, "truncation lag {l} must be below the snapshot length {n}");
    let values = v.values();

    let mut form = 0.0;
    for k in 0..n {
        form += values[k].norm_sqr() * c_hat[k].norm_sqr();
    }
    for m in 1..=l {
        let mut band = Complex64::ZERO;
        for k in m..n {
            band += values[k].conj() * values[k - m] * c_hat[k] * c_hat[k - m].conj();
        }
        form += 2.0 * band.re;
    }
    form
}

/// Default truncation lag `floor(n^{1/4})`, clamped below `n`.
///
/// # Panics
/// If `n` is zero.
pub fn default_truncation_lag(n: usize) -> usize {
    assert!(n >= 1, "snapshot length must be at least 1");
    // Round the floating-point root to the exact integer fourth root.
    let mut k = (n as f64).powf(0.25).floor() as usize;
    while ((k + 1) as u128).pow(4) <= n as u128 {
        k += 1;
    }
    while k > 0 && (k as u128).pow(4) > n as u128 {
        k -= 1;
    }
    k.min(n - 1)
}

/// Detection threshold `-2 ln(pfa)` of the asymptotic chi-squared null law.
///
/// # Panics
/// If `pfa` lies outside `(0, 1)`.
pub fn threshold_for_pfa(pfa: f64) -> f64 {
    assert!(pfa > 0.0 && pfa < 1.0, "pfa must lie in (0, 1), got {pfa}");
    -2.0 * pfa.ln()
}

/// Evaluates the robust Wald detector on one snapshot.
///
/// Computes the least-squares amplitude, the residual quadratic form at the
/// resolved truncation lag, and the thresholded statistic. A denominator at
/// or below `DEGENERATE_FLOOR_EPS * ||v||^2 * (||x||^2 / N)` triggers the
/// configured degenerate policy.
///
/// # Panics
/// If the lengths differ.
pub fn wald_statistic(
    x: &[Complex64],
    v: &SteeringVector,
    cfg: &DetectorConfig,
) -> Result<DetectionOutcome> {
    let n = v.len();
    assert_eq!(x.len(), n, "snapshot and steering lengths must match");
    if v.norm_sqr() == 0.0 {
        // Shaped waveforms can null the signature at some frequencies.
        return Err(Error::ZeroSteeringVector);
    }

    let alpha_hat = ls_estimate(x, v);
    let c_hat = residuals(x, v, alpha_hat);
    let lag = cfg.resolve_lag(n);
    let denominator = hac_quadratic_form(v, &c_hat, lag);
    let threshold = threshold_for_pfa(cfg.pfa_nominal);

    let x_power: f64 = x.iter().map(|xi| xi.norm_sqr()).sum();
    let floor = DEGENERATE_FLOOR_EPS * v.norm_sqr() * (x_power / n as f64);
    if denominator <= floor {
        return match cfg.degenerate_policy() {
            DegeneratePolicy::Error => Err(Error::DegenerateDenominator),
            DegeneratePolicy::CountAsReject => Ok(DetectionOutcome {
                statistic: 0.0,
                alpha_hat,
                denominator,
                threshold,
                decide_h1: false,
                degenerate: true,
            }),
        };
    }

    let numerator = 2.0 * alpha_hat.norm_sqr() * v.norm_sqr() * v.norm_sqr();
    let statistic = numerator / denominator;
    Ok(DetectionOutcome {
        statistic,
        alpha_hat,
        denominator,
        threshold,
        decide_h1: decide(statistic, threshold),
        degenerate: false,
    })
}

/// Strict exceedance; a tie decides H0.
fn decide(statistic: f64, threshold: f64) -> bool {
    statistic > threshold
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ula_steering;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn steering(values: Vec<Complex64>) -> SteeringVector {
        SteeringVector::new(values, 0.0).unwrap()
    }

    fn fourier(nu: f64, n: usize) -> SteeringVector {
        SteeringVector::new(ula_steering(nu, n, 1), nu).unwrap()
    }

    fn random_snapshot<R: Rng>(rng: &mut R, n: usize) -> Vec<Complex64> {
        (0..n)
            .map(|_| c(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect()
    }

    #[test]
    fn ls_estimate_hand_values() {
        let v = steering(vec![c(1.0, 0.0), c(1.0, 0.0)]);
        assert_eq!(ls_estimate(&[c(1.0, 0.0), c(1.0, 0.0)], &v), Complex64::ONE);
        assert_eq!(ls_estimate(&[c(1.0, 0.0), c(-1.0, 0.0)], &v), Complex64::ZERO);
        assert_eq!(ls_estimate(&[c(3.0, 0.0), c(1.0, 0.0)], &v), c(2.0, 0.0));
    }

    #[test]
    fn residual_hand_values() {
        let v = steering(vec![c(1.0, 0.0), c(1.0, 0.0)]);
        assert_eq!(
            residuals(&[c(1.0, 0.0), c(1.0, 0.0)], &v, Complex64::ONE),
            vec![Complex64::ZERO, Complex64::ZERO]
        );
        assert_eq!(
            residuals(&[c(1.0, 0.0), c(-1.0, 0.0)], &v, Complex64::ZERO),
            vec![c(1.0, 0.0), c(-1.0, 0.0)]
        );
    }

    #[test]
    fn ls_residuals_are_orthogonal_to_steering() {
        let mut rng = ChaCha8Rng::seed_from_u64(20);
        for _ in 0..200 {
            let n = rng.random_range(2..64);
            let v = fourier(rng.random_range(-0.5..0.5), n);
            let x = random_snapshot(&mut rng, n);
            let alpha = ls_estimate(&x, &v);
            let resid = residuals(&x, &v, alpha);
            let mut inner = Complex64::ZERO;
            for (vi, ri) in v.values().iter().zip(&resid) {
                inner += vi.conj() * ri;
            }
            let x_norm = x.iter().map(|xi| xi.norm_sqr()).sum::<f64>().sqrt();
            assert!(inner.norm() <= 1e-10 * v.norm_sqr().sqrt() * x_norm);
        }
    }

    #[test]
    fn hac_form_hand_values() {
        let v2 = steering(vec![c(1.0, 0.0), c(1.0, 0.0)]);
        assert!((hac_quadratic_form(&v2, &[c(1.0, 0.0), c(-1.0, 0.0)], 0) - 2.0).abs() < 1e-15);

        let v3 = steering(vec![c(1.0, 0.0); 3]);
        let c_hat = [c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0)];
        assert!((hac_quadratic_form(&v3, &c_hat, 1) - 3.0).abs() < 1e-15);
    }

    /// Dense oracle: build the banded Hermitian matrix with entries
    /// c_i conj(c_j) on |i - j| <= l explicitly and form v^H M v.
    fn hac_dense_oracle(v: &SteeringVector, c_hat: &[Complex64], l: usize) -> f64 {
        let n = v.len();
        let values = v.values();
        let mut form = Complex64::ZERO;
        for i in 0..n {
            for j in 0..n {
                if i.abs_diff(j) <= l {
                    form += values[i].conj() * c_hat[i] * c_hat[j].conj() * values[j];
                }
            }
        }
        form.re
    }

    #[test]
    fn hac_form_matches_dense_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for trial in 0..1000 {
            let n = rng.random_range(1..=16);
            let v = steering(random_snapshot(&mut rng, n));
            let c_hat = random_snapshot(&mut rng, n);
            let l = rng.random_range(0..n);
            let fast = hac_quadratic_form(&v, &c_hat, l);
            let dense = hac_dense_oracle(&v, &c_hat, l);
            let scale = dense.abs().max(1e-12);
            assert!(
                (fast - dense).abs() <= 1e-10 * scale,
                "trial {trial}: n={n} l={l} fast={fast} dense={dense}"
            );
        }
    }

    #[test]
    fn default_lag_hand_values() {
        assert_eq!(default_truncation_lag(10_000), 10);
        assert_eq!(default_truncation_lag(16), 2);
        assert_eq!(default_truncation_lag(2), 1);
        assert_eq!(default_truncation_lag(1), 0);
        assert_eq!(default_truncation_lag(4095), 7);
        assert_eq!(default_truncation_lag(4096), 8);
        assert_eq!(default_truncation_lag(8192), 9);
    }

    #[test]
    fn default_lag_is_exact_integer_fourth_root() {
        for n in 1..5000usize {
            let lag = default_truncation_lag(n);
            assert!(lag.pow(4) <= n && (lag + 1).pow(4) > n || lag == n - 1, "n = {n}");
            assert!(lag < n);
        }
    }

    #[test]
    fn threshold_hand_values() {
        assert!((threshold_for_pfa((-1.0f64).exp()) - 2.0).abs() < 1e-15);
        assert!((threshold_for_pfa(1e-4) - 18.420_680_743_952_367).abs() < 1e-12);
        for pfa in [1e-1, 1e-2, 1e-4] {
            let t = threshold_for_pfa(pfa);
            assert!((crate::theory::chi2_2_sf(t) - pfa).abs() < 1e-12);
        }
    }

    #[test]
    #[should_panic(expected = "pfa must lie in (0, 1)")]
    fn threshold_rejects_unit_pfa() {
        threshold_for_pfa(1.0);
    }

    #[test]
    fn wald_hand_case_orthogonal_snapshot() {
        let v = steering(vec![c(1.0, 0.0), c(1.0, 0.0)]);
        let cfg = DetectorConfig::new(0.01)
            .unwrap()
            .with_truncation_lag(TruncationLag::Fixed(0));
        let out = wald_statistic(&[c(1.0, 0.0), c(-1.0, 0.0)], &v, &cfg).unwrap();
        assert_eq!(out.alpha_hat, Complex64::ZERO);
        assert!((out.denominator - 2.0).abs() < 1e-15);
        assert_eq!(out.statistic, 0.0);
        assert!(!out.decide_h1);
        assert!(!out.degenerate);
    }

    #[test]
    fn statistic_is_invariant_under_complex_scaling() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let cfg = DetectorConfig::new(0.01).unwrap();
        let kappas = [c(2.0, 0.0), c(0.0, 1.0), c(-0.5, 0.5)];
        for trial in 0..1000 {
            let n = rng.random_range(4..48);
            let v = fourier(rng.random_range(-0.5..0.5), n);
            let x = random_snapshot(&mut rng, n);
            let base = wald_statistic(&x, &v, &cfg).unwrap();
            for kappa in kappas {
                let scaled: Vec<Complex64> = x.iter().map(|xi| xi * kappa).collect();
                let out = wald_statistic(&scaled, &v, &cfg).unwrap();
                let tol = 1e-9 * base.statistic.abs().max(1e-12);
                assert!(
                    (out.statistic - base.statistic).abs() <= tol,
                    "trial {trial} kappa {kappa}: {} vs {}",
                    out.statistic,
                    base.statistic
                );
                assert_eq!(out.decide_h1, base.decide_h1);
            }
        }
    }

    #[test]
    fn statistic_is_nonnegative_on_random_inputs() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let cfg = DetectorConfig::new(0.01).unwrap();
        for _ in 0..500 {
            let n = rng.random_range(2..64);
            let v = fourier(rng.random_range(-0.5..0.5), n);
            let x = random_snapshot(&mut rng, n);
            let out = wald_statistic(&x, &v, &cfg).unwrap();
            if !out.degenerate {
                assert!(out.statistic >= 0.0);
            }
        }
    }

    /// The recast form 2N|alpha|^2 / (A_N^{-2} B_N) with A_N = ||v||^2 / N and
    /// B_N = v^H Gamma_hat v / N must agree with the implemented quotient.
    #[test]
    fn both_printed_statistic_forms_coincide() {
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        let cfg = DetectorConfig::new(0.01).unwrap();
        for _ in 0..200 {
            let n = rng.random_range(4..64);
            let v = fourier(rng.random_range(-0.5..0.5), n);
            let x = random_snapshot(&mut rng, n);
            let out = wald_statistic(&x, &v, &cfg).unwrap();
            if out.degenerate {
                continue;
            }
            let a_n = v.norm_sqr() / n as f64;
            let b_n = out.denominator / n as f64;
            let recast = 2.0 * n as f64 * out.alpha_hat.norm_sqr() * a_n * a_n / b_n;
            assert!((recast - out.statistic).abs() <= 1e-12 * out.statistic.max(1e-12));
        }
    }

    #[test]
    fn snapshot_equal_to_steering_is_degenerate() {
        let v = fourier(0.2, 16);
        let x = v.values().to_vec();

        let reject = DetectorConfig::new(0.01).unwrap();
        let out = wald_statistic(&x, &v, &reject).unwrap();
        assert!(out.degenerate);
        assert!(!out.decide_h1);
        assert_eq!(out.statistic, 0.0);

        let strict = reject.with_degenerate_policy(DegeneratePolicy::Error);
        assert!(matches!(
            wald_statistic(&x, &v, &strict),
            Err(Error::DegenerateDenominator)
        ));
    }

    #[test]
    fn tie_with_threshold_decides_h0() {
        assert!(!decide(2.0, 2.0));
        assert!(decide(2.0 + 1e-12, 2.0));
        assert!(!decide(0.0, 0.0));
    }

    #[test]
    fn resolve_lag_honors_auto_and_clamps_fixed() {
        let cfg = DetectorConfig::new(0.01).unwrap();
        assert_eq!(cfg.resolve_lag(10_000), 10);
        let fixed = cfg.with_truncation_lag(TruncationLag::Fixed(40));
        assert_eq!(fixed.resolve_lag(10_000), 40);
        assert_eq!(fixed.resolve_lag(8), 7);
    }

    #[test]
    fn lag_warning_fires_only_for_large_fixed_lags() {
        let cfg = DetectorConfig::new(0.01).unwrap();
        assert!(cfg.lag_warning(1000).is_none());
        let mild = cfg.with_truncation_lag(TruncationLag::Fixed(5));
        assert!(mild.lag_warning(1000).is_none());
        let harsh = cfg.with_truncation_lag(TruncationLag::Fixed(10));
        assert!(harsh.lag_warning(1000).is_some());
    }

    #[test]
    fn config_serde_accepts_auto_and_integer_lags() {
        let auto: DetectorConfig =
            serde_json::from_str(r#"{"truncation_lag":"auto","pfa_nominal":0.01}"#).unwrap();
        assert_eq!(auto.truncation_lag(), TruncationLag::Auto);
        assert_eq!(auto.degenerate_policy(), DegeneratePolicy::CountAsReject);

        let fixed: DetectorConfig = serde_json::from_str(
            r#"{"truncation_lag":4,"pfa_nominal":0.01,"degenerate_policy":"error"}"#,
        )
        .unwrap();
        assert_eq!(fixed.truncation_lag(), TruncationLag::Fixed(4));
        assert_eq!(fixed.degenerate_policy(), DegeneratePolicy::Error);

        let round = serde_json::to_string(&fixed).unwrap();
        let back: DetectorConfig = serde_json::from_str(&round).unwrap();
        assert_eq!(back, fixed);

        assert!(serde_json::from_str::<DetectorConfig>(
            r#"{"truncation_lag":"auto","pfa_nominal":1.5}"#
        )
        .is_err());
        assert!(serde_json::from_str::<DetectorConfig>(
            r#"{"truncation_lag":"other","pfa_nominal":0.01}"#
        )
        .is_err());
    }
}
