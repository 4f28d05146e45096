//! Monte Carlo estimation of false-alarm and detection probabilities.
//!
//! Trials are embarrassingly parallel and fully deterministic: trial `t` of a
//! run with seed `s` always consumes the ChaCha8 stream keyed by
//! `counter_rng_seed(s, t)`, so tallies do not depend on worker count or
//! execution order. The per-trial key is four outputs of the SplitMix64
//! finalizer started at `s XOR t * 0x9e3779b97f4a7c15`; sweep cells derive
//! their run seeds from the same construction. The generator choice is part
//! of this artifact's reproducibility contract, not of the statistics: any
//! generator passing standard test batteries would estimate the same
//! probabilities.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::detector::{wald_statistic, DetectorConfig};
use crate::disturbance::{ar_autocovariance, generate_ar, generate_cg, ArSpec, Autocovariance, CgSpec};
use crate::error::{Error, Result};
use crate::geometry::{unit_signature, ArrayConfig, SteeringVector};
use crate::theory::{chi2_2_sf, noncentrality, AsymptoticPrediction};

/// At most this many statistic samples are retained per run for the KS
/// diagnostic; larger runs keep every `ceil(trials / cap)`-th trial.
pub const KS_RETENTION_CAP: usize = 100_000;

/// 95% two-sided normal quantile used by [`wilson_interval`].
pub const WILSON_Z_95: f64 = 1.959964;

/// Autocovariance magnitudes below this fraction of the power are treated as
/// zero when choosing the analytic-covariance horizon.
const ACOV_DECAY_EPS: f64 = 1e-17;

/// Hard cap on the analytic-covariance horizon.
const MAX_ACOV_HORIZON: usize = 8192;

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

fn splitmix_next(state: &mut u64) -> u64 {
    *state = state.wrapping_add(GOLDEN);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// 32-byte ChaCha key of the stream owned by trial `index` of run `seed`.
/// Distinct indices always produce distinct keys.
pub fn counter_rng_seed(seed: u64, index: u64) -> [u8; 32] {
    let mut state = seed ^ index.wrapping_mul(GOLDEN);
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix_next(&mut state).to_le_bytes());
    }
    key
}

/// 64-bit run seed of sweep cell `index` derived from the sweep seed.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut state = seed ^ index.wrapping_mul(GOLDEN);
    splitmix_next(&mut state)
}

/// Clutter model of a scenario: plain autoregressive or compound-Gaussian.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClutterModel {
    Ar(ArSpec),
    CompoundGaussian(CgSpec),
}

impl ClutterModel {
    pub fn generate<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<Complex64> {
        match self {
            ClutterModel::Ar(spec) => generate_ar(spec, n, rng),
            ClutterModel::CompoundGaussian(spec) => generate_cg(spec, n, rng),
        }
    }

    /// Autocovariance of the generated samples. The unit-mean texture of the
    /// compound-Gaussian model leaves the speckle covariance unchanged.
    pub fn autocovariance(&self, max_lag: usize) -> Result<Autocovariance> {
        match self {
            ClutterModel::Ar(spec) => ar_autocovariance(spec, max_lag),
            ClutterModel::CompoundGaussian(spec) => ar_autocovariance(spec.speckle(), max_lag),
        }
    }

    pub fn normalize_unit_power(&self) -> bool {
        match self {
            ClutterModel::Ar(spec) => spec.normalize_unit_power(),
            ClutterModel::CompoundGaussian(spec) => spec.normalize_unit_power(),
        }
    }

    fn decay_horizon(&self, eps: f64) -> usize {
        match self {
            ClutterModel::Ar(spec) => spec.decay_horizon(eps),
            ClutterModel::CompoundGaussian(spec) => spec.speckle().decay_horizon(eps),
        }
    }
}

/// One named experimental setting: clutter, target frequency, array, optional
/// target SNR (absent means a null-hypothesis run), and detector settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ScenarioRepr", into = "ScenarioRepr")]
pub struct Scenario {
    name: String,
    clutter: ClutterModel,
    nu: f64,
    array: ArrayConfig,
    snr_db: Option<f64>,
    detector: DetectorConfig,
}

#[derive(Serialize, Deserialize)]
struct ScenarioRepr {
    name: String,
    clutter: ClutterModel,
    nu: f64,
    array: ArrayConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    snr_db: Option<f64>,
    detector: DetectorConfig,
}

impl TryFrom<ScenarioRepr> for Scenario {
    type Error = Error;

    fn try_from(repr: ScenarioRepr) -> Result<Self> {
        Scenario::new(repr.name, repr.clutter, repr.nu, repr.array, repr.snr_db, repr.detector)
    }
}

impl From<Scenario> for ScenarioRepr {
    fn from(s: Scenario) -> Self {
        ScenarioRepr {
            name: s.name,
            clutter: s.clutter,
            nu: s.nu,
            array: s.array,
            snr_db: s.snr_db,
            detector: s.detector,
        }
    }
}

impl Scenario {
    /// Validates the SNR convention: a target SNR is only meaningful against
    /// unit-power clutter, where SNR(dB) = 10 log10 |alpha|^2 and the target
    /// amplitude is taken real positive.
    pub fn new(
        name: String,
        clutter: ClutterModel,
        nu: f64,
        array: ArrayConfig,
        snr_db: Option<f64>,
        detector: DetectorConfig,
    ) -> Result<Self> {
        if !(-0.5..=0.5).contains(&nu) {
            return Err(Error::InvalidParameter(format!(
                "spatial frequency must lie in [-0.5, 0.5], got {nu}"
            )));
        }
        if snr_db.is_some() && !clutter.normalize_unit_power() {
            return Err(Error::InvalidParameter(
                "snr_db requires clutter normalized to unit power".into(),
            ));
        }
        Ok(Self { name, clutter, nu, array, snr_db, detector })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn clutter(&self) -> &ClutterModel {
        &self.clutter
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn array(&self) -> &ArrayConfig {
        &self.array
    }

    pub fn snr_db(&self) -> Option<f64> {
        self.snr_db
    }

    pub fn detector(&self) -> &DetectorConfig {
        &self.detector
    }

    /// Same scenario at a different target SNR (or none for H0).
    pub fn with_snr_db(&self, snr_db: Option<f64>) -> Result<Self> {
        Scenario::new(
            self.name.clone(),
            self.clutter.clone(),
            self.nu,
            self.array.clone(),
            snr_db,
            self.detector,
        )
    }

    /// Target amplitude implied by the SNR convention; zero under H0.
    pub fn alpha_bar(&self) -> Complex64 {
        match self.snr_db {
            Some(snr) => Complex64::new(10f64.powf(snr / 20.0), 0.0),
            None => Complex64::ZERO,
        }
    }

    /// Steering vector at the scenario frequency for `n` virtual channels.
    /// At the array's native size any waveform setup is honored; other sizes
    /// model growing the (identity-waveform) array and require the Fourier
    /// structure.
    pub fn steering_vector(&self, n: usize) -> Result<SteeringVector> {
        if n == self.array.n() && !self.array.has_identity_waveforms() {
            // Shaped waveforms at native size go through the full builder.
            let a_t = crate::geometry::ula_steering(self.nu, self.array.m_t(), self.array.m_r());
            let a_r = crate::geometry::ula_steering(self.nu, self.array.m_r(), 1);
            return crate::geometry::build_virtual_vector(&self.array, self.nu, &a_t, &a_r);
        }
        if !self.array.has_identity_waveforms() {
            return Err(Error::InvalidParameter(format!(
                "cannot sweep n = {n}: shaped waveforms fix the virtual size at {}",
                self.array.n()
            )));
        }
        SteeringVector::new(unit_signature(self.nu, n), self.nu)
    }

    /// Asymptotic operating point at `n` channels from the analytic
    /// autocovariance.
    pub fn predicted(&self, n: usize) -> Result<AsymptoticPrediction> {
        let v = self.steering_vector(n)?;
        let horizon = self
            .clutter
            .decay_horizon(ACOV_DECAY_EPS)
            .min(n.saturating_sub(1))
            .min(MAX_ACOV_HORIZON);
        let acov = self.clutter.autocovariance(horizon)?;
        let varsigma = noncentrality(self.alpha_bar(), &v, &acov)?;
        Ok(AsymptoticPrediction::new(self.detector.pfa_nominal(), varsigma))
    }
}

/// Aggregate of one Monte Carlo run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub n: usize,
    pub trials: usize,
    pub detections: usize,
    pub degenerates: usize,
    /// Detection (or false-alarm) rate `detections / trials`.
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// KS distance of the retained H0 statistics to the chi-squared law;
    /// absent for H1 runs.
    pub ks_to_chi2: Option<f64>,
    pub predicted: Option<AsymptoticPrediction>,
    pub seed: u64,
}

type TrialRecord = (bool, bool, Option<f64>);

fn validate_run(n: usize, trials: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("need n >= 2, got {n}")));
    }
    if trials < 1 {
        return Err(Error::InvalidParameter("need at least one trial".into()));
    }
    Ok(())
}

/// Retention stride keeping at most [`KS_RETENTION_CAP`] samples.
fn ks_stride(trials: usize) -> usize {
    trials.div_ceil(KS_RETENTION_CAP).max(1)
}

fn run_single_trial(
    scenario: &Scenario,
    v: &SteeringVector,
    n: usize,
    stride: usize,
    seed: u64,
    t: usize,
) -> Result<TrialRecord> {
    let mut rng = ChaCha8Rng::from_seed(counter_rng_seed(seed, t as u64));
    let mut x = scenario.clutter().generate(n, &mut rng);
    let alpha = scenario.alpha_bar();
    if alpha != Complex64::ZERO {
        for (xi, vi) in x.iter_mut().zip(v.values()) {
            *xi += alpha * vi;
        }
    }
    let outcome = wald_statistic(&x, v, scenario.detector())?;
    let retained = (t % stride == 0 && !outcome.degenerate).then_some(outcome.statistic);
    Ok((outcome.decide_h1, outcome.degenerate, retained))
}

fn tally(
    scenario: &Scenario,
    n: usize,
    trials: usize,
    seed: u64,
    records: Vec<TrialRecord>,
) -> Result<ExperimentResult> {
    let mut detections = 0usize;
    let mut degenerates = 0usize;
    let mut samples = Vec::new();
    for (decide_h1, degenerate, retained) in records {
        detections += decide_h1 as usize;
        degenerates += degenerate as usize;
        if let Some(statistic) = retained {
            samples.push(statistic);
        }
    }
    let p_hat = detections as f64 / trials as f64;
    let (ci_low, ci_high) = wilson_interval(detections, trials);
    let ks_to_chi2 = if scenario.snr_db().is_none() && !samples.is_empty() {
        Some(ks_distance(&samples, |t| 1.0 - chi2_2_sf(t)))
    } else {
        None
    };
    let predicted = Some(scenario.predicted(n)?);
    Ok(ExperimentResult {
        n,
        trials,
        detections,
        degenerates,
        p_hat,
        ci_low,
        ci_high,
        ks_to_chi2,
        predicted,
        seed,
    })
}

/// Runs `trials` independent detector trials at `n` virtual channels.
///
/// Uses the rayon thread pool when the `parallel` feature is enabled;
/// results are bit-identical to [`run_trials_serial`] either way.
pub fn run_trials(
    scenario: &Scenario,
    n: usize,
    trials: usize,
    seed: u64,
) -> Result<ExperimentResult> {
    #[cfg(feature = "parallel")]
    {
        validate_run(n, trials)?;
        let v = scenario.steering_vector(n)?;
        let stride = ks_stride(trials);
        let records = (0..trials)
            .into_par_iter()
            .map(|t| run_single_trial(scenario, &v, n, stride, seed, t))
            .collect::<Result<Vec<TrialRecord>>>()?;
        tally(scenario, n, trials, seed, records)
    }
    #[cfg(not(feature = "parallel"))]
    {
        run_trials_serial(scenario, n, trials, seed)
    }
}

/// Single-threaded twin of [`run_trials`]; always available.
pub fn run_trials_serial(
    scenario: &Scenario,
    n: usize,
    trials: usize,
    seed: u64,
) -> Result<ExperimentResult> {
    validate_run(n, trials)?;
    let v = scenario.steering_vector(n)?;
    let stride = ks_stride(trials);
    let records = (0..trials)
        .map(|t| run_single_trial(scenario, &v, n, stride, seed, t))
        .collect::<Result<Vec<TrialRecord>>>()?;
    tally(scenario, n, trials, seed, records)
}

/// One run per grid point with independently derived run seeds, ordered by n.
/// The grid must be nonempty and strictly ascending.
pub fn sweep(
    scenario: &Scenario,
    n_grid: &[usize],
    trials: usize,
    seed: u64,
) -> Result<Vec<ExperimentResult>> {
    if n_grid.is_empty() {
        return Err(Error::InvalidParameter("n_grid must be nonempty".into()));
    }
    if !n_grid.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::InvalidParameter("n_grid must be strictly ascending".into()));
    }
    n_grid
        .iter()
        .enumerate()
        .map(|(i, &n)| run_trials(scenario, n, trials, derive_seed(seed, i as u64)))
        .collect()
}

/// Sup-norm distance between the empirical CDF of `samples` and a reference
/// CDF.
///
/// # Panics
/// If `samples` is empty.
pub fn ks_distance<F: Fn(f64) -> f64>(samples: &[f64], reference_cdf: F) -> f64 {
    assert!(!samples.is_empty(), "ks_distance needs at least one sample");
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite samples"));
    let m = sorted.len() as f64;
    let mut distance = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let cdf = reference_cdf(x);
        distance = distance.max(cdf - i as f64 / m).max((i + 1) as f64 / m - cdf);
    }
    distance
}

/// 95% Wilson score interval for a binomial proportion.
///
/// # Panics
/// If `trials` is zero or `successes > trials`.
pub fn wilson_interval(successes: usize, trials: usize) -> (f64, f64) {
    wilson_interval_z(successes, trials, WILSON_Z_95)
}

/// Wilson score interval at an arbitrary normal quantile `z`.
pub fn wilson_interval_z(successes: usize, trials: usize, z: f64) -> (f64, f64) {
    assert!(trials >= 1, "wilson interval needs at least one trial");
    assert!(successes <= trials, "successes cannot exceed trials");
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    // The exact endpoints at empty or full success counts are 0 and 1; pin
    // them so rounding cannot push the interval off the sample proportion.
    let low = if successes == 0 { 0.0 } else { (center - half).max(0.0) };
    let high = if successes == trials { 1.0 } else { (center + half).min(1.0) };
    (low, high)
}

/// Column order of the result CSV; inapplicable fields stay empty.
pub const CSV_HEADER: &str =
    "scenario,n,nu,snr_db,trials,detections,degenerates,p_hat,ci_low,ci_high,ks_chi2,pd_theory,seed";

/// One CSV row: a run result in the context of its scenario cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub scenario: String,
    pub n: usize,
    pub nu: f64,
    pub snr_db: Option<f64>,
    pub trials: usize,
    pub detections: usize,
    pub degenerates: usize,
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub ks_chi2: Option<f64>,
    pub pd_theory: Option<f64>,
    pub seed: u64,
}

impl CsvRow {
    /// Flattens a result; the predicted detection probability is emitted only
    /// when `emit_theory` is set.
    pub fn new(scenario: &Scenario, result: &ExperimentResult, emit_theory: bool) -> Self {
        CsvRow {
            scenario: scenario.name().to_owned(),
            n: result.n,
            nu: scenario.nu(),
            snr_db: scenario.snr_db(),
            trials: result.trials,
            detections: result.detections,
            degenerates: result.degenerates,
            p_hat: result.p_hat,
            ci_low: result.ci_low,
            ci_high: result.ci_high,
            ks_chi2: result.ks_to_chi2,
            pd_theory: if emit_theory { result.predicted.map(|p| p.pd) } else { None },
            seed: result.seed,
        }
    }
}

fn field_or_empty(value: Option<f64>) -> String {
    value.map(|v| v.to_string()).unwrap_or_default()
}

/// Writes rows under [`CSV_HEADER`]. Output is a pure function of the rows,
/// so identical runs produce byte-identical files.
pub fn write_csv<W: std::io::Write>(writer: W, rows: &[CsvRow]) -> Result<()> {
    let mut out = csv::Writer::from_writer(writer);
    out.write_record(CSV_HEADER.split(','))?;
    for row in rows {
        out.write_record(&[
            row.scenario.clone(),
            row.n.to_string(),
            row.nu.to_string(),
            field_or_empty(row.snr_db),
            row.trials.to_string(),
            row.detections.to_string(),
            row.degenerates.to_string(),
            row.p_hat.to_string(),
            row.ci_low.to_string(),
            row.ci_high.to_string(),
            field_or_empty(row.ks_chi2),
            field_or_empty(row.pd_theory),
            row.seed.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detector::TruncationLag;
    use crate::disturbance::InnovationSpec;
    use std::collections::HashSet;

    fn white_clutter() -> ClutterModel {
        ClutterModel::Ar(
            ArSpec::new(vec![], InnovationSpec::ComplexGaussian { sigma_w2: 1.0 }, true).unwrap(),
        )
    }

    fn white_scenario(snr_db: Option<f64>) -> Scenario {
        Scenario::new(
            "white".into(),
            white_clutter(),
            0.1,
            ArrayConfig::new(2, 8).unwrap(),
            snr_db,
            DetectorConfig::new(0.01)
                .unwrap()
                .with_truncation_lag(TruncationLag::Fixed(0)),
        )
        .unwrap()
    }

    #[test]
    fn wilson_hand_values() {
        let (low, high) = wilson_interval(50, 100);
        assert!((low - 0.4038).abs() < 1e-3);
        assert!((high - 0.5962).abs() < 1e-3);

        let (low, high) = wilson_interval(0, 1);
        assert_eq!(low, 0.0);
        assert!(high < 1.0);

        let (low, high) = wilson_interval(7, 7);
        assert!(low > 0.0);
        assert_eq!(high, 1.0);
    }

    #[test]
    fn wilson_interval_brackets_p_hat() {
        for (s, t) in [(0, 10), (3, 10), (10, 10), (17, 1000), (999, 1000)] {
            let (low, high) = wilson_interval(s, t);
            let p = s as f64 / t as f64;
            assert!(low <= p && p <= high, "({s}, {t})");
        }
    }

    #[test]
    fn ks_distance_of_constant_samples_is_large() {
        let samples = vec![0.3; 10];
        assert!(ks_distance(&samples, |x| x.clamp(0.0, 1.0)) >= 0.5);
    }

    #[test]
    fn ks_distance_of_exact_quantiles_is_half_over_m() {
        let m = 1000usize;
        let samples: Vec<f64> = (0..m).map(|i| (i as f64 + 0.5) / m as f64).collect();
        let d = ks_distance(&samples, |x| x.clamp(0.0, 1.0));
        assert!((d - 0.5 / m as f64).abs() < 1e-15);
    }

    #[test]
    fn ks_distance_of_uniform_draws_is_small() {
        let mut rng = ChaCha8Rng::seed_from_u64(30);
        let samples: Vec<f64> = (0..10_000).map(|_| rng.random::<f64>()).collect();
        let d = ks_distance(&samples, |x| x.clamp(0.0, 1.0));
        assert!(d < 1.63 / (samples.len() as f64).sqrt(), "KS distance {d}");
    }

    #[test]
    fn trial_keys_are_distinct() {
        let mut seen = HashSet::new();
        for t in 0..10_000u64 {
            assert!(seen.insert(counter_rng_seed(42, t)), "key collision at {t}");
        }
        assert_ne!(counter_rng_seed(1, 0), counter_rng_seed(2, 0));
    }

    #[test]
    fn derived_seeds_are_distinct() {
        let mut seen = HashSet::new();
        for i in 0..1000 {
            assert!(seen.insert(derive_seed(7, i)));
        }
        assert_ne!(derive_seed(1, 0), derive_seed(2, 0));
    }

    #[test]
    fn ks_stride_respects_cap() {
        assert_eq!(ks_stride(10), 1);
        assert_eq!(ks_stride(KS_RETENTION_CAP), 1);
        assert_eq!(ks_stride(KS_RETENTION_CAP + 1), 2);
        let trials = 250_000;
        let stride = ks_stride(trials);
        assert!(trials.div_ceil(stride) <= KS_RETENTION_CAP);
    }

    #[test]
    fn repeated_runs_are_identical() {
        let scenario = white_scenario(None);
        let a = run_trials(&scenario, 16, 137, 99).unwrap();
        let b = run_trials(&scenario, 16, 137, 99).unwrap();
        assert_eq!(a, b);

        let single = run_trials(&scenario, 16, 1, 5).unwrap();
        assert_eq!(single, run_trials(&scenario, 16, 1, 5).unwrap());
        assert_eq!(single.trials, 1);
    }

    #[cfg(feature = "parallel")]
    #[test]
    fn parallel_and_serial_runs_agree_exactly() {
        let scenario = white_scenario(Some(-20.0));
        let parallel = run_trials(&scenario, 64, 500, 7).unwrap();
        let serial = run_trials_serial(&scenario, 64, 500, 7).unwrap();
        assert_eq!(parallel, serial);
    }

    #[test]
    fn different_seeds_give_different_counts() {
        let scenario = white_scenario(None);
        let a = run_trials(&scenario, 32, 2000, 1).unwrap();
        let b = run_trials(&scenario, 32, 2000, 2).unwrap();
        assert_ne!(
            (a.detections, a.ks_to_chi2),
            (b.detections, b.ks_to_chi2),
            "independent seeds should not reproduce each other"
        );
    }

    #[test]
    fn h0_run_reports_ks_and_null_prediction() {
        let scenario = white_scenario(None);
        let result = run_trials(&scenario, 64, 400, 11).unwrap();
        assert!(result.ks_to_chi2.is_some());
        assert!(result.detections <= result.trials);
        assert!(result.ci_low <= result.p_hat && result.p_hat <= result.ci_high);
        let predicted = result.predicted.unwrap();
        assert_eq!(predicted.varsigma, 0.0);
        assert!((predicted.pd - 0.01).abs() < 1e-12);
    }

    /// White unit-power clutter makes the noncentrality exactly
    /// 2 |alpha|^2 N, so the estimated detection rate must sit on the
    /// predicted operating point.
    #[test]
    fn h1_white_run_matches_closed_form_detection_probability() {
        let snr_db = -23.5;
        let scenario = white_scenario(Some(snr_db));
        let n = 1024;
        let trials = 10_000;
        let result = run_trials(&scenario, n, trials, 17).unwrap();

        let predicted = result.predicted.unwrap();
        let alpha_sqr = 10f64.powf(snr_db / 10.0);
        let closed_form = 2.0 * alpha_sqr * n as f64;
        assert!((predicted.varsigma - closed_form).abs() < 1e-10 * closed_form);
        assert!(result.ks_to_chi2.is_none());

        let se = (predicted.pd * (1.0 - predicted.pd) / trials as f64).sqrt();
        assert!(
            (result.p_hat - predicted.pd).abs() <= 3.0 * se,
            "p_hat {} vs predicted {} (3se = {})",
            result.p_hat,
            predicted.pd,
            3.0 * se
        );
    }

    #[test]
    fn sweep_orders_results_and_derives_distinct_seeds() {
        let scenario = white_scenario(None);
        let results = sweep(&scenario, &[16, 32, 64], 50, 3).unwrap();
        assert_eq!(results.len(), 3);
        assert_eq!(
            results.iter().map(|r| r.n).collect::<Vec<_>>(),
            vec![16, 32, 64]
        );
        let seeds: HashSet<u64> = results.iter().map(|r| r.seed).collect();
        assert_eq!(seeds.len(), 3);

        let single = sweep(&scenario, &[64], 10, 3).unwrap();
        assert_eq!(single.len(), 1);

        assert!(sweep(&scenario, &[], 10, 3).is_err());
        assert!(sweep(&scenario, &[32, 16], 10, 3).is_err());
    }

    #[test]
    fn scenario_validation_and_serde() {
        let scenario = white_scenario(Some(-10.0));
        let json = serde_json::to_string(&scenario).unwrap();
        let back: Scenario = serde_json::from_str(&json).unwrap();
        assert_eq!(scenario, back);

        let unnormalized = ClutterModel::Ar(
            ArSpec::new(vec![], InnovationSpec::ComplexGaussian { sigma_w2: 2.0 }, false).unwrap(),
        );
        let err = Scenario::new(
            "bad".into(),
            unnormalized,
            0.0,
            ArrayConfig::new(2, 2).unwrap(),
            Some(0.0),
            DetectorConfig::new(0.01).unwrap(),
        );
        assert!(err.is_err());

        let bad_nu = Scenario::new(
            "bad".into(),
            white_clutter(),
            0.7,
            ArrayConfig::new(2, 2).unwrap(),
            None,
            DetectorConfig::new(0.01).unwrap(),
        );
        assert!(bad_nu.is_err());
    }

    #[test]
    fn alpha_bar_follows_snr_convention() {
        assert_eq!(white_scenario(None).alpha_bar(), Complex64::ZERO);
        let zero_db = white_scenario(Some(0.0)).alpha_bar();
        assert!((zero_db - Complex64::ONE).norm() < 1e-15);
        let minus_twenty = white_scenario(Some(-20.0)).alpha_bar();
        assert!((minus_twenty - Complex64::new(0.1, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn csv_output_has_stable_schema() {
        let scenario = white_scenario(None);
        let result = run_trials(&scenario, 16, 20, 1).unwrap();
        let rows = vec![CsvRow::new(&scenario, &result, false)];
        let mut buffer = Vec::new();
        write_csv(&mut buffer, &rows).unwrap();
        let text = String::from_utf8(buffer).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), CSV_HEADER);
        let fields: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(fields.len(), 13);
        assert_eq!(fields[0], "white");
        assert_eq!(fields[1], "16");
        assert_eq!(fields[3], "", "H0 row has empty snr_db");
        assert_eq!(fields[11], "", "theory column empty when not requested");
        assert!(!fields[10].is_empty(), "H0 row carries the KS diagnostic");

        let with_theory = vec![CsvRow::new(&scenario, &result, true)];
        let mut buffer = Vec::new();
        write_csv(&mut buffer, &with_theory).unwrap();
        let text = String::from_utf8(buffer).unwrap();
        let fields: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
        let pd: f64 = fields[11].parse().unwrap();
        assert!((pd - 0.01).abs() < 1e-12, "H0 theory column equals pfa");
    }
}
