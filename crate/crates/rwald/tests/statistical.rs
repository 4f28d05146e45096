//! End-to-end statistical behavior of the Monte Carlo pipeline at desk scale.
//!
//! Every run uses a frozen seed, so each assertion is deterministic. The
//! windows combine the three-sigma binomial spread of the frozen run with
//! the residual finite-sample bias of the asymptotic law.

use std::hint::black_box;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rwald::detector::{hac_quadratic_form, DetectorConfig, TruncationLag};
use rwald::disturbance::{ArSpec, InnovationSpec};
use rwald::geometry::{ula_steering, ArrayConfig, SteeringVector};
use rwald::montecarlo::{run_trials, sweep, ClutterModel, Scenario};
use rwald::presets;

const PFA: f64 = 1e-2;
const TRIALS: usize = 100_000;

fn white_scenario() -> Scenario {
    let innovation = InnovationSpec::ComplexGaussian { sigma_w2: 1.0 };
    let clutter = ClutterModel::Ar(ArSpec::new(vec![], innovation, false).unwrap());
    // White data needs no banding, and the zero-lag form makes the null law
    // sharpest, so the run isolates pure sampling error.
    let detector = DetectorConfig::new(PFA)
        .unwrap()
        .with_truncation_lag(TruncationLag::Fixed(0));
    Scenario::new(
        "white".into(),
        clutter,
        0.15,
        ArrayConfig::new(8, 8).unwrap(),
        None,
        detector,
    )
    .unwrap()
}

#[test]
fn white_gaussian_null_matches_chi_squared_law() {
    let scenario = white_scenario();
    let result = run_trials(&scenario, 4096, TRIALS, 7101).unwrap();
    assert_eq!(result.degenerates, 0);

    let ks = result.ks_to_chi2.expect("null runs retain statistics");
    assert!(ks < 0.01, "KS distance to the chi-squared law is {ks}");

    // The exact finite-n false alarm rate (1 + lambda/2n)^{-(n-1)} sits half
    // a percent above the chi-squared tail at n = 4096, well inside the
    // binomial window.
    let sigma = (PFA * (1.0 - PFA) / TRIALS as f64).sqrt();
    assert!(
        (result.p_hat - PFA).abs() <= 3.0 * sigma,
        "false alarm rate {} vs nominal {PFA}",
        result.p_hat
    );
}

#[test]
fn false_alarm_bias_shrinks_as_n_grows() {
    let detector = || DetectorConfig::new(PFA).unwrap();
    let cases = [
        (presets::scenario1(0.2, None, detector()).unwrap(), 9001),
        (presets::scenario2(0.2, None, detector()).unwrap(), 9002),
    ];
    for (scenario, seed) in cases {
        let results = sweep(&scenario, &[100, 1000, 10_000], TRIALS, seed).unwrap();
        let errors: Vec<f64> = results.iter().map(|r| (r.p_hat - PFA).abs()).collect();
        assert!(
            errors[0] > errors[1] && errors[1] > errors[2],
            "{}: false alarm errors {errors:?} do not shrink",
            scenario.name()
        );
        let relative = (results[2].p_hat - PFA) / PFA;
        assert!(
            relative.abs() < 0.30,
            "{}: relative false alarm error {relative} at n = 10000",
            scenario.name()
        );
    }
}

#[test]
fn hac_form_cost_grows_linearly_with_n() {
    let lag = 8;
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut time_at = |n: usize| {
        let v = SteeringVector::new(ula_steering(0.12, n, 1), 0.12).unwrap();
        let c: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(rng.random(), rng.random()))
            .collect();
        let mut runs: Vec<f64> = (0..5)
            .map(|_| {
                let start = Instant::now();
                black_box(hac_quadratic_form(black_box(&v), black_box(&c), lag));
                start.elapsed().as_secs_f64()
            })
            .collect();
        runs.sort_by(f64::total_cmp);
        runs[2]
    };
    let base = time_at(1 << 17);
    let doubled = time_at(1 << 18);
    let factor = doubled / base;
    assert!(
        factor < 3.0,
        "doubling n at fixed lag scaled the cost by {factor}"
    );
}
