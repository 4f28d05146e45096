//! Fast invariant suite behind `rwald check`: closed-form identities and
//! determinism smoke checks that finish in well under a second.

use num_complex::Complex64;

use rwald::detector::{hac_quadratic_form, threshold_for_pfa, DetectorConfig};
use rwald::disturbance::{ar_autocovariance, ar_psd, ArSpec, InnovationSpec};
use rwald::geometry::{ula_steering, SteeringVector};
use rwald::montecarlo::{run_trials, run_trials_serial};
use rwald::presets;
use rwald::theory::{chi2_2_sf, marcum_q1};

/// Runs every invariant, printing one `ok` line per check. Returns an error
/// message describing the first violated invariant.
pub fn run_checks() -> Result<(), String> {
    let checks: [(&str, fn() -> Result<(), String>); 7] = [
        ("threshold round trip", threshold_round_trip),
        ("chi-squared tail values", chi2_tail_values),
        ("marcum endpoints", marcum_endpoints),
        ("banded quadratic form", banded_form),
        ("ar(1) closed form", ar1_closed_form),
        ("psd integral", psd_integral),
        ("deterministic trials", deterministic_trials),
    ];
    for (name, check) in checks {
        check().map_err(|e| format!("{name}: {e}"))?;
        println!("ok {name}");
    }
    Ok(())
}

fn ensure(condition: bool, message: &str) -> Result<(), String> {
    if condition {
        Ok(())
    } else {
        Err(message.to_owned())
    }
}

fn threshold_round_trip() -> Result<(), String> {
    for pfa in [1e-1, 1e-2, 1e-4] {
        let back = chi2_2_sf(threshold_for_pfa(pfa));
        ensure(
            (back - pfa).abs() <= 1e-10,
            &format!("round trip at {pfa} gave {back}"),
        )?;
    }
    Ok(())
}

fn chi2_tail_values() -> Result<(), String> {
    ensure(chi2_2_sf(0.0) == 1.0, "survival at zero must be one")?;
    let lambda = threshold_for_pfa(1e-4);
    ensure(
        (lambda - 18.4207).abs() <= 1e-4,
        &format!("threshold at 1e-4 is {lambda}"),
    )
}

fn marcum_endpoints() -> Result<(), String> {
    ensure(marcum_q1(3.0, 0.0) == 1.0, "Q1(a, 0) must be one")?;
    let q = marcum_q1(0.0, 2.0);
    let want = (-2.0f64).exp();
    ensure(
        (q - want).abs() <= 1e-12,
        &format!("Q1(0, 2) = {q}, expected {want}"),
    )?;
    ensure(
        marcum_q1(2.0, 1.0) > marcum_q1(1.0, 1.0),
        "Q1 must grow with the first argument",
    )
}

fn banded_form() -> Result<(), String> {
    let n = 6;
    let values = ula_steering(0.17, n, 1);
    let v = SteeringVector::new(values.clone(), 0.17).unwrap();
    let c: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(1.0 + 0.3 * k as f64, 0.9 * k as f64))
        .collect();
    for l in [0usize, 2, 5] {
        let fast = hac_quadratic_form(&v, &c, l);
        let mut dense = Complex64::ZERO;
        for i in 0..n {
            for j in 0..n {
                if i.abs_diff(j) <= l {
                    dense += values[i].conj() * c[i] * c[j].conj() * values[j];
                }
            }
        }
        ensure(
            (fast - dense.re).abs() <= 1e-12 * dense.re.abs(),
            &format!("lag {l}: banded {fast} vs dense {}", dense.re),
        )?;
    }
    Ok(())
}

fn ar1_closed_form() -> Result<(), String> {
    let rho = Complex64::from_polar(0.6, 0.3);
    let sigma2 = 1.7;
    let spec = ArSpec::new(
        vec![rho],
        InnovationSpec::ComplexGaussian { sigma_w2: sigma2 },
        false,
    )
    .unwrap();
    let acov = ar_autocovariance(&spec, 10).unwrap();
    for m in 0..=10u32 {
        let want = rho.powu(m) * sigma2 / (1.0 - rho.norm_sqr());
        let got = acov.at(m as i64);
        ensure(
            (got - want).norm() <= 1e-12 * want.norm(),
            &format!("lag {m}: {got} vs {want}"),
        )?;
    }
    Ok(())
}

fn psd_integral() -> Result<(), String> {
    let spec = match presets::scenario1_clutter().unwrap() {
        rwald::montecarlo::ClutterModel::Ar(spec) => spec,
        _ => unreachable!("scenario1 clutter is autoregressive"),
    };
    let points = 4096;
    let integral = (0..points)
        .map(|k| ar_psd(&spec, -0.5 + (k as f64 + 0.5) / points as f64))
        .sum::<f64>()
        / points as f64;
    let r0 = ar_autocovariance(&spec, 0).unwrap().r0();
    ensure(
        ((integral - r0) / r0).abs() <= 1e-6,
        &format!("integral {integral} vs r[0] {r0}"),
    )
}

fn deterministic_trials() -> Result<(), String> {
    let scenario = presets::scenario1(0.2, None, DetectorConfig::new(1e-2).unwrap()).unwrap();
    let a = run_trials(&scenario, 64, 50, 7).map_err(|e| e.to_string())?;
    let b = run_trials(&scenario, 64, 50, 7).map_err(|e| e.to_string())?;
    ensure(a == b, "repeated runs differ")?;
    let serial = run_trials_serial(&scenario, 64, 50, 7).map_err(|e| e.to_string())?;
    ensure(a == serial, "parallel and serial runs differ")
}
