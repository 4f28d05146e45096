//! Built-in clutter scenarios.
//!
//! Both presets drive a stable autoregression with heavy tailed complex-t
//! innovations (shape 2, unit innovation power) and normalize the output to
//! unit clutter power. Scenario 1 is an AR(3) whose spectrum concentrates
//! near nu = 0; scenario 2 is an AR(6) with several spectral peaks spread
//! over the whole frequency range. A compound-Gaussian variant reuses the
//! scenario 1 correlation with an inverse-gamma texture.

use num_complex::Complex64;

use crate::detector::DetectorConfig;
use crate::disturbance::{poles_to_coefficients, ArSpec, CgSpec, InnovationSpec, TextureSpec};
use crate::error::{Error, Result};
use crate::geometry::ArrayConfig;
use crate::montecarlo::{ClutterModel, Scenario};

const TAU: f64 = std::f64::consts::TAU;

fn heavy_tail_innovation() -> InnovationSpec {
    InnovationSpec::ComplexT { sigma_w2: 1.0, shape_lambda: 2.0 }
}

fn default_array() -> ArrayConfig {
    ArrayConfig::new(8, 8).expect("static dimensions are valid")
}

/// Characteristic roots of the scenario 1 AR(3) clutter.
pub fn scenario1_poles() -> Vec<Complex64> {
    vec![
        Complex64::from_polar(0.5, 0.0),
        Complex64::from_polar(0.3, -TAU * 0.10),
        Complex64::from_polar(0.4, TAU * 0.01),
    ]
}

/// Characteristic roots of the scenario 2 AR(6) clutter.
pub fn scenario2_poles() -> Vec<Complex64> {
    vec![
        Complex64::from_polar(0.5, -TAU * 0.40),
        Complex64::from_polar(0.6, -TAU * 0.20),
        Complex64::from_polar(0.7, 0.0),
        Complex64::from_polar(0.4, TAU * 0.10),
        Complex64::from_polar(0.5, TAU * 0.30),
        Complex64::from_polar(0.6, TAU * 0.35),
    ]
}

/// Scenario 1 clutter model: unit-power AR(3) with complex-t innovations.
pub fn scenario1_clutter() -> Result<ClutterModel> {
    Ok(ClutterModel::Ar(ArSpec::from_poles(
        &scenario1_poles(),
        heavy_tail_innovation(),
        true,
    )?))
}

/// Scenario 2 clutter model: unit-power AR(6) with complex-t innovations.
pub fn scenario2_clutter() -> Result<ClutterModel> {
    Ok(ClutterModel::Ar(ArSpec::from_poles(
        &scenario2_poles(),
        heavy_tail_innovation(),
        true,
    )?))
}

/// Compound-Gaussian variant: scenario 1 correlation as the Gaussian speckle,
/// scaled per vector by a unit-mean inverse-gamma texture of shape 3.
pub fn scenario1_cg_clutter() -> Result<ClutterModel> {
    Ok(ClutterModel::CompoundGaussian(CgSpec::new(
        poles_to_coefficients(&scenario1_poles()),
        TextureSpec::InverseGamma { shape: 3.0 },
        true,
    )?))
}

/// Scenario 1 at the given look frequency, target SNR, and detector settings.
pub fn scenario1(nu: f64, snr_db: Option<f64>, detector: DetectorConfig) -> Result<Scenario> {
    Scenario::new("scenario1".into(), scenario1_clutter()?, nu, default_array(), snr_db, detector)
}

/// Scenario 2 at the given look frequency, target SNR, and detector settings.
pub fn scenario2(nu: f64, snr_db: Option<f64>, detector: DetectorConfig) -> Result<Scenario> {
    Scenario::new("scenario2".into(), scenario2_clutter()?, nu, default_array(), snr_db, detector)
}

/// Compound-Gaussian scenario at the given look frequency, target SNR, and
/// detector settings.
pub fn scenario1_cg(nu: f64, snr_db: Option<f64>, detector: DetectorConfig) -> Result<Scenario> {
    Scenario::new(
        "scenario1-cg".into(),
        scenario1_cg_clutter()?,
        nu,
        default_array(),
        snr_db,
        detector,
    )
}

/// Names accepted by [`by_name`].
pub const PRESET_NAMES: [&str; 3] = ["scenario1", "scenario2", "scenario1-cg"];

/// Builds a preset scenario by name.
pub fn by_name(
    name: &str,
    nu: f64,
    snr_db: Option<f64>,
    detector: DetectorConfig,
) -> Result<Scenario> {
    match name {
        "scenario1" => scenario1(nu, snr_db, detector),
        "scenario2" => scenario2(nu, snr_db, detector),
        "scenario1-cg" => scenario1_cg(nu, snr_db, detector),
        other => Err(Error::UnknownPreset(other.to_owned())),
    }
}
