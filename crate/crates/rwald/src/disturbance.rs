//! Clutter models and their exact second-order analytics.
//!
//! Two generators are provided: a stable complex AR(p) process driven by
//! circular Gaussian or heavy tailed complex-t innovations, and a
//! compound-Gaussian vector (Gaussian AR speckle scaled by a random texture).
//! The analytics side computes stability verdicts, the power spectral
//! density, and the stationary autocovariance from the model coefficients,
//! so simulations can be validated against closed forms rather than against
//! themselves.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const TAU: f64 = std::f64::consts::TAU;

/// Roots this close to the unit circle are rejected as unstable, so that
/// numerically marginal specifications fail deterministically.
pub const STABILITY_MARGIN: f64 = 1e-9;

/// Innovation (driving noise) distribution of an autoregression. All variants
/// are circular with zero mean, zero pseudo-covariance, and `E|w|^2 = sigma_w2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InnovationSpec {
    /// Circular complex Gaussian.
    ComplexGaussian { sigma_w2: f64 },
    /// Complex t: a Gaussian scaled by the square root of an inverse-gamma
    /// mixing variance with shape `shape_lambda` and scale
    /// `sigma_w2 * (shape_lambda - 1)`, so the mixing variance has unit mean
    /// times `sigma_w2`. Requires `shape_lambda > 1` for a finite second
    /// moment; the fourth moment is infinite for `shape_lambda <= 2`.
    ComplexT { sigma_w2: f64, shape_lambda: f64 },
}

impl InnovationSpec {
    /// Mean squared modulus `E|w|^2`.
    pub fn sigma_w2(&self) -> f64 {
        match *self {
            InnovationSpec::ComplexGaussian { sigma_w2 } => sigma_w2,
            InnovationSpec::ComplexT { sigma_w2, .. } => sigma_w2,
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            InnovationSpec::ComplexGaussian { sigma_w2 } => {
                if !(sigma_w2 > 0.0) {
                    return Err(Error::InvalidParameter("sigma_w2 must be positive".into()));
                }
            }
            InnovationSpec::ComplexT { sigma_w2, shape_lambda } => {
                if !(sigma_w2 > 0.0) {
                    return Err(Error::InvalidParameter("sigma_w2 must be positive".into()));
                }
                if !(shape_lambda > 1.0) {
                    return Err(Error::InvalidParameter(
                        "shape_lambda must exceed 1 so the innovation power is finite".into(),
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Prepared sampler for one innovation stream. Holds the distribution objects
/// so per-sample draws avoid re-validating parameters.
struct InnovationSampler {
    kind: SamplerKind,
}

enum SamplerKind {
    Gaussian { component_std: f64 },
    ComplexT { mixing: Gamma<f64>, scale: f64 },
}

impl InnovationSampler {
    fn new(spec: &InnovationSpec) -> Self {
        let kind = match *spec {
            InnovationSpec::ComplexGaussian { sigma_w2 } => SamplerKind::Gaussian {
                component_std: (sigma_w2 / 2.0).sqrt(),
            },
            InnovationSpec::ComplexT { sigma_w2, shape_lambda } => SamplerKind::ComplexT {
                mixing: Gamma::new(shape_lambda, 1.0).expect("validated shape"),
                scale: sigma_w2 * (shape_lambda - 1.0),
            },
        };
        Self { kind }
    }

    /// One draw. Order of consumption from `rng` is fixed (mixing variance
    /// first, then the two Gaussian components) and is part of the crate's
    /// reproducibility contract.
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Complex64 {
        match &self.kind {
            SamplerKind::Gaussian { component_std } => {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Complex64::new(re * component_std, im * component_std)
            }
            SamplerKind::ComplexT { mixing, scale } => {
                let v = scale / mixing.sample(rng);
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Complex64::new(re, im) * (v / 2.0).sqrt()
            }
        }
    }
}

/// Draws `n` i.i.d. innovations.
pub fn sample_innovations<R: Rng + ?Sized>(
    spec: &InnovationSpec,
    n: usize,
    rng: &mut R,
) -> Vec<Complex64> {
    let sampler = InnovationSampler::new(spec);
    (0..n).map(|_| sampler.sample(rng)).collect()
}

/// Stability verdict together with the characteristic root magnitudes,
/// sorted in descending order.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    pub stable: bool,
    pub root_magnitudes: Vec<f64>,
}

/// Checks whether all roots of `z^p - rho_1 z^{p-1} - ... - rho_p` lie inside
/// the unit disk with margin [`STABILITY_MARGIN`]. An empty coefficient vector
/// (white process) is vacuously stable.
pub fn check_stability(rho: &[Complex64]) -> StabilityReport {
    let mut root_magnitudes: Vec<f64> = characteristic_roots(rho).iter().map(|z| z.norm()).collect();
    root_magnitudes.sort_by(|a, b| b.partial_cmp(a).expect("finite magnitudes"));
    let stable = root_magnitudes.first().is_none_or(|&m| m < 1.0 - STABILITY_MARGIN);
    StabilityReport { stable, root_magnitudes }
}

/// Roots of the monic characteristic polynomial via Durand-Kerner iteration.
/// Degrees of interest here are small (p <= 16), where the method converges
/// quickly from the standard spiral start.
fn characteristic_roots(rho: &[Complex64]) -> Vec<Complex64> {
    let p = rho.len();
    if p == 0 {
        return Vec::new();
    }
    // Descending-power coefficients of z^p - rho_1 z^{p-1} - ... - rho_p.
    let mut coeffs = Vec::with_capacity(p + 1);
    coeffs.push(Complex64::ONE);
    coeffs.extend(rho.iter().map(|r| -r));

    let eval = |z: Complex64| coeffs.iter().fold(Complex64::ZERO, |acc, &c| acc * z + c);

    let seed = Complex64::new(0.4, 0.9);
    let mut roots: Vec<Complex64> = (0..p).map(|i| seed.powu(i as u32 + 1)).collect();
    for _ in 0..500 {
        let mut largest_step = 0.0f64;
        for i in 0..p {
            let mut denom = Complex64::ONE;
            for j in 0..p {
                if j != i {
                    denom *= roots[i] - roots[j];
                }
            }
            if denom.norm_sqr() == 0.0 {
                // Collided iterates; nudge apart and continue.
                roots[i] += Complex64::new(1e-8, 1e-8);
                continue;
            }
            let step = eval(roots[i]) / denom;
            roots[i] -= step;
            largest_step = largest_step.max(step.norm());
        }
        if largest_step < 1e-14 {
            break;
        }
    }
    roots
}

/// Expands a set of desired characteristic roots (poles) into the coefficient
/// vector `rho` of the autoregression that has exactly those roots.
pub fn poles_to_coefficients(poles: &[Complex64]) -> Vec<Complex64> {
    let mut poly = vec![Complex64::ONE];
    for &z in poles {
        let mut next = vec![Complex64::ZERO; poly.len() + 1];
        for (k, &c) in poly.iter().enumerate() {
            next[k] += c;
            next[k + 1] -= c * z;
        }
        poly = next;
    }
    poly.iter().skip(1).map(|&c| -c).collect()
}

/// A stable complex autoregression `c_k = sum_i rho_i c_{k-i} + w_k`.
///
/// Construction verifies stability and solves for the stationary power, so
/// every instance carries its exact analytics. With `normalize_unit_power`
/// the generated samples (and every analytic quantity reported alongside
/// them) are scaled so the stationary power `r[0]` is exactly 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ArSpecRepr", into = "ArSpecRepr")]
pub struct ArSpec {
    rho: Vec<Complex64>,
    innovation: InnovationSpec,
    normalize_unit_power: bool,
    // Derived at construction.
    r0_raw: f64,
    max_root_modulus: f64,
}

impl ArSpec {
    pub fn new(
        rho: Vec<Complex64>,
        innovation: InnovationSpec,
        normalize_unit_power: bool,
    ) -> Result<Self> {
        innovation.validate()?;
        let report = check_stability(&rho);
        if !report.stable {
            return Err(Error::UnstableAr {
                max_root_modulus: report.root_magnitudes.first().copied().unwrap_or(f64::NAN),
            });
        }
        let max_root_modulus = report.root_magnitudes.first().copied().unwrap_or(0.0);
        let head = yule_walker_head(&rho, innovation.sigma_w2())?;
        let r0_raw = head[0].re;
        Ok(Self { rho, innovation, normalize_unit_power, r0_raw, max_root_modulus })
    }

    /// Builds the autoregression whose characteristic roots are exactly
    /// `poles`. Every pole must lie strictly inside the unit disk.
    pub fn from_poles(
        poles: &[Complex64],
        innovation: InnovationSpec,
        normalize_unit_power: bool,
    ) -> Result<Self> {
        Self::new(poles_to_coefficients(poles), innovation, normalize_unit_power)
    }

    pub fn order(&self) -> usize {
        self.rho.len()
    }

    pub fn rho(&self) -> &[Complex64] {
        &self.rho
    }

    pub fn innovation(&self) -> &InnovationSpec {
        &self.innovation
    }

    pub fn normalize_unit_power(&self) -> bool {
        self.normalize_unit_power
    }

    /// Largest characteristic root modulus.
    pub fn max_root_modulus(&self) -> f64 {
        self.max_root_modulus
    }

    /// Stationary power of the generated samples: 1 when normalized,
    /// otherwise the raw `r[0]` solved from the model.
    pub fn stationary_power(&self) -> f64 {
        if self.normalize_unit_power {
            1.0
        } else {
            self.r0_raw
        }
    }

    /// Amplitude factor applied to raw recursion output.
    fn amplitude_scale(&self) -> f64 {
        if self.normalize_unit_power {
            1.0 / self.r0_raw.sqrt()
        } else {
            1.0
        }
    }

    /// Burn-in length: `max(1000, ceil(10 p / (1 - max_root_modulus)))`
    /// samples of transient before output is kept. The recursion is stateless
    /// for p = 0, so no burn-in is needed there.
    pub fn burn_in(&self) -> usize {
        if self.rho.is_empty() {
            return 0;
        }
        let geometric = (10.0 * self.order() as f64 / (1.0 - self.max_root_modulus)).ceil();
        (geometric as usize).max(1000)
    }

    /// Number of lags after which `|r[m]| / r[0]` has decayed below `eps`,
    /// estimated from the largest root modulus.
    pub fn decay_horizon(&self, eps: f64) -> usize {
        if self.rho.is_empty() || self.max_root_modulus <= 0.0 {
            return 0;
        }
        let lags = eps.ln() / self.max_root_modulus.ln();
        lags.ceil().max(1.0) as usize
    }
}

/// Serialized form of [`ArSpec`]: just the model parameters; derived
/// quantities are recomputed on load.
#[derive(Serialize, Deserialize)]
struct ArSpecRepr {
    rho: Vec<Complex64>,
    innovation: InnovationSpec,
    #[serde(default)]
    normalize_unit_power: bool,
}

impl TryFrom<ArSpecRepr> for ArSpec {
    type Error = Error;

    fn try_from(repr: ArSpecRepr) -> Result<Self> {
        ArSpec::new(repr.rho, repr.innovation, repr.normalize_unit_power)
    }
}

impl From<ArSpec> for ArSpecRepr {
    fn from(spec: ArSpec) -> Self {
        ArSpecRepr {
            rho: spec.rho,
            innovation: spec.innovation,
            normalize_unit_power: spec.normalize_unit_power,
        }
    }
}

/// Texture (power modulation) distribution of a compound-Gaussian vector.
/// Constrained to unit mean so the overall power equals the speckle power.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TextureSpec {
    /// Inverse-gamma with the given shape and scale `shape - 1` (unit mean).
    InverseGamma { shape: f64 },
}

impl TextureSpec {
    fn validate(&self) -> Result<()> {
        let TextureSpec::InverseGamma { shape } = *self;
        if !(shape > 1.0) {
            return Err(Error::InvalidParameter(
                "texture shape must exceed 1 so the unit-mean scaling exists".into(),
            ));
        }
        Ok(())
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let TextureSpec::InverseGamma { shape } = *self;
        let gamma = Gamma::new(shape, 1.0).expect("validated shape");
        (shape - 1.0) / gamma.sample(rng)
    }
}

/// Compound-Gaussian clutter: one texture draw per vector scales a Gaussian
/// AR speckle path. The scatter structure is entirely carried by the speckle
/// autocovariance because the texture has unit mean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CgSpecRepr", into = "CgSpecRepr")]
pub struct CgSpec {
    speckle: ArSpec,
    texture: TextureSpec,
}

impl CgSpec {
    /// `speckle_rho` are the AR coefficients of the unit-variance-innovation
    /// Gaussian speckle process.
    pub fn new(
        speckle_rho: Vec<Complex64>,
        texture: TextureSpec,
        normalize_unit_power: bool,
    ) -> Result<Self> {
        texture.validate()?;
        let speckle = ArSpec::new(
            speckle_rho,
            InnovationSpec::ComplexGaussian { sigma_w2: 1.0 },
            normalize_unit_power,
        )?;
        Ok(Self { speckle, texture })
    }

    /// The Gaussian speckle autoregression.
    pub fn speckle(&self) -> &ArSpec {
        &self.speckle
    }

    pub fn texture(&self) -> &TextureSpec {
        &self.texture
    }

    pub fn normalize_unit_power(&self) -> bool {
        self.speckle.normalize_unit_power()
    }
}

#[derive(Serialize, Deserialize)]
struct CgSpecRepr {
    speckle_rho: Vec<Complex64>,
    texture: TextureSpec,
    #[serde(default)]
    normalize_unit_power: bool,
}

impl TryFrom<CgSpecRepr> for CgSpec {
    type Error = Error;

    fn try_from(repr: CgSpecRepr) -> Result<Self> {
        CgSpec::new(repr.speckle_rho, repr.texture, repr.normalize_unit_power)
    }
}

impl From<CgSpec> for CgSpecRepr {
    fn from(spec: CgSpec) -> Self {
        CgSpecRepr {
            speckle_rho: spec.speckle.rho.clone(),
            texture: spec.texture,
            normalize_unit_power: spec.speckle.normalize_unit_power,
        }
    }
}

/// Autocovariance sequence `r[0..=max_lag]` of a stationary process, with the
/// convention `r[-m] = conj(r[m])`.
#[derive(Debug, Clone, PartialEq)]
pub struct Autocovariance {
    values: Vec<Complex64>,
}

impl Autocovariance {
    /// Validates that the zero lag is real and positive; its tiny imaginary
    /// rounding residue is discarded.
    pub fn new(mut values: Vec<Complex64>) -> Result<Self> {
        let Some(r0) = values.first().copied() else {
            return Err(Error::InvalidParameter("autocovariance needs lag 0".into()));
        };
        if !(r0.re > 0.0) || r0.im.abs() > 1e-9 * r0.re {
            return Err(Error::InvalidParameter(format!(
                "autocovariance lag 0 must be real and positive, got {r0}"
            )));
        }
        values[0] = Complex64::new(r0.re, 0.0);
        Ok(Self { values })
    }

    /// Lags `0..=max_lag` in order.
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn max_lag(&self) -> usize {
        self.values.len() - 1
    }

    /// Power `r[0]`.
    pub fn r0(&self) -> f64 {
        self.values[0].re
    }

    /// `r[lag]` for any lag in `-max_lag..=max_lag`, using Hermitian symmetry.
    ///
    /// # Panics
    /// If `|lag|` exceeds the stored horizon.
    pub fn at(&self, lag: i64) -> Complex64 {
        let m = lag.unsigned_abs() as usize;
        let value = self.values[m];
        if lag < 0 {
            value.conj()
        } else {
            value
        }
    }

    /// Hermitian Toeplitz covariance matrix of dimension `n`, with lags beyond
    /// the stored horizon treated as zero.
    pub fn toeplitz(&self, n: usize) -> DMatrix<Complex64> {
        DMatrix::from_fn(n, n, |i, j| {
            let lag = i as i64 - j as i64;
            if lag.unsigned_abs() as usize <= self.max_lag() {
                self.at(lag)
            } else {
                Complex64::ZERO
            }
        })
    }
}

/// Power spectral density of the autoregression at spatial frequency `nu`:
/// `sigma_w2 / |1 - sum_n rho_n exp(-j 2 pi n nu)|^2`, divided by the raw
/// power when the spec is normalized to unit power.
pub fn ar_psd(spec: &ArSpec, nu: f64) -> f64 {
    let mut denom = Complex64::ONE;
    for (k, &rho) in spec.rho.iter().enumerate() {
        denom -= rho * Complex64::from_polar(1.0, -TAU * (k + 1) as f64 * nu);
    }
    let raw = spec.innovation.sigma_w2() / denom.norm_sqr();
    raw * spec.amplitude_scale().powi(2)
}

/// Stationary autocovariance of the autoregression out to `max_lag`.
///
/// Lags `0..=p` come from the Yule-Walker linear system including the
/// innovation power forcing term; lags beyond `p` follow the homogeneous
/// recursion `r[m] = sum_i rho_i r[m-i]`. Normalization divides through by
/// the raw power, matching the scaling applied to generated samples.
pub fn ar_autocovariance(spec: &ArSpec, max_lag: usize) -> Result<Autocovariance> {
    let p = spec.order();
    let mut r = yule_walker_head(&spec.rho, spec.innovation.sigma_w2())?;
    r.truncate(max_lag + 1);
    for m in (p + 1)..=max_lag {
        let mut value = Complex64::ZERO;
        for (i, &rho) in spec.rho.iter().enumerate() {
            value += rho * r[m - i - 1];
        }
        r.push(value);
    }
    let power_scale = spec.amplitude_scale().powi(2);
    for value in &mut r {
        *value *= power_scale;
    }
    Autocovariance::new(r)
}

/// Solves the Yule-Walker system for lags `0..=p`.
///
/// The equations are `r[0] - sum_i rho_i conj(r[i]) = sigma_w2` and, for
/// `m = 1..p`, `r[m] - sum_i rho_i r[m-i] = 0` with `r[-k] = conj(r[k])`.
/// Conjugation makes the system linear over the reals rather than the
/// complexes, so it is solved as a `2(p+1)` dimensional real system.
fn yule_walker_head(rho: &[Complex64], sigma_w2: f64) -> Result<Vec<Complex64>> {
    let p = rho.len();
    if p == 0 {
        return Ok(vec![Complex64::new(sigma_w2, 0.0)]);
    }
    let dim = 2 * (p + 1);
    let mut a = DMatrix::<f64>::zeros(dim, dim);
    let mut b = DVector::<f64>::zeros(dim);

    // Adds coefficient * unknown_j (or its conjugate) to equation `eq`.
    let add_term = |a: &mut DMatrix<f64>, eq: usize, j: usize, coeff: Complex64, conj: bool| {
        let (re_col, im_col) = (2 * j, 2 * j + 1);
        let im_sign = if conj { -1.0 } else { 1.0 };
        a[(2 * eq, re_col)] += coeff.re;
        a[(2 * eq, im_col)] -= im_sign * coeff.im;
        a[(2 * eq + 1, re_col)] += coeff.im;
        a[(2 * eq + 1, im_col)] += im_sign * coeff.re;
    };

    // Equation 0: r[0] - sum_i rho_i conj(r[i]) = sigma_w2.
    add_term(&mut a, 0, 0, Complex64::ONE, false);
    for (i, &rho_i) in rho.iter().enumerate() {
        add_term(&mut a, 0, i + 1, -rho_i, true);
    }
    b[0] = sigma_w2;

    // Equations m = 1..=p: r[m] - sum_i rho_i r~[m-i] = 0.
    for m in 1..=p {
        add_term(&mut a, m, m, Complex64::ONE, false);
        for (i, &rho_i) in rho.iter().enumerate() {
            let lag = m as i64 - (i + 1) as i64;
            add_term(&mut a, m, lag.unsigned_abs() as usize, -rho_i, lag < 0);
        }
    }

    let solution = a
        .lu()
        .solve(&b)
        .ok_or_else(|| Error::SingularSystem("Yule-Walker equations".into()))?;

    let r: Vec<Complex64> = (0..=p)
        .map(|j| Complex64::new(solution[2 * j], solution[2 * j + 1]))
        .collect();
    if !(r[0].re > 0.0) || r[0].im.abs() > 1e-9 * r[0].re.abs() {
        return Err(Error::SingularSystem(format!(
            "Yule-Walker solution has invalid power {}",
            r[0]
        )));
    }
    Ok(r)
}

/// Generates `n` samples of the autoregression: the recursion is run from a
/// zero initial state through the burn-in, and the last `n` samples are
/// returned (scaled to unit power when the spec requests it).
pub fn generate_ar<R: Rng + ?Sized>(spec: &ArSpec, n: usize, rng: &mut R) -> Vec<Complex64> {
    assert!(n >= 1, "generate_ar needs at least one sample");
    let p = spec.order();
    let sampler = InnovationSampler::new(&spec.innovation);
    let scale = spec.amplitude_scale();
    let burn = spec.burn_in();

    let mut history = vec![Complex64::ZERO; p];
    let mut out = Vec::with_capacity(n);
    for t in 0..(burn + n) {
        let mut c = sampler.sample(rng);
        for (k, &rho) in spec.rho.iter().enumerate() {
            c += rho * history[k];
        }
        for k in (1..p).rev() {
            history[k] = history[k - 1];
        }
        if p > 0 {
            history[0] = c;
        }
        if t >= burn {
            out.push(c * scale);
        }
    }
    out
}

/// Generates one compound-Gaussian vector: a Gaussian AR speckle path scaled
/// by the square root of a single texture draw. The speckle path is drawn
/// first, the texture second; the order is part of the reproducibility
/// contract.
pub fn generate_cg<R: Rng + ?Sized>(spec: &CgSpec, n: usize, rng: &mut R) -> Vec<Complex64> {
    let mut speckle = generate_ar(&spec.speckle, n, rng);
    let amplitude = spec.texture.sample(rng).sqrt();
    for value in &mut speckle {
        *value *= amplitude;
    }
    speckle
}
