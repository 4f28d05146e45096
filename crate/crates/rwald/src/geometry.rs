//! Steering vectors and transmit beampattern for colocated MIMO arrays.
//!
//! A radar with `m_t` transmit and `m_r` receive elements observes a target
//! through `N = m_t * m_r` virtual spatial channels. The virtual signature of
//! a target at spatial frequency `nu` is `v = (S^T kron I_mr)(W^T a_T kron a_R)`,
//! where `W` weights the transmitted waveforms, `S` is their cross-correlation
//! matrix, and `vec(.)` stacks matrix columns. With `W = S = I` and the
//! identifiability-maximizing spacing (transmit elements `m_r` units apart),
//! the signature collapses to `v_i = exp(j 2 pi i nu)`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const TAU: f64 = std::f64::consts::TAU;

/// Transmit/receive array dimensions plus optional waveform weighting `w` and
/// waveform cross-correlation `s`. Both matrices default to the identity,
/// which models orthonormal waveforms radiated without beamshaping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ArrayConfigRepr", into = "ArrayConfigRepr")]
pub struct ArrayConfig {
    m_t: usize,
    m_r: usize,
    w: Option<DMatrix<Complex64>>,
    s: Option<DMatrix<Complex64>>,
}

impl ArrayConfig {
    /// Array with identity waveform matrices.
    pub fn new(m_t: usize, m_r: usize) -> Result<Self> {
        if m_t == 0 || m_r == 0 {
            return Err(Error::InvalidParameter(
                "array dimensions must be at least 1".into(),
            ));
        }
        Ok(Self { m_t, m_r, w: None, s: None })
    }

    /// Replaces the waveform weighting matrix. Must be `m_t x m_t`.
    pub fn with_weighting(mut self, w: DMatrix<Complex64>) -> Result<Self> {
        if w.nrows() != self.m_t || w.ncols() != self.m_t {
            return Err(Error::DimensionMismatch(format!(
                "weighting matrix must be {0}x{0}, got {1}x{2}",
                self.m_t,
                w.nrows(),
                w.ncols()
            )));
        }
        self.w = Some(w);
        Ok(self)
    }

    /// Replaces the waveform cross-correlation matrix. Must be `m_t x m_t`.
    pub fn with_cross_correlation(mut self, s: DMatrix<Complex64>) -> Result<Self> {
        if s.nrows() != self.m_t || s.ncols() != self.m_t {
            return Err(Error::DimensionMismatch(format!(
                "cross-correlation matrix must be {0}x{0}, got {1}x{2}",
                self.m_t,
                s.nrows(),
                s.ncols()
            )));
        }
        self.s = Some(s);
        Ok(self)
    }

    pub fn m_t(&self) -> usize {
        self.m_t
    }

    pub fn m_r(&self) -> usize {
        self.m_r
    }

    /// Number of virtual spatial channels `m_t * m_r`.
    pub fn n(&self) -> usize {
        self.m_t * self.m_r
    }

    pub fn weighting(&self) -> Option<&DMatrix<Complex64>> {
        self.w.as_ref()
    }

    pub fn cross_correlation(&self) -> Option<&DMatrix<Complex64>> {
        self.s.as_ref()
    }

    /// True when both waveform matrices are the identity (stored or implied).
    pub fn has_identity_waveforms(&self) -> bool {
        let ident = |m: &Option<DMatrix<Complex64>>| match m {
            None => true,
            Some(m) => (0..m.nrows()).all(|i| {
                (0..m.ncols()).all(|j| {
                    m[(i, j)] == if i == j { Complex64::ONE } else { Complex64::ZERO }
                })
            }),
        };
        ident(&self.w) && ident(&self.s)
    }
}

/// Serialized form of [`ArrayConfig`]: matrices as row-major nested arrays.
#[derive(Serialize, Deserialize)]
struct ArrayConfigRepr {
    m_t: usize,
    m_r: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    w: Option<Vec<Vec<Complex64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    s: Option<Vec<Vec<Complex64>>>,
}

impl TryFrom<ArrayConfigRepr> for ArrayConfig {
    type Error = Error;

    fn try_from(repr: ArrayConfigRepr) -> Result<Self> {
        let mut cfg = ArrayConfig::new(repr.m_t, repr.m_r)?;
        if let Some(rows) = repr.w {
            cfg = cfg.with_weighting(matrix_from_rows(rows, repr.m_t, "w")?)?;
        }
        if let Some(rows) = repr.s {
            cfg = cfg.with_cross_correlation(matrix_from_rows(rows, repr.m_t, "s")?)?;
        }
        Ok(cfg)
    }
}

impl From<ArrayConfig> for ArrayConfigRepr {
    fn from(cfg: ArrayConfig) -> Self {
        let to_rows = |m: &DMatrix<Complex64>| {
            (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
                .collect()
        };
        ArrayConfigRepr {
            m_t: cfg.m_t,
            m_r: cfg.m_r,
            w: cfg.w.as_ref().map(to_rows),
            s: cfg.s.as_ref().map(to_rows),
        }
    }
}

fn matrix_from_rows(rows: Vec<Vec<Complex64>>, dim: usize, name: &str) -> Result<DMatrix<Complex64>> {
    if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
        return Err(Error::DimensionMismatch(format!(
            "matrix {name} must be {dim}x{dim}"
        )));
    }
    Ok(DMatrix::from_fn(dim, dim, |i, j| rows[i][j]))
}

/// A virtual steering vector together with the spatial frequency it points at.
#[derive(Debug, Clone, PartialEq)]
pub struct SteeringVector {
    values: Vec<Complex64>,
    nu: f64,
}

impl SteeringVector {
    /// Wraps raw signature values. Mainly useful for tests and custom geometries;
    /// prefer [`virtual_steering`] or [`build_virtual_vector`].
    pub fn new(values: Vec<Complex64>, nu: f64) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidParameter("steering vector is empty".into()));
        }
        Ok(Self { values, nu })
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Squared Euclidean norm of the signature.
    pub fn norm_sqr(&self) -> f64 {
        self.values.iter().map(|z| z.norm_sqr()).sum()
    }
}

/// Uniform linear array response: entry `i` is `exp(j 2 pi i mult nu)`.
///
/// The receive array uses `spacing_multiplier = 1`; the identifiability-
/// maximizing transmit array spaces its elements `m_r` receive spacings apart,
/// hence `spacing_multiplier = m_r`.
///
/// # Panics
/// If `count` or `spacing_multiplier` is zero.
pub fn ula_steering(nu: f64, count: usize, spacing_multiplier: usize) -> Vec<Complex64> {
    assert!(count >= 1, "steering vector needs at least one element");
    assert!(spacing_multiplier >= 1, "spacing multiplier must be positive");
    (0..count)
        .map(|i| Complex64::from_polar(1.0, TAU * (i * spacing_multiplier) as f64 * nu))
        .collect()
}

/// Assembles the virtual signature `(S^T kron I_mr)(W^T a_t kron a_r)` for
/// arbitrary transmit/receive responses, honoring the configured `W` and `S`.
/// `nu` is carried along as metadata for reporting.
pub fn build_virtual_vector(
    cfg: &ArrayConfig,
    nu: f64,
    a_t: &[Complex64],
    a_r: &[Complex64],
) -> Result<SteeringVector> {
    if a_t.len() != cfg.m_t {
        return Err(Error::DimensionMismatch(format!(
            "a_t has length {}, expected m_t = {}",
            a_t.len(),
            cfg.m_t
        )));
    }
    if a_r.len() != cfg.m_r {
        return Err(Error::DimensionMismatch(format!(
            "a_r has length {}, expected m_r = {}",
            a_r.len(),
            cfg.m_r
        )));
    }

    // u = W^T a_t, the effective transmit response.
    let u: Vec<Complex64> = match &cfg.w {
        None => a_t.to_vec(),
        Some(w) => (0..cfg.m_t)
            .map(|i| (0..cfg.m_t).map(|k| w[(k, i)] * a_t[k]).sum())
            .collect(),
    };

    // k = u kron a_r, stacked by columns: block b holds u[b] * a_r.
    // v = (S^T kron I) k mixes the blocks: block i = sum_b S[b, i] * u[b] * a_r.
    let mut values = vec![Complex64::ZERO; cfg.n()];
    match &cfg.s {
        None => {
            for (b, &ub) in u.iter().enumerate() {
                for (j, &arj) in a_r.iter().enumerate() {
                    values[b * cfg.m_r + j] = ub * arj;
                }
            }
        }
        Some(s) => {
            for i in 0..cfg.m_t {
                let coeff: Complex64 = (0..cfg.m_t).map(|b| s[(b, i)] * u[b]).sum();
                for (j, &arj) in a_r.iter().enumerate() {
                    values[i * cfg.m_r + j] = coeff * arj;
                }
            }
        }
    }

    SteeringVector::new(values, nu)
}

/// Fast path for the identifiable geometry with orthonormal waveforms:
/// entry `i` of the signature is `exp(j 2 pi i nu)`, `i = 0..N-1`.
///
/// Rejects configurations whose `W` or `S` is not the identity, because the
/// collapsed form is only valid there; use [`build_virtual_vector`] instead.
pub fn virtual_steering(nu: f64, cfg: &ArrayConfig) -> Result<SteeringVector> {
    if !cfg.has_identity_waveforms() {
        return Err(Error::InvalidParameter(
            "virtual_steering requires identity waveform matrices".into(),
        ));
    }
    SteeringVector::new(unit_signature(nu, cfg.n()), nu)
}

/// Length-`n` identifiable-geometry signature, entry `i = exp(j 2 pi i nu)`.
pub(crate) fn unit_signature(nu: f64, n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|i| Complex64::from_polar(1.0, TAU * i as f64 * nu))
        .collect()
}

/// Transmit beampattern `P = a_t^H W^* W^T a_t`, evaluated as `||W^T a_t||^2`
/// so the result is real and nonnegative by construction.
///
/// # Panics
/// If `w` is not square with dimension `a_t.len()`.
pub fn beampattern(w: &DMatrix<Complex64>, a_t: &[Complex64]) -> f64 {
    let m = a_t.len();
    assert!(
        w.nrows() == m && w.ncols() == m,
        "beampattern needs a {m}x{m} weighting matrix"
    );
    (0..m)
        .map(|i| {
            let ui: Complex64 = (0..m).map(|k| w[(k, i)] * a_t[k]).sum();
            ui.norm_sqr()
        })
        .sum()
}
