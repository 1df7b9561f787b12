//! Problem statement: a quadratic bosonic Hamiltonian with linear Lindblad
//! channels,
//!
//! ```text
//! H   = a^dag . H a + a . K a + a^dag . conj(K) a^dag  (+ f . a + conj(f) . a^dag)
//! L_mu = l_mu . a + k_mu . a^dag                       (+ lambda_mu)
//! ```
//!
//! and the bath matrices `M`, `N`, `L` accumulated from the channels.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};

/// Default relative tolerance for repairing near-Hermitian / near-symmetric
/// input.
pub const DEFAULT_TOL_INPUT: f64 = 1e-9;

/// One Lindblad channel `L = l . a + k . a^dag`.
#[derive(Debug, Clone, PartialEq)]
pub struct LindbladChannel {
    /// annihilation coupling
    pub l: Vec<C64>,
    /// creation coupling
    pub k: Vec<C64>,
}

impl LindbladChannel {
    pub fn new(l: Vec<C64>, k: Vec<C64>) -> Self {
        Self { l, k }
    }
}

#[derive(Debug, Clone)]
pub struct BosonicModel {
    pub n: usize,
    pub h: CMat,
    pub k: CMat,
    pub channels: Vec<LindbladChannel>,
    /// Linear force `f` in `H -> H + f.a + conj(f).a^dag`.
    pub forces: Option<Vec<C64>>,
    /// Constant offsets `lambda_mu` in `L_mu -> L_mu + lambda_mu`.
    pub channel_offsets: Option<Vec<C64>>,
}

impl BosonicModel {
    /// Model with `K = 0`, no forces and no offsets.
    pub fn new(h: CMat, channels: Vec<LindbladChannel>) -> Self {
        let n = h.nrows();
        Self {
            n,
            h,
            k: linalg::zeros(n, n),
            channels,
            forces: None,
            channel_offsets: None,
        }
    }

    pub fn with_k(mut self, k: CMat) -> Self {
        self.k = k;
        self
    }

    pub fn with_forces(mut self, f: Vec<C64>) -> Self {
        self.forces = Some(f);
        self
    }

    pub fn with_offsets(mut self, offsets: Vec<C64>) -> Self {
        self.channel_offsets = Some(offsets);
        self
    }

    /// True if the model carries forces or nonzero channel offsets, i.e. the
    /// first moments are driven.
    pub fn has_linear_terms(&self) -> bool {
        let nz = |v: &Option<Vec<C64>>| v.as_ref().is_some_and(|v| v.iter().any(|z| z.norm() > 0.0));
        nz(&self.forces) || nz(&self.channel_offsets)
    }

    pub fn offset(&self, mu: usize) -> C64 {
        self.channel_offsets
            .as_ref()
            .map_or(linalg::ZERO, |o| o[mu])
    }
}

/// A model that passed [`validate_model`]. `H` is exactly Hermitian and `K`
/// exactly symmetric.
#[derive(Debug, Clone)]
pub struct ValidatedModel {
    model: BosonicModel,
    symmetrized: bool,
}

impl ValidatedModel {
    pub fn model(&self) -> &BosonicModel {
        &self.model
    }

    pub fn n(&self) -> usize {
        self.model.n
    }

    /// Whether `H` or `K` had to be averaged to restore exact symmetry.
    pub fn symmetrized(&self) -> bool {
        self.symmetrized
    }

    pub fn into_inner(self) -> BosonicModel {
        self.model
    }
}

impl std::ops::Deref for ValidatedModel {
    type Target = BosonicModel;
    fn deref(&self) -> &BosonicModel {
        &self.model
    }
}

#[derive(Debug, Clone)]
pub struct BathMatrices {
    pub m: CMat,
    pub n: CMat,
    pub l: CMat,
}

fn check_len(what: &str, expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch {
            what: what.to_string(),
            expected,
            found,
        });
    }
    Ok(())
}

fn check_finite(what: &str, v: &[C64]) -> Result<()> {
    if v.iter().all(|z| z.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what.to_string()))
    }
}

/// Check dimensions and finiteness, then restore exact Hermiticity of `H`
/// and symmetry of `K` when the deviation is within `tol_input` (relative to
/// `max(1, |.|_F)`).
pub fn validate_model(raw: BosonicModel, tol_input: f64) -> Result<ValidatedModel> {
    let n = raw.n;
    if n == 0 {
        return Err(Error::DimensionMismatch {
            what: "mode count".into(),
            expected: 1,
            found: 0,
        });
    }
    check_len("H rows", n, raw.h.nrows())?;
    check_len("H cols", n, raw.h.ncols())?;
    check_len("K rows", n, raw.k.nrows())?;
    check_len("K cols", n, raw.k.ncols())?;
    for (mu, ch) in raw.channels.iter().enumerate() {
        check_len(&format!("channel {mu} l"), n, ch.l.len())?;
        check_len(&format!("channel {mu} k"), n, ch.k.len())?;
        check_finite(&format!("channel {mu}"), &ch.l)?;
        check_finite(&format!("channel {mu}"), &ch.k)?;
    }
    if let Some(f) = &raw.forces {
        check_len("forces", n, f.len())?;
        check_finite("forces", f)?;
    }
    if let Some(o) = &raw.channel_offsets {
        check_len("channel offsets", raw.channels.len(), o.len())?;
        check_finite("channel offsets", o)?;
    }
    if !linalg::is_finite(&raw.h) {
        return Err(Error::NonFinite("H".into()));
    }
    if !linalg::is_finite(&raw.k) {
        return Err(Error::NonFinite("K".into()));
    }

    let mut model = raw;
    let mut symmetrized = false;

    let h_dev = linalg::frob(&(&model.h - linalg::adjoint(&model.h)));
    let h_tol = tol_input * linalg::frob(&model.h).max(1.0);
    if h_dev > h_tol {
        return Err(Error::HermiticityViolation {
            deviation: h_dev,
            tolerance: h_tol,
        });
    }
    if h_dev > 0.0 {
        model.h = linalg::scale(&(&model.h + linalg::adjoint(&model.h)), C64::new(0.5, 0.0));
        symmetrized = true;
    }

    let k_dev = linalg::asymmetry(&model.k);
    let k_tol = tol_input * linalg::frob(&model.k).max(1.0);
    if k_dev > k_tol {
        return Err(Error::SymmetryViolation {
            deviation: k_dev,
            tolerance: k_tol,
        });
    }
    if k_dev > 0.0 {
        model.k = linalg::symmetrize(&model.k);
        symmetrized = true;
    }

    Ok(ValidatedModel { model, symmetrized })
}

/// `M = sum l (x) conj(l)`, `N = sum k (x) conj(k)`, `L = sum l (x) conj(k)`
/// where `(x (x) conj(y))_{jk} = x_j conj(y_k)`.
pub fn bath_matrices(n: usize, channels: &[LindbladChannel]) -> Result<BathMatrices> {
    let mut m = linalg::zeros(n, n);
    let mut nn = linalg::zeros(n, n);
    let mut l = linalg::zeros(n, n);
    for (mu, ch) in channels.iter().enumerate() {
        check_len(&format!("channel {mu} l"), n, ch.l.len())?;
        check_len(&format!("channel {mu} k"), n, ch.k.len())?;
        for j in 0..n {
            for k in 0..n {
                m[(j, k)] += ch.l[j] * ch.l[k].conj();
                nn[(j, k)] += ch.k[j] * ch.k[k].conj();
                l[(j, k)] += ch.l[j] * ch.k[k].conj();
            }
        }
    }
    let herm = |a: &CMat| linalg::scale(&(a + linalg::adjoint(a)), C64::new(0.5, 0.0));
    Ok(BathMatrices {
        m: herm(&m),
        n: herm(&nn),
        l,
    })
}
