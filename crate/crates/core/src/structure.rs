//! Structure matrices of the quadratic Liouvillean.
//!
//! Index convention, used everywhere downstream: rows/columns `0..n` belong to
//! the `nu = 0` sector (left multiplication by `a`), `n..2n` to the `nu = 1`
//! sector (right multiplication by `a^dag`). The `4n x 4n` symmetric form
//! `S = [[0, -X], [-X^T, Y]]` is never materialized.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, I};
use crate::model::{bath_matrices, BathMatrices, ValidatedModel};

#[derive(Debug, Clone)]
pub struct StructureMatrices {
    pub x: CMat,
    pub y: CMat,
    /// `tr M - tr N`; reported only.
    pub s0: C64,
}

impl StructureMatrices {
    /// Number of modes.
    pub fn n(&self) -> usize {
        self.x.nrows() / 2
    }
}

/// Build `X`, `Y` and `S0` from a validated model.
pub fn build_structure(model: &ValidatedModel) -> Result<(StructureMatrices, BathMatrices)> {
    let bath = bath_matrices(model.n, &model.channels)?;
    Ok((structure_from_bath(model, &bath), bath))
}

pub fn structure_from_bath(model: &ValidatedModel, bath: &BathMatrices) -> StructureMatrices {
    let n = model.n;
    let h = &model.h;
    let k = &model.k;
    let (m, nn, l) = (&bath.m, &bath.n, &bath.l);
    let half = C64::new(0.5, 0.0);

    let mut x = linalg::zeros(2 * n, 2 * n);
    let mut y = linalg::zeros(2 * n, 2 * n);
    for a in 0..n {
        for b in 0..n {
            // X blocks
            x[(a, b)] = half * (I * h[(a, b)].conj() - nn[(a, b)].conj() + m[(a, b)]);
            x[(a, n + b)] = half * (-2.0 * I * k[(a, b)] - l[(a, b)] + l[(b, a)]);
            x[(n + a, b)] = half * (2.0 * I * k[(a, b)].conj() - l[(a, b)].conj() + l[(b, a)].conj());
            x[(n + a, n + b)] = half * (-I * h[(a, b)] - nn[(a, b)] + m[(a, b)].conj());
            // Y blocks
            y[(a, b)] = half * (-2.0 * I * k[(a, b)].conj() - l[(a, b)].conj() - l[(b, a)].conj());
            y[(a, n + b)] = nn[(a, b)];
            y[(n + a, b)] = nn[(b, a)];
            y[(n + a, n + b)] = half * (2.0 * I * k[(a, b)] - l[(a, b)] - l[(b, a)]);
        }
    }
    let y = linalg::symmetrize(&y);
    let s0 = linalg::trace(m) - linalg::trace(nn);
    StructureMatrices { x, y, s0 }
}

/// `U = (1/sqrt 2)(1_2 + i sigma_x) (x) 1_n`.
pub fn realifier(n: usize) -> CMat {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let u2 = linalg::from_rows(&[
        vec![C64::new(r, 0.0), C64::new(0.0, r)],
        vec![C64::new(0.0, r), C64::new(r, 0.0)],
    ]);
    linalg::kron(&u2, &linalg::identity(n))
}

/// Relative tolerance on the imaginary remainder accepted by [`realify`].
pub const REALIFY_TOL: f64 = 1e-9;

/// Real part of `U A U^{-1}`, failing if the imaginary remainder exceeds
/// [`REALIFY_TOL`] relative to `max(1, |A|_F)`.
pub fn realify(a: &CMat) -> Result<Vec<Vec<f64>>> {
    let dim = a.nrows();
    if dim % 2 != 0 || a.ncols() != dim {
        return Err(Error::DimensionMismatch {
            what: "realify input".into(),
            expected: dim + dim % 2,
            found: dim,
        });
    }
    let u = realifier(dim / 2);
    let conj = &(&u * a) * linalg::adjoint(&u);
    let remainder = (0..dim)
        .flat_map(|i| (0..dim).map(move |j| (i, j)))
        .map(|(i, j)| conj[(i, j)].im.powi(2))
        .sum::<f64>()
        .sqrt();
    if remainder > REALIFY_TOL * linalg::frob(a).max(1.0) {
        return Err(Error::NotRealSimilar { remainder });
    }
    Ok((0..dim)
        .map(|i| (0..dim).map(|j| conj[(i, j)].re).collect())
        .collect())
}
