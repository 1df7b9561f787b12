//! Continuous Lyapunov equation `X^T Z + Z X = Y`.
//!
//! Two independent solvers: the eigenbasis formula (reuses the rapidity
//! decomposition) and a complex Schur / Bartels-Stewart back-substitution for
//! poorly conditioned eigenvectors. Every solution carries its residual.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, ZERO};
use crate::spectral::{RapiditySpectrum, Stability, COND_WARN};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LyapunovMethod {
    Eigenbasis,
    SchurBartelsStewart,
}

impl LyapunovMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            LyapunovMethod::Eigenbasis => "Eigenbasis",
            LyapunovMethod::SchurBartelsStewart => "SchurBartelsStewart",
        }
    }
}

#[derive(Debug, Clone)]
pub struct LyapunovSolution {
    /// Symmetric solution.
    pub z: CMat,
    /// `|X^T Z + Z X - Y|_F / |Y|_F`, absolute when `Y = 0`.
    pub residual: f64,
    pub method: LyapunovMethod,
}

pub fn residual(x: &CMat, y: &CMat, z: &CMat) -> f64 {
    let r = &(&linalg::transpose(x) * z) + &(z * x);
    let abs = linalg::frob(&(&r - y));
    let ny = linalg::frob(y);
    if ny == 0.0 {
        abs
    } else {
        abs / ny
    }
}

fn finish(x: &CMat, y: &CMat, z: CMat, method: LyapunovMethod) -> LyapunovSolution {
    let z = linalg::symmetrize(&z);
    let residual = residual(x, y, &z);
    LyapunovSolution { z, residual, method }
}

/// `Z~_{jk} = (P^T Y P)_{jk} / (beta_j + beta_k)`, `Z = P^{-T} Z~ P^{-1}`.
pub fn solve_eigenbasis(
    x: &CMat,
    y: &CMat,
    spectrum: &RapiditySpectrum,
    tol_marginal: f64,
) -> Result<LyapunovSolution> {
    if spectrum.cond_p > COND_WARN {
        return Err(Error::IllConditioned { cond: spectrum.cond_p });
    }
    let p = &spectrum.p;
    let beta = &spectrum.beta;
    let d = beta.len();
    let mut zt = &(&linalg::transpose(p) * y) * p;
    for j in 0..d {
        for k in 0..d {
            let denom = beta[j] + beta[k];
            if denom.norm() < tol_marginal {
                return Err(Error::ResonantSpectrum { pivot: denom.norm() });
            }
            zt[(j, k)] /= denom;
        }
    }
    let p_inv = linalg::inverse(p);
    let z = &(&linalg::transpose(&p_inv) * &zt) * &p_inv;
    Ok(finish(x, y, z, LyapunovMethod::Eigenbasis))
}

/// Bartels-Stewart on the complex Schur form `X = Q T Q^dag`.
///
/// With `W = Q^T Z Q` and `F = Q^T Y Q` the equation becomes
/// `T^T W + W T = F`, solved entry by entry in row-major order.
pub fn solve_schur(x: &CMat, y: &CMat, tol_marginal: f64) -> Result<LyapunovSolution> {
    let (q, t) = linalg::schur(x)?;
    let d = x.nrows();
    let f = &(&linalg::transpose(&q) * y) * &q;
    let mut w = linalg::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            let pivot = t[(i, i)] + t[(j, j)];
            if pivot.norm() < tol_marginal {
                return Err(Error::ResonantSpectrum { pivot: pivot.norm() });
            }
            let mut acc = f[(i, j)];
            for k in 0..i {
                acc -= t[(k, i)] * w[(k, j)];
            }
            for k in 0..j {
                acc -= w[(i, k)] * t[(k, j)];
            }
            w[(i, j)] = acc / pivot;
        }
    }
    // Z = conj(Q) W Q^dag
    let z = &(&linalg::conj(&q) * &w) * &linalg::adjoint(&q);
    Ok(finish(x, y, z, LyapunovMethod::SchurBartelsStewart))
}

/// Eigenbasis first, Schur when the eigenvectors are too ill-conditioned.
pub fn solve(x: &CMat, y: &CMat, spectrum: &RapiditySpectrum, tol_marginal: f64) -> Result<LyapunovSolution> {
    if spectrum.stability != Stability::Stable {
        return Err(Error::NotStable(spectrum.stability));
    }
    match solve_eigenbasis(x, y, spectrum, tol_marginal) {
        Err(Error::IllConditioned { cond }) => {
            log::info!("eigenbasis Lyapunov path refused (cond {cond:.3e}), using Schur");
            solve_schur(x, y, tol_marginal)
        }
        other => other,
    }
}

/// Zero solution placeholder used when `Y = 0` is known upfront.
pub fn zero_solution(dim: usize) -> LyapunovSolution {
    LyapunovSolution {
        z: faer::Mat::from_fn(dim, dim, |_, _| ZERO),
        residual: 0.0,
        method: LyapunovMethod::Eigenbasis,
    }
}

/// A stable `dim x dim` matrix whose eigenvectors have condition number
/// around `1e10`: a 3x3 Jordan-like block with eigenvalues `1, 1 + eps,
/// 1 + 2 eps` (`eps = 1e-5`) plus a well separated remainder, rotated by a
/// fixed unitary so that it is not already triangular.
pub fn near_defective_example(dim: usize) -> CMat {
    assert!(dim >= 4 && dim % 2 == 0);
    let eps = 1e-5;
    let mut t = linalg::zeros(dim, dim);
    t[(0, 0)] = C64::new(1.0, 0.2);
    t[(1, 1)] = C64::new(1.0 + eps, 0.2);
    t[(2, 2)] = C64::new(1.0 + 2.0 * eps, 0.2);
    t[(0, 1)] = C64::new(1.0, 0.0);
    t[(1, 2)] = C64::new(1.0, 0.0);
    for i in 3..dim {
        t[(i, i)] = C64::new(1.5 + 0.25 * i as f64, -0.3 * i as f64);
        if i + 1 < dim {
            t[(i, i + 1)] = C64::new(0.1, 0.05);
        }
    }
    // Householder reflector I - 2 v v^dag / |v|^2 with a fixed complex v.
    let v: Vec<C64> = (0..dim)
        .map(|i| C64::new(1.0 + 0.3 * i as f64, 0.5 - 0.2 * i as f64))
        .collect();
    let vn: f64 = v.iter().map(|z| z.norm_sqr()).sum();
    let h = faer::Mat::from_fn(dim, dim, |i, j| {
        let id = if i == j { 1.0 } else { 0.0 };
        C64::new(id, 0.0) - v[i] * v[j].conj() * (2.0 / vn)
    });
    &(&h * &t) * &h
}
