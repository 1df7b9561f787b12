//! Rapidities, stability, decay-mode spectrum and the symplectic eigenvector
//! matrix of `J S`.

use std::cmp::Ordering;
use std::fmt;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::linalg::{self, CMat};

/// Rapidities within this distance of the imaginary axis are Marginal.
pub const DEFAULT_TOL_MARGINAL: f64 = 1e-10;
/// Eigenvector conditioning above which a warning is raised and the
/// eigenbasis Lyapunov solver refuses.
pub const COND_WARN: f64 = 1e8;
/// Eigenvector conditioning above which `X` counts as defective.
pub const COND_DEFECTIVE: f64 = 1e12;
/// Default cap on the number of enumerated decay modes.
pub const DEFAULT_MODE_LIMIT: usize = 1_000_000;

const SYMPLECTIC_TOL: f64 = 1e-9;
const SIMILARITY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stability {
    Stable,
    Unstable,
    Marginal,
}

impl Stability {
    pub fn as_str(self) -> &'static str {
        match self {
            Stability::Stable => "Stable",
            Stability::Unstable => "Unstable",
            Stability::Marginal => "Marginal",
        }
    }
}

impl fmt::Display for Stability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone)]
pub struct RapiditySpectrum {
    /// Rapidities, sorted by (Re asc, Im asc).
    pub beta: Vec<C64>,
    /// Eigenvector matrix with unit-norm columns, `X = P diag(beta) P^{-1}`.
    pub p: CMat,
    pub cond_p: f64,
    pub stability: Stability,
}

impl RapiditySpectrum {
    pub fn is_stable(&self) -> bool {
        self.stability == Stability::Stable
    }

    pub fn ill_conditioned(&self) -> bool {
        self.cond_p > COND_WARN
    }
}

/// Quantization step used when comparing real parts, so that conjugate
/// partners whose real parts differ by rounding noise sort by imaginary
/// part.
fn re_quantum(values: &[C64]) -> f64 {
    1e-12 * values.iter().map(|z| z.norm()).fold(1.0, f64::max)
}

fn quantize(x: f64, q: f64) -> f64 {
    (x / q).round()
}

fn cmp_re_im(a: &C64, b: &C64, q: f64) -> Ordering {
    quantize(a.re, q)
        .total_cmp(&quantize(b.re, q))
        .then(a.im.total_cmp(&b.im))
}

pub fn classify_stability(beta: &[C64], tol_marginal: f64) -> Stability {
    if beta.iter().any(|b| b.re < -tol_marginal) {
        Stability::Unstable
    } else if beta.iter().all(|b| b.re > tol_marginal) {
        Stability::Stable
    } else {
        Stability::Marginal
    }
}

/// Diagonalize `X`, sort the rapidities and classify stability.
pub fn rapidities(x: &CMat, tol_marginal: f64) -> Result<RapiditySpectrum> {
    let (w, p) = linalg::eig(x)?;
    let q = re_quantum(&w);
    let mut order: Vec<usize> = (0..w.len()).collect();
    order.sort_by(|&a, &b| cmp_re_im(&w[a], &w[b], q));
    let beta: Vec<C64> = order.iter().map(|&i| w[i]).collect();
    let dim = x.nrows();
    let p = faer::Mat::from_fn(dim, dim, |i, j| p[(i, order[j])]);
    let cond_p = linalg::cond2(&p);
    if !cond_p.is_finite() || cond_p > COND_DEFECTIVE {
        return Err(Error::DefectiveX { cond: cond_p });
    }
    if cond_p > COND_WARN {
        log::warn!("eigenvector matrix of X is ill-conditioned (cond {cond_p:.3e})");
    }
    let stability = classify_stability(&beta, tol_marginal);
    Ok(RapiditySpectrum {
        beta,
        p,
        cond_p,
        stability,
    })
}

/// Slowest relaxation rate `2 min Re beta`.
pub fn spectral_gap(beta: &[C64], tol_marginal: f64) -> Result<f64> {
    match classify_stability(beta, tol_marginal) {
        Stability::Stable => Ok(2.0 * beta.iter().map(|b| b.re).fold(f64::INFINITY, f64::min)),
        s => Err(Error::NotStable(s)),
    }
}

/// Largest mismatch between the sorted multisets `{beta}` and `{conj beta}`.
pub fn conjugate_pair_defect(beta: &[C64]) -> f64 {
    let q = re_quantum(beta);
    let mut a = beta.to_vec();
    let mut b: Vec<C64> = beta.iter().map(|z| z.conj()).collect();
    a.sort_by(|x, y| cmp_re_im(x, y, q));
    b.sort_by(|x, y| cmp_re_im(x, y, q));
    let sorted = a.iter().zip(&b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
    // Sorting can pair the wrong partners when real parts straddle a
    // quantization boundary; fall back to nearest-neighbour matching.
    if sorted <= 1e-8 {
        return sorted;
    }
    greedy_match_defect(&a, &b)
}

fn greedy_match_defect(a: &[C64], b: &[C64]) -> f64 {
    let mut used = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    for x in a {
        let (idx, d) = b
            .iter()
            .enumerate()
            .filter(|(i, _)| !used[*i])
            .map(|(i, y)| (i, (x - y).norm()))
            .min_by(|p, q| p.1.total_cmp(&q.1))
            .expect("equal lengths");
        used[idx] = true;
        worst = worst.max(d);
    }
    worst
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayMode {
    pub m: Vec<u32>,
    pub lambda: C64,
}

/// `lambda_m = -2 sum_r m_r beta_r`.
pub fn decay_eigenvalue(beta: &[C64], m: &[u32]) -> C64 {
    m.iter()
        .zip(beta)
        .map(|(&mr, &b)| b * (mr as f64))
        .sum::<C64>()
        * -2.0
}

fn binomial(n: u128, k: u128) -> u128 {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul(n - i) / (i + 1);
    }
    acc
}

/// Number of multi-indices in `Z_+^{slots}` with total at most `cutoff`.
pub fn mode_count(slots: usize, cutoff: usize) -> u128 {
    binomial((slots + cutoff) as u128, slots as u128)
}

/// All compositions of `total` into `slots` non-negative parts, in
/// lexicographic order.
fn compositions(total: u32, slots: usize) -> Vec<Vec<u32>> {
    fn rec(rem: u32, slot: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if slot + 1 == cur.len() {
            cur[slot] = rem;
            out.push(cur.clone());
            return;
        }
        for v in 0..=rem {
            cur[slot] = v;
            rec(rem - v, slot + 1, cur, out);
        }
    }
    let mut out = Vec::new();
    if slots == 0 {
        if total == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    let mut cur = vec![0; slots];
    rec(total, 0, &mut cur, &mut out);
    out
}

/// Enumerate the decay modes with total excitation at most
/// `max_total_excitation`, slowest decay first (Re lambda descending, ties by
/// lexicographic multi-index).
pub fn liouville_spectrum(
    spectrum: &RapiditySpectrum,
    max_total_excitation: usize,
    limit: usize,
    exec: Execution,
) -> Result<Vec<DecayMode>> {
    if spectrum.stability != Stability::Stable {
        return Err(Error::NotStable(spectrum.stability));
    }
    let slots = spectrum.beta.len();
    let count = mode_count(slots, max_total_excitation);
    if count > limit as u128 {
        return Err(Error::CutoffTooLarge { count, limit });
    }
    let strata: Vec<u32> = (0..=max_total_excitation as u32).collect();
    let beta = &spectrum.beta;
    let mut modes: Vec<DecayMode> = exec
        .map(&strata, |&k| {
            compositions(k, slots)
                .into_iter()
                .map(|m| DecayMode {
                    lambda: decay_eigenvalue(beta, &m),
                    m,
                })
                .collect::<Vec<_>>()
        })
        .into_iter()
        .flatten()
        .collect();
    let q = re_quantum(beta) * (max_total_excitation.max(1) as f64);
    modes.sort_by(|a, b| {
        quantize(b.lambda.re, q)
            .total_cmp(&quantize(a.lambda.re, q))
            .then_with(|| a.m.cmp(&b.m))
    });
    Ok(modes)
}

/// `J = i sigma_y (x) 1_{2n}`, i.e. `[[0, 1], [-1, 0]]` in 2n-blocks.
pub fn symplectic_unit(dim2n: usize) -> CMat {
    linalg::block2(
        &linalg::zeros(dim2n, dim2n),
        &linalg::identity(dim2n),
        &linalg::scale(&linalg::identity(dim2n), C64::new(-1.0, 0.0)),
        &linalg::zeros(dim2n, dim2n),
    )
}

/// `J S = [[-X^T, Y], [0, X]]`.
pub fn js_matrix(x: &CMat, y: &CMat) -> CMat {
    let d = x.nrows();
    linalg::block2(
        &linalg::scale(&linalg::transpose(x), C64::new(-1.0, 0.0)),
        y,
        &linalg::zeros(d, d),
        x,
    )
}

/// Frobenius norm of `S = [[0, -X], [-X^T, Y]]`.
pub fn s_norm(x: &CMat, y: &CMat) -> f64 {
    (2.0 * linalg::frob(x).powi(2) + linalg::frob(y).powi(2)).sqrt()
}

#[derive(Debug, Clone)]
pub struct SymplecticV {
    pub v: CMat,
    pub z_used: CMat,
    /// `|V^T J V - J|_F`
    pub symplectic_residual: f64,
    /// `|V^{-1} ((-D) + D) V - J S|_F / max(1, |S|_F)`
    pub similarity_residual: f64,
}

/// `V = (P^T + P^{-1}) [[1, -Z], [0, 1]]`, checked for symplecticity and for
/// diagonalizing `J S`.
pub fn build_v(spectrum: &RapiditySpectrum, z: &CMat, x: &CMat, y: &CMat) -> Result<SymplecticV> {
    let d = spectrum.p.nrows();
    let p = &spectrum.p;
    let p_inv = linalg::inverse(p);
    let outer = linalg::direct_sum(&linalg::transpose(p), &p_inv);
    let shear = linalg::block2(
        &linalg::identity(d),
        &linalg::scale(z, C64::new(-1.0, 0.0)),
        &linalg::zeros(d, d),
        &linalg::identity(d),
    );
    let v = &outer * &shear;

    let j = symplectic_unit(d);
    let symplectic_residual = linalg::frob(&(&(&linalg::transpose(&v) * &j) * &v - &j));

    let shear_inv = linalg::block2(&linalg::identity(d), z, &linalg::zeros(d, d), &linalg::identity(d));
    let outer_inv = linalg::direct_sum(&linalg::transpose(&p_inv), p);
    let v_inv = &shear_inv * &outer_inv;
    let neg: Vec<C64> = spectrum.beta.iter().map(|b| -b).collect();
    let mut dd = neg;
    dd.extend_from_slice(&spectrum.beta);
    let lhs = &(&v_inv * &linalg::diag(&dd)) * &v;
    let similarity_residual = linalg::frob(&(&lhs - &js_matrix(x, y))) / s_norm(x, y).max(1.0);

    if symplectic_residual > SYMPLECTIC_TOL * linalg::frob(z).max(1.0) {
        return Err(Error::SymplecticityViolation {
            residual: symplectic_residual,
        });
    }
    if similarity_residual > SIMILARITY_TOL {
        return Err(Error::SymplecticityViolation {
            residual: similarity_residual,
        });
    }
    Ok(SymplecticV {
        v,
        z_used: z.clone(),
        symplectic_residual,
        similarity_residual,
    })
}
