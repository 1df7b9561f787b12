//! Brute-force ground truth: the Lindblad generator written out as a dense
//! superoperator on a truncated Fock space.
//!
//! Vectorization is column-major, `vec(A rho B) = (B^T (x) A) vec(rho)`, so
//!
//! ```text
//! Lmat = -i (1 (x) H - H^T (x) 1)
//!        + sum_mu [ 2 conj(L) (x) L - 1 (x) L^dag L - (L^dag L)^T (x) 1 ]
//! ```
//!
//! Mode 0 is the most significant tensor factor.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, I, ONE, ZERO};
use crate::model::BosonicModel;

/// Default cap on the number of Liouvillean entries `dim^4`.
pub const DEFAULT_MEMCAP: u128 = 4_000_000;
/// Environment variable overriding [`DEFAULT_MEMCAP`].
pub const MEMCAP_ENV: &str = "THIRDQ_MEMCAP";
/// Largest accepted population of the top Fock level in the steady state.
pub const TOP_LEVEL_TOL: f64 = 1e-8;

/// Memory cap from `THIRDQ_MEMCAP`, falling back to [`DEFAULT_MEMCAP`].
pub fn memory_cap() -> u128 {
    std::env::var(MEMCAP_ENV)
        .ok()
        .and_then(|s| s.trim().parse::<f64>().ok())
        .filter(|v| *v > 0.0)
        .map_or(DEFAULT_MEMCAP, |v| v as u128)
}

/// `max(10, ceil(8 (1 + max occupation)))`
pub fn recommended_cutoff(occupations: &[f64]) -> usize {
    let occ = occupations.iter().cloned().fold(0.0, f64::max);
    ((8.0 * (1.0 + occ)).ceil() as usize).max(10)
}

#[derive(Debug, Clone)]
pub struct FockOperators {
    pub n: usize,
    pub cutoff: usize,
    pub a: Vec<CMat>,
    pub dim: usize,
}

impl FockOperators {
    pub fn ad(&self, j: usize) -> CMat {
        linalg::adjoint(&self.a[j])
    }

    /// Operator for slot `r` of `b = (a_1..a_n, a_1^dag..a_n^dag)`.
    pub fn slot(&self, r: usize) -> CMat {
        if r < self.n {
            self.a[r].clone()
        } else {
            self.ad(r - self.n)
        }
    }

    /// Occupation of mode `j` in basis state `idx`.
    fn level(&self, idx: usize, j: usize) -> usize {
        let stride = self.cutoff.pow((self.n - 1 - j) as u32);
        (idx / stride) % self.cutoff
    }
}

pub fn build_fock_operators(n: usize, cutoff: usize, cap: u128) -> Result<FockOperators> {
    if cutoff < 2 {
        return Err(Error::DimensionMismatch {
            what: "Fock cutoff".into(),
            expected: 2,
            found: cutoff,
        });
    }
    let dim = (cutoff as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    let entries = dim.checked_pow(4).unwrap_or(u128::MAX);
    if entries > cap {
        return Err(Error::DimensionCap { entries, cap });
    }
    let dim = dim as usize;
    let single = faer::Mat::from_fn(cutoff, cutoff, |i, j| {
        if j == i + 1 {
            C64::new((j as f64).sqrt(), 0.0)
        } else {
            ZERO
        }
    });
    let a = (0..n)
        .map(|j| {
            let mut op = linalg::identity(1);
            for mode in 0..n {
                let factor = if mode == j { single.clone() } else { linalg::identity(cutoff) };
                op = linalg::kron(&op, &factor);
            }
            op
        })
        .collect();
    Ok(FockOperators { n, cutoff, a, dim })
}

#[derive(Debug, Clone)]
pub struct DenseLiouvillean {
    pub dim: usize,
    pub lmat: CMat,
}

/// Hamiltonian operator including linear forces.
pub fn hamiltonian_operator(model: &BosonicModel, ops: &FockOperators) -> CMat {
    let n = model.n;
    let mut h = linalg::zeros(ops.dim, ops.dim);
    let ad: Vec<CMat> = (0..n).map(|j| ops.ad(j)).collect();
    for j in 0..n {
        for k in 0..n {
            let hjk = model.h[(j, k)];
            if hjk != ZERO {
                h = &h + &linalg::scale(&(&ad[j] * &ops.a[k]), hjk);
            }
            let kjk = model.k[(j, k)];
            if kjk != ZERO {
                h = &h + &linalg::scale(&(&ops.a[j] * &ops.a[k]), kjk);
                h = &h + &linalg::scale(&(&ad[j] * &ad[k]), kjk.conj());
            }
        }
    }
    if let Some(f) = &model.forces {
        for j in 0..n {
            h = &h + &linalg::scale(&ops.a[j], f[j]);
            h = &h + &linalg::scale(&ad[j], f[j].conj());
        }
    }
    h
}

/// Jump operators `L_mu = l.a + k.a^dag + lambda_mu`.
pub fn jump_operators(model: &BosonicModel, ops: &FockOperators) -> Vec<CMat> {
    model
        .channels
        .iter()
        .enumerate()
        .map(|(mu, ch)| {
            let mut l = linalg::scale(&linalg::identity(ops.dim), model.offset(mu));
            for j in 0..model.n {
                if ch.l[j] != ZERO {
                    l = &l + &linalg::scale(&ops.a[j], ch.l[j]);
                }
                if ch.k[j] != ZERO {
                    l = &l + &linalg::scale(&ops.ad(j), ch.k[j]);
                }
            }
            l
        })
        .collect()
}

pub fn build_liouvillean_matrix(model: &BosonicModel, ops: &FockOperators) -> Result<DenseLiouvillean> {
    if model.n != ops.n {
        return Err(Error::DimensionMismatch {
            what: "oracle modes".into(),
            expected: model.n,
            found: ops.n,
        });
    }
    let dim = ops.dim;
    let id = linalg::identity(dim);
    let h = hamiltonian_operator(model, ops);
    let mut lmat = linalg::scale(
        &(&linalg::kron(&id, &h) - &linalg::kron(&linalg::transpose(&h), &id)),
        -I,
    );
    for l in jump_operators(model, ops) {
        let ldl = &linalg::adjoint(&l) * &l;
        let jump = linalg::scale(&linalg::kron(&linalg::conj(&l), &l), C64::new(2.0, 0.0));
        lmat = &lmat + &jump;
        lmat = &lmat - &linalg::kron(&id, &ldl);
        lmat = &lmat - &linalg::kron(&linalg::transpose(&ldl), &id);
    }
    Ok(DenseLiouvillean { dim, lmat })
}

fn vec_index(dim: usize, i: usize, j: usize) -> usize {
    i + j * dim
}

pub fn vectorize(rho: &CMat) -> Vec<C64> {
    let dim = rho.nrows();
    let mut v = vec![ZERO; dim * dim];
    for j in 0..dim {
        for i in 0..dim {
            v[vec_index(dim, i, j)] = rho[(i, j)];
        }
    }
    v
}

pub fn unvectorize(v: &[C64], dim: usize) -> CMat {
    faer::Mat::from_fn(dim, dim, |i, j| v[vec_index(dim, i, j)])
}

/// `|vec(1)^dag Lmat|_2 / |Lmat|_F`
pub fn trace_preservation_residual(l: &DenseLiouvillean) -> f64 {
    let dim = l.dim;
    let cols = l.lmat.ncols();
    let mut acc = 0.0;
    for c in 0..cols {
        let s: C64 = (0..dim).map(|i| l.lmat[(vec_index(dim, i, i), c)]).sum();
        acc += s.norm_sqr();
    }
    acc.sqrt() / linalg::frob(&l.lmat).max(f64::MIN_POSITIVE)
}

/// `tr(A rho)`
pub fn expect(op: &CMat, rho: &CMat) -> C64 {
    let d = rho.nrows();
    let mut acc = ZERO;
    for i in 0..d {
        for k in 0..d {
            acc += op[(i, k)] * rho[(k, i)];
        }
    }
    acc
}

/// Normal-ordered product of the given `b` slots: creation operators to the
/// left of annihilation operators.
pub fn normal_ordered(ops: &FockOperators, slots: &[usize]) -> CMat {
    let mut order: Vec<usize> = slots.to_vec();
    order.sort_by_key(|&r| if r >= ops.n { 0 } else { 1 });
    let mut acc = linalg::identity(ops.dim);
    for r in order {
        acc = &acc * &ops.slot(r);
    }
    acc
}

/// Table `T_{rs} = tr(:b_r b_s: rho)`, laid out like `Z`.
pub fn correlator_table(ops: &FockOperators, rho: &CMat) -> CMat {
    let d = 2 * ops.n;
    let mut t = linalg::zeros(d, d);
    for r in 0..d {
        for s in r..d {
            let v = expect(&normal_ordered(ops, &[r, s]), rho);
            t[(r, s)] = v;
            t[(s, r)] = v;
        }
    }
    t
}

/// `tr(b_r rho)` for all slots.
pub fn mean_vector(ops: &FockOperators, rho: &CMat) -> Vec<C64> {
    (0..2 * ops.n).map(|r| expect(&ops.slot(r), rho)).collect()
}

/// Population of basis states with any mode at the top level.
pub fn top_level_population(ops: &FockOperators, rho: &CMat) -> f64 {
    let tr: f64 = (0..ops.dim).map(|i| rho[(i, i)].re).sum();
    let top: f64 = (0..ops.dim)
        .filter(|&i| (0..ops.n).any(|j| ops.level(i, j) == ops.cutoff - 1))
        .map(|i| rho[(i, i)].re)
        .sum();
    top / tr
}

#[derive(Debug, Clone)]
pub struct OracleSteadyState {
    pub rho: CMat,
    /// Connected correlators `tr(:b_r b_s: rho) - <b_r><b_s>`, laid out like `Z`.
    pub correlators: CMat,
    /// Raw normal-ordered correlators.
    pub raw_correlators: CMat,
    pub mean: Vec<C64>,
    pub top_population: f64,
}

impl OracleSteadyState {
    /// `tr(a_j^dag a_j^dag a_j a_j rho)`
    pub fn ad2a2(&self, ops: &FockOperators, j: usize) -> C64 {
        expect(&normal_ordered(ops, &[j, j, ops.n + j, ops.n + j]), &self.rho)
    }
}

/// Null vector of `Lmat` (the steady state), Hermitized and trace-normalized.
///
/// Solved as a bordered linear system: the first equation, which is
/// redundant by trace preservation, is replaced by `tr rho = 1`.
pub fn oracle_steady_state(l: &DenseLiouvillean, ops: &FockOperators) -> Result<OracleSteadyState> {
    let dim = l.dim;
    let size = dim * dim;
    let mut a = l.lmat.clone();
    for c in 0..size {
        a[(0, c)] = ZERO;
    }
    for i in 0..dim {
        a[(0, vec_index(dim, i, i))] = ONE;
    }
    let mut rhs = linalg::zeros(size, 1);
    rhs[(0, 0)] = ONE;
    let x = linalg::solve(&a, &rhs);
    let v: Vec<C64> = (0..size).map(|i| x[(i, 0)]).collect();
    let vnorm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if !vnorm.is_finite() || vnorm > 1e12 {
        return Err(Error::DegenerateZeroEigenvalue);
    }
    let lv = linalg::matvec(&l.lmat, &v);
    let res = lv.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if res > 1e-8 * linalg::frob(&l.lmat).max(1.0) * vnorm {
        return Err(Error::DegenerateZeroEigenvalue);
    }
    let rho = unvectorize(&v, dim);
    let rho = linalg::scale(&(&rho + &linalg::adjoint(&rho)), C64::new(0.5, 0.0));
    let tr = linalg::trace(&rho);
    let rho = linalg::scale(&rho, ONE / tr);

    let top_population = top_level_population(ops, &rho);
    if top_population > TOP_LEVEL_TOL {
        return Err(Error::TruncationInsufficient {
            population: top_population,
        });
    }
    let raw = correlator_table(ops, &rho);
    let mean = mean_vector(ops, &rho);
    let correlators = faer::Mat::from_fn(raw.nrows(), raw.ncols(), |r, s| raw[(r, s)] - mean[r] * mean[s]);
    Ok(OracleSteadyState {
        rho,
        correlators,
        raw_correlators: raw,
        mean,
        top_population,
    })
}

/// Leading `count` eigenvalues of `Lmat`, sorted by real part descending
/// (ties by imaginary part ascending).
pub fn oracle_spectrum(l: &DenseLiouvillean, count: usize) -> Result<Vec<C64>> {
    let mut ev = linalg::eigenvalues(&l.lmat)?;
    ev.sort_by(|a, b| b.re.total_cmp(&a.re).then(a.im.total_cmp(&b.im)));
    ev.truncate(count);
    Ok(ev)
}

/// `rho(t) = exp(Lmat t) rho0` on an ascending time grid.
///
/// Propagators `exp(Lmat dt)` are cached per distinct increment, so uniform
/// grids cost one dense exponential.
pub fn oracle_evolve(l: &DenseLiouvillean, rho0: &CMat, times: &[f64]) -> Result<Vec<CMat>> {
    if times.windows(2).any(|w| !(w[0] <= w[1])) || times.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(Error::UnsortedTimes);
    }
    let mut cache: Vec<(f64, CMat)> = Vec::new();
    let mut cur = vectorize(rho0);
    let mut prev = 0.0;
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        let dt = t - prev;
        if dt > 0.0 {
            let tol = 1e-12 * dt.max(1.0);
            let idx = match cache.iter().position(|(d, _)| (d - dt).abs() <= tol) {
                Some(i) => i,
                None => {
                    cache.push((dt, linalg::expm(&linalg::scale(&l.lmat, C64::new(dt, 0.0)))));
                    cache.len() - 1
                }
            };
            cur = linalg::matvec(&cache[idx].1, &cur);
            prev = t;
        }
        out.push(unvectorize(&cur, l.dim));
    }
    Ok(out)
}

/// Vacuum density matrix `|0><0|`.
pub fn vacuum(ops: &FockOperators) -> CMat {
    let mut rho = linalg::zeros(ops.dim, ops.dim);
    rho[(0, 0)] = ONE;
    rho
}
