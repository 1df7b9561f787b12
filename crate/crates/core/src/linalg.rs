//! Dense complex helpers on top of `faer`.
//!
//! Most factorizations (LU, SVD, general eigendecomposition) come from faer.
//! The complex Schur form and the matrix exponential are implemented here:
//! faer exposes neither at a convenient level, and the Schur route must stay
//! independent of the eigensolver so the two Lyapunov solvers cross-check
//! each other.

use faer::linalg::solvers::{DenseSolveCore, Solve};
use faer::Mat;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

pub type CMat = Mat<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

pub fn zeros(r: usize, c: usize) -> CMat {
    Mat::from_fn(r, c, |_, _| ZERO)
}

pub fn identity(n: usize) -> CMat {
    Mat::from_fn(n, n, |i, j| if i == j { ONE } else { ZERO })
}

pub fn from_rows(rows: &[Vec<C64>]) -> CMat {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    Mat::from_fn(r, c, |i, j| rows[i][j])
}

pub fn to_rows(m: &CMat) -> Vec<Vec<C64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

pub fn diag(values: &[C64]) -> CMat {
    let n = values.len();
    Mat::from_fn(n, n, |i, j| if i == j { values[i] } else { ZERO })
}

pub fn frob(m: &CMat) -> f64 {
    let mut acc = 0.0;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            acc += m[(i, j)].norm_sqr();
        }
    }
    acc.sqrt()
}

/// Induced 1-norm (max column sum).
pub fn norm1(m: &CMat) -> f64 {
    (0..m.ncols())
        .map(|j| (0..m.nrows()).map(|i| m[(i, j)].norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn transpose(m: &CMat) -> CMat {
    m.transpose().to_owned()
}

pub fn conj(m: &CMat) -> CMat {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)].conj())
}

pub fn adjoint(m: &CMat) -> CMat {
    Mat::from_fn(m.ncols(), m.nrows(), |i, j| m[(j, i)].conj())
}

pub fn scale(m: &CMat, c: C64) -> CMat {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| c * m[(i, j)])
}

pub fn add(a: &CMat, b: &CMat) -> CMat {
    a + b
}

pub fn sub(a: &CMat, b: &CMat) -> CMat {
    a - b
}

pub fn matmul(a: &CMat, b: &CMat) -> CMat {
    a * b
}

/// (A + A^T) / 2
pub fn symmetrize(m: &CMat) -> CMat {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| (m[(i, j)] + m[(j, i)]) * 0.5)
}

/// |A - A^T|_F
pub fn asymmetry(m: &CMat) -> f64 {
    let mut acc = 0.0;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            acc += (m[(i, j)] - m[(j, i)]).norm_sqr();
        }
    }
    acc.sqrt()
}

/// Assemble `[[a, b], [c, d]]`.
pub fn block2(a: &CMat, b: &CMat, c: &CMat, d: &CMat) -> CMat {
    let (r0, c0) = (a.nrows(), a.ncols());
    let rows = r0 + c.nrows();
    let cols = c0 + b.ncols();
    Mat::from_fn(rows, cols, |i, j| match (i < r0, j < c0) {
        (true, true) => a[(i, j)],
        (true, false) => b[(i, j - c0)],
        (false, true) => c[(i - r0, j)],
        (false, false) => d[(i - r0, j - c0)],
    })
}

/// Extract the `rows x cols` block starting at `(r, c)`.
pub fn block(m: &CMat, r: usize, c: usize, rows: usize, cols: usize) -> CMat {
    Mat::from_fn(rows, cols, |i, j| m[(r + i, c + j)])
}

pub fn direct_sum(a: &CMat, b: &CMat) -> CMat {
    block2(a, &zeros(a.nrows(), b.ncols()), &zeros(b.nrows(), a.ncols()), b)
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    let (br, bc) = (b.nrows(), b.ncols());
    Mat::from_fn(a.nrows() * br, a.ncols() * bc, |i, j| {
        a[(i / br, j / bc)] * b[(i % br, j % bc)]
    })
}

pub fn trace(m: &CMat) -> C64 {
    (0..m.nrows().min(m.ncols())).map(|i| m[(i, i)]).sum()
}

pub fn max_abs(m: &CMat) -> f64 {
    let mut acc: f64 = 0.0;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            acc = acc.max(m[(i, j)].norm());
        }
    }
    acc
}

pub fn is_finite(m: &CMat) -> bool {
    (0..m.ncols()).all(|j| (0..m.nrows()).all(|i| m[(i, j)].is_finite()))
}

pub fn inverse(m: &CMat) -> CMat {
    m.partial_piv_lu().inverse()
}

/// Solve `A x = b` for a square `A`.
pub fn solve(a: &CMat, b: &CMat) -> CMat {
    a.partial_piv_lu().solve(b)
}

pub fn matvec(a: &CMat, v: &[C64]) -> Vec<C64> {
    let mut out = vec![ZERO; a.nrows()];
    for j in 0..a.ncols() {
        let vj = v[j];
        if vj == ZERO {
            continue;
        }
        for (i, o) in out.iter_mut().enumerate() {
            *o += a[(i, j)] * vj;
        }
    }
    out
}

/// 2-norm condition number from singular values.
pub fn cond2(m: &CMat) -> f64 {
    match m.singular_values() {
        Ok(s) if !s.is_empty() => {
            let smax = s[0];
            let smin = s[s.len() - 1];
            if smin == 0.0 {
                f64::INFINITY
            } else {
                smax / smin
            }
        }
        _ => f64::INFINITY,
    }
}

/// General complex eigendecomposition `A = P diag(w) P^{-1}`, with unit-norm
/// eigenvector columns.
pub fn eig(m: &CMat) -> Result<(Vec<C64>, CMat)> {
    let e = m.eigen().map_err(|_| Error::NoConvergence)?;
    let s = e.S().column_vector();
    let u = e.U();
    let n = m.nrows();
    let w: Vec<C64> = (0..n).map(|i| s[i]).collect();
    let mut p = Mat::from_fn(n, n, |i, j| u[(i, j)]);
    for j in 0..n {
        let nrm = (0..n).map(|i| p[(i, j)].norm_sqr()).sum::<f64>().sqrt();
        if nrm > 0.0 {
            for i in 0..n {
                p[(i, j)] /= nrm;
            }
        }
    }
    Ok((w, p))
}

pub fn eigenvalues(m: &CMat) -> Result<Vec<C64>> {
    m.eigenvalues().map_err(|_| Error::NoConvergence)
}

/// Complex Schur decomposition `A = Q T Q^dag` with `T` upper triangular.
///
/// Householder reduction to Hessenberg form followed by single-shift QR
/// sweeps with Wilkinson shifts. Intended for the small `2n x 2n` structure
/// matrices.
pub fn schur(a: &CMat) -> Result<(CMat, CMat)> {
    let n = a.nrows();
    let mut h = a.clone();
    let mut q = identity(n);
    if n <= 1 {
        return Ok((q, h));
    }

    for k in 0..n.saturating_sub(2) {
        let xnorm = ((k + 1)..n).map(|i| h[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        if xnorm == 0.0 {
            continue;
        }
        let x0 = h[(k + 1, k)];
        let phase = if x0.norm() == 0.0 { ONE } else { x0 / x0.norm() };
        let alpha = -phase * xnorm;
        let mut v: Vec<C64> = ((k + 1)..n).map(|i| h[(i, k)]).collect();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        let tau = 2.0 / vnorm2;
        // H <- (I - tau v v^dag) H
        for j in 0..n {
            let mut s = ZERO;
            for (idx, vi) in v.iter().enumerate() {
                s += vi.conj() * h[(k + 1 + idx, j)];
            }
            s *= tau;
            for (idx, vi) in v.iter().enumerate() {
                h[(k + 1 + idx, j)] -= vi * s;
            }
        }
        // H <- H (I - tau v v^dag), Q <- Q (I - tau v v^dag)
        for m in [&mut h, &mut q] {
            for i in 0..n {
                let mut s = ZERO;
                for (idx, vi) in v.iter().enumerate() {
                    s += m[(i, k + 1 + idx)] * vi;
                }
                s *= tau;
                for (idx, vi) in v.iter().enumerate() {
                    m[(i, k + 1 + idx)] -= s * vi.conj();
                }
            }
        }
        for i in (k + 2)..n {
            h[(i, k)] = ZERO;
        }
    }

    let eps = f64::EPSILON;
    let mut hi = n - 1;
    let mut iter_since_deflation = 0usize;
    let max_iter = 100 * n;
    let mut total_iter = 0usize;
    while hi > 0 {
        // locate the active window [lo, hi]
        let mut lo = hi;
        while lo > 0 {
            let sub = h[(lo, lo - 1)].norm();
            let scale = h[(lo, lo)].norm() + h[(lo - 1, lo - 1)].norm();
            let scale = if scale == 0.0 { 1.0 } else { scale };
            if sub <= eps * scale {
                h[(lo, lo - 1)] = ZERO;
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            hi -= 1;
            iter_since_deflation = 0;
            continue;
        }
        total_iter += 1;
        iter_since_deflation += 1;
        if total_iter > max_iter {
            return Err(Error::NoConvergence);
        }

        let shift = if iter_since_deflation % 11 == 10 {
            // exceptional shift
            h[(hi, hi)] + h[(hi, hi - 1)].norm() * C64::new(0.75, 0.5)
        } else {
            wilkinson_shift(h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)])
        };

        let mut x = h[(lo, lo)] - shift;
        let mut y = h[(lo + 1, lo)];
        for k in lo..hi {
            let (c, s) = givens(x, y);
            let col_start = if k == lo { lo } else { k - 1 };
            for j in col_start..n {
                let a0 = h[(k, j)];
                let b0 = h[(k + 1, j)];
                h[(k, j)] = c * a0 + s * b0;
                h[(k + 1, j)] = -s.conj() * a0 + c * b0;
            }
            let row_end = (k + 2).min(hi);
            for i in 0..=row_end {
                let a0 = h[(i, k)];
                let b0 = h[(i, k + 1)];
                h[(i, k)] = a0 * c + b0 * s.conj();
                h[(i, k + 1)] = -a0 * s + b0 * c;
            }
            for i in 0..n {
                let a0 = q[(i, k)];
                let b0 = q[(i, k + 1)];
                q[(i, k)] = a0 * c + b0 * s.conj();
                q[(i, k + 1)] = -a0 * s + b0 * c;
            }
            if k + 1 < hi {
                x = h[(k + 1, k)];
                y = h[(k + 2, k)];
            }
        }
    }
    for j in 0..n {
        for i in (j + 1)..n {
            h[(i, j)] = ZERO;
        }
    }
    Ok((q, h))
}

/// Rotation `[[c, s], [-conj(s), c]]` mapping `(x, y)` to `(r, 0)`.
fn givens(x: C64, y: C64) -> (C64, C64) {
    let ax = x.norm();
    let ay = y.norm();
    if ay == 0.0 {
        return (ONE, ZERO);
    }
    if ax == 0.0 {
        return (ZERO, y.conj() / ay);
    }
    let r = ax.hypot(ay);
    let c = ax / r;
    let s = (x / ax) * y.conj() / r;
    (C64::new(c, 0.0), s)
}

fn wilkinson_shift(a: C64, b: C64, c: C64, d: C64) -> C64 {
    let tr_half = (a + d) * 0.5;
    let det = a * d - b * c;
    let disc = (tr_half * tr_half - det).sqrt();
    let l1 = tr_half + disc;
    let l2 = tr_half - disc;
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA13: f64 = 5.371920351148152;

fn lincomb(terms: &[(f64, &CMat)], n: usize) -> CMat {
    let mut out = zeros(n, n);
    for &(c, m) in terms {
        for j in 0..n {
            for i in 0..n {
                out[(i, j)] += m[(i, j)] * c;
            }
        }
    }
    out
}

/// Matrix exponential by scaling and squaring with a degree-13 Pade
/// approximant.
pub fn expm(a: &CMat) -> CMat {
    let n = a.nrows();
    if n == 0 {
        return zeros(0, 0);
    }
    let nrm = norm1(a);
    let s = if nrm > THETA13 {
        (nrm / THETA13).log2().ceil().max(0.0) as i32
    } else {
        0
    };
    let a = scale(a, C64::new(2f64.powi(-s), 0.0));
    let id = identity(n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let b = &PADE13;

    let inner_u = lincomb(&[(b[13], &a6), (b[11], &a4), (b[9], &a2)], n);
    let u_poly = &a6 * &inner_u + lincomb(&[(b[7], &a6), (b[5], &a4), (b[3], &a2), (b[1], &id)], n);
    let u = &a * &u_poly;
    let inner_v = lincomb(&[(b[12], &a6), (b[10], &a4), (b[8], &a2)], n);
    let v = &a6 * &inner_v + lincomb(&[(b[6], &a6), (b[4], &a4), (b[2], &a2), (b[0], &id)], n);

    let p = &v + &u;
    let qm = &v - &u;
    let mut r = solve(&qm, &p);
    for _ in 0..s {
        r = &r * &r;
    }
    r
}
