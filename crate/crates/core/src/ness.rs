//! Physical observables of the steady state and transient moment dynamics.
//!
//! Correlator convention: `b = (a_1..a_n, a_1^dag..a_n^dag)` and
//! `Z_{rs} = <:b_r b_s:>`, so `Z_{j, n+k} = <a_k^dag a_j>`.
//!
//! Dynamics of the connected normal-ordered correlator `C` and the mean
//! `m = <b>`:
//!
//! ```text
//! dC/dt = 2 (Y - X^T C - C X)
//! dm/dt = -2 X^T m + g
//! ```
//!
//! Both are checked against the truncated-Fock oracle in the test suite.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::linalg::{self, CMat, I, ZERO};
use crate::model::BosonicModel;
use crate::spectral::Stability;

const SYMMETRY_TOL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct NessSolution {
    pub z: CMat,
    /// `<a_j a_k>`
    pub pair_aa: CMat,
    /// `<a_j^dag a_k^dag>`
    pub pair_adad: CMat,
    /// `normal_ad_a[(j, k)] = <a_k^dag a_j>`
    pub normal_ad_a: CMat,
    /// `<a_j^dag a_j>`
    pub occupations: Vec<f64>,
}

fn check_symmetric(z: &CMat) -> Result<()> {
    let dev = linalg::asymmetry(z);
    if dev > SYMMETRY_TOL * linalg::frob(z).max(1.0) {
        return Err(Error::AsymmetricZ(dev));
    }
    Ok(())
}

pub fn physical_correlators(z: &CMat, n: usize) -> Result<NessSolution> {
    if z.nrows() != 2 * n || z.ncols() != 2 * n {
        return Err(Error::DimensionMismatch {
            what: "correlator matrix".into(),
            expected: 2 * n,
            found: z.nrows(),
        });
    }
    check_symmetric(z)?;
    Ok(NessSolution {
        z: z.clone(),
        pair_aa: linalg::block(z, 0, 0, n, n),
        pair_adad: linalg::block(z, n, n, n, n),
        normal_ad_a: linalg::block(z, 0, n, n, n),
        occupations: (0..n).map(|j| z[(j, n + j)].re).collect(),
    })
}

/// Normal-ordered Gaussian 4-point moment
/// `<:b_p b_q b_r b_s:> = Z_pq Z_rs + Z_pr Z_qs + Z_ps Z_qr`.
pub fn wick_moment(z: &CMat, idx: [usize; 4]) -> Result<C64> {
    let len = z.nrows();
    if let Some(&bad) = idx.iter().find(|&&i| i >= len) {
        return Err(Error::IndexOutOfRange { index: bad, len });
    }
    let [p, q, r, s] = idx;
    Ok(z[(p, q)] * z[(r, s)] + z[(p, r)] * z[(q, s)] + z[(p, s)] * z[(q, r)])
}

/// [`wick_moment`] for a displaced Gaussian state with connected
/// correlators `c` and means `m`.
pub fn wick_moment_displaced(c: &CMat, m: &[C64], idx: [usize; 4]) -> Result<C64> {
    let connected = wick_moment(c, idx)?;
    if m.len() != c.nrows() {
        return Err(Error::DimensionMismatch {
            what: "mean vector".into(),
            expected: c.nrows(),
            found: m.len(),
        });
    }
    let mut acc = connected + idx.iter().map(|&i| m[i]).product::<C64>();
    for a in 0..4 {
        for b in a + 1..4 {
            let rest: C64 = (0..4).filter(|&k| k != a && k != b).map(|k| m[idx[k]]).product();
            acc += c[(idx[a], idx[b])] * rest;
        }
    }
    Ok(acc)
}

#[derive(Debug, Clone)]
pub struct CovarianceTrajectory {
    pub times: Vec<f64>,
    pub c: Vec<CMat>,
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.windows(2).any(|w| !(w[0] <= w[1])) || times.iter().any(|t| !t.is_finite()) {
        return Err(Error::UnsortedTimes);
    }
    Ok(())
}

/// Evolve the connected normal-ordered correlator.
///
/// With a known fixed point `Z` (stable spectrum) this is
/// `C(t) = Z + E^T (C0 - Z) E`, `E = exp(-2 X t)`. Without one, the forced
/// term is integrated exactly through the block exponential of
/// `2t [[-X^T, Y], [0, X]]`.
pub fn covariance_trajectory(
    x: &CMat,
    y: &CMat,
    c0: &CMat,
    times: &[f64],
    fixed_point: Option<&CMat>,
    exec: Execution,
) -> Result<CovarianceTrajectory> {
    let dev = linalg::asymmetry(c0);
    if dev > SYMMETRY_TOL * linalg::frob(c0).max(1.0) {
        return Err(Error::NonSymmetricInitial(dev));
    }
    check_times(times)?;
    let d = x.nrows();
    let c = exec.map(times, |&t| {
        if t == 0.0 {
            return linalg::symmetrize(c0);
        }
        let e = linalg::expm(&linalg::scale(x, C64::new(-2.0 * t, 0.0)));
        let et = linalg::transpose(&e);
        let out = match fixed_point {
            Some(z) => z + &(&(&et * &(c0 - z)) * &e),
            None => {
                let js = linalg::block2(
                    &linalg::scale(&linalg::transpose(x), C64::new(-1.0, 0.0)),
                    y,
                    &linalg::zeros(d, d),
                    x,
                );
                let big = linalg::expm(&linalg::scale(&js, C64::new(2.0 * t, 0.0)));
                let forced = &linalg::block(&big, 0, d, d, d) * &e;
                &(&(&et * c0) * &e) + &forced
            }
        };
        linalg::symmetrize(&out)
    });
    Ok(CovarianceTrajectory {
        times: times.to_vec(),
        c,
    })
}

/// Source vector `g` of the mean equation, from the forces `f` and channel
/// offsets `lambda`:
/// `g_j = -i conj(f_j) + sum_mu (k_mu,j conj(lambda_mu) - conj(l_mu,j) lambda_mu)`,
/// `g_{n+j} = conj(g_j)`.
pub fn mean_source(model: &BosonicModel) -> Vec<C64> {
    let n = model.n;
    let mut g = vec![ZERO; 2 * n];
    if let Some(f) = &model.forces {
        for j in 0..n {
            g[j] += -I * f[j].conj();
        }
    }
    for (mu, ch) in model.channels.iter().enumerate() {
        let lam = model.offset(mu);
        if lam == ZERO {
            continue;
        }
        for j in 0..n {
            g[j] += ch.k[j] * lam.conj() - ch.l[j].conj() * lam;
        }
    }
    for j in 0..n {
        g[n + j] = g[j].conj();
    }
    g
}

/// `m(t)` for `dm/dt = -2 X^T m + g`, via the exponential of the augmented
/// generator `[[-2 X^T, g], [0, 0]]`.
pub fn mean_trajectory(
    x: &CMat,
    g: &[C64],
    m0: &[C64],
    times: &[f64],
    exec: Execution,
) -> Result<Vec<Vec<C64>>> {
    let d = x.nrows();
    if g.len() != d || m0.len() != d {
        return Err(Error::DimensionMismatch {
            what: "mean vector".into(),
            expected: d,
            found: if g.len() != d { g.len() } else { m0.len() },
        });
    }
    check_times(times)?;
    let xt = linalg::transpose(x);
    let gen = faer::Mat::from_fn(d + 1, d + 1, |i, j| {
        if i < d && j < d {
            xt[(i, j)] * -2.0
        } else if i < d {
            g[i]
        } else {
            ZERO
        }
    });
    let mut aug = m0.to_vec();
    aug.push(linalg::ONE);
    Ok(exec.map(times, |&t| {
        if t == 0.0 {
            return m0.to_vec();
        }
        let prop = linalg::expm(&linalg::scale(&gen, C64::new(t, 0.0)));
        let v = linalg::matvec(&prop, &aug);
        v[..d].to_vec()
    }))
}

/// Steady mean `m*` with `2 X^T m* = g`.
pub fn steady_mean(x: &CMat, g: &[C64], stability: Stability) -> Result<Vec<C64>> {
    if stability != Stability::Stable {
        return Err(Error::NotStable(stability));
    }
    let d = x.nrows();
    let a = linalg::scale(&linalg::transpose(x), C64::new(2.0, 0.0));
    let rhs = faer::Mat::from_fn(d, 1, |i, _| g[i]);
    let sol = linalg::solve(&a, &rhs);
    Ok((0..d).map(|i| sol[(i, 0)]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::from_rows;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn section4() -> (CMat, CMat, CMat) {
        let x = from_rows(&[vec![c(0.25, 0.5), ZERO], vec![ZERO, c(0.25, -0.5)]]);
        let y = from_rows(&[vec![c(-0.25, 0.0), c(0.5, 0.0)], vec![c(0.5, 0.0), c(-0.25, 0.0)]]);
        let z = from_rows(&[vec![c(-0.1, 0.2), c(1.0, 0.0)], vec![c(1.0, 0.0), c(-0.1, -0.2)]]);
        (x, y, z)
    }

    #[test]
    fn correlators_of_single_oscillator() {
        let (_, _, z) = section4();
        let s = physical_correlators(&z, 1).unwrap();
        assert_eq!(s.occupations, vec![1.0]);
        assert_eq!(s.pair_aa[(0, 0)], c(-0.1, 0.2));
        assert_eq!(s.pair_adad[(0, 0)], c(-0.1, -0.2));
        let zero = physical_correlators(&linalg::zeros(4, 4), 2).unwrap();
        assert!(zero.occupations.iter().all(|&o| o == 0.0));
        assert_eq!(linalg::frob(&zero.pair_aa), 0.0);
    }

    #[test]
    fn asymmetric_z_rejected() {
        let (_, _, mut z) = section4();
        z[(0, 1)] += c(1e-3, 0.0);
        assert!(matches!(physical_correlators(&z, 1), Err(Error::AsymmetricZ(_))));
    }

    #[test]
    fn displaced_thermal_four_point() {
        // thermal occupation nb displaced by alpha:
        // <a^dag^2 a^2> = 2 nb^2 + 4 nb |alpha|^2 + |alpha|^4
        let (nb, alpha) = (0.7, c(0.3, -1.1));
        let cm = from_rows(&[vec![ZERO, c(nb, 0.0)], vec![c(nb, 0.0), ZERO]]);
        let m = [alpha, alpha.conj()];
        let v = wick_moment_displaced(&cm, &m, [0, 0, 1, 1]).unwrap();
        let a2 = alpha.norm_sqr();
        assert!((v - c(2.0 * nb * nb + 4.0 * nb * a2 + a2 * a2, 0.0)).norm() < 1e-13);
        let zero_mean = wick_moment_displaced(&cm, &[ZERO, ZERO], [0, 0, 1, 1]).unwrap();
        assert_eq!(zero_mean, wick_moment(&cm, [0, 0, 1, 1]).unwrap());
    }

    #[test]
    fn wick_four_point() {
        let (_, _, z) = section4();
        // <a^dag a^dag a a> with b = (a, a^dag): normal-ordered slots (0, 0, 1, 1)
        let v = wick_moment(&z, [0, 0, 1, 1]).unwrap();
        assert!((v - c(2.05, 0.0)).norm() < 1e-14);
        assert_eq!(wick_moment(&linalg::zeros(2, 2), [0, 1, 0, 1]).unwrap(), ZERO);
        assert!(matches!(wick_moment(&z, [0, 0, 2, 1]), Err(Error::IndexOutOfRange { index: 2, len: 2 })));
    }

    #[test]
    fn wick_symmetric_under_slot_permutations() {
        let z = from_rows(&[
            vec![c(0.3, 0.1), c(1.2, 0.0), c(0.2, -0.4)],
            vec![c(1.2, 0.0), c(-0.7, 0.5), c(0.05, 0.0)],
            vec![c(0.2, -0.4), c(0.05, 0.0), c(0.9, 0.9)],
        ]);
        let base = [0usize, 1, 2, 2];
        let reference = wick_moment(&z, base).unwrap();
        let perms = [
            [0, 1, 2, 3], [1, 0, 2, 3], [2, 3, 0, 1], [3, 2, 1, 0], [0, 2, 1, 3], [1, 3, 2, 0],
        ];
        for p in perms {
            let idx = [base[p[0]], base[p[1]], base[p[2]], base[p[3]]];
            assert!((wick_moment(&z, idx).unwrap() - reference).norm() < 1e-14);
        }
    }

    #[test]
    fn fixed_point_is_stationary() {
        let (x, y, z) = section4();
        let traj = covariance_trajectory(&x, &y, &z, &[0.0, 1.0, 7.5], Some(&z), Execution::Sequential).unwrap();
        for ct in &traj.c {
            assert!(linalg::frob(&(ct - &z)) < 1e-14);
        }
        let traj = covariance_trajectory(&x, &y, &z, &[0.0, 1.0, 7.5], None, Execution::Sequential).unwrap();
        for ct in &traj.c {
            assert!(linalg::frob(&(ct - &z)) < 1e-13);
        }
    }

    #[test]
    fn vacuum_occupation_relaxes_at_twice_the_gap() {
        // scalar mode equation: dn/dt = 2 v - 2 (u - v) n, n(0) = 0
        let (x, y, z) = section4();
        let times: Vec<f64> = (0..=40).map(|i| i as f64 * 0.5).collect();
        let c0 = linalg::zeros(2, 2);
        let a = covariance_trajectory(&x, &y, &c0, &times, Some(&z), Execution::Parallel).unwrap();
        let b = covariance_trajectory(&x, &y, &c0, &times, None, Execution::Sequential).unwrap();
        for (i, &t) in times.iter().enumerate() {
            let expect = 1.0 - (-t).exp();
            assert!((a.c[i][(0, 1)].re - expect).abs() < 1e-12, "t={t}");
            assert!((b.c[i][(0, 1)].re - expect).abs() < 1e-12, "t={t}");
        }
    }

    #[test]
    fn unstable_covariance_grows() {
        // u = 0.5, v = 1: X = diag(-0.25 + 0.5i, -0.25 - 0.5i), Y = [[0, 1], [1, 0]]
        let x = from_rows(&[vec![c(-0.25, 0.5), ZERO], vec![ZERO, c(-0.25, -0.5)]]);
        let y = from_rows(&[vec![ZERO, c(1.0, 0.0)], vec![c(1.0, 0.0), ZERO]]);
        let times: Vec<f64> = (0..20).map(|i| i as f64).collect();
        let traj = covariance_trajectory(&x, &y, &linalg::zeros(2, 2), &times, None, Execution::Sequential).unwrap();
        let norms: Vec<f64> = traj.c.iter().map(linalg::frob).collect();
        assert!(norms.windows(2).all(|w| w[1] > w[0]));
        assert!(norms[19] > 1e6);
    }

    #[test]
    fn closed_mode_conserves_occupation() {
        let x = from_rows(&[vec![c(0.0, 0.5), ZERO], vec![ZERO, c(0.0, -0.5)]]);
        let c0 = from_rows(&[vec![c(0.3, 0.1), c(2.0, 0.0)], vec![c(2.0, 0.0), c(0.3, -0.1)]]);
        let times: Vec<f64> = (0..50).map(|i| i as f64 * 0.7).collect();
        let traj = covariance_trajectory(&x, &linalg::zeros(2, 2), &c0, &times, None, Execution::Sequential).unwrap();
        for ct in &traj.c {
            assert!((ct[(0, 1)] - c(2.0, 0.0)).norm() < 1e-12);
            assert!((linalg::frob(ct) - linalg::frob(&c0)).abs() < 1e-12);
        }
    }

    #[test]
    fn trajectory_input_errors() {
        let (x, y, _) = section4();
        let bad = from_rows(&[vec![ZERO, c(1.0, 0.0)], vec![ZERO, ZERO]]);
        assert!(matches!(
            covariance_trajectory(&x, &y, &bad, &[0.0], None, Execution::Sequential),
            Err(Error::NonSymmetricInitial(_))
        ));
        assert!(matches!(
            covariance_trajectory(&x, &y, &linalg::zeros(2, 2), &[1.0, 0.0], None, Execution::Sequential),
            Err(Error::UnsortedTimes)
        ));
    }

    #[test]
    fn homogeneous_mean_decays_at_the_gap() {
        let (x, _, _) = section4();
        let g = vec![ZERO; 2];
        let m0 = vec![c(1.0, 0.0), c(1.0, 0.0)];
        let times: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let traj = mean_trajectory(&x, &g, &m0, &times, Execution::Sequential).unwrap();
        for (t, m) in times.iter().zip(&traj) {
            assert!((m[0].norm() - (-0.5 * t).exp()).abs() < 1e-13);
            assert!((m[0] - c(-0.5 * t, -t).exp()).norm() < 1e-13);
        }
        assert_eq!(steady_mean(&x, &g, Stability::Stable).unwrap(), vec![ZERO; 2]);
        assert!(matches!(steady_mean(&x, &g, Stability::Marginal), Err(Error::NotStable(_))));
    }

    #[test]
    fn forced_mean_approaches_fixed_point() {
        let (x, _, _) = section4();
        let g = vec![c(0.3, -0.1), c(0.3, 0.1)];
        let mstar = steady_mean(&x, &g, Stability::Stable).unwrap();
        let traj = mean_trajectory(&x, &g, &[ZERO, ZERO], &[0.0, 10.0, 40.0], Execution::Sequential).unwrap();
        assert_eq!(traj[0], vec![ZERO, ZERO]);
        let d10 = (traj[1][0] - mstar[0]).norm();
        let d40 = (traj[2][0] - mstar[0]).norm();
        assert!(d40 < 1e-8);
        // rate at least the gap 0.5
        assert!(d10 <= mstar[0].norm() * (-0.5f64 * 10.0).exp() * (1.0 + 1e-9));
    }
}
