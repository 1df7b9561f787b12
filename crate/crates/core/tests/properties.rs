mod common;

use num_complex::Complex64 as C64;
use proptest::prelude::*;

use common::*;
use thirdq::analysis::{analyze, Tolerances};
use thirdq::linalg::{self, CMat};
use thirdq::lyapunov;
use thirdq::spectral::{self, mode_count, DEFAULT_MODE_LIMIT, DEFAULT_TOL_MARGINAL};
use thirdq::{BosonicModel, Execution, LindbladChannel, Stability};

/// Distance between two multisets, pairing each entry with its nearest
/// unused partner.
fn multiset_dist(a: &[C64], b: &[C64]) -> f64 {
    let mut used = vec![false; b.len()];
    let mut worst = 0.0f64;
    for x in a {
        let (k, d) = b
            .iter()
            .enumerate()
            .filter(|(k, _)| !used[*k])
            .map(|(k, y)| (k, (x - y).norm()))
            .min_by(|p, q| p.1.total_cmp(&q.1))
            .unwrap();
        used[k] = true;
        worst = worst.max(d);
    }
    worst
}

fn max_dist(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Multiply every rate by `s`: `H, K -> s H, s K`, amplitudes by `sqrt(s)`.
fn rescale(m: &BosonicModel, s: f64) -> BosonicModel {
    let r = s.sqrt();
    let channels = m
        .channels
        .iter()
        .map(|ch| {
            LindbladChannel::new(
                ch.l.iter().map(|z| z * r).collect(),
                ch.k.iter().map(|z| z * r).collect(),
            )
        })
        .collect();
    BosonicModel::new(linalg::scale(&m.h, c(s, 0.0)), channels).with_k(linalg::scale(&m.k, c(s, 0.0)))
}

/// Random unitary: Cayley transform of a random Hermitian matrix.
fn unitary(seed: u64, n: usize) -> CMat {
    let mut r = rng(seed);
    let a = random_model(&mut r, n).h;
    let id = linalg::identity(n);
    let ia = linalg::scale(&a, c(0.0, 1.0));
    &linalg::inverse(&(&id + &ia)) * &(&id - &ia)
}

/// Substitute `a = U a'` into the model.
fn rotate(m: &BosonicModel, u: &CMat) -> BosonicModel {
    let n = m.n;
    let row_times = |v: &[C64], mat: &CMat| -> Vec<C64> { (0..n).map(|j| (0..n).map(|k| v[k] * mat[(k, j)]).sum()).collect() };
    let ubar = linalg::conj(u);
    let channels = m
        .channels
        .iter()
        .map(|ch| LindbladChannel::new(row_times(&ch.l, u), row_times(&ch.k, &ubar)))
        .collect();
    let h = &(&linalg::adjoint(u) * &m.h) * u;
    let k = &(&linalg::transpose(u) * &m.k) * u;
    BosonicModel::new(h, channels).with_k(k)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn rapidities_scale_with_rates(seed in any::<u64>(), n in 1usize..=4, s in 0.1f64..5.0) {
        let (model, a) = random_stable(&mut rng(seed), n);
        let b = analyze(rescale(&model, s), Tolerances::default()).unwrap();
        let scaled: Vec<C64> = a.spectrum.beta.iter().map(|z| z * s).collect();
        prop_assert!(multiset_dist(&scaled, &b.spectrum.beta) < 1e-9 * s.max(1.0));
        // the steady state only depends on rate ratios
        let za = a.steady_state().unwrap().lyapunov.z;
        let zb = b.steady_state().unwrap().lyapunov.z;
        prop_assert!(linalg::frob(&(&za - &zb)) < 1e-8 * linalg::frob(&za).max(1.0));
    }

    #[test]
    fn mode_rotation_preserves_invariants(seed in any::<u64>(), n in 2usize..=4) {
        let (model, a) = random_stable(&mut rng(seed), n);
        let u = unitary(seed ^ 0x5eed, n);
        let b = analyze(rotate(&model, &u), Tolerances::default()).unwrap();
        prop_assert_eq!(b.stability(), Stability::Stable);
        prop_assert!(multiset_dist(&a.spectrum.beta, &b.spectrum.beta) < 1e-8);
        let total = |x: &thirdq::Analysis| -> f64 { x.steady_state().unwrap().correlators.occupations.iter().sum() };
        prop_assert!((total(&a) - total(&b)).abs() < 1e-8 * total(&a).max(1.0));
    }

    #[test]
    fn solvers_agree_and_solve(seed in any::<u64>(), n in 1usize..=5) {
        let (_, a) = random_stable(&mut rng(seed), n);
        let (x, y) = (&a.structure.x, &a.structure.y);
        let e = lyapunov::solve_eigenbasis(x, y, &a.spectrum, DEFAULT_TOL_MARGINAL).unwrap();
        let s = lyapunov::solve_schur(x, y, DEFAULT_TOL_MARGINAL).unwrap();
        prop_assert!(e.residual < 1e-10 && s.residual < 1e-10);
        prop_assert!(linalg::frob(&(&e.z - &s.z)) < 1e-9 * linalg::frob(&e.z).max(1.0));
    }

    #[test]
    fn gap_is_slowest_nonzero_decay(seed in any::<u64>(), n in 1usize..=4, cutoff in 1usize..=3) {
        let (_, a) = random_stable(&mut rng(seed), n);
        let modes = a.decay_modes(cutoff, DEFAULT_MODE_LIMIT, Execution::Sequential).unwrap();
        prop_assert_eq!(modes.len() as u128, mode_count(2 * n, cutoff));
        prop_assert!(modes[0].m.iter().all(|&k| k == 0));
        prop_assert!(modes.windows(2).all(|w| w[0].lambda.re >= w[1].lambda.re - 1e-12));
        let slowest = modes[1..].iter().map(|m| m.lambda.re).fold(f64::NEG_INFINITY, f64::max);
        prop_assert!((a.gap().unwrap() + slowest).abs() < 1e-12);
        for m in &modes {
            prop_assert_eq!(m.lambda, spectral::decay_eigenvalue(&a.spectrum.beta, &m.m));
        }
    }

    #[test]
    fn covariance_flow_is_a_semigroup(seed in any::<u64>(), n in 1usize..=3, t in 0.05f64..2.0, s in 0.05f64..2.0) {
        let (_, a) = random_stable(&mut rng(seed), n);
        let d = 2 * n;
        let mut r = rng(seed.wrapping_add(1));
        let g = random_model(&mut r, d).k;
        let c0 = linalg::scale(&g, c(0.5, 0.0));
        let m0: Vec<C64> = (0..d).map(|j| c(0.1 * j as f64, -0.2)).collect();
        let direct = a.dynamics(&c0, &m0, &[t + s], Execution::Sequential).unwrap();
        let first = a.dynamics(&c0, &m0, &[t], Execution::Sequential).unwrap();
        let second = a.dynamics(&first.covariance.c[0], &first.mean[0], &[s], Execution::Sequential).unwrap();
        let scale = linalg::frob(&direct.covariance.c[0]).max(1.0);
        prop_assert!(linalg::frob(&(&direct.covariance.c[0] - &second.covariance.c[0])) < 1e-9 * scale);
        prop_assert!(max_dist(&direct.mean[0], &second.mean[0]) < 1e-9);
    }
}

#[test]
fn parallel_and_sequential_dynamics_are_identical() {
    let (_, a) = random_stable(&mut rng(11), 3);
    let (c0, m0) = thirdq::analysis::vacuum(3);
    let times: Vec<f64> = (0..64).map(|k| 0.1 * k as f64).collect();
    let p = a.dynamics(&c0, &m0, &times, Execution::Parallel).unwrap();
    let s = a.dynamics(&c0, &m0, &times, Execution::Sequential).unwrap();
    for (x, y) in p.covariance.c.iter().zip(&s.covariance.c) {
        assert_eq!(linalg::frob(&(x - y)), 0.0);
    }
    assert_eq!(p.mean, s.mean);
}

#[test]
fn stable_flow_converges_to_fixed_point() {
    for (i, (_, a)) in stable_suite(7, 20).iter().enumerate() {
        let z = a.steady_state().unwrap().lyapunov.z;
        let (c0, m0) = thirdq::analysis::vacuum(a.n());
        let t = 40.0 / a.gap().unwrap();
        let end = a.dynamics(&c0, &m0, &[t], Execution::Sequential).unwrap();
        let dev = linalg::frob(&(&end.covariance.c[0] - &z));
        assert!(dev < 1e-8 * linalg::frob(&z).max(1.0), "model {i}: {dev:e}");
    }
}
