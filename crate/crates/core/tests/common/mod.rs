#![allow(dead_code)]

use std::path::PathBuf;
use std::process::{Command, Output};

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use thirdq::analysis::{analyze, Analysis, Tolerances};
use thirdq::linalg::{self, CMat};
use thirdq::{BosonicModel, LindbladChannel, Stability};

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn models_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../models")
}

pub fn schemas_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../schemas")
}

pub fn model_path(name: &str) -> String {
    models_dir().join(name).display().to_string()
}

pub fn thirdq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_thirdq"))
        .args(args)
        .output()
        .expect("binary runs")
}

pub fn thirdq_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_thirdq"));
    cmd.args(args);
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

/// Single damped oscillator with frequency `omega`, loss `u`, gain `v` and
/// pair coupling `w`, realized by two channels.
pub fn oscillator(omega: f64, u: f64, v: f64, w: f64) -> BosonicModel {
    let l = u.sqrt();
    let k1 = w / l;
    let k2 = (v - k1 * k1).sqrt();
    BosonicModel::new(
        linalg::from_rows(&[vec![c(omega, 0.0)]]),
        vec![
            LindbladChannel::new(vec![c(l, 0.0)], vec![c(k1, 0.0)]),
            LindbladChannel::new(vec![c(0.0, 0.0)], vec![c(k2, 0.0)]),
        ],
    )
}

/// The reference oscillator `(omega, u, v, w) = (1, 1, 0.5, 0.25)`.
pub fn reference_oscillator() -> BosonicModel {
    BosonicModel::new(
        linalg::from_rows(&[vec![c(1.0, 0.0)]]),
        vec![
            LindbladChannel::new(vec![c(1.0, 0.0)], vec![c(0.25, 0.0)]),
            LindbladChannel::new(vec![c(0.0, 0.0)], vec![c(0.4375f64.sqrt(), 0.0)]),
        ],
    )
}

fn gaussian_c(rng: &mut ChaCha8Rng, scale: f64) -> C64 {
    c(rng.random_range(-1.0..1.0) * scale, rng.random_range(-1.0..1.0) * scale)
}

fn random_hermitian(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> CMat {
    let a = faer::Mat::from_fn(n, n, |_, _| gaussian_c(rng, scale));
    linalg::scale(&(&a + &linalg::adjoint(&a)), c(0.5, 0.0))
}

fn random_symmetric(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> CMat {
    let a = faer::Mat::from_fn(n, n, |_, _| gaussian_c(rng, scale));
    linalg::symmetrize(&a)
}

/// A random model, not necessarily stable.
pub fn random_model(rng: &mut ChaCha8Rng, n: usize) -> BosonicModel {
    let h = random_hermitian(rng, n, 1.0);
    let k = random_symmetric(rng, n, 0.2);
    let count = rng.random_range(n..=2 * n + 1);
    let channels = (0..count)
        .map(|_| {
            let l = (0..n).map(|_| gaussian_c(rng, 1.0)).collect();
            let kk = (0..n).map(|_| gaussian_c(rng, 0.4)).collect();
            LindbladChannel::new(l, kk)
        })
        .collect();
    BosonicModel::new(h, channels).with_k(k)
}

/// Rejection-sample a Stable model with `n` modes.
pub fn random_stable(rng: &mut ChaCha8Rng, n: usize) -> (BosonicModel, Analysis) {
    loop {
        let m = random_model(rng, n);
        if let Ok(a) = analyze(m.clone(), Tolerances::default()) {
            // keep clear of the marginal band and of near-defective X
            if a.stability() == Stability::Stable && a.min_re_beta() > 1e-3 && !a.spectrum.ill_conditioned() {
                return (m, a);
            }
        }
    }
}

/// Deterministic suite of Stable models with `n` cycling through `1..=5`.
pub fn stable_suite(seed: u64, count: usize) -> Vec<(BosonicModel, Analysis)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|i| random_stable(&mut rng, 1 + i % 5)).collect()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
