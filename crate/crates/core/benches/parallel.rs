use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use thirdq::analysis::{analyze, summary, vacuum, Tolerances};
use thirdq::linalg;
use thirdq::{BosonicModel, Execution, LindbladChannel};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Damped oscillator with gain `v` (loss fixed at 1).
fn oscillator(v: f64) -> BosonicModel {
    BosonicModel::new(
        linalg::from_rows(&[vec![c(1.0, 0.0)]]),
        vec![
            LindbladChannel::new(vec![c(1.0, 0.0)], vec![c(0.0, 0.0)]),
            LindbladChannel::new(vec![c(0.0, 0.0)], vec![c(v.sqrt(), 0.0)]),
        ],
    )
}

/// Lossy chain of `n` modes with nearest-neighbour hopping and weak pairing.
fn chain(n: usize, rng: &mut ChaCha8Rng) -> BosonicModel {
    let h = faer::Mat::from_fn(n, n, |i, j| match i.abs_diff(j) {
        0 => c(1.0 + 0.1 * i as f64, 0.0),
        1 => c(0.3, 0.0),
        _ => c(0.0, 0.0),
    });
    let k = faer::Mat::from_fn(n, n, |i, j| if i.abs_diff(j) == 1 { c(0.05, 0.0) } else { c(0.0, 0.0) });
    let channels = (0..n)
        .map(|j| {
            let mut l = vec![c(0.0, 0.0); n];
            let mut kk = vec![c(0.0, 0.0); n];
            l[j] = c(rng.random_range(0.8..1.2), 0.0);
            kk[j] = c(rng.random_range(0.0..0.3), 0.0);
            LindbladChannel::new(l, kk)
        })
        .collect();
    BosonicModel::new(h, channels).with_k(k)
}

fn sweep(c: &mut Criterion) {
    let grid: Vec<f64> = (0..512).map(|i| 2.0 * i as f64 / 511.0).collect();
    let mut group = c.benchmark_group("sweep_grid");
    for (name, exec) in MODES {
        group.bench_function(name, |b| {
            b.iter(|| {
                exec.map(&grid, |&v| {
                    let a = analyze(oscillator(v), Tolerances::default()).unwrap();
                    summary(&a).unwrap()
                })
            })
        });
    }
    group.finish();
}

fn batch_ness(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let models: Vec<BosonicModel> = (0..64).map(|_| chain(6, &mut rng)).collect();
    let mut group = c.benchmark_group("batch_ness");
    for (name, exec) in MODES {
        group.bench_function(name, |b| {
            b.iter(|| {
                exec.map(&models, |m| {
                    let a = analyze(m.clone(), Tolerances::default()).unwrap();
                    a.steady_state().unwrap().correlators.occupations
                })
            })
        });
    }
    group.finish();
}

fn trajectory(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut group = c.benchmark_group("trajectory");
    for n in [2usize, 8] {
        let a = analyze(chain(n, &mut rng), Tolerances::default()).unwrap();
        let (c0, m0) = vacuum(n);
        let times: Vec<f64> = (0..256).map(|k| 0.05 * k as f64).collect();
        for (name, exec) in MODES {
            group.bench_with_input(BenchmarkId::new(name, n), &n, |b, _| {
                b.iter(|| a.dynamics(&c0, &m0, &times, exec).unwrap())
            });
        }
    }
    group.finish();
}

fn decay_modes(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let a = analyze(chain(5, &mut rng), Tolerances::default()).unwrap();
    let mut group = c.benchmark_group("decay_modes");
    for (name, exec) in MODES {
        group.bench_function(name, |b| b.iter(|| a.decay_modes(6, 1_000_000, exec).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, sweep, batch_ness, trajectory, decay_modes);
criterion_main!(benches);
