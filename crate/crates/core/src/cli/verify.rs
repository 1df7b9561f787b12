//! Analytic pipeline versus the truncated-Fock oracle, side by side.

use num_complex::Complex64 as C64;

use crate::analysis::{vacuum, Analysis};
use crate::error::Result;
use crate::exec::Execution;
use crate::ness::wick_moment_displaced;
use crate::oracle::{self, FockOperators};
use crate::spectral::DEFAULT_MODE_LIMIT;

/// Relative tolerance for `vec(1)^dag Lmat = 0`.
pub const TRACE_TOL: f64 = 1e-10;
/// Largest total excitation of analytic decay modes matched against the
/// oracle spectrum.
pub const SPECTRUM_EXCITATION: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyTolerances {
    pub moment: f64,
    pub wick: f64,
    pub spectrum: f64,
    pub trajectory: f64,
}

impl VerifyTolerances {
    /// One mode converges fast in the cutoff; several modes share a much
    /// smaller per-mode cutoff under the memory cap.
    pub fn for_modes(n: usize) -> Self {
        if n == 1 {
            VerifyTolerances {
                moment: 1e-6,
                wick: 1e-5,
                spectrum: 1e-4,
                trajectory: 1e-5,
            }
        } else {
            VerifyTolerances {
                moment: 1e-3,
                wick: 1e-3,
                spectrum: 1e-3,
                trajectory: 1e-3,
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    pub cutoff: usize,
    pub cap: u128,
    pub t1: f64,
    pub steps: usize,
    pub tol: VerifyTolerances,
    pub exec: Execution,
}

#[derive(Debug, Clone)]
pub struct Comparison {
    pub label: String,
    pub analytic: C64,
    pub oracle: C64,
}

impl Comparison {
    pub fn delta(&self) -> f64 {
        (self.analytic - self.oracle).norm()
    }
}

#[derive(Debug, Clone)]
pub struct Check {
    pub name: &'static str,
    pub delta: f64,
    pub tol: f64,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.delta <= self.tol
    }
}

#[derive(Debug, Clone)]
pub struct Verification {
    pub cutoff: usize,
    pub dim: usize,
    pub top_population: f64,
    pub trace_residual: f64,
    pub moments: Vec<Comparison>,
    pub wick: Vec<Comparison>,
    pub spectrum: Vec<(Vec<u32>, Comparison)>,
    pub trajectory_times: Vec<f64>,
    pub trajectory_deviation: f64,
    pub checks: Vec<Check>,
}

impl Verification {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    /// Check with the largest `delta / tol`.
    pub fn worst(&self) -> &Check {
        self.checks
            .iter()
            .max_by(|a, b| (a.delta / a.tol).total_cmp(&(b.delta / b.tol)))
            .expect("at least one check")
    }
}

fn slot_name(n: usize, r: usize) -> String {
    if r < n {
        format!("a_{}", r + 1)
    } else {
        format!("a_{}^dag", r - n + 1)
    }
}

/// `<:b_r b_s:>` written with creation operators first.
fn pair_label(n: usize, r: usize, s: usize) -> String {
    let (first, second) = if r < n && s >= n { (s, r) } else { (r, s) };
    format!("<{} {}>", slot_name(n, first), slot_name(n, second))
}

fn max_delta(items: &[Comparison]) -> f64 {
    items.iter().map(Comparison::delta).fold(0.0, f64::max)
}

/// Default trajectory horizon: a few relaxation times, clamped to `[1, 20]`.
pub fn default_horizon(gap: f64) -> f64 {
    (8.0 / gap).clamp(1.0, 20.0)
}

pub fn verify(analysis: &Analysis, opts: &VerifyOptions) -> Result<Verification> {
    let n = analysis.n();
    let ss = analysis.steady_state()?;
    let ops: FockOperators = oracle::build_fock_operators(n, opts.cutoff, opts.cap)?;
    let lmat = oracle::build_liouvillean_matrix(&analysis.model, &ops)?;
    let trace_residual = oracle::trace_preservation_residual(&lmat);
    let ors = oracle::oracle_steady_state(&lmat, &ops)?;

    let z = &ss.lyapunov.z;
    let m = &ss.mean;
    let mut moments = Vec::new();
    for r in 0..2 * n {
        moments.push(Comparison {
            label: format!("<{}>", slot_name(n, r)),
            analytic: m[r],
            oracle: ors.mean[r],
        });
    }
    for r in 0..2 * n {
        for s in r..2 * n {
            moments.push(Comparison {
                label: pair_label(n, r, s),
                analytic: z[(r, s)] + m[r] * m[s],
                oracle: ors.raw_correlators[(r, s)],
            });
        }
    }

    let mut wick = Vec::new();
    for j in 0..n {
        wick.push(Comparison {
            label: format!("<a_{0}^dag a_{0}^dag a_{0} a_{0}>", j + 1),
            analytic: wick_moment_displaced(z, m, [j, j, n + j, n + j])?,
            oracle: ors.ad2a2(&ops, j),
        });
    }

    let modes = analysis.decay_modes(SPECTRUM_EXCITATION, DEFAULT_MODE_LIMIT, opts.exec)?;
    let oracle_ev = oracle::oracle_spectrum(&lmat, usize::MAX)?;
    let spectrum: Vec<(Vec<u32>, Comparison)> = modes
        .into_iter()
        .map(|mode| {
            let nearest = oracle_ev
                .iter()
                .copied()
                .min_by(|a, b| (a - mode.lambda).norm().total_cmp(&(b - mode.lambda).norm()))
                .unwrap_or(C64::new(f64::NAN, f64::NAN));
            let label = format!("{:?}", mode.m);
            (
                mode.m,
                Comparison {
                    label,
                    analytic: mode.lambda,
                    oracle: nearest,
                },
            )
        })
        .collect();

    let steps = opts.steps.max(2);
    let times: Vec<f64> = (0..steps).map(|i| opts.t1 * i as f64 / (steps - 1) as f64).collect();
    let (c0, m0) = vacuum(n);
    let dynamics = analysis.dynamics(&c0, &m0, &times, opts.exec)?;
    let rhos = oracle::oracle_evolve(&lmat, &oracle::vacuum(&ops), &times)?;
    let mut trajectory_deviation: f64 = 0.0;
    for (i, rho) in rhos.iter().enumerate() {
        let table = oracle::correlator_table(&ops, rho);
        let mean = oracle::mean_vector(&ops, rho);
        for r in 0..2 * n {
            trajectory_deviation = trajectory_deviation.max((dynamics.mean[i][r] - mean[r]).norm());
            for s in r..2 * n {
                trajectory_deviation = trajectory_deviation.max((dynamics.full(i, r, s) - table[(r, s)]).norm());
            }
        }
    }

    let spectrum_delta = spectrum.iter().map(|(_, c)| c.delta()).fold(0.0, f64::max);
    let checks = vec![
        Check {
            name: "trace_preservation",
            delta: trace_residual,
            tol: TRACE_TOL,
        },
        Check {
            name: "moments",
            delta: max_delta(&moments),
            tol: opts.tol.moment,
        },
        Check {
            name: "wick_four_point",
            delta: max_delta(&wick),
            tol: opts.tol.wick,
        },
        Check {
            name: "spectrum",
            delta: spectrum_delta,
            tol: opts.tol.spectrum,
        },
        Check {
            name: "trajectory",
            delta: trajectory_deviation,
            tol: opts.tol.trajectory,
        },
    ];

    Ok(Verification {
        cutoff: opts.cutoff,
        dim: ops.dim,
        top_population: ors.top_population,
        trace_residual,
        moments,
        wick,
        spectrum,
        trajectory_times: times,
        trajectory_deviation,
        checks,
    })
}
