//! End-to-end analytic pipeline on a single model.

use num_complex::Complex64 as C64;

use crate::error::Result;
use crate::exec::Execution;
use crate::linalg::{self, CMat};
use crate::lyapunov::{self, LyapunovSolution};
use crate::model::{validate_model, BathMatrices, BosonicModel, ValidatedModel, DEFAULT_TOL_INPUT};
use crate::ness::{self, CovarianceTrajectory, NessSolution};
use crate::spectral::{self, DecayMode, RapiditySpectrum, Stability, SymplecticV, DEFAULT_TOL_MARGINAL};
use crate::structure::{build_structure, StructureMatrices};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub input: f64,
    pub marginal: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            input: DEFAULT_TOL_INPUT,
            marginal: DEFAULT_TOL_MARGINAL,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Analysis {
    pub model: ValidatedModel,
    pub structure: StructureMatrices,
    pub bath: BathMatrices,
    pub spectrum: RapiditySpectrum,
    pub tol: Tolerances,
}

#[derive(Debug, Clone)]
pub struct SteadyState {
    pub lyapunov: LyapunovSolution,
    pub correlators: NessSolution,
    /// Stationary first moments `<b_r>`; zero without linear terms.
    pub mean: Vec<C64>,
    /// Absent when the eigenvector matrix is too ill-conditioned to trust.
    pub symplectic: Option<SymplecticV>,
}

/// Moments along a trajectory, both connected and full.
#[derive(Debug, Clone)]
pub struct Dynamics {
    pub times: Vec<f64>,
    pub covariance: CovarianceTrajectory,
    pub mean: Vec<Vec<C64>>,
}

impl Dynamics {
    /// Full normal-ordered moment `<:b_r b_s:>` at sample `i`.
    pub fn full(&self, i: usize, r: usize, s: usize) -> C64 {
        self.covariance.c[i][(r, s)] + self.mean[i][r] * self.mean[i][s]
    }
}

pub fn analyze(raw: BosonicModel, tol: Tolerances) -> Result<Analysis> {
    let model = validate_model(raw, tol.input)?;
    let (structure, bath) = build_structure(&model)?;
    let spectrum = spectral::rapidities(&structure.x, tol.marginal)?;
    Ok(Analysis {
        model,
        structure,
        bath,
        spectrum,
        tol,
    })
}

impl Analysis {
    pub fn n(&self) -> usize {
        self.model.n
    }

    pub fn stability(&self) -> Stability {
        self.spectrum.stability
    }

    pub fn min_re_beta(&self) -> f64 {
        self.spectrum.beta.iter().map(|b| b.re).fold(f64::INFINITY, f64::min)
    }

    pub fn gap(&self) -> Option<f64> {
        spectral::spectral_gap(&self.spectrum.beta, self.tol.marginal).ok()
    }

    /// `|tr X - (tr M - tr N)|`
    pub fn trace_identity_residual(&self) -> f64 {
        (linalg::trace(&self.structure.x) - self.structure.s0).norm()
    }

    pub fn steady_state(&self) -> Result<SteadyState> {
        let (x, y) = (&self.structure.x, &self.structure.y);
        let lyapunov = lyapunov::solve(x, y, &self.spectrum, self.tol.marginal)?;
        let correlators = ness::physical_correlators(&lyapunov.z, self.n())?;
        let mean = if self.model.has_linear_terms() {
            ness::steady_mean(x, &ness::mean_source(&self.model), self.stability())?
        } else {
            vec![linalg::ZERO; 2 * self.n()]
        };
        let symplectic = if self.spectrum.ill_conditioned() {
            None
        } else {
            Some(spectral::build_v(&self.spectrum, &lyapunov.z, x, y)?)
        };
        Ok(SteadyState {
            lyapunov,
            correlators,
            mean,
            symplectic,
        })
    }

    pub fn decay_modes(&self, max_total_excitation: usize, limit: usize, exec: Execution) -> Result<Vec<DecayMode>> {
        spectral::liouville_spectrum(&self.spectrum, max_total_excitation, limit, exec)
    }

    /// Evolve connected correlators `c0` and means `m0` over `times`, measured
    /// from the initial instant. Stable models reuse the fixed point `Z`.
    pub fn dynamics(&self, c0: &CMat, m0: &[C64], times: &[f64], exec: Execution) -> Result<Dynamics> {
        let (x, y) = (&self.structure.x, &self.structure.y);
        let fixed = match self.stability() {
            Stability::Stable => Some(lyapunov::solve(x, y, &self.spectrum, self.tol.marginal)?.z),
            _ => None,
        };
        let covariance = ness::covariance_trajectory(x, y, c0, times, fixed.as_ref(), exec)?;
        let mean = ness::mean_trajectory(x, &ness::mean_source(&self.model), m0, times, exec)?;
        Ok(Dynamics {
            times: times.to_vec(),
            covariance,
            mean,
        })
    }
}

/// Vacuum initial data: `C0 = 0`, `m0 = 0`.
pub fn vacuum(n: usize) -> (CMat, Vec<C64>) {
    (linalg::zeros(2 * n, 2 * n), vec![linalg::ZERO; 2 * n])
}

/// Stability class plus steady-state occupations when they exist.
pub fn summary(analysis: &Analysis) -> Result<(Stability, Option<Vec<f64>>)> {
    match analysis.stability() {
        Stability::Stable => {
            let ss = analysis.steady_state()?;
            let occ = (0..analysis.n())
                .map(|j| ss.correlators.occupations[j] + ss.mean[j].norm_sqr())
                .collect();
            Ok((Stability::Stable, Some(occ)))
        }
        s => Ok((s, None)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::model::LindbladChannel;

    fn single(u: f64, v: f64) -> BosonicModel {
        BosonicModel::new(
            linalg::from_rows(&[vec![C64::new(1.0, 0.0)]]),
            vec![
                LindbladChannel::new(vec![C64::new(u.sqrt(), 0.0)], vec![C64::new(0.0, 0.0)]),
                LindbladChannel::new(vec![C64::new(0.0, 0.0)], vec![C64::new(v.sqrt(), 0.0)]),
            ],
        )
    }

    #[test]
    fn thermal_oscillator_pipeline() {
        let a = analyze(single(1.0, 0.5), Tolerances::default()).unwrap();
        assert_eq!(a.stability(), Stability::Stable);
        assert!((a.gap().unwrap() - 0.5).abs() < 1e-12);
        assert!(a.trace_identity_residual() < 1e-14);
        let ss = a.steady_state().unwrap();
        assert!((ss.correlators.occupations[0] - 1.0).abs() < 1e-12);
        assert!(ss.symplectic.unwrap().symplectic_residual < 1e-12);
    }

    #[test]
    fn unstable_summary_has_no_occupations() {
        let a = analyze(single(0.5, 1.0), Tolerances::default()).unwrap();
        let (s, occ) = summary(&a).unwrap();
        assert_eq!(s, Stability::Unstable);
        assert!(occ.is_none());
        assert!(a.gap().is_none());
        assert!(matches!(a.steady_state(), Err(Error::NotStable(Stability::Unstable))));
    }

    #[test]
    fn dynamics_start_at_initial_data() {
        let a = analyze(single(1.0, 0.5), Tolerances::default()).unwrap();
        let (c0, m0) = vacuum(1);
        let d = a.dynamics(&c0, &m0, &[0.0, 1.0], Execution::Sequential).unwrap();
        assert_eq!(d.full(0, 0, 1), linalg::ZERO);
        assert!((d.full(1, 0, 1).re - (1.0 - (-1.0f64).exp())).abs() < 1e-12);
    }
}
