use crate::spectral::Stability;

/// Errors raised by the solver pipeline and the oracle.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch in {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: String,
        expected: usize,
        found: usize,
    },

    #[error("non-finite entry in {0}")]
    NonFinite(String),

    #[error("H is not Hermitian: |H - H^dag|_F = {deviation:.3e} exceeds tolerance {tolerance:.3e}")]
    HermiticityViolation { deviation: f64, tolerance: f64 },

    #[error("K is not symmetric: |K - K^T|_F = {deviation:.3e} exceeds tolerance {tolerance:.3e}")]
    SymmetryViolation { deviation: f64, tolerance: f64 },

    #[error("matrix is not similar to a real matrix: imaginary remainder {remainder:.3e}")]
    NotRealSimilar { remainder: f64 },

    #[error("X not diagonalizable within tolerance (eigenvector condition number {cond:.3e})")]
    DefectiveX { cond: f64 },

    #[error("operation requires a stable spectrum, found {0}")]
    NotStable(Stability),

    #[error("decay-mode enumeration would produce {count} entries, limit is {limit}")]
    CutoffTooLarge { count: u128, limit: usize },

    #[error("symplectic check failed: residual {residual:.3e}")]
    SymplecticityViolation { residual: f64 },

    #[error("resonant spectrum: |beta_j + beta_k| = {pivot:.3e}, Lyapunov solution not unique")]
    ResonantSpectrum { pivot: f64 },

    #[error("eigenvector matrix too ill-conditioned for the eigenbasis solver (cond {cond:.3e})")]
    IllConditioned { cond: f64 },

    #[error("correlator matrix is not symmetric: |Z - Z^T|_F = {0:.3e}")]
    AsymmetricZ(f64),

    #[error("correlator index {index} out of range for {len} slots")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("initial correlator matrix is not symmetric: |C - C^T|_F = {0:.3e}")]
    NonSymmetricInitial(f64),

    #[error("time grid must be sorted ascending")]
    UnsortedTimes,

    #[error("Liouvillean would have {entries} entries, cap is {cap}")]
    DimensionCap { entries: u128, cap: u128 },

    #[error("Fock truncation insufficient: top-level population {population:.3e}")]
    TruncationInsufficient { population: f64 },

    #[error("zero eigenvalue of the Liouvillean is degenerate or missing")]
    DegenerateZeroEigenvalue,

    #[error("eigendecomposition failed to converge")]
    NoConvergence,
}

pub type Result<T> = std::result::Result<T, Error>;
