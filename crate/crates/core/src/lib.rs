//! Exact treatment of quadratic open bosonic systems: third quantization of
//! the Lindblad generator, with a truncated-Fock oracle for cross-checks.

pub mod analysis;
pub mod cli;
pub mod error;
pub mod exec;
pub mod linalg;
pub mod lyapunov;
pub mod model;
pub mod ness;
pub mod oracle;
pub mod spectral;
pub mod structure;

pub use analysis::{analyze, Analysis, Tolerances};
pub use error::{Error, Result};
pub use exec::Execution;
pub use model::{validate_model, BosonicModel, LindbladChannel, ValidatedModel};
pub use spectral::Stability;
