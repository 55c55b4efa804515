//! Orthonormal systems and the exact signal representations built on them.

pub mod fourier;
pub mod sets;
pub mod signal;
pub mod walsh;

pub use fourier::{dft, idft, sample_signal, trig_supnorm, DftMatrix, SupEstimate};
pub use sets::{CoefficientVector, IndexSet};
pub use signal::{step_integral, step_norms, DyadicStepSignal, Rational, StepNorms, StepScalar};
pub use walsh::{
    fwht, hadamard_matrix, rademacher_signal, walsh_analysis, walsh_product_index,
    walsh_signal, walsh_synthesis, HadamardMatrix,
};

use serde::{Deserialize, Serialize};

/// Which orthonormal system a coefficient vector is expanded in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SystemTag {
    Walsh,
    Fourier,
}

impl std::fmt::Display for SystemTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SystemTag::Walsh => "walsh",
            SystemTag::Fourier => "fourier",
        })
    }
}
