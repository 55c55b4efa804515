//! Min-sup tone reservation: given information coefficients `a` on `K`,
//! choose compensation coefficients `b` on a disjoint set to minimize the
//! peak of the combined signal.
//!
//! Signals are compared on a finite grid: the `N` dyadic cells for Walsh and
//! the `N` DFT sample points for Fourier. In both cases the mean square of
//! the signal equals the squared coefficient norm.

mod analysis;
pub mod lp;
mod solve;

pub use analysis::{
    dual_vertex_max, empirical_cex, equivalence_crosscheck, gaussian_directions,
    khintchine_compensation_check, norm_equiv_ratio, CexEstimate, EquivalenceReport,
    KhintchineReport, NormEquivReport, PositionSet, RatioMode, MAX_EXHAUSTIVE,
};
pub use solve::{signal_of, solve_min_sup, sup_of, BRUTE_MAX_N, P_GON};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::systems::walsh::ensure_power_of_two;
use crate::systems::{CoefficientVector, IndexSet, SystemTag};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Lp,
    Pocs,
    Brute,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::Lp => "lp",
            Method::Pocs => "pocs",
            Method::Brute => "brute",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawProblem")]
pub struct ExtensionProblem {
    pub system: SystemTag,
    pub n: usize,
    pub info_set: IndexSet,
    pub comp_set: IndexSet,
    pub a: CoefficientVector,
}

#[derive(Deserialize)]
struct RawProblem {
    system: SystemTag,
    n: usize,
    info_set: IndexSet,
    comp_set: IndexSet,
    a: CoefficientVector,
}

impl TryFrom<RawProblem> for ExtensionProblem {
    type Error = Error;

    fn try_from(raw: RawProblem) -> Result<Self> {
        ExtensionProblem::new(raw.system, raw.n, raw.info_set, raw.comp_set, raw.a)
    }
}

impl ExtensionProblem {
    pub fn new(
        system: SystemTag,
        n: usize,
        info_set: IndexSet,
        comp_set: IndexSet,
        a: CoefficientVector,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("N must be positive"));
        }
        if system == SystemTag::Walsh {
            ensure_power_of_two(n)?;
        }
        for (name, size) in [
            ("info_set", info_set.ambient_size()),
            ("comp_set", comp_set.ambient_size()),
            ("a", a.ambient_size()),
        ] {
            if size != n {
                return Err(Error::invalid(format!("{name} has ambient size {size}, expected {n}")));
            }
        }
        if !info_set.is_disjoint(&comp_set) {
            return Err(Error::invalid("information and compensation sets overlap"));
        }
        if !a.support().is_subset(&info_set) {
            return Err(Error::invalid("a is not supported on the information set"));
        }
        if a.is_zero() {
            return Err(Error::ZeroVector);
        }
        Ok(Self {
            system,
            n,
            info_set,
            comp_set,
            a,
        })
    }

    /// Compensation set = every index outside `K`.
    pub fn with_complement(system: SystemTag, a: CoefficientVector, info_set: IndexSet) -> Result<Self> {
        let comp = info_set.complement();
        Self::new(system, a.ambient_size(), info_set, comp, a)
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(
            self.system,
            self.n,
            self.info_set.clone(),
            self.comp_set.clone(),
            self.a.scaled(factor),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtensionResult {
    pub b: CoefficientVector,
    /// Peak of the signal built from `a + b`, recomputed from the coefficients.
    pub achieved_sup: f64,
    pub method: Method,
    /// `achieved_sup` minus a certified lower bound (LP, brute force) or the
    /// final bisection width (POCS).
    pub optimality_gap: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverBudget {
    /// Simplex pivots, or alternating-projection steps per bisection probe.
    pub max_iterations: usize,
    /// Bisection stops once the bracket is below `tolerance · ‖a‖₂`.
    pub tolerance: f64,
}

impl Default for SolverBudget {
    fn default() -> Self {
        Self {
            max_iterations: 100_000,
            tolerance: 1e-4,
        }
    }
}
