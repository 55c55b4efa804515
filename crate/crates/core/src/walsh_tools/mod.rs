//! Correlation functions, the splitting construction and its witness,
//! dyadic projections, and exhaustive optimal-subset search for the Walsh
//! system.

mod correlation;
mod optimal;
mod projection;
mod split;

pub use correlation::{correlation, correlation_profile, m_set, CorrelationProfile};
pub use optimal::{optimal_subset_size, OptimalSubset, MAX_SUBSET_N};
pub use projection::{band_difference, dyadic_projection, q_shift};
pub use split::{
    cex_lower_bound_walsh, main_lemma_witness, main_lemma_witness_targeted, required_stages,
    split_stage, split_trace, split_trace_targeted, SearchBudget, SplitStage, SplitTrace,
    WalshCexBound, WitnessReport,
};
