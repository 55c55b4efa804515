use serde::{Serialize, Serializer};

use super::correlation::{correlation_profile, m_set, partner, CorrelationProfile};
use crate::error::{Error, Result};
use crate::systems::signal::{step_norms, DyadicStepSignal, Rational};
use crate::systems::walsh::{ensure_power_of_two, walsh_analysis_scaled, walsh_signal};
use crate::systems::IndexSet;

fn members<S: Serializer>(set: &IndexSet, s: S) -> std::result::Result<S::Ok, S::Error> {
    set.members().serialize(s)
}

fn rational<S: Serializer>(q: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&q.to_string())
}

/// One halving step: `w_r · A = B`, `A ∩ B = ∅`, `A ∪ B = M(w_r, J)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SplitStage {
    pub r: usize,
    pub correlation: i64,
    #[serde(serialize_with = "members")]
    pub m_set: IndexSet,
    #[serde(serialize_with = "members")]
    pub half_a: IndexSet,
    #[serde(serialize_with = "members")]
    pub half_b: IndexSet,
}

impl SplitStage {
    /// Checks the three pairing properties.
    pub fn is_consistent(&self) -> bool {
        let mapped: Vec<usize> = self.half_a.iter().map(|k| partner(k, self.r)).collect();
        let mut sorted = mapped.clone();
        sorted.sort_unstable();
        sorted == self.half_b.members()
            && self.half_a.is_disjoint(&self.half_b)
            && self.half_a.union(&self.half_b) == self.m_set
            && 2 * self.half_a.len() == self.m_set.len()
    }
}

fn stage_for(profile: &CorrelationProfile, r: usize) -> Result<SplitStage> {
    let n = profile.n;
    let m = m_set(r, &profile.set, n)?;
    let half_a = IndexSet::new(n, m.iter().filter(|&k| k < partner(k, r)))?;
    let half_b = IndexSet::new(n, m.iter().filter(|&k| k > partner(k, r)))?;
    Ok(SplitStage {
        r,
        correlation: profile.get(r),
        m_set: m,
        half_a,
        half_b,
    })
}

/// Splits `I` along its strongest correlator `r ≥ 2` (ties: smallest `r`);
/// the smaller index of each pair goes to `A`.
pub fn split_stage(set: &IndexSet, n: usize) -> Result<SplitStage> {
    let profile = correlation_profile(set, n)?;
    let r = *profile
        .ranked_correlators()
        .first()
        .ok_or(Error::NoCorrelator)?;
    stage_for(&profile, r)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SplitTrace {
    pub n: usize,
    #[serde(serialize_with = "members")]
    pub initial: IndexSet,
    pub stages: Vec<SplitStage>,
    /// `(i₁, i₂)`: the pair split by the last stage.
    pub terminal: Option<(usize, usize)>,
}

impl SplitTrace {
    pub fn m(&self) -> usize {
        self.stages.len()
    }

    fn from_stages(n: usize, initial: IndexSet, stages: Vec<SplitStage>) -> Self {
        let terminal = stages.last().and_then(|s| {
            (s.half_a.len() == 1).then(|| (s.half_a.members()[0], s.half_b.members()[0]))
        });
        Self {
            n,
            initial,
            stages,
            terminal,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("trace serializes")
    }
}

/// Greedy trace: `J₀ = I`, `J_{l+1} = A_l`, until `|J| < 2`.
pub fn split_trace(set: &IndexSet, n: usize) -> Result<SplitTrace> {
    let mut stages = Vec::new();
    let mut current = set.clone();
    while current.len() >= 2 {
        let stage = split_stage(&current, n)?;
        current = stage.half_a.clone();
        stages.push(stage);
    }
    Ok(SplitTrace::from_stages(n, set.clone(), stages))
}

/// Bounds for the depth-first trace search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchBudget {
    /// Correlators tried per stage, strongest first.
    pub branching: usize,
    /// Stage evaluations before the search returns its deepest trace.
    pub max_nodes: usize,
}

impl Default for SearchBudget {
    fn default() -> Self {
        Self {
            branching: 8,
            max_nodes: 20_000,
        }
    }
}

struct Search<'a> {
    n: usize,
    target: usize,
    budget: &'a SearchBudget,
    nodes: usize,
    path: Vec<SplitStage>,
    best: Vec<SplitStage>,
}

impl Search<'_> {
    fn explore(&mut self, current: &IndexSet) -> Result<bool> {
        if self.path.len() > self.best.len() {
            self.best = self.path.clone();
        }
        if self.best.len() >= self.target {
            return Ok(true);
        }
        // each stage at least halves the working set
        let reachable = self.path.len() + current.len().max(1).ilog2() as usize;
        if current.len() < 2 || reachable <= self.best.len() || self.nodes >= self.budget.max_nodes {
            return Ok(false);
        }
        let profile = correlation_profile(current, self.n)?;
        for r in profile.ranked_correlators().into_iter().take(self.budget.branching) {
            if self.nodes >= self.budget.max_nodes {
                break;
            }
            self.nodes += 1;
            let stage = stage_for(&profile, r)?;
            let next = stage.half_a.clone();
            self.path.push(stage);
            let done = self.explore(&next)?;
            self.path.pop();
            if done {
                return Ok(true);
            }
        }
        Ok(false)
    }
}

/// Depth-first search over the strongest correlators for a trace with at
/// least `target` stages; its first branch is the greedy trace, so it never
/// does worse. The greedy trace is completed to `|J| = 1` in any case.
pub fn split_trace_targeted(
    set: &IndexSet,
    n: usize,
    target: usize,
    budget: &SearchBudget,
) -> Result<SplitTrace> {
    let greedy = split_trace(set, n)?;
    if greedy.m() >= target {
        return Ok(greedy);
    }
    let mut search = Search {
        n,
        target,
        budget,
        nodes: 0,
        path: Vec::new(),
        best: Vec::new(),
    };
    search.explore(set)?;
    if search.best.len() <= greedy.m() {
        return Ok(greedy);
    }
    // the deepest path is finished greedily down to its terminal pair
    let mut stages = search.best;
    let mut current = stages.last().map(|s| s.half_a.clone()).unwrap_or_else(|| set.clone());
    while current.len() >= 2 {
        let stage = split_stage(&current, n)?;
        current = stage.half_a.clone();
        stages.push(stage);
    }
    Ok(SplitTrace::from_stages(n, set.clone(), stages))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WitnessReport {
    pub f0: DyadicStepSignal<i64>,
    #[serde(serialize_with = "members")]
    pub support: IndexSet,
    pub m: usize,
    #[serde(serialize_with = "rational")]
    pub l1_of_one_plus_f: Rational,
    #[serde(serialize_with = "rational")]
    pub l2sq_of_one_plus_f: Rational,
    #[serde(serialize_with = "rational")]
    pub l1_of_f: Rational,
    #[serde(serialize_with = "rational")]
    pub l2sq_of_f: Rational,
    /// `‖1+f‖₂ / ‖1+f‖₁`.
    pub ratio: f64,
    /// `1 + m`.
    pub l1_bound: i64,
    /// `2^m − m²`.
    pub l2sq_bound: i64,
    pub bounds_hold: bool,
    /// Whether `1 + f = Π(1 + w_{r_l}) − Σ w_{r_l}` holds for this trace.
    pub product_identity_holds: bool,
    pub terms: usize,
    pub trace: SplitTrace,
}

impl WitnessReport {
    pub fn from_trace(trace: SplitTrace) -> Result<Self> {
        let n = trace.n;
        let level = ensure_power_of_two(n)?;
        let (i1, _) = trace
            .terminal
            .ok_or_else(|| Error::Degenerate("trace has no terminal pair".into()))?;
        let one = DyadicStepSignal::constant(level, 1i64);
        let mut f = walsh_signal(i1, level)?;
        let mut product = one.clone();
        let mut correlator_sum = DyadicStepSignal::zero(level);
        // f^(l-1) = (1 + w_{r_l}) f^(l), from the last stage back to the first
        for stage in trace.stages.iter().rev() {
            let wr = walsh_signal(stage.r, level)?;
            let factor = one.add(&wr);
            f = factor.mul(&f);
            product = product.mul(&factor);
            correlator_sum = correlator_sum.add(&wr);
        }
        let one_plus_f = one.add(&f);
        let identity = product.zip_with(&correlator_sum, |p, s| p - s);

        let coeffs = walsh_analysis_scaled(f.values());
        let support = IndexSet::new(
            n,
            coeffs.iter().enumerate().filter(|(_, &c)| c != 0).map(|(k, _)| k + 1),
        )?;
        let terms = support.len();

        let norms = step_norms(&one_plus_f.exact());
        let f_norms = step_norms(&f.exact());
        let m = trace.m();
        let l1_bound = 1 + m as i64;
        let l2sq_bound = (1i64 << m) - (m * m) as i64;
        let bounds_hold = norms.l1 <= Rational::from_integer(l1_bound as i128)
            && norms.l2_squared >= Rational::from_integer(l2sq_bound as i128);
        let ratio = norms.l2() / num_traits::ToPrimitive::to_f64(&norms.l1).unwrap_or(f64::NAN);
        Ok(Self {
            support,
            m,
            l1_of_one_plus_f: norms.l1,
            l2sq_of_one_plus_f: norms.l2_squared,
            l1_of_f: f_norms.l1,
            l2sq_of_f: f_norms.l2_squared,
            ratio,
            l1_bound,
            l2sq_bound,
            bounds_hold,
            product_identity_holds: identity == one_plus_f,
            terms,
            f0: f,
            trace,
        })
    }
}

fn check_input(set: &IndexSet) -> Result<()> {
    if set.len() < 2 {
        return Err(Error::Degenerate(format!(
            "need at least two indices to split, got {}",
            set.len()
        )));
    }
    Ok(())
}

/// Witness from the greedy trace.
pub fn main_lemma_witness(set: &IndexSet, n: usize) -> Result<WitnessReport> {
    check_input(set)?;
    WitnessReport::from_trace(split_trace(set, n)?)
}

/// Witness from [`split_trace_targeted`].
pub fn main_lemma_witness_targeted(
    set: &IndexSet,
    n: usize,
    target: usize,
    budget: &SearchBudget,
) -> Result<WitnessReport> {
    check_input(set)?;
    WitnessReport::from_trace(split_trace_targeted(set, n, target, budget)?)
}

/// Largest `m ≥ 0` with `N ≥ (2/δ)^(m+1)`, or `None` if even `m = 0` fails.
pub fn required_stages(delta: f64, n: usize) -> Result<Option<usize>> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::invalid(format!("density {delta} outside (0, 1]")));
    }
    let base = 2.0 / delta;
    let n = n as f64;
    // relative slack absorbs rounding in exact powers such as 4^6 = 4096
    let fits = |e: i32| base.powi(e) <= n * (1.0 + 1e-12);
    if !fits(1) {
        return Ok(None);
    }
    let mut m = 0usize;
    while fits(m as i32 + 2) {
        m += 1;
    }
    Ok(Some(m))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WalshCexBound {
    pub m: usize,
    #[serde(serialize_with = "rational")]
    pub bound: Rational,
    /// `false` when the bound does not exceed the trivial constant 1.
    pub informative: bool,
}

/// `(2^m − m²)/(1+m)` at the largest `m ≥ 1` with `N ≥ (2/δ)^(m+1)`.
pub fn cex_lower_bound_walsh(delta: f64, n: usize) -> Result<WalshCexBound> {
    if delta >= 1.0 + f64::EPSILON || delta <= 0.0 {
        return Err(Error::invalid(format!("density {delta} outside (0, 1]")));
    }
    ensure_power_of_two(n)?;
    let m = match required_stages(delta, n)? {
        Some(m) if m >= 1 => m,
        _ => {
            return Err(Error::Degenerate(format!(
                "N = {n} is below (2/δ)² for δ = {delta}"
            )))
        }
    };
    let bound = Rational::new((1i128 << m) - (m * m) as i128, 1 + m as i128);
    Ok(WalshCexBound {
        m,
        informative: bound > Rational::from_integer(1),
        bound,
    })
}
