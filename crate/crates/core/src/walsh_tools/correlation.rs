use serde::Serialize;

use crate::error::{Error, Result};
use crate::systems::walsh::{ensure_power_of_two, walsh_analysis_scaled, walsh_signal, walsh_synthesis};
use crate::systems::IndexSet;

/// XOR partner of `k` under `w_r`: the index `l` with `w_k · w_r = w_l`.
pub(crate) fn partner(k: usize, r: usize) -> usize {
    ((k - 1) ^ (r - 1)) + 1
}

fn check(r: usize, set: &IndexSet, n: usize) -> Result<u32> {
    let level = ensure_power_of_two(n)?;
    if set.ambient_size() != n {
        return Err(Error::invalid(format!(
            "index set lives in 1..={}, expected 1..={n}",
            set.ambient_size()
        )));
    }
    if r == 0 || r > n {
        return Err(Error::IndexOutOfRange { index: r, ambient: n });
    }
    Ok(level)
}

/// `{k ∈ I : partner_r(k) ∈ I}`.
pub fn m_set(r: usize, set: &IndexSet, n: usize) -> Result<IndexSet> {
    check(r, set, n)?;
    IndexSet::new(n, set.iter().filter(|&k| set.contains(partner(k, r))))
}

fn indicator(set: &IndexSet) -> Vec<i64> {
    set.mask().into_iter().map(i64::from).collect()
}

/// `∫ w_r |Σ_{k∈I} w_k|²`, evaluated cell by cell in integers.
pub fn correlation(r: usize, set: &IndexSet, n: usize) -> Result<i64> {
    let level = check(r, set, n)?;
    let sum = walsh_synthesis(&indicator(set));
    let wr = walsh_signal(r, level)?;
    let total: i128 = sum
        .iter()
        .zip(wr.values())
        .map(|(&s, &w)| (w as i128) * (s as i128) * (s as i128))
        .sum();
    if total % n as i128 != 0 {
        return Err(Error::Internal(format!(
            "correlation integral {total}/{n} is not an integer"
        )));
    }
    Ok((total / n as i128) as i64)
}

/// All correlations `C(w_r, I)`, `r = 1..=N`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CorrelationProfile {
    pub n: usize,
    pub set: IndexSet,
    /// `values[r - 1] = C(w_r, I)`.
    pub values: Vec<i64>,
}

impl CorrelationProfile {
    pub fn get(&self, r: usize) -> i64 {
        self.values[r - 1]
    }

    pub fn total(&self) -> i64 {
        self.values.iter().sum()
    }

    /// Correlators `r ≥ 2` with positive correlation, strongest first, ties
    /// by smaller index.
    pub fn ranked_correlators(&self) -> Vec<usize> {
        let mut rs: Vec<usize> = (2..=self.n).filter(|&r| self.get(r) > 0).collect();
        rs.sort_by_key(|&r| (std::cmp::Reverse(self.get(r)), r));
        rs
    }
}

/// `C(w_r, I)` for every `r` at once: the Walsh coefficients of `|Σ_{k∈I} w_k|²`.
pub fn correlation_profile(set: &IndexSet, n: usize) -> Result<CorrelationProfile> {
    check(1, set, n)?;
    let sum = walsh_synthesis(&indicator(set));
    let squared: Vec<i64> = sum.iter().map(|s| s * s).collect();
    let scaled = walsh_analysis_scaled(&squared);
    let values = scaled
        .iter()
        .map(|&v| {
            if v % n as i64 == 0 {
                Ok(v / n as i64)
            } else {
                Err(Error::Internal(format!("coefficient {v}/{n} is not an integer")))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let profile = CorrelationProfile {
        n,
        set: set.clone(),
        values,
    };
    let size = set.len() as i64;
    if profile.total() != size * size {
        return Err(Error::Internal(format!(
            "correlations sum to {}, expected |I|² = {}",
            profile.total(),
            size * size
        )));
    }
    Ok(profile)
}
