use crate::error::{Error, Result};
use crate::systems::signal::{DyadicStepSignal, StepScalar};
use crate::systems::walsh::rademacher_signal;

/// `P_{2^n} f`: the average of `f` over each dyadic cell of length `2^-n`,
/// stored at level `n`.
pub fn dyadic_projection<T: StepScalar>(
    f: &DyadicStepSignal<T>,
    target_level: u32,
) -> Result<DyadicStepSignal<T>> {
    if target_level > f.level() {
        return Err(Error::LevelMismatch {
            expected: f.level(),
            actual: target_level,
        });
    }
    // each pairwise mean lies between its two inputs, in floating point too
    let mut values = f.values().to_vec();
    for _ in target_level..f.level() {
        values = values
            .chunks(2)
            .map(|pair| (pair[0].clone() + pair[1].clone()).div_pow2(1))
            .collect();
    }
    DyadicStepSignal::new(target_level, values)
}

/// `r_m · (P_{2^(m+1)} − P_{2^m}) f` at level `m + 1`.
///
/// The band difference lies in `span{w_{2^m+1}..w_{2^(m+1)}}`; multiplying by
/// `r_m = w_{2^m+1}` moves it into `span{w_1..w_{2^m}}` without changing
/// any modulus.
pub fn q_shift<T: StepScalar>(f: &DyadicStepSignal<T>, m: u32) -> Result<DyadicStepSignal<T>> {
    if f.level() < m + 1 {
        return Err(Error::LevelMismatch {
            expected: f.level(),
            actual: m + 1,
        });
    }
    let fine = dyadic_projection(f, m + 1)?;
    let coarse = dyadic_projection(f, m)?;
    let band = fine.zip_with(&coarse, |a, b| a.clone() - b.clone());
    let rm = rademacher_signal(m, m + 1)?;
    Ok(band.zip_with(&rm, |v, &s| v.clone() * T::from_i64(s)))
}

/// `(P_{2^(m+1)} − P_{2^m}) f` at level `m + 1`.
pub fn band_difference<T: StepScalar>(
    f: &DyadicStepSignal<T>,
    m: u32,
) -> Result<DyadicStepSignal<T>> {
    let fine = dyadic_projection(f, m + 1)?;
    let coarse = dyadic_projection(f, m)?;
    Ok(fine.zip_with(&coarse, |a, b| a.clone() - b.clone()))
}
