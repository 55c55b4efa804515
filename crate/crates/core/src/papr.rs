//! Peak-to-average power ratio of a coefficient vector and the flat
//! coefficient vector that attains the `√N` ceiling.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::systems::signal::Rational;
use crate::systems::walsh::{ensure_power_of_two, walsh_synthesis};
use crate::systems::{trig_supnorm, CoefficientVector, SystemTag};

pub const DEFAULT_OVERSAMPLE: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", content = "at", rename_all = "lowercase")]
pub enum PeakLocation {
    /// 0-based dyadic cell.
    Cell(usize),
    /// Grid point in `[0, 1)`.
    Time(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PaprReport {
    pub system: SystemTag,
    pub n: usize,
    pub papr: f64,
    pub attaining_point: PeakLocation,
    /// Points examined; equals `n` for Walsh, where the value is exact.
    pub grid_points: usize,
}

/// Cell values of the complex Walsh expansion with the given coefficients.
pub fn walsh_cells(a: &CoefficientVector) -> Result<Vec<Complex64>> {
    ensure_power_of_two(a.ambient_size())?;
    Ok(walsh_synthesis(a.entries()))
}

pub fn compute_papr(system: SystemTag, n: usize, a: &CoefficientVector) -> Result<PaprReport> {
    compute_papr_with(system, n, a, DEFAULT_OVERSAMPLE)
}

pub fn compute_papr_with(
    system: SystemTag,
    n: usize,
    a: &CoefficientVector,
    oversample: usize,
) -> Result<PaprReport> {
    if a.ambient_size() != n {
        return Err(Error::invalid(format!(
            "coefficient vector has ambient size {}, expected {n}",
            a.ambient_size()
        )));
    }
    if a.is_zero() {
        return Err(Error::ZeroVector);
    }
    let norm = a.l2_norm();
    match system {
        SystemTag::Walsh => {
            let cells = walsh_cells(a)?;
            let (cell, peak) = cells
                .iter()
                .map(|v| v.norm())
                .enumerate()
                .fold((0, 0.0f64), |best, (i, v)| if v > best.1 { (i, v) } else { best });
            Ok(PaprReport {
                system,
                n,
                papr: peak / norm,
                attaining_point: PeakLocation::Cell(cell),
                grid_points: n,
            })
        }
        SystemTag::Fourier => {
            let est = trig_supnorm(a, oversample)?;
            Ok(PaprReport {
                system,
                n,
                papr: est.value / norm,
                attaining_point: PeakLocation::Time(est.argmax_t),
                grid_points: est.grid_points,
            })
        }
    }
}

/// Exact squared Walsh PAPR of an integer coefficient vector (dense, index
/// `k` at position `k-1`). PAPR is scale invariant, so this covers every
/// rational direction.
pub fn walsh_papr_squared_exact(coeffs: &[i64]) -> Result<Rational> {
    ensure_power_of_two(coeffs.len())?;
    let energy: i128 = coeffs.iter().map(|&c| (c as i128) * (c as i128)).sum();
    if energy == 0 {
        return Err(Error::ZeroVector);
    }
    let peak = walsh_synthesis(coeffs)
        .iter()
        .map(|v| v.unsigned_abs() as i128)
        .max()
        .unwrap_or(0);
    Ok(Rational::new(peak * peak, energy))
}

/// Unit vector `a_k = conj(φ_k(t0)) / √N` with `t0` on the first cell (Walsh)
/// or `t0 = 0` (Fourier); both give the all-equal vector.
pub fn adversarial_witness(system: SystemTag, n: usize) -> Result<CoefficientVector> {
    if n == 0 {
        return Err(Error::invalid("N must be at least 1"));
    }
    if system == SystemTag::Walsh {
        ensure_power_of_two(n)?;
    }
    let v = 1.0 / (n as f64).sqrt();
    Ok(CoefficientVector::from_dense_real(&vec![v; n]))
}
