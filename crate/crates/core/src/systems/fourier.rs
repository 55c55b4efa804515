//! Discrete Fourier transform and sup-norm estimates for trigonometric
//! polynomials `Σ c_k e^{2πikt}` on `[0, 1)`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::systems::sets::CoefficientVector;

/// Dense unitary DFT matrix with `F[j][k] = e^{-2πi jk/N} / √N` (0-based).
#[derive(Debug, Clone, PartialEq)]
pub struct DftMatrix {
    size: usize,
    entries: Vec<Complex64>,
}

impl DftMatrix {
    pub fn new(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::invalid("DFT size must be positive"));
        }
        let scale = 1.0 / (size as f64).sqrt();
        let mut entries = Vec::with_capacity(size * size);
        for j in 0..size {
            for k in 0..size {
                // phase argument reduced mod N before scaling
                let phase = -2.0 * PI * ((j * k) % size) as f64 / size as f64;
                entries.push(Complex64::from_polar(scale, phase));
            }
        }
        Ok(Self { size, entries })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn entry(&self, j: usize, k: usize) -> Complex64 {
        self.entries[j * self.size + k]
    }

    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        (0..self.size)
            .map(|j| (0..self.size).map(|k| self.entry(j, k) * x[k]).sum())
            .collect()
    }

    /// Largest entrywise deviation of `F F*` from the identity.
    pub fn unitarity_defect(&self) -> f64 {
        let n = self.size;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let s: Complex64 = (0..n)
                    .map(|k| self.entry(i, k) * self.entry(j, k).conj())
                    .sum();
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((s - target).norm());
            }
        }
        worst
    }
}

fn plan(len: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    let mut planner = FftPlanner::new();
    if inverse {
        planner.plan_fft_inverse(len)
    } else {
        planner.plan_fft_forward(len)
    }
}

/// Unitary forward DFT, matching [`DftMatrix::apply`].
pub fn dft(x: &[Complex64]) -> Vec<Complex64> {
    let mut buf = x.to_vec();
    if buf.is_empty() {
        return buf;
    }
    plan(buf.len(), false).process(&mut buf);
    let scale = 1.0 / (buf.len() as f64).sqrt();
    buf.iter_mut().for_each(|v| *v *= scale);
    buf
}

/// Unitary inverse DFT.
pub fn idft(x: &[Complex64]) -> Vec<Complex64> {
    let mut buf = x.to_vec();
    if buf.is_empty() {
        return buf;
    }
    plan(buf.len(), true).process(&mut buf);
    let scale = 1.0 / (buf.len() as f64).sqrt();
    buf.iter_mut().for_each(|v| *v *= scale);
    buf
}

/// Values `Σ_k c_k e^{2πi(k-1)j/N}` at the `N` grid points `t = j/N`.
///
/// Dropping the common factor `e^{2πit}` does not change any modulus, so this
/// is the sampled signal of the coefficient vector up to a unimodular factor.
pub fn sample_signal(c: &CoefficientVector) -> Vec<Complex64> {
    let n = c.ambient_size();
    let mut buf = c.entries().to_vec();
    if n > 0 {
        plan(n, true).process(&mut buf);
    }
    buf
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SupEstimate {
    /// Largest modulus seen on the grid; a lower bound on the true sup norm.
    pub value: f64,
    pub grid_points: usize,
    pub argmax_t: f64,
}

pub const MIN_OVERSAMPLE: usize = 4;

/// Grid estimate of `sup_t |Σ_k c_k e^{2πikt}|` on `oversample · N` points.
pub fn trig_supnorm(c: &CoefficientVector, oversample: usize) -> Result<SupEstimate> {
    if oversample < MIN_OVERSAMPLE {
        return Err(Error::invalid(format!(
            "oversample {oversample} below the minimum {MIN_OVERSAMPLE}"
        )));
    }
    let n = c.ambient_size();
    let grid = (oversample * n).max(1);
    let mut buf = vec![Complex64::new(0.0, 0.0); grid];
    for k in c.support().iter() {
        buf[k % grid] += c.get(k);
    }
    plan(grid, true).process(&mut buf);
    let (idx, value) = buf
        .iter()
        .map(|v| v.norm())
        .enumerate()
        .fold((0, 0.0f64), |best, (i, v)| if v > best.1 { (i, v) } else { best });
    Ok(SupEstimate {
        value,
        grid_points: grid,
        argmax_t: idx as f64 / grid as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::sets::IndexSet;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_vec(n: usize, seed: u64) -> Vec<Complex64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect()
    }

    #[test]
    fn dense_matrix_is_unitary() {
        for n in [1, 2, 3, 8, 16, 33] {
            assert!(DftMatrix::new(n).unwrap().unitarity_defect() < 1e-12);
        }
    }

    #[test]
    fn fft_matches_dense_matrix() {
        for n in [1, 4, 7, 64] {
            let x = random_vec(n, n as u64);
            let dense = DftMatrix::new(n).unwrap().apply(&x);
            for (a, b) in dft(&x).iter().zip(&dense) {
                assert!((a - b).norm() < 1e-12);
            }
            for (a, b) in idft(&dft(&x)).iter().zip(&x) {
                assert!((a - b).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn supnorm_examples() {
        let single = CoefficientVector::real(IndexSet::new(1, [1]).unwrap(), &[1.0]).unwrap();
        assert!((trig_supnorm(&single, 4).unwrap().value - 1.0).abs() < 1e-12);

        let flat = CoefficientVector::from_dense_real(&[0.25; 16]);
        let est = trig_supnorm(&flat, 4).unwrap();
        assert!(est.value >= 4.0 - 1e-12);
        assert_eq!(est.argmax_t, 0.0);

        let s = std::f64::consts::FRAC_1_SQRT_2;
        let pair = CoefficientVector::from_dense_real(&[s, -s]);
        let est = trig_supnorm(&pair, 4).unwrap();
        // dense oracle: |1 - e^{2πit}| / √2 peaks at t = 1/2
        let dense_max = (0..100_000)
            .map(|i| {
                let t = i as f64 / 100_000.0;
                (Complex64::from_polar(s, 2.0 * PI * t) - Complex64::from_polar(s, 4.0 * PI * t))
                    .norm()
            })
            .fold(0.0, f64::max);
        assert!((est.value - dense_max).abs() < 1e-9);
        assert!((est.value - 2f64.sqrt()).abs() < 1e-12);

        assert!(trig_supnorm(&pair, 3).is_err());
    }

    proptest! {
        #[test]
        fn parseval(log_n in 0u32..=12, seed in any::<u64>()) {
            let n = 1usize << log_n;
            let x = random_vec(n, seed);
            let norm = |v: &[Complex64]| v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            let before = norm(&x);
            prop_assert!((norm(&dft(&x)) - before).abs() <= 1e-12 * before.max(1.0) * 10.0);
        }
    }
}
