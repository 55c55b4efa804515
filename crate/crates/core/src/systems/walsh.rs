//! Rademacher and Walsh functions (Paley ordering through the recursion
//! `w_1 = 1`, `w_{2^k+m} = r_k · w_m`), Hadamard matrices and the fast
//! transform that maps Walsh coefficients to cell values.

use std::ops::{Add, Mul, Sub};

use crate::error::{Error, Result};
use crate::systems::signal::DyadicStepSignal;

/// Largest Hadamard order (2^k) we are willing to materialize.
pub const MAX_HADAMARD_LOG2: u32 = 20;
/// Largest resolution for explicitly built Walsh/Rademacher signals.
pub const MAX_SIGNAL_LEVEL: u32 = 24;

/// `r_k` sampled on the cell interiors of level `level`.
pub fn rademacher_signal(k: u32, level: u32) -> Result<DyadicStepSignal<i64>> {
    if level < k + 1 {
        return Err(Error::ResolutionTooCoarse { k, level });
    }
    if level > MAX_SIGNAL_LEVEL {
        return Err(Error::SizeOverflow {
            k: level,
            max: MAX_SIGNAL_LEVEL,
        });
    }
    // sign sin(2π 2^k t) is +1 on the first half of each period of length 2^-k
    let shift = level - 1 - k;
    let values = (0..1usize << level)
        .map(|c| if (c >> shift) & 1 == 0 { 1 } else { -1 })
        .collect();
    DyadicStepSignal::new(level, values)
}

/// `w_j` on the cells of level `level`, built by the defining recursion.
pub fn walsh_signal(j: usize, level: u32) -> Result<DyadicStepSignal<i64>> {
    if level > MAX_SIGNAL_LEVEL {
        return Err(Error::SizeOverflow {
            k: level,
            max: MAX_SIGNAL_LEVEL,
        });
    }
    let n = 1usize << level;
    if j == 0 || j > n {
        return Err(Error::IndexOutOfRange {
            index: j,
            ambient: n,
        });
    }
    if j == 1 {
        return Ok(DyadicStepSignal::constant(level, 1));
    }
    let k = (j - 1).ilog2();
    let m = j - (1usize << k);
    Ok(rademacher_signal(k, level)?.mul(&walsh_signal(m, level)?))
}

/// Index `l` with `w_j · w_k = w_l`.
pub fn walsh_product_index(j: usize, k: usize, n: usize) -> Result<usize> {
    for index in [j, k] {
        if index == 0 || index > n {
            return Err(Error::IndexOutOfRange { index, ambient: n });
        }
    }
    Ok(((j - 1) ^ (k - 1)) + 1)
}

pub fn ensure_power_of_two(n: usize) -> Result<u32> {
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(n));
    }
    Ok(n.trailing_zeros())
}

fn bit_reverse(x: usize, bits: u32) -> usize {
    if bits == 0 {
        0
    } else {
        x.reverse_bits() >> (usize::BITS - bits)
    }
}

/// In-place unnormalized Sylvester-ordered Walsh–Hadamard transform.
pub fn fwht<T: Copy + Add<Output = T> + Sub<Output = T>>(data: &mut [T]) {
    let n = data.len();
    debug_assert!(n.is_power_of_two());
    let mut h = 1;
    while h < n {
        for block in data.chunks_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = x + y;
                *b = x - y;
            }
        }
        h *= 2;
    }
}

/// Cell values of `Σ_j coeffs[j-1] · w_j` (length must be a power of two).
pub fn walsh_synthesis<T: Copy + Add<Output = T> + Sub<Output = T>>(coeffs: &[T]) -> Vec<T> {
    let bits = coeffs.len().trailing_zeros();
    let mut work = coeffs.to_vec();
    fwht(&mut work);
    // Sylvester row i is the Paley system evaluated on cell bitrev(i)
    (0..work.len())
        .map(|c| work[bit_reverse(c, bits)])
        .collect()
}

/// Walsh coefficients of a step signal given by its cell values.
pub fn walsh_analysis<T>(cells: &[T]) -> Vec<T>
where
    T: Copy + Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T>,
{
    let n = cells.len();
    let bits = n.trailing_zeros();
    let mut work: Vec<T> = (0..n).map(|i| cells[bit_reverse(i, bits)]).collect();
    fwht(&mut work);
    let scale = 1.0 / n as f64;
    work.into_iter().map(|v| v * scale).collect()
}

/// Exact integer variant of [`walsh_analysis`] returning `N · coefficient`.
pub fn walsh_analysis_scaled(cells: &[i64]) -> Vec<i64> {
    let n = cells.len();
    let bits = n.trailing_zeros();
    let mut work: Vec<i64> = (0..n).map(|i| cells[bit_reverse(i, bits)]).collect();
    fwht(&mut work);
    work
}

/// `w_j` on cell `cell` of level `level`, via the bit-parity form.
pub fn walsh_value(j: usize, cell: usize, level: u32) -> i64 {
    let x = bit_reverse(cell, level);
    if ((j - 1) & x).count_ones() % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Hadamard matrix of order 2^k: signs plus the common scale 2^(-k/2).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HadamardMatrix {
    log2_size: u32,
    signs: Vec<i8>,
}

impl HadamardMatrix {
    pub fn size(&self) -> usize {
        1 << self.log2_size
    }

    pub fn log2_size(&self) -> u32 {
        self.log2_size
    }

    /// Unscaled ±1 entry, 0-based.
    pub fn sign(&self, i: usize, j: usize) -> i8 {
        self.signs[i * self.size() + j]
    }

    pub fn scale(&self) -> f64 {
        (-(self.log2_size as f64) / 2.0).exp2()
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.sign(i, j) as f64 * self.scale()
    }

    pub fn row_signs(&self, i: usize) -> &[i8] {
        let n = self.size();
        &self.signs[i * n..(i + 1) * n]
    }

    /// Orthogonality checked in integer arithmetic: `H Hᵀ = 2^k I` before scaling.
    pub fn is_orthogonal(&self) -> bool {
        let n = self.size();
        (0..n).all(|i| {
            (0..n).all(|j| {
                let dot: i64 = self
                    .row_signs(i)
                    .iter()
                    .zip(self.row_signs(j))
                    .map(|(&a, &b)| a as i64 * b as i64)
                    .sum();
                dot == if i == j { n as i64 } else { 0 }
            })
        })
    }

    /// 0-based cell whose Walsh values (in index order) make up row `i`.
    pub fn cell_of_row(&self, i: usize) -> usize {
        bit_reverse(i, self.log2_size)
    }
}

/// `H_1 = [1]`, `H_{2^(k+1)} = [[H, H], [H, -H]]` (scaled by 2^(-(k+1)/2)).
pub fn hadamard_matrix(k: u32) -> Result<HadamardMatrix> {
    if k > MAX_HADAMARD_LOG2 {
        return Err(Error::SizeOverflow {
            k,
            max: MAX_HADAMARD_LOG2,
        });
    }
    let mut signs = vec![1i8];
    let mut n = 1usize;
    for _ in 0..k {
        let m = 2 * n;
        let mut next = vec![0i8; m * m];
        for i in 0..n {
            for j in 0..n {
                let s = signs[i * n + j];
                next[i * m + j] = s;
                next[i * m + j + n] = s;
                next[(i + n) * m + j] = s;
                next[(i + n) * m + j + n] = -s;
            }
        }
        signs = next;
        n = m;
    }
    Ok(HadamardMatrix {
        log2_size: k,
        signs,
    })
}
