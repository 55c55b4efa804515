use std::fmt::Debug;

use num_rational::Ratio;
use num_traits::{Num, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exact rational used for Walsh-side integrals.
pub type Rational = Ratio<i128>;

/// Scalars a step signal can carry while still supporting norm evaluation
/// and dyadic averaging.
pub trait StepScalar: Clone + PartialOrd + Num + Signed + Debug {
    fn from_i64(v: i64) -> Self;
    fn to_f64(&self) -> f64;
    /// `self / 2^k`
    fn div_pow2(&self, k: u32) -> Self;
}

impl StepScalar for f64 {
    fn from_i64(v: i64) -> Self {
        v as f64
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn div_pow2(&self, k: u32) -> Self {
        self / (k as f64).exp2()
    }
}

impl StepScalar for Rational {
    fn from_i64(v: i64) -> Self {
        Ratio::from_integer(v as i128)
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn div_pow2(&self, k: u32) -> Self {
        self / Ratio::from_integer(1i128 << k)
    }
}

/// Piecewise-constant function on [0, 1) at dyadic resolution 2^-level.
///
/// `values[c]` is the value on the open cell `(c·2^-level, (c+1)·2^-level)`;
/// the dyadic endpoints themselves are a null set and carry no value.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct DyadicStepSignal<T> {
    level: u32,
    values: Vec<T>,
}

impl<T> DyadicStepSignal<T> {
    pub fn new(level: u32, values: Vec<T>) -> Result<Self> {
        if level >= usize::BITS || values.len() != 1usize << level {
            return Err(Error::invalid(format!(
                "{} values cannot describe a level-{level} signal",
                values.len()
            )));
        }
        Ok(Self { level, values })
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn cells(&self) -> usize {
        self.values.len()
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> DyadicStepSignal<U> {
        DyadicStepSignal {
            level: self.level,
            values: self.values.iter().map(f).collect(),
        }
    }
}

impl<T: Clone> DyadicStepSignal<T> {
    pub fn constant(level: u32, value: T) -> Self {
        Self {
            level,
            values: vec![value; 1usize << level],
        }
    }

    /// Same function described at a finer level (each value repeated).
    pub fn refine(&self, level: u32) -> Result<Self> {
        if level < self.level {
            return Err(Error::LevelMismatch {
                expected: level,
                actual: self.level,
            });
        }
        let repeat = 1usize << (level - self.level);
        let values = self
            .values
            .iter()
            .flat_map(|v| std::iter::repeat_n(v.clone(), repeat))
            .collect();
        Ok(Self { level, values })
    }

    /// Pointwise combination after refining both operands to the finer level.
    pub fn zip_with<U: Clone, V>(
        &self,
        other: &DyadicStepSignal<U>,
        mut f: impl FnMut(&T, &U) -> V,
    ) -> DyadicStepSignal<V> {
        let level = self.level.max(other.level);
        // refining to a finer level never fails
        let lhs = self.refine(level).expect("finer level");
        let rhs = other.refine(level).expect("finer level");
        DyadicStepSignal {
            level,
            values: lhs
                .values
                .iter()
                .zip(&rhs.values)
                .map(|(a, b)| f(a, b))
                .collect(),
        }
    }
}

impl<T: Clone + std::ops::Mul<Output = T>> DyadicStepSignal<T> {
    pub fn mul(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a.clone() * b.clone())
    }
}

impl<T: Clone + std::ops::Add<Output = T>> DyadicStepSignal<T> {
    pub fn add(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a.clone() + b.clone())
    }
}

impl DyadicStepSignal<i64> {
    pub fn exact(&self) -> DyadicStepSignal<Rational> {
        self.map(|&v| Rational::from_i64(v))
    }

    pub fn to_real(&self) -> DyadicStepSignal<f64> {
        self.map(|&v| v as f64)
    }
}

/// L¹, L², L^∞ norms of a step signal over [0, 1).
#[derive(Debug, Clone, PartialEq)]
pub struct StepNorms<T> {
    pub l1: T,
    pub l2_squared: T,
    pub linf: T,
}

impl<T: StepScalar> StepNorms<T> {
    pub fn l2(&self) -> f64 {
        self.l2_squared.to_f64().sqrt()
    }
}

pub fn step_norms<T: StepScalar>(f: &DyadicStepSignal<T>) -> StepNorms<T> {
    let mut abs_sum = T::zero();
    let mut sq_sum = T::zero();
    let mut linf = T::zero();
    for v in &f.values {
        let a = v.abs();
        sq_sum = sq_sum + a.clone() * a.clone();
        if a > linf {
            linf = a.clone();
        }
        abs_sum = abs_sum + a;
    }
    StepNorms {
        l1: abs_sum.div_pow2(f.level),
        l2_squared: sq_sum.div_pow2(f.level),
        linf,
    }
}

/// ∫₀¹ f(x) dx.
pub fn step_integral<T: StepScalar>(f: &DyadicStepSignal<T>) -> T {
    f.values
        .iter()
        .fold(T::zero(), |acc, v| acc + v.clone())
        .div_pow2(f.level)
}

impl<T: Zero + Clone> DyadicStepSignal<T> {
    pub fn zero(level: u32) -> Self {
        Self::constant(level, T::zero())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i128, d: i128) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn norms_of_delta_like_signal() {
        let f = DyadicStepSignal::new(2, vec![4i64, 0, 0, 0]).unwrap().exact();
        let n = step_norms(&f);
        assert_eq!(n.l1, r(1, 1));
        assert_eq!(n.l2_squared, r(4, 1));
        assert_eq!(n.linf, r(4, 1));
        assert_eq!(n.l2(), 2.0);
    }

    #[test]
    fn norms_of_zero_signal() {
        let f: DyadicStepSignal<Rational> = DyadicStepSignal::zero(1);
        let n = step_norms(&f);
        assert!(n.l1.is_zero() && n.l2_squared.is_zero() && n.linf.is_zero());
    }

    #[test]
    fn wrong_length_rejected() {
        assert!(DyadicStepSignal::new(2, vec![1.0; 3]).is_err());
    }

    #[test]
    fn refinement_keeps_norms() {
        let f = DyadicStepSignal::new(1, vec![3i64, -1]).unwrap().exact();
        let g = f.refine(4).unwrap();
        assert_eq!(g.cells(), 16);
        assert_eq!(step_norms(&f), step_norms(&g));
    }

    #[test]
    fn zip_refines_to_finer_level() {
        let f = DyadicStepSignal::new(1, vec![1i64, -1]).unwrap();
        let g = DyadicStepSignal::new(2, vec![1i64, -1, 1, -1]).unwrap();
        assert_eq!(f.mul(&g).values(), &[1, -1, -1, 1]);
    }
}
