//! Arithmetic progressions in Fourier index sets, the progression witness
//! whose DFT has small l¹ norm, and the kernels used for lacunary sets.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::systems::{dft, CoefficientVector, IndexSet};

/// `{a, a+d, …, a+(m−1)d}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct ApDescriptor {
    pub start: usize,
    pub step: usize,
    pub length: usize,
}

impl ApDescriptor {
    pub fn new(start: usize, step: usize, length: usize) -> Result<Self> {
        if start == 0 || step == 0 || length == 0 {
            return Err(Error::invalid("progression needs start, step, length >= 1"));
        }
        Ok(Self {
            start,
            step,
            length,
        })
    }

    pub fn last(&self) -> usize {
        self.start + (self.length - 1) * self.step
    }

    pub fn members(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.length).map(move |l| self.start + l * self.step)
    }
}

/// A longest progression inside `I`; ties go to the smaller step, then the
/// smaller start. Runs in `O(N·|I|)` time and `O(N)` memory.
pub fn longest_ap(set: &IndexSet) -> Result<ApDescriptor> {
    let first = *set.members().first().ok_or(Error::EmptySet)?;
    let n = set.ambient_size();
    let mask = set.mask();
    let mut best = ApDescriptor::new(first, 1, 1)?;
    // run[x] = length of the progression with step d ending at x
    let mut run = vec![0usize; n + 1];
    for d in 1..n {
        if (best.length - 1) * d >= n {
            break;
        }
        for &x in set.members() {
            run[x] = if x > d && mask[x - d - 1] { run[x - d] + 1 } else { 1 };
            if run[x] > best.length {
                best = ApDescriptor::new(x - (run[x] - 1) * d, d, run[x])?;
            }
        }
    }
    Ok(best)
}

/// `|Σ_{l<m} e^{2πilx}|`.
pub fn dirichlet_modulus(m: usize, x: f64) -> f64 {
    let den = (PI * x).sin();
    if den.abs() < 1e-12 {
        return m as f64;
    }
    ((PI * m as f64 * x).sin() / den).abs()
}

fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// `S(t) = Σ_{j<N} |D_m(d(t−j)/N)|` for the grid `t = k/G`, `k = 0..=G/2`.
///
/// With `g = gcd(d, N)` the shifts `dj/N mod 1` run over the multiples of
/// `g/N`, each `g` times, so one evaluation costs `N/g` terms. `S` is even
/// and 1-periodic, so half the grid suffices.
struct ShiftSum {
    m: usize,
    d: usize,
    n: usize,
    g: usize,
    rot: Vec<Complex64>,
}

impl ShiftSum {
    fn new(m: usize, d: usize, n: usize) -> Self {
        let g = gcd(d, n);
        let np = n / g;
        let rot = (0..np)
            .map(|u| Complex64::from_polar(1.0, -PI * u as f64 / np as f64))
            .collect();
        Self { m, d, n, g, rot }
    }

    fn eval(&self, t: f64) -> f64 {
        let y = self.d as f64 * t / self.n as f64;
        let c = Complex64::from_polar(1.0, PI * y);
        let mut total = 0.0;
        for r in &self.rot {
            // z = e^{iπ(y − u/N')}
            let z = c * r;
            let den = z.im.abs();
            total += if den < 1e-12 {
                self.m as f64
            } else {
                z.powu(self.m as u32).im.abs() / den
            };
        }
        self.g as f64 * total
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApWitness {
    pub d: CoefficientVector,
    pub ap: ApDescriptor,
    pub t_star: f64,
    pub grid_points: usize,
    pub refinements: u32,
    /// `‖F D‖₁` from a direct DFT of `D`.
    pub fd_l1: f64,
    /// `(ln m / √m) √N`.
    pub bound: f64,
    pub within_bound: bool,
}

impl ApWitness {
    /// `√N ‖D‖₂ / ‖F D‖₁`.
    pub fn ratio(&self) -> f64 {
        (self.d.ambient_size() as f64).sqrt() * self.d.l2_norm() / self.fd_l1
    }
}

pub const MAX_REFINEMENTS: u32 = 3;

fn fd_l1(d: &CoefficientVector) -> f64 {
    dft(d.entries()).iter().map(|z| z.norm()).sum()
}

fn witness_at(n: usize, ap: &ApDescriptor, t: f64) -> Result<CoefficientVector> {
    let scale = 1.0 / (ap.length as f64).sqrt();
    let entries: Vec<Complex64> = ap
        .members()
        .map(|k| Complex64::from_polar(scale, 2.0 * PI * ((k as f64 * t) % n as f64) / n as f64))
        .collect();
    CoefficientVector::new(IndexSet::new(n, ap.members())?, &entries)
}

/// Unit vector on the progression with phases `e^{2πi k t*/N}`, `t*` the grid
/// minimizer of `S(t)`. If the bound fails, the grid spacing around the
/// current minimizer is refined ×4, at most [`MAX_REFINEMENTS`] times.
pub fn ap_witness(n: usize, ap: &ApDescriptor, t_grid: usize) -> Result<ApWitness> {
    if ap.length < 2 {
        return Err(Error::Degenerate("progression of length 1 gives no bound".into()));
    }
    if ap.last() > n {
        return Err(Error::invalid(format!(
            "progression ends at {} beyond N = {n}",
            ap.last()
        )));
    }
    if t_grid < 16 * n {
        return Err(Error::invalid(format!("t_grid {t_grid} below 16·N = {}", 16 * n)));
    }
    let bound = (ap.length as f64).ln() / (ap.length as f64).sqrt() * (n as f64).sqrt();
    let sums = ShiftSum::new(ap.length, ap.step, n);

    let mut spacing = 1.0 / t_grid as f64;
    let mut best_t = 0.0;
    let mut best_s = f64::INFINITY;
    for k in 0..=t_grid / 2 {
        let t = k as f64 * spacing;
        let s = sums.eval(t);
        if s < best_s {
            (best_t, best_s) = (t, s);
        }
    }

    let mut refinements = 0;
    let mut d = witness_at(n, ap, best_t)?;
    let mut measured = fd_l1(&d);
    while measured > bound && refinements < MAX_REFINEMENTS {
        refinements += 1;
        let centre = best_t;
        let fine = spacing / 4.0;
        for k in -4i32..=4 {
            let t = centre + k as f64 * fine;
            let s = sums.eval(t);
            if s < best_s {
                (best_t, best_s) = (t.rem_euclid(1.0), s);
            }
        }
        spacing = fine;
        d = witness_at(n, ap, best_t)?;
        measured = fd_l1(&d);
    }

    Ok(ApWitness {
        d,
        ap: *ap,
        t_star: best_t,
        grid_points: t_grid,
        refinements,
        fd_l1: measured,
        bound,
        within_bound: measured <= bound,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApBound {
    pub ap: ApDescriptor,
    /// `√m / ln m`.
    pub formula_bound: f64,
    /// `√N ‖D‖₂ / ‖F D‖₁` of the constructed witness.
    pub measured_ratio: f64,
    /// `max(formula_bound, measured_ratio)`, or 1 when flagged.
    pub bound: f64,
    /// Set when the longest progression has length below 2.
    pub flagged: bool,
}

/// Lower bound on the extension constant from the longest progression in `I`.
pub fn cex_lower_bound_ap(set: &IndexSet, n: usize) -> Result<ApBound> {
    let set = if set.ambient_size() == n { set.clone() } else { set.with_ambient(n)? };
    let ap = longest_ap(&set)?;
    if ap.length < 2 {
        return Ok(ApBound {
            ap,
            formula_bound: 1.0,
            measured_ratio: 1.0,
            bound: 1.0,
            flagged: true,
        });
    }
    let m = ap.length as f64;
    let formula_bound = m.sqrt() / m.ln();
    let witness = ap_witness(n, &ap, 16 * n)?;
    let measured_ratio = witness.ratio();
    Ok(ApBound {
        ap,
        formula_bound,
        measured_ratio,
        bound: formula_bound.max(measured_ratio),
        flagged: false,
    })
}

/// Trigonometric kernels on `[0, 1)` with real symmetric coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum KernelSpec {
    /// `Σ_{|k|≤n} e^{2πikt}`.
    Dirichlet { n: usize },
    /// `Σ_{|k|<n} (1 − |k|/n) e^{2πikt}`.
    Fejer { n: usize },
    /// `(N·F_N − r·F_r)/(N − r)`: coefficient 1 for `|k| ≤ r`, then
    /// `(N − |k|)/(N − r)` down to 0 at `|k| = N`.
    Difference { r_l: usize, n: usize },
}

impl KernelSpec {
    /// Difference kernel with `N = ⌈λ r⌉`.
    pub fn difference(lambda: f64, r_l: usize) -> Result<Self> {
        if !(lambda > 1.0) || r_l == 0 {
            return Err(Error::invalid("need λ > 1 and r_L >= 1"));
        }
        let n = (lambda * r_l as f64 - 1e-9).ceil() as usize;
        if n <= r_l {
            return Err(Error::invalid("N must exceed r_L"));
        }
        Ok(KernelSpec::Difference { r_l, n })
    }

    /// Highest frequency present.
    pub fn degree(&self) -> usize {
        match *self {
            KernelSpec::Dirichlet { n } => n,
            KernelSpec::Fejer { n } => n.saturating_sub(1),
            KernelSpec::Difference { n, .. } => n - 1,
        }
    }

    /// `d_k` for `k = 0..=degree` (the kernel is even).
    pub fn coefficients(&self) -> Vec<f64> {
        let deg = self.degree();
        (0..=deg)
            .map(|k| match *self {
                KernelSpec::Dirichlet { .. } => 1.0,
                KernelSpec::Fejer { n } => 1.0 - k as f64 / n as f64,
                KernelSpec::Difference { r_l, n } => {
                    if k <= r_l {
                        1.0
                    } else {
                        (n - k) as f64 / (n - r_l) as f64
                    }
                }
            })
            .collect()
    }

    fn fejer(n: usize, t: f64) -> f64 {
        let den = (PI * t).sin();
        if den.abs() < 1e-12 {
            return n as f64;
        }
        let num = (PI * n as f64 * t).sin();
        num * num / (n as f64 * den * den)
    }

    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            KernelSpec::Dirichlet { n } => {
                let den = (PI * t).sin();
                if den.abs() < 1e-12 {
                    (2 * n + 1) as f64
                } else {
                    (PI * (2 * n + 1) as f64 * t).sin() / den
                }
            }
            KernelSpec::Fejer { n } => Self::fejer(n, t),
            KernelSpec::Difference { r_l, n } => {
                (n as f64 * Self::fejer(n, t) - r_l as f64 * Self::fejer(r_l, t))
                    / (n - r_l) as f64
            }
        }
    }

    fn quadrature_scale(&self) -> usize {
        match *self {
            KernelSpec::Dirichlet { n } | KernelSpec::Fejer { n } => n,
            KernelSpec::Difference { n, .. } => n,
        }
    }
}

/// Midpoint-rule `∫₀¹ |K|` on `quad_points ≥ 64·N` nodes.
pub fn kernel_l1(spec: &KernelSpec, quad_points: usize) -> Result<f64> {
    let needed = 64 * spec.quadrature_scale().max(1);
    if quad_points < needed {
        return Err(Error::invalid(format!(
            "quadrature with {quad_points} points is under-resolved (need {needed})"
        )));
    }
    let h = 1.0 / quad_points as f64;
    let sum: f64 = (0..quad_points)
        .map(|i| spec.eval((i as f64 + 0.5) * h).abs())
        .sum();
    Ok(sum * h)
}

/// `{r_l}` with `r_1 = 1`, `r_l = ⌈λ r_{l−1}⌉`, and `N = ⌈λ r_L⌉`.
pub fn lacunary_set(lambda: f64, levels: usize) -> Result<(IndexSet, usize)> {
    if !(lambda > 1.0) {
        return Err(Error::invalid(format!("λ = {lambda} must exceed 1")));
    }
    if levels == 0 {
        return Err(Error::invalid("need at least one level"));
    }
    let mut r = vec![1usize];
    while r.len() < levels {
        let prev = *r.last().expect("nonempty");
        // a ceiling that does not advance would repeat the index
        r.push(((lambda * prev as f64 - 1e-9).ceil() as usize).max(prev + 1));
    }
    let last = *r.last().expect("nonempty");
    let n = ((lambda * last as f64 - 1e-9).ceil() as usize).max(last + 1);
    Ok((IndexSet::new(n, r)?, n))
}

/// `√N ‖a‖₂ / ‖F a‖₁`.
pub fn discrete_ratio(a: &CoefficientVector) -> f64 {
    let n = a.ambient_size() as f64;
    n.sqrt() * a.l2_norm() / fd_l1(a)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LacunaryEstimate {
    pub lambda: f64,
    pub levels: usize,
    pub n: usize,
    pub trials: usize,
    /// Largest sampled `√N ‖a‖₂ / ‖F a‖₁`.
    pub ratio: f64,
}

/// Monte-Carlo lower estimate of the norm-equivalence constant of the
/// lacunary set, over complex Gaussian directions.
pub fn lacunary_ratio(lambda: f64, levels: usize, trials: usize, seed: u64) -> Result<LacunaryEstimate> {
    let (set, n) = lacunary_set(lambda, levels)?;
    if trials == 0 {
        return Err(Error::invalid("need at least one trial"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = 0.0f64;
    for _ in 0..trials {
        let values: Vec<Complex64> = set
            .iter()
            .map(|_| Complex64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng)))
            .collect();
        let a = CoefficientVector::new(set.clone(), &values)?;
        if !a.is_zero() {
            best = best.max(discrete_ratio(&a));
        }
    }
    Ok(LacunaryEstimate {
        lambda,
        levels,
        n,
        trials,
        ratio: best,
    })
}
