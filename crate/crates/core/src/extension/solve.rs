use std::f64::consts::PI;

use num_complex::Complex64;

use super::lp::simplex_max;
use super::{ExtensionProblem, ExtensionResult, Method, SolverBudget};
use crate::error::{Error, Result};
use crate::systems::walsh::{walsh_analysis, walsh_synthesis, walsh_value};
use crate::systems::{dft, sample_signal, CoefficientVector, SystemTag};

/// Sides of the polygon that replaces the complex modulus in the Fourier LP;
/// the relaxation under-estimates a modulus by at most a factor `sec(π/P)`.
pub const P_GON: usize = 32;

/// Brute force is limited to this many basis functions.
pub const BRUTE_MAX_N: usize = 8;

/// Signal values on the comparison grid.
pub fn signal_of(system: SystemTag, c: &CoefficientVector) -> Vec<Complex64> {
    match system {
        SystemTag::Walsh => walsh_synthesis(c.entries()),
        SystemTag::Fourier => sample_signal(c),
    }
}

fn peak(values: &[Complex64]) -> f64 {
    values.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

/// Peak of the signal with coefficients `c`.
pub fn sup_of(system: SystemTag, c: &CoefficientVector) -> f64 {
    peak(&signal_of(system, c))
}

fn coefficients_of(system: SystemTag, values: &[Complex64]) -> Vec<Complex64> {
    match system {
        SystemTag::Walsh => walsh_analysis(values),
        SystemTag::Fourier => {
            // sample_signal is √N times the unitary inverse DFT
            let scale = 1.0 / (values.len() as f64).sqrt();
            dft(values).into_iter().map(|v| v * scale).collect()
        }
    }
}

fn finish(
    p: &ExtensionProblem,
    b: CoefficientVector,
    method: Method,
    lower_bound: f64,
    iterations: usize,
    converged: bool,
) -> Result<ExtensionResult> {
    let achieved_sup = sup_of(p.system, &p.a.plus(&b)?);
    Ok(ExtensionResult {
        b,
        achieved_sup,
        method,
        optimality_gap: (achieved_sup - lower_bound).max(0.0),
        iterations,
        converged,
    })
}

pub fn solve_min_sup(
    p: &ExtensionProblem,
    method: Method,
    budget: &SolverBudget,
) -> Result<ExtensionResult> {
    match method {
        Method::Lp => match p.system {
            SystemTag::Walsh => lp_walsh(p, budget),
            SystemTag::Fourier => lp_polygon(p, budget),
        },
        Method::Pocs => pocs(p, budget),
        Method::Brute => brute(p),
    }
}

fn require_real(p: &ExtensionProblem, method: Method) -> Result<()> {
    if !p.a.is_real() {
        return Err(Error::invalid(format!(
            "{method} on the Walsh system needs real coefficients"
        )));
    }
    Ok(())
}

/// Variables `(b⁺, b⁻, z)` with `z = T₀ − t`, `T₀ = max|s_a|`; maximize `z`
/// subject to `±(s_i + H_i b) ≤ t` on every cell.
fn lp_walsh(p: &ExtensionProblem, budget: &SolverBudget) -> Result<ExtensionResult> {
    require_real(p, Method::Lp)?;
    let n = p.n;
    let level = n.trailing_zeros();
    let s: Vec<f64> = signal_of(p.system, &p.a).iter().map(|v| v.re).collect();
    let t0 = s.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let comp = p.comp_set.members();
    let d = comp.len();
    let mut rows = Vec::with_capacity(2 * n);
    let mut rhs = Vec::with_capacity(2 * n);
    for (cell, &si) in s.iter().enumerate() {
        let h: Vec<f64> = comp.iter().map(|&k| walsh_value(k, cell, level) as f64).collect();
        for sigma in [1.0, -1.0] {
            let mut row = Vec::with_capacity(2 * d + 1);
            row.extend(h.iter().map(|v| sigma * v));
            row.extend(h.iter().map(|v| -sigma * v));
            row.push(1.0);
            rows.push(row);
            rhs.push((t0 - sigma * si).max(0.0));
        }
    }
    let mut c = vec![0.0; 2 * d + 1];
    c[2 * d] = 1.0;
    let sol = simplex_max(&rows, &rhs, &c, budget.max_iterations)?;
    let values: Vec<f64> = (0..d).map(|i| sol.x[i] - sol.x[d + i]).collect();
    let b = CoefficientVector::real(p.comp_set.clone(), &values)?;
    finish(p, b, Method::Lp, t0 - sol.dual, sol.pivots, sol.optimal)
}

/// Fourier LP with `|v| ≤ t` replaced by `Re(e^{-iθ_p} v) ≤ t` for the `P`
/// angles `θ_p = 2πp/P`; its value is a lower bound on the true optimum.
fn lp_polygon(p: &ExtensionProblem, budget: &SolverBudget) -> Result<ExtensionResult> {
    let n = p.n;
    let s = signal_of(p.system, &p.a);
    let t0 = peak(&s);
    let comp = p.comp_set.members();
    let d = comp.len();
    let mut rows = Vec::with_capacity(n * P_GON);
    let mut rhs = Vec::with_capacity(n * P_GON);
    for (j, sj) in s.iter().enumerate() {
        // column of index k at sample j: e^{2πi(k−1)j/N}
        let phases: Vec<f64> = comp
            .iter()
            .map(|&k| 2.0 * PI * (((k - 1) * j) % n) as f64 / n as f64)
            .collect();
        for q in 0..P_GON {
            let theta = 2.0 * PI * q as f64 / P_GON as f64;
            let mut row = vec![0.0; 4 * d + 1];
            for (i, &psi) in phases.iter().enumerate() {
                let (sin, cos) = (psi - theta).sin_cos();
                // Re(e^{-iθ}(x + iy)e^{iψ}) = x cos(ψ−θ) − y sin(ψ−θ)
                row[i] = cos;
                row[d + i] = -cos;
                row[2 * d + i] = -sin;
                row[3 * d + i] = sin;
            }
            row[4 * d] = 1.0;
            rows.push(row);
            rhs.push((t0 - (sj * Complex64::from_polar(1.0, -theta)).re).max(0.0));
        }
    }
    let mut c = vec![0.0; 4 * d + 1];
    c[4 * d] = 1.0;
    let sol = simplex_max(&rows, &rhs, &c, budget.max_iterations)?;
    let values: Vec<Complex64> = (0..d)
        .map(|i| Complex64::new(sol.x[i] - sol.x[d + i], sol.x[2 * d + i] - sol.x[3 * d + i]))
        .collect();
    let b = CoefficientVector::new(p.comp_set.clone(), &values)?;
    finish(p, b, Method::Lp, t0 - sol.dual, sol.pivots, sol.optimal)
}

/// Solves the square system in place by Gaussian elimination with partial
/// pivoting; `None` when singular.
fn solve_dense(mut m: Vec<Vec<f64>>, mut rhs: Vec<f64>) -> Option<Vec<f64>> {
    let size = rhs.len();
    for col in 0..size {
        let pivot = (col..size).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[pivot][col].abs() < 1e-10 {
            return None;
        }
        m.swap(col, pivot);
        rhs.swap(col, pivot);
        for row in col + 1..size {
            let f = m[row][col] / m[col][col];
            if f != 0.0 {
                for k in col..size {
                    m[row][k] -= f * m[col][k];
                }
                rhs[row] -= f * rhs[col];
            }
        }
    }
    let mut x = vec![0.0; size];
    for row in (0..size).rev() {
        let tail: f64 = (row + 1..size).map(|k| m[row][k] * x[k]).sum();
        x[row] = (rhs[row] - tail) / m[row][row];
    }
    Some(x)
}

fn for_each_subset(n: usize, size: usize, mut f: impl FnMut(&[usize])) {
    let mut idx: Vec<usize> = (0..size).collect();
    if size > n {
        return;
    }
    loop {
        f(&idx);
        let Some(pos) = (0..size).rev().find(|&i| idx[i] < n - size + i) else {
            return;
        };
        idx[pos] += 1;
        for i in pos + 1..size {
            idx[i] = idx[i - 1] + 1;
        }
    }
}

/// Exact minimum by vertex enumeration: an optimum of the Walsh LP has
/// `|comp| + 1` active constraints `σ_i (s_i + H_i b) = t`.
fn brute(p: &ExtensionProblem) -> Result<ExtensionResult> {
    if p.system != SystemTag::Walsh {
        return Err(Error::invalid("brute force covers the Walsh system only"));
    }
    if p.n > BRUTE_MAX_N {
        return Err(Error::invalid(format!(
            "brute force limited to N <= {BRUTE_MAX_N}, got {}",
            p.n
        )));
    }
    require_real(p, Method::Brute)?;
    let n = p.n;
    let level = n.trailing_zeros();
    let s: Vec<f64> = signal_of(p.system, &p.a).iter().map(|v| v.re).collect();
    let comp = p.comp_set.members();
    let d = comp.len();
    let h: Vec<Vec<f64>> = (0..n)
        .map(|cell| comp.iter().map(|&k| walsh_value(k, cell, level) as f64).collect())
        .collect();

    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut systems = 0usize;
    for_each_subset(n, d + 1, |cells| {
        for signs in 0..1u32 << (d + 1) {
            systems += 1;
            let mut m = Vec::with_capacity(d + 1);
            let mut rhs = Vec::with_capacity(d + 1);
            for (pos, &cell) in cells.iter().enumerate() {
                let sigma = if signs >> pos & 1 == 0 { 1.0 } else { -1.0 };
                let mut row: Vec<f64> = h[cell].iter().map(|v| sigma * v).collect();
                row.push(-1.0);
                m.push(row);
                rhs.push(-sigma * s[cell]);
            }
            let Some(x) = solve_dense(m, rhs) else { continue };
            let t = x[d];
            if t < 0.0 || best.as_ref().is_some_and(|(bt, _)| t >= *bt) {
                continue;
            }
            let feasible = (0..n).all(|cell| {
                let v = s[cell] + h[cell].iter().zip(&x).map(|(a, b)| a * b).sum::<f64>();
                v.abs() <= t + 1e-9
            });
            if feasible {
                best = Some((t, x[..d].to_vec()));
            }
        }
    });
    let (t, values) = best.ok_or_else(|| Error::Internal("no feasible vertex found".into()))?;
    let b = CoefficientVector::real(p.comp_set.clone(), &values)?;
    finish(p, b, Method::Brute, t, systems, true)
}

/// Bisection on the peak level `τ`; each probe alternates a phase-preserving
/// clip at slightly below `τ` with the projection that restores `a` on `K`
/// and zeroes everything outside `K ∪ comp`.
fn pocs(p: &ExtensionProblem, budget: &SolverBudget) -> Result<ExtensionResult> {
    if p.system == SystemTag::Walsh {
        require_real(p, Method::Pocs)?;
    }
    let n = p.n;
    let norm = p.a.l2_norm();
    let keep: Vec<Option<Complex64>> = (1..=n)
        .map(|k| {
            if p.info_set.contains(k) {
                Some(p.a.get(k))
            } else {
                None
            }
        })
        .collect();
    let project = |x: &[Complex64]| -> Vec<Complex64> {
        let mut c = coefficients_of(p.system, x);
        for (k, v) in c.iter_mut().enumerate() {
            match keep[k] {
                Some(a) => *v = a,
                None if !p.comp_set.contains(k + 1) => *v = Complex64::new(0.0, 0.0),
                None => {}
            }
        }
        // the real Walsh case stays real
        if p.system == SystemTag::Walsh {
            c.iter_mut().for_each(|v| v.im = 0.0);
        }
        let coeffs = CoefficientVector::from_dense(c);
        signal_of(p.system, &coeffs)
    };

    let start = signal_of(p.system, &p.a);
    let mut best_sup = peak(&start);
    let mut best_x = start.clone();
    // Parseval: the mean square of any feasible signal is at least ‖a‖²
    let mut lo = norm;
    let mut hi = best_sup;
    let mut x = start;
    let mut iterations = 0;
    let mut converged = true;
    while hi - lo > budget.tolerance * norm {
        let tau = 0.5 * (lo + hi);
        let target = tau * (1.0 - 1e-6);
        let mut success = false;
        for _ in 0..budget.max_iterations {
            iterations += 1;
            let clipped: Vec<Complex64> = x
                .iter()
                .map(|&v| {
                    let m = v.norm();
                    if m > target {
                        v * (target / m)
                    } else {
                        v
                    }
                })
                .collect();
            let next = project(&clipped);
            let sup = peak(&next);
            if sup < best_sup {
                best_sup = sup;
                best_x = next.clone();
            }
            let moved: f64 = next.iter().zip(&x).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
            x = next;
            if sup <= tau {
                success = true;
                break;
            }
            if moved <= 1e-13 * norm {
                break;
            }
        }
        if success {
            hi = best_sup.min(tau);
        } else {
            lo = tau;
            // restart from the best feasible point so far
            x = best_x.clone();
        }
        if iterations >= budget.max_iterations.saturating_mul(64) {
            converged = false;
            break;
        }
    }
    let c = coefficients_of(p.system, &best_x);
    let values: Vec<Complex64> = p.comp_set.iter().map(|k| c[k - 1]).collect();
    let values = if p.system == SystemTag::Walsh {
        values.into_iter().map(|v| Complex64::new(v.re, 0.0)).collect()
    } else {
        values
    };
    let b = CoefficientVector::new(p.comp_set.clone(), &values)?;
    finish(p, b, Method::Pocs, lo, iterations, converged)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::IndexSet;

    fn problem(n: usize, k: &[usize], comp: &[usize], a: &[f64]) -> ExtensionProblem {
        let info = IndexSet::new(n, k.iter().copied()).unwrap();
        let comp = IndexSet::new(n, comp.iter().copied()).unwrap();
        let a = CoefficientVector::real(info.clone(), a).unwrap();
        ExtensionProblem::new(SystemTag::Walsh, n, info, comp, a).unwrap()
    }

    fn all(p: &ExtensionProblem) -> [ExtensionResult; 3] {
        let budget = SolverBudget::default();
        [Method::Lp, Method::Brute, Method::Pocs].map(|m| solve_min_sup(p, m, &budget).unwrap())
    }

    #[test]
    fn nothing_to_compensate() {
        let p = problem(4, &[1, 2, 3, 4], &[], &[0.5; 4]);
        for r in all(&p) {
            assert!((r.achieved_sup - 2.0).abs() < 1e-12, "{r:?}");
        }
    }

    #[test]
    fn lone_constant_needs_no_help() {
        let p = problem(2, &[1], &[2], &[1.0]);
        for r in all(&p) {
            assert!((r.achieved_sup - 1.0).abs() < 1e-9, "{r:?}");
            assert!(r.b.entries()[1].norm() < 1e-6);
        }
    }

    #[test]
    fn lone_walsh_function_needs_no_help() {
        let p = problem(4, &[2], &[1, 3, 4], &[1.0]);
        for r in all(&p) {
            assert!((r.achieved_sup - 1.0).abs() < 1e-9, "{r:?}");
        }
    }

    #[test]
    fn two_rademachers_bottom_out_at_sqrt_two() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let p = problem(4, &[2, 3], &[1, 4], &[s, s]);
        for r in all(&p) {
            assert!((r.achieved_sup - 2f64.sqrt()).abs() < 1e-3, "{r:?}");
        }
        let lp = solve_min_sup(&p, Method::Lp, &SolverBudget::default()).unwrap();
        assert!(lp.optimality_gap <= 1e-8);
    }

    #[test]
    fn recomputed_sup_matches() {
        let p = problem(8, &[2, 3, 6], &[1, 4, 5, 7, 8], &[0.3, -1.2, 0.7]);
        let r = solve_min_sup(&p, Method::Lp, &SolverBudget::default()).unwrap();
        let again = sup_of(SystemTag::Walsh, &p.a.plus(&r.b).unwrap());
        assert!((again - r.achieved_sup).abs() < 1e-10);
    }

    #[test]
    fn fourier_polygon_and_pocs_agree() {
        let n = 8;
        let info = IndexSet::new(n, [2, 3]).unwrap();
        let a = CoefficientVector::real(info.clone(), &[1.0, 1.0]).unwrap();
        let p = ExtensionProblem::with_complement(SystemTag::Fourier, a, info).unwrap();
        let lp = solve_min_sup(&p, Method::Lp, &SolverBudget::default()).unwrap();
        let pocs = solve_min_sup(&p, Method::Pocs, &SolverBudget::default()).unwrap();
        let lower = lp.achieved_sup - lp.optimality_gap;
        assert!(lp.achieved_sup <= lower / (PI / P_GON as f64).cos() + 1e-9);
        assert!(pocs.achieved_sup >= lower - 1e-9);
        assert!((pocs.achieved_sup - lp.achieved_sup).abs() < 0.01 * lp.achieved_sup);
    }

    #[test]
    fn brute_rejects_large_or_fourier() {
        let info = IndexSet::new(16, [1]).unwrap();
        let a = CoefficientVector::real(info.clone(), &[1.0]).unwrap();
        let p = ExtensionProblem::with_complement(SystemTag::Walsh, a.clone(), info.clone()).unwrap();
        assert!(solve_min_sup(&p, Method::Brute, &SolverBudget::default()).is_err());
        let p = ExtensionProblem::with_complement(SystemTag::Fourier, a, info).unwrap();
        assert!(solve_min_sup(&p, Method::Brute, &SolverBudget::default()).is_err());
    }
}
