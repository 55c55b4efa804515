use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::solve::{signal_of, solve_min_sup};
use super::{ExtensionProblem, Method, SolverBudget};
use crate::error::{Error, Result};
use crate::fourier_tools::{ap_witness, longest_ap};
use crate::systems::walsh::{ensure_power_of_two, walsh_analysis, walsh_value};
use crate::systems::{CoefficientVector, DyadicStepSignal, IndexSet, SystemTag};
use crate::walsh_tools::{dyadic_projection, main_lemma_witness};

/// Largest `|K|` for which all sign patterns are enumerated.
pub const MAX_EXHAUSTIVE: usize = 16;

/// Sign patterns promoted into the [`empirical_cex`] seed set.
pub const TOP_SIGN_PATTERNS: usize = 4;

/// `‖y‖₂ / ‖y‖₁` of the sampled signal, both normalized by the grid size;
/// equals `√N ‖y‖₂ / ‖y‖₁` for unnormalized sums.
pub fn signal_ratio(system: SystemTag, c: &CoefficientVector) -> f64 {
    let y = signal_of(system, c);
    let n = y.len() as f64;
    let l1: f64 = y.iter().map(|v| v.norm()).sum::<f64>() / n;
    let l2 = (y.iter().map(|v| v.norm_sqr()).sum::<f64>() / n).sqrt();
    l2 / l1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RatioMode {
    Witness,
    Random,
    ExhaustiveSigns,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormEquivReport {
    pub ratio: f64,
    /// Unit coefficient vector attaining `ratio`.
    pub argmax: CoefficientVector,
    pub evaluated: usize,
}

fn check_set(set: &IndexSet, n: usize) -> Result<()> {
    if set.ambient_size() != n {
        return Err(Error::invalid(format!(
            "index set lives in 1..={}, expected 1..={n}",
            set.ambient_size()
        )));
    }
    if set.is_empty() {
        return Err(Error::EmptySet);
    }
    Ok(())
}

/// Unit Gaussian directions on `K`: real for Walsh, complex for Fourier.
pub fn gaussian_directions(
    system: SystemTag,
    set: &IndexSet,
    trials: usize,
    seed: u64,
) -> Result<Vec<CoefficientVector>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(trials);
    while out.len() < trials {
        let values: Vec<Complex64> = set
            .iter()
            .map(|_| {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = match system {
                    SystemTag::Walsh => 0.0,
                    SystemTag::Fourier => StandardNormal.sample(&mut rng),
                };
                Complex64::new(re, im)
            })
            .collect();
        let a = CoefficientVector::new(set.clone(), &values)?;
        if !a.is_zero() {
            out.push(a.normalized()?);
        }
    }
    Ok(out)
}

/// `±1` patterns on `K` with the first sign fixed, as unit vectors.
fn sign_patterns(set: &IndexSet) -> Result<Vec<CoefficientVector>> {
    let s = set.len();
    if s > MAX_EXHAUSTIVE {
        return Err(Error::invalid(format!(
            "exhaustive sign search limited to |K| <= {MAX_EXHAUSTIVE}, got {s}"
        )));
    }
    let scale = 1.0 / (s as f64).sqrt();
    (0..1u32 << (s - 1))
        .map(|bits| {
            let values: Vec<f64> = (0..s)
                .map(|i| if i > 0 && bits >> (i - 1) & 1 == 1 { -scale } else { scale })
                .collect();
            CoefficientVector::real(set.clone(), &values)
        })
        .collect()
}

fn witness_candidates(system: SystemTag, n: usize, set: &IndexSet) -> Result<Vec<CoefficientVector>> {
    let unit = |i: usize| CoefficientVector::real(IndexSet::new(n, [i])?, &[1.0]);
    if set.len() < 2 {
        return Ok(vec![unit(set.members()[0])?]);
    }
    match system {
        SystemTag::Walsh => {
            let w = main_lemma_witness(set, n)?;
            let f = CoefficientVector::real(w.support.clone(), &vec![1.0; w.support.len()])?;
            let mut out = vec![f.normalized()?];
            if set.contains(1) {
                let one = unit(1)?;
                out.push(one.plus(&f)?.normalized()?);
            }
            Ok(out)
        }
        SystemTag::Fourier => {
            let ap = longest_ap(set)?;
            if ap.length < 2 {
                return Ok(vec![unit(ap.start)?]);
            }
            Ok(vec![ap_witness(n, &ap, 16 * n)?.d])
        }
    }
}

fn best_of(system: SystemTag, candidates: Vec<CoefficientVector>) -> Result<NormEquivReport> {
    let evaluated = candidates.len();
    let mut best: Option<(f64, CoefficientVector)> = None;
    for c in candidates {
        let r = signal_ratio(system, &c);
        if best.as_ref().is_none_or(|(br, _)| r > *br) {
            best = Some((r, c));
        }
    }
    let (ratio, argmax) = best.ok_or(Error::EmptySet)?;
    Ok(NormEquivReport {
        ratio,
        argmax,
        evaluated,
    })
}

/// Largest `‖y‖₂/‖y‖₁` found over signals `y` spanned by `K`.
pub fn norm_equiv_ratio(
    system: SystemTag,
    n: usize,
    set: &IndexSet,
    mode: RatioMode,
    budget: usize,
    seed: u64,
) -> Result<NormEquivReport> {
    check_set(set, n)?;
    if system == SystemTag::Walsh {
        ensure_power_of_two(n)?;
    }
    let candidates = match mode {
        RatioMode::Witness => witness_candidates(system, n, set)?,
        RatioMode::Random => gaussian_directions(system, set, budget.max(1), seed)?,
        RatioMode::ExhaustiveSigns => sign_patterns(set)?,
    };
    best_of(system, candidates)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CexEstimate {
    /// Largest achieved peak over the seed directions (each of unit norm).
    pub value: f64,
    pub worst_a: CoefficientVector,
    pub evaluated: usize,
    /// Directions dropped because the solver did not converge.
    pub non_converged: usize,
}

/// Lower bound on the extension constant of `(K, comp)`: the worst min-sup
/// peak over the all-ones direction on `K`, the structural witness, `trials`
/// Gaussian directions and the best-ranked sign patterns.
#[allow(clippy::too_many_arguments)]
pub fn empirical_cex(
    system: SystemTag,
    n: usize,
    set: &IndexSet,
    comp: &IndexSet,
    trials: usize,
    seed: u64,
    method: Method,
    budget: &SolverBudget,
) -> Result<CexEstimate> {
    check_set(set, n)?;
    if trials == 0 {
        return Err(Error::invalid("need at least one trial"));
    }
    let ones = CoefficientVector::real(set.clone(), &vec![1.0; set.len()])?.normalized()?;
    let mut seeds = vec![ones];
    seeds.extend(witness_candidates(system, n, set)?);
    seeds.extend(gaussian_directions(system, set, trials, seed)?);
    if set.len() <= MAX_EXHAUSTIVE {
        let mut ranked: Vec<(f64, CoefficientVector)> = sign_patterns(set)?
            .into_iter()
            .map(|c| (signal_ratio(system, &c), c))
            .collect();
        ranked.sort_by(|x, y| y.0.total_cmp(&x.0));
        seeds.extend(ranked.into_iter().take(TOP_SIGN_PATTERNS).map(|(_, c)| c));
    }

    let mut best: Option<(f64, CoefficientVector)> = None;
    let mut non_converged = 0;
    let evaluated = seeds.len();
    for a in seeds {
        let p = ExtensionProblem::new(system, n, set.clone(), comp.clone(), a)?;
        let r = solve_min_sup(&p, method, budget)?;
        if !r.converged {
            non_converged += 1;
            continue;
        }
        if best.as_ref().is_none_or(|(v, _)| r.achieved_sup > *v) {
            best = Some((r.achieved_sup, p.a));
        }
    }
    let (value, worst_a) =
        best.ok_or_else(|| Error::Degenerate("no seed direction converged".into()))?;
    Ok(CexEstimate {
        value,
        worst_a,
        evaluated,
        non_converged,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquivalenceReport {
    pub system: SystemTag,
    pub n: usize,
    pub set_size: usize,
    /// Norm-equivalence ratio.
    pub lower: f64,
    /// Empirical extension constant with the complement as compensation set.
    pub upper: f64,
    pub holds: bool,
}

/// Checks `ratio ≤ C_Ex · (1 + 1e-3) + 1e-6` with `comp = Kᶜ`.
pub fn equivalence_crosscheck(
    system: SystemTag,
    n: usize,
    set: &IndexSet,
    trials: usize,
    seed: u64,
    budget: &SolverBudget,
) -> Result<EquivalenceReport> {
    check_set(set, n)?;
    let mode = if set.len() <= MAX_EXHAUSTIVE {
        RatioMode::ExhaustiveSigns
    } else {
        RatioMode::Random
    };
    let lower = norm_equiv_ratio(system, n, set, mode, trials, seed)?.ratio;
    let upper = empirical_cex(system, n, set, &set.complement(), trials, seed, Method::Lp, budget)?.value;
    Ok(EquivalenceReport {
        system,
        n,
        set_size: set.len(),
        lower,
        upper,
        holds: lower <= upper * (1.0 + 1e-3) + 1e-6,
    })
}

/// Null vector of a `(s−1) × s` matrix of full rank, else `None`.
fn null_vector(mut m: Vec<Vec<f64>>, s: usize) -> Option<Vec<f64>> {
    let rows = m.len();
    let mut pivot_cols = Vec::with_capacity(rows);
    let mut r = 0;
    for col in 0..s {
        if r == rows {
            break;
        }
        let p = (r..rows).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[p][col].abs() < 1e-9 {
            continue;
        }
        m.swap(r, p);
        let pv = m[r][col];
        for v in m[r].iter_mut() {
            *v /= pv;
        }
        for i in 0..rows {
            if i != r {
                let f = m[i][col];
                if f != 0.0 {
                    for k in 0..s {
                        m[i][k] -= f * m[r][k];
                    }
                }
            }
        }
        pivot_cols.push(col);
        r += 1;
    }
    if pivot_cols.len() != s - 1 {
        return None;
    }
    let free = (0..s).find(|c| !pivot_cols.contains(c))?;
    let mut x = vec![0.0; s];
    x[free] = 1.0;
    for (row, &col) in pivot_cols.iter().enumerate() {
        x[col] = -m[row][free];
    }
    Some(x)
}

/// `max ‖g‖₂/‖g‖₁` over real `g ∈ span{w_k : k ∈ K}`, which is the Walsh
/// extension constant of `K` with the complement as compensation set.
///
/// The maximum of this convex ratio sits at a vertex of the section of the
/// l¹ ball, i.e. at some `g` vanishing on `|K| − 1` independent cells.
/// Returns the ratio and the unit coefficient vector of a maximizer.
pub fn dual_vertex_max(set: &IndexSet, n: usize) -> Result<(f64, CoefficientVector)> {
    check_set(set, n)?;
    let level = ensure_power_of_two(n)?;
    let s = set.len();
    let h: Vec<Vec<f64>> = (0..n)
        .map(|cell| set.iter().map(|k| walsh_value(k, cell, level) as f64).collect())
        .collect();
    let mut best = (1.0, vec![1.0; 1]);
    if s == 1 {
        return Ok((1.0, CoefficientVector::real(set.clone(), &best.1)?));
    }
    let mut zero_cells: Vec<usize> = (0..s - 1).collect();
    loop {
        let m: Vec<Vec<f64>> = zero_cells.iter().map(|&c| h[c].clone()).collect();
        if let Some(c) = null_vector(m, s) {
            let g: Vec<f64> = h
                .iter()
                .map(|row| row.iter().zip(&c).map(|(a, b)| a * b).sum())
                .collect();
            let l1: f64 = g.iter().map(|v| v.abs()).sum::<f64>() / n as f64;
            let l2 = (g.iter().map(|v| v * v).sum::<f64>() / n as f64).sqrt();
            let ratio = l2 / l1;
            if ratio > best.0 + 1e-12 || best.1.len() != s {
                best = (ratio, c);
            }
        }
        let Some(pos) = (0..s - 1).rev().find(|&i| zero_cells[i] < n - (s - 1) + i) else {
            break;
        };
        zero_cells[pos] += 1;
        for i in pos + 1..s - 1 {
            zero_cells[i] = zero_cells[i - 1] + 1;
        }
    }
    let (ratio, c) = best;
    if c.len() != s {
        return Err(Error::Internal("no vertex of the l¹ section found".into()));
    }
    Ok((ratio, CoefficientVector::real(set.clone(), &c)?.normalized()?))
}

/// Index sets on which Khintchine-type compensation is examined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PositionSet {
    /// `{2^j + 1 : j < n}`, where `w_{2^j+1} = r_j`.
    Rademacher,
    /// `{2^j : j ≤ n}`: the constant plus `n` independent characters.
    Dyadic,
}

impl PositionSet {
    pub fn positions(&self, level: u32) -> IndexSet {
        let n = 1usize << level;
        let members: Vec<usize> = match self {
            PositionSet::Rademacher => (0..level).map(|j| (1usize << j) + 1).collect(),
            PositionSet::Dyadic => (0..=level).map(|j| 1usize << j).collect(),
        };
        // level 0 has no room for r_0 = w_2
        IndexSet::new(n, members.into_iter().filter(|&k| k <= n)).expect("positions fit")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KhintchineReport {
    pub level: u32,
    pub positions: PositionSet,
    pub achieved_sup: f64,
    /// `achieved_sup / ‖a‖₂`.
    pub ratio: f64,
    /// Optimum with compensation up to level `level + lift`.
    pub lifted_sup: f64,
    pub lift: u32,
    /// Peak of the lifted solution after projection to `level`.
    pub projected_sup: f64,
    /// The projected signal still carries `a` on the information set.
    pub projection_feasible: bool,
    pub optimum_difference: f64,
    pub locality_holds: bool,
}

/// Min-sup compensation of `a` on the chosen positions, plus the locality
/// check: a solution at level `n + lift` projected to level `n` stays
/// feasible and its peak does not grow.
pub fn khintchine_compensation_check(
    level: u32,
    a: &CoefficientVector,
    positions: PositionSet,
    lift: u32,
    budget: &SolverBudget,
) -> Result<KhintchineReport> {
    let n = 1usize << level;
    let info = positions.positions(level);
    if a.ambient_size() != n {
        return Err(Error::invalid(format!(
            "a has ambient size {}, expected {n}",
            a.ambient_size()
        )));
    }
    if !a.support().is_subset(&info) {
        return Err(Error::invalid("a has support outside the allowed positions"));
    }
    let base = ExtensionProblem::with_complement(SystemTag::Walsh, a.clone(), info.clone())?;
    let here = solve_min_sup(&base, Method::Lp, budget)?;

    let up_n = n << lift;
    let up_info = info.with_ambient(up_n)?;
    let up_a = CoefficientVector::new(up_info.clone(), &up_info.iter().map(|k| a.get(k)).collect::<Vec<_>>())?;
    let up = ExtensionProblem::with_complement(SystemTag::Walsh, up_a.clone(), up_info.clone())?;
    let lifted = solve_min_sup(&up, Method::Lp, budget)?;

    let cells: Vec<f64> = signal_of(SystemTag::Walsh, &up_a.plus(&lifted.b)?)
        .iter()
        .map(|v| v.re)
        .collect();
    let signal = DyadicStepSignal::new(level + lift, cells)?;
    let projected = dyadic_projection(&signal, level)?;
    let projected_sup = projected.values().iter().map(|v| v.abs()).fold(0.0, f64::max);
    let coeffs = walsh_analysis(projected.values());
    let projection_feasible = info
        .iter()
        .all(|k| (coeffs[k - 1] - a.get(k).re).abs() <= 1e-9 * a.l2_norm().max(1.0));
    let lifted_peak = signal.values().iter().map(|v| v.abs()).fold(0.0, f64::max);
    let optimum_difference = (here.achieved_sup - lifted.achieved_sup).abs();
    let norm = a.l2_norm();
    Ok(KhintchineReport {
        level,
        positions,
        achieved_sup: here.achieved_sup,
        ratio: here.achieved_sup / norm,
        lifted_sup: lifted.achieved_sup,
        lift,
        projected_sup,
        projection_feasible,
        optimum_difference,
        locality_holds: projection_feasible
            && projected_sup <= lifted_peak
            && optimum_difference <= 1e-7 * norm.max(1.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn walsh_set(n: usize, k: &[usize]) -> IndexSet {
        IndexSet::new(n, k.iter().copied()).unwrap()
    }

    #[test]
    fn ratio_examples() {
        let full = IndexSet::full(4);
        let r = norm_equiv_ratio(SystemTag::Walsh, 4, &full, RatioMode::Witness, 0, 0).unwrap();
        assert!(r.ratio >= 7f64.sqrt() / 2.0 - 1e-12);
        for system in [SystemTag::Walsh, SystemTag::Fourier] {
            let single = walsh_set(8, &[3]);
            for mode in [RatioMode::Witness, RatioMode::Random, RatioMode::ExhaustiveSigns] {
                let r = norm_equiv_ratio(system, 8, &single, mode, 5, 1).unwrap();
                assert!((r.ratio - 1.0).abs() < 1e-12);
            }
        }
        let r = norm_equiv_ratio(SystemTag::Fourier, 16, &IndexSet::full(16), RatioMode::Witness, 0, 0)
            .unwrap();
        assert!(r.ratio >= 4.0 / 16f64.ln());
        assert!(norm_equiv_ratio(SystemTag::Walsh, 32, &IndexSet::full(32), RatioMode::ExhaustiveSigns, 0, 0)
            .is_err());
    }

    #[test]
    fn cex_examples() {
        let budget = SolverBudget::default();
        assert!(empirical_cex(SystemTag::Walsh, 8, &IndexSet::empty(8), &IndexSet::full(8), 3, 0, Method::Lp, &budget)
            .is_err());
        let k = walsh_set(8, &[2]);
        let e = empirical_cex(SystemTag::Walsh, 8, &k, &k.complement(), 10, 3, Method::Lp, &budget).unwrap();
        assert!(e.value <= 2f64.sqrt() + 1e-9);
        for level in 1..=4u32 {
            let n = 1usize << level;
            let full = IndexSet::full(n);
            let e = empirical_cex(SystemTag::Walsh, n, &full, &IndexSet::empty(n), 2, 3, Method::Lp, &budget)
                .unwrap();
            assert!((e.value - (n as f64).sqrt()).abs() < 1e-9);
        }
    }

    #[test]
    fn crosscheck_examples() {
        let budget = SolverBudget::default();
        let r = equivalence_crosscheck(SystemTag::Walsh, 4, &walsh_set(4, &[1, 2]), 5, 1, &budget).unwrap();
        assert!(r.holds && r.lower <= r.upper + 1e-3);
        let r = equivalence_crosscheck(SystemTag::Walsh, 8, &walsh_set(8, &[6]), 5, 1, &budget).unwrap();
        assert!((r.lower - 1.0).abs() < 1e-12 && r.upper <= 1.0 + 1e-9);
        let r = equivalence_crosscheck(SystemTag::Walsh, 8, &IndexSet::full(8), 5, 1, &budget).unwrap();
        assert!((r.lower - 8f64.sqrt()).abs() < 1e-9 && (r.upper - 8f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn dual_vertices_match_lp() {
        let budget = SolverBudget::default();
        for (n, k) in [(4, vec![2, 3]), (8, vec![1, 2, 3, 4]), (8, vec![2, 3, 5]), (8, vec![1, 4, 6, 7, 8])] {
            let set = walsh_set(n, &k);
            let (ratio, a) = dual_vertex_max(&set, n).unwrap();
            let p = ExtensionProblem::with_complement(SystemTag::Walsh, a, set.clone()).unwrap();
            let lp = solve_min_sup(&p, Method::Lp, &budget).unwrap();
            assert!((lp.achieved_sup - ratio).abs() < 1e-7, "{k:?}: {ratio} vs {}", lp.achieved_sup);
            // no sign pattern beats the vertex maximum
            let signs = norm_equiv_ratio(SystemTag::Walsh, n, &set, RatioMode::ExhaustiveSigns, 0, 0).unwrap();
            assert!(signs.ratio <= ratio + 1e-12);
        }
        let (r, _) = dual_vertex_max(&IndexSet::full(8), 8).unwrap();
        assert!((r - 8f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn khintchine_examples() {
        let budget = SolverBudget::default();
        let single = CoefficientVector::real(walsh_set(8, &[3]), &[1.0]).unwrap();
        let r = khintchine_compensation_check(3, &single, PositionSet::Rademacher, 1, &budget).unwrap();
        assert!((r.ratio - 1.0).abs() < 1e-9);
        assert!(r.locality_holds);

        // r_0 + r_1 = [2, 0, 0, -2] and no mix of w_1, w_4 can flatten it
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let pair = CoefficientVector::real(walsh_set(4, &[2, 3]), &[s, s]).unwrap();
        let r = khintchine_compensation_check(2, &pair, PositionSet::Rademacher, 1, &budget).unwrap();
        assert!((r.achieved_sup - 2f64.sqrt()).abs() < 1e-9);
        assert!(r.locality_holds);

        let off = CoefficientVector::real(walsh_set(4, &[4]), &[1.0]).unwrap();
        assert!(khintchine_compensation_check(2, &off, PositionSet::Rademacher, 1, &budget).is_err());
        assert_eq!(PositionSet::Rademacher.positions(4).members(), &[2, 3, 5, 9]);
        assert_eq!(PositionSet::Dyadic.positions(4).members(), &[1, 2, 4, 8, 16]);
    }
}
