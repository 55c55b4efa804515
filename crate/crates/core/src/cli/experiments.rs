use std::time::Instant;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{CliError, Experiment, ExperimentConfig, Fields, Params, ResultRow};
use crate::extension::{
    equivalence_crosscheck, khintchine_compensation_check, norm_equiv_ratio, solve_min_sup,
    ExtensionProblem, Method, PositionSet, RatioMode, SolverBudget, BRUTE_MAX_N, MAX_EXHAUSTIVE,
};
use crate::fourier_tools::{ap_witness, kernel_l1, ApDescriptor, KernelSpec};
use crate::papr::{adversarial_witness, compute_papr, walsh_papr_squared_exact};
use crate::systems::walsh::ensure_power_of_two;
use crate::systems::{step_norms, CoefficientVector, DyadicStepSignal, IndexSet, Rational, StepScalar, SystemTag};
use crate::walsh_tools::{
    cex_lower_bound_walsh, correlation, correlation_profile, dyadic_projection, m_set,
    main_lemma_witness_targeted, optimal_subset_size, q_shift, band_difference, required_stages,
    split_trace, SearchBudget, MAX_SUBSET_N,
};

type Outcome = Result<(), CliError>;

struct Recorder {
    experiment: Experiment,
    timing: bool,
    last: Instant,
    rows: Vec<ResultRow>,
}

impl Recorder {
    fn push(&mut self, params: Fields, measured: Fields, bound: Fields, pass: bool, converged: bool) {
        let runtime_ms = if self.timing {
            let ms = self.last.elapsed().as_millis() as u64;
            self.last = Instant::now();
            ms
        } else {
            0
        };
        self.rows.push(ResultRow {
            experiment: self.experiment.id().to_owned(),
            params,
            measured,
            bound,
            pass,
            converged,
            runtime_ms,
        });
    }
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Invalid(msg.into())
}

fn sizes(p: &Params, default: &[usize], max: usize, power_of_two: bool) -> Result<Vec<usize>, CliError> {
    let ns = p.n.clone().unwrap_or_else(|| default.to_vec());
    if ns.is_empty() {
        return Err(invalid("empty N list"));
    }
    for &n in &ns {
        if n == 0 || n > max {
            return Err(invalid(format!("N = {n} outside 1..={max}")));
        }
        if power_of_two {
            ensure_power_of_two(n)?;
        }
    }
    Ok(ns)
}

fn powers(lo: u32, hi: u32) -> Vec<usize> {
    (lo..=hi).map(|k| 1usize << k).collect()
}

fn delta(p: &Params) -> Result<f64, CliError> {
    let d = p.delta.unwrap_or(0.5);
    if !(d > 0.0 && d <= 1.0) {
        return Err(invalid(format!("δ = {d} outside (0, 1]")));
    }
    Ok(d)
}

fn trials(p: &Params, default: usize, max: usize) -> Result<usize, CliError> {
    let t = p.trials.unwrap_or(default);
    if t == 0 || t > max {
        return Err(invalid(format!("trials = {t} outside 1..={max}")));
    }
    Ok(t)
}

fn tolerance(p: &Params, default: f64) -> Result<f64, CliError> {
    let t = p.tolerance.unwrap_or(default);
    if !(t.is_finite() && t > 0.0) {
        return Err(invalid(format!("tolerance {t} must be positive")));
    }
    Ok(t)
}

fn systems(p: &Params) -> Vec<SystemTag> {
    p.system.map_or(vec![SystemTag::Walsh, SystemTag::Fourier], |s| vec![s])
}

fn random_subset(rng: &mut ChaCha8Rng, n: usize, size: usize) -> Result<IndexSet, CliError> {
    Ok(IndexSet::new(n, sample(rng, n, size).into_iter().map(|i| i + 1))?)
}

fn set_label(set: &IndexSet) -> String {
    set.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(" ")
}

fn ratio_f64(q: &Rational) -> f64 {
    q.to_f64()
}

/// Dispatches a configuration to its experiment; rows come back in a fixed
/// order determined by the parameters and the seed alone.
pub fn run(config: &ExperimentConfig) -> Result<Vec<ResultRow>, CliError> {
    let experiment = config.experiment()?;
    let mut rec = Recorder {
        experiment,
        timing: config.timing,
        last: Instant::now(),
        rows: Vec::new(),
    };
    let p = &config.params;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    match experiment {
        Experiment::PaprWitness => papr_witness(p, &mut rec),
        Experiment::WalshIdentities => walsh_identities(p, &mut rng, &mut rec),
        Experiment::MainLemma => main_lemma(p, &mut rng, &mut rec),
        Experiment::CexTable => cex_table(p, &mut rec),
        Experiment::ApWitness => ap(p, &mut rec),
        Experiment::KernelBound => kernel_bound(p, &mut rec),
        Experiment::Projection => projection(p, &mut rng, &mut rec),
        Experiment::SolverCrosscheck => solver_crosscheck(p, &mut rng, &mut rec),
        Experiment::Equivalence => equivalence(p, &mut rng, &mut rec),
        Experiment::Doubling => doubling(p, &mut rec),
        Experiment::Khintchine => khintchine(p, &mut rng, &mut rec),
        Experiment::DensityTrend => density_trend(p, &mut rec),
    }?;
    Ok(rec.rows)
}

fn papr_witness(p: &Params, rec: &mut Recorder) -> Outcome {
    let tol = tolerance(p, 1e-9)?;
    for system in systems(p) {
        let ns = sizes(p, &powers(1, 10), 1 << 20, system == SystemTag::Walsh)?;
        for n in ns {
            let witness = adversarial_witness(system, n)?;
            let papr = compute_papr(system, n, &witness)?.papr;
            let target = (n as f64).sqrt();
            let exact = match system {
                SystemTag::Walsh => {
                    walsh_papr_squared_exact(&vec![1; n])? == Rational::from_integer(n as i128)
                }
                SystemTag::Fourier => true,
            };
            rec.push(
                Fields::new().with("system", system.to_string()).with("n", n),
                Fields::new().with("papr", papr),
                Fields::new().with("sqrt_n", target),
                exact && (papr - target).abs() <= tol,
                true,
            );
        }
    }
    Ok(())
}

fn walsh_identities(p: &Params, rng: &mut ChaCha8Rng, rec: &mut Recorder) -> Outcome {
    let ns = sizes(p, &[256], 1 << 12, true)?;
    let d = delta(p)?;
    let t = trials(p, 1, 1000)?;
    for n in ns {
        for trial in 0..t {
            let set = random_subset(rng, n, (d * n as f64).ceil() as usize)?;
            let profile = correlation_profile(&set, n)?;
            let squared = (set.len() * set.len()) as i64;
            let sum_ok = profile.total() == squared;
            for r in 1..=n {
                let c = correlation(r, &set, n)?;
                let size = m_set(r, &set, n)?.len() as i64;
                rec.push(
                    Fields::new()
                        .with("n", n)
                        .with("trial", trial)
                        .with("set_size", set.len())
                        .with("r", r),
                    Fields::new()
                        .with("correlation", c)
                        .with("m_set_size", size)
                        .with("profile_value", profile.get(r))
                        .with("profile_total", profile.total()),
                    Fields::new().with("set_size_squared", squared),
                    c == size && profile.get(r) == c && sum_ok,
                    true,
                );
            }
        }
    }
    Ok(())
}

fn main_lemma(p: &Params, rng: &mut ChaCha8Rng, rec: &mut Recorder) -> Outcome {
    let ns = sizes(p, &[4096], 1 << 16, true)?;
    let d = delta(p)?;
    let t = trials(p, 1, 1000)?;
    let budget = SearchBudget::default();
    for n in ns {
        let required = required_stages(d, n)?.unwrap_or(0);
        let size = ((d * n as f64).ceil() as usize).clamp(2.min(n), n);
        for trial in 0..t {
            let set = random_subset(rng, n, size)?;
            let w = main_lemma_witness_targeted(&set, n, required, &budget)?;
            let greedy = split_trace(&set, n)?.m();
            let m = w.m as i64;
            rec.push(
                Fields::new().with("n", n).with("delta", d).with("trial", trial),
                Fields::new()
                    .with("m", w.m)
                    .with("greedy_m", greedy)
                    .with("l1_one_plus_f", ratio_f64(&w.l1_of_one_plus_f))
                    .with("l2sq_one_plus_f", ratio_f64(&w.l2sq_of_one_plus_f))
                    .with("terms", w.terms)
                    .with("product_identity", w.product_identity_holds),
                Fields::new()
                    .with("required_m", required)
                    .with("one_plus_m", 1 + m)
                    .with("two_pow_m_minus_m_sq", (1i64 << m) - m * m),
                w.bounds_hold && w.m >= required,
                true,
            );
        }
    }
    Ok(())
}

fn cex_table(p: &Params, rec: &mut Recorder) -> Outcome {
    let ns = sizes(p, &powers(6, 12), 1 << 40, true)?;
    let d = delta(p)?;
    let mut previous = f64::NEG_INFINITY;
    for n in ns {
        let b = cex_lower_bound_walsh(d, n)?;
        let value = ratio_f64(&b.bound);
        rec.push(
            Fields::new().with("n", n).with("delta", d),
            Fields::new()
                .with("m", b.m)
                .with("bound", value)
                .with("bound_exact", b.bound.to_string())
                .with("informative", b.informative),
            Fields::new().with("previous_bound", previous),
            value > previous,
            true,
        );
        previous = value;
    }
    Ok(())
}

fn ap(p: &Params, rec: &mut Recorder) -> Outcome {
    let ns = sizes(p, &[16, 64, 256, 1024, 4096], 1 << 14, false)?;
    let lengths = p.m.clone().unwrap_or_else(|| vec![4, 8, 16]);
    for &m in &lengths {
        if m < 2 {
            return Err(invalid(format!("progression length {m} < 2")));
        }
    }
    for n in ns {
        for &m in &lengths {
            let mut steps = vec![1, 2, 3, n / m];
            steps.sort_unstable();
            steps.dedup();
            for d in steps {
                if d == 0 || 1 + (m - 1) * d > n {
                    continue;
                }
                let progression = ApDescriptor::new(1, d, m)?;
                let w = ap_witness(n, &progression, 16 * n)?;
                rec.push(
                    Fields::new().with("n", n).with("m", m).with("d", d).with("grid_points", w.grid_points),
                    Fields::new()
                        .with("fd_l1", w.fd_l1)
                        .with("ratio_to_reference", w.fd_l1 / w.bound)
                        .with("t_star", w.t_star)
                        .with("refinements", w.refinements),
                    Fields::new().with("reference", w.bound).with("slack", 1.1),
                    w.within_bound,
                    true,
                );
            }
        }
    }
    Ok(())
}

fn kernel_bound(p: &Params, rec: &mut Recorder) -> Outcome {
    let radii = sizes(p, &[16, 64, 256], 1 << 14, false)?;
    let lambdas = p.lambda.clone().unwrap_or_else(|| vec![1.5, 2.0, 4.0]);
    let tol = tolerance(p, 1e-3)?;
    for &lambda in &lambdas {
        for &r in &radii {
            let spec = KernelSpec::difference(lambda, r)?;
            let degree = spec.degree();
            let l1 = kernel_l1(&spec, 256 * degree)?;
            let bound = 2.0 * lambda / (lambda - 1.0);
            rec.push(
                Fields::new().with("lambda", lambda).with("r", r).with("n", degree),
                Fields::new().with("l1", l1),
                Fields::new().with("two_lambda_over_lambda_minus_one", bound),
                l1 <= bound + tol,
                true,
            );
        }
    }
    Ok(())
}

fn projection(p: &Params, rng: &mut ChaCha8Rng, rec: &mut Recorder) -> Outcome {
    let ns = sizes(p, &powers(0, 8), 1 << 12, true)?;
    let t = trials(p, 100, 100_000)?;
    for n in ns {
        let level = n.trailing_zeros();
        let signals: Vec<DyadicStepSignal<Rational>> = (0..t)
            .map(|_| {
                let values = (0..n).map(|_| Rational::from_integer(rng.random_range(-100..=100))).collect();
                DyadicStepSignal::new(level, values)
            })
            .collect::<Result<_, _>>()?;
        for target in 0..=level {
            let (mut worst, mut contraction, mut idempotence, mut shift) = (0.0f64, 0usize, 0usize, 0usize);
            for f in &signals {
                let sup = step_norms(f).linf;
                let proj = dyadic_projection(f, target)?;
                let psup = step_norms(&proj).linf;
                if sup > Rational::from_integer(0) {
                    worst = worst.max(ratio_f64(&(psup / sup)));
                }
                contraction += usize::from(psup > sup);
                idempotence += usize::from(dyadic_projection(&proj, target)? != proj);
                if target < level {
                    let out = q_shift(f, target)?;
                    let flat = dyadic_projection(&out, target)?.refine(level)?;
                    let same_norm = step_norms(&out).linf == step_norms(&band_difference(f, target)?).linf;
                    shift += usize::from(!same_norm || out.refine(level)? != flat);
                }
            }
            rec.push(
                Fields::new().with("n", n).with("target_level", target).with("trials", t),
                Fields::new()
                    .with("max_sup_ratio", worst)
                    .with("contraction_violations", contraction)
                    .with("idempotence_violations", idempotence)
                    .with("q_shift_violations", shift),
                Fields::new().with("sup_ratio", 1.0),
                contraction == 0 && idempotence == 0 && shift == 0,
                true,
            );
        }
    }
    Ok(())
}

fn gaussian_real(rng: &mut ChaCha8Rng, set: &IndexSet) -> Result<CoefficientVector, CliError> {
    let values: Vec<f64> = set.iter().map(|_| StandardNormal.sample(rng)).collect();
    Ok(CoefficientVector::real(set.clone(), &values)?)
}

fn solver_crosscheck(p: &Params, rng: &mut ChaCha8Rng, rec: &mut Recorder) -> Outcome {
    const MAX_INFO: u32 = 3;
    let ns = sizes(p, &[8], BRUTE_MAX_N, true)?;
    let t = trials(p, 20, 10_000)?;
    let budget = SolverBudget::default();
    for n in ns {
        for bits in 1u64..1 << n {
            if bits.count_ones() > MAX_INFO {
                continue;
            }
            let info = IndexSet::from_bits(n, bits);
            let comp = info.complement();
            let (mut lp_brute, mut low, mut high, mut chain) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
            let mut converged = true;
            for trial in 0..t {
                let a = gaussian_real(rng, &info)?;
                let problem = ExtensionProblem::new(SystemTag::Walsh, n, info.clone(), comp.clone(), a.clone())?;
                let lp = solve_min_sup(&problem, Method::Lp, &budget)?;
                let brute = solve_min_sup(&problem, Method::Brute, &budget)?;
                let pocs = solve_min_sup(&problem, Method::Pocs, &budget)?;
                converged &= lp.converged && brute.converged && pocs.converged;
                lp_brute = lp_brute.max((lp.achieved_sup - brute.achieved_sup).abs());
                low = low.max(lp.achieved_sup - pocs.achieved_sup);
                high = high.max(pocs.achieved_sup - lp.achieved_sup);
                if trial == 0 {
                    let mut order = comp.members().to_vec();
                    for i in (1..order.len()).rev() {
                        order.swap(i, rng.random_range(0..=i));
                    }
                    let mut previous = f64::INFINITY;
                    for len in 0..=order.len() {
                        let c = IndexSet::new(n, order[..len].iter().copied())?;
                        let q = ExtensionProblem::new(SystemTag::Walsh, n, info.clone(), c, a.clone())?;
                        let v = solve_min_sup(&q, Method::Lp, &budget)?.achieved_sup;
                        if previous.is_finite() {
                            chain = chain.max(v - previous);
                        }
                        previous = v;
                    }
                }
            }
            rec.push(
                Fields::new().with("n", n).with("info_set", set_label(&info)).with("trials", t),
                Fields::new()
                    .with("max_abs_lp_minus_brute", lp_brute)
                    .with("max_lp_minus_pocs", low)
                    .with("max_pocs_minus_lp", high)
                    .with("max_chain_increase", chain),
                Fields::new().with("exact_tolerance", 1e-6).with("pocs_slack", 1e-3),
                lp_brute <= 1e-6 && low <= 1e-6 && high <= 1e-3 && chain <= 1e-9,
                converged,
            );
        }
    }
    Ok(())
}

fn equivalence(p: &Params, rng: &mut ChaCha8Rng, rec: &mut Recorder) -> Outcome {
    let ns = sizes(p, &[4, 8, 16], MAX_EXHAUSTIVE, true)?;
    let t = trials(p, 10, 1000)?;
    let count = p.sets.unwrap_or(50);
    if count == 0 {
        return Err(invalid("sets must be positive"));
    }
    let budget = SolverBudget::default();
    for system in systems(p) {
        for &n in &ns {
            for _ in 0..count {
                let size = rng.random_range(1..=n);
                let set = random_subset(rng, n, size)?;
                let r = equivalence_crosscheck(system, n, &set, t, rng.random(), &budget)?;
                rec.push(
                    Fields::new()
                        .with("system", system.to_string())
                        .with("n", n)
                        .with("info_set", set_label(&set))
                        .with("set_size", set.len()),
                    Fields::new().with("ratio_lower", r.lower),
                    Fields::new().with("cex_upper", r.upper),
                    r.holds,
                    true,
                );
            }
        }
    }
    Ok(())
}

fn doubling(p: &Params, rec: &mut Recorder) -> Outcome {
    let ns = sizes(p, &[4, 8, 16], MAX_SUBSET_N, true)?;
    if ns.windows(2).any(|w| w[1] != 2 * w[0]) {
        return Err(invalid("N list must double at every step"));
    }
    let cs = p.c.clone().unwrap_or_else(|| vec![1.2, 1.5, 2.0]);
    let budget = SolverBudget::default();
    for &c in &cs {
        let mut previous: Option<usize> = None;
        for &n in &ns {
            let o = optimal_subset_size(n, c, &budget)?;
            let cap = previous.map_or(f64::INFINITY, |e| 2.0 * e as f64);
            rec.push(
                Fields::new().with("c", c).with("n", n),
                Fields::new()
                    .with("optimal_size", o.size)
                    .with("witness", set_label(&o.witness))
                    .with("witness_constant", o.witness_constant)
                    .with("orbits_examined", o.orbits_examined),
                Fields::new().with("twice_previous", cap),
                o.size as f64 <= cap,
                true,
            );
            previous = Some(o.size);
        }
    }
    Ok(())
}

fn khintchine(p: &Params, rng: &mut ChaCha8Rng, rec: &mut Recorder) -> Outcome {
    let ns = sizes(p, &[2, 4, 8, 16], 32, true)?;
    let t = trials(p, 100, 100_000)?;
    let budget = SolverBudget::default();
    for n in ns {
        let level = n.trailing_zeros();
        if level == 0 {
            return Err(invalid("N = 1 carries no Rademacher positions"));
        }
        for positions in [PositionSet::Rademacher, PositionSet::Dyadic] {
            let info = positions.positions(level);
            let draws: Vec<CoefficientVector> =
                (0..t).map(|_| gaussian_real(rng, &info)).collect::<Result<_, _>>()?;
            for lift in 1..=2u32 {
                let (mut max, mut sum, mut diff, mut failures) = (0.0f64, 0.0f64, 0.0f64, 0usize);
                for a in &draws {
                    let r = khintchine_compensation_check(level, a, positions, lift, &budget)?;
                    max = max.max(r.ratio);
                    sum += r.ratio;
                    diff = diff.max(r.optimum_difference);
                    failures += usize::from(!r.locality_holds);
                }
                rec.push(
                    Fields::new()
                        .with("n", n)
                        .with("positions", match positions {
                            PositionSet::Rademacher => "rademacher",
                            PositionSet::Dyadic => "dyadic",
                        })
                        .with("lift", lift)
                        .with("trials", t),
                    Fields::new()
                        .with("max_ratio", max)
                        .with("mean_ratio", sum / t as f64)
                        .with("max_optimum_difference", diff)
                        .with("locality_failures", failures),
                    Fields::new().with("reference", 2f64.sqrt() + 0.05),
                    failures == 0,
                    true,
                );
            }
        }
    }
    Ok(())
}

fn density_trend(p: &Params, rec: &mut Recorder) -> Outcome {
    let ns = sizes(p, &[4, 8, 16], MAX_EXHAUSTIVE, true)?;
    let d = delta(p)?;
    for system in systems(p) {
        let mut previous = 0.0f64;
        for &n in &ns {
            let size = (d * n as f64).round() as usize;
            if size == 0 {
                return Err(invalid(format!("δN rounds to zero at N = {n}")));
            }
            let mut worst = 0.0f64;
            let mut examined = 0usize;
            for bits in 1u64..1 << n {
                if bits.count_ones() as usize != size {
                    continue;
                }
                let set = IndexSet::from_bits(n, bits);
                worst = worst.max(norm_equiv_ratio(system, n, &set, RatioMode::ExhaustiveSigns, 0, 0)?.ratio);
                examined += 1;
            }
            rec.push(
                Fields::new().with("system", system.to_string()).with("n", n).with("set_size", size),
                Fields::new().with("worst_ratio", worst).with("sets_examined", examined),
                Fields::new().with("previous_worst", previous),
                worst >= previous - 1e-12,
                true,
            );
            previous = worst;
        }
    }
    Ok(())
}
