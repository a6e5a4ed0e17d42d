//! End-to-end acceptance suite: one PASS/FAIL line per criterion.

#[path = "support/oracle.rs"]
mod oracle;

use std::sync::Arc;
use std::time::{Duration, Instant};

use gapcs::rip::{rip_constant_exact, rip_invariance_check, shared_spectrum_check};
use gapcs::synth::{gen_sensing_matrix, gen_sparse_signal, MatrixKind};
use gapcs::theory::{
    alpha_interval_ait, alpha_interval_gap_noiseless, alpha_interval_gap_noisy, evaluate,
    gamma_ait, gamma_gap_noiseless, gamma_gap_noisy, optimal_rates, Branch, DeltaSource,
    StepInterval, TheoremId,
};
use gapcs::{run_solver, Algorithm, ProblemInstance, SensingOperator, SolverConfig, TheoryInputs};
use gapcs_harness::experiments::{
    run_convergence, run_image, run_k_sweep, run_mstar_sweep, run_noise_estimation,
    ConvergenceResults, NoiseResults, SweepResults,
};
use gapcs_harness::output::median;
use gapcs_harness::{ExperimentKind, ExperimentSpec};
use nalgebra::{DMatrix, DVector};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

const CONSISTENCY_TOLERANCE: f64 = 1e-9;

struct Verdict {
    pass: bool,
    detail: String,
}

impl Verdict {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }
}

/// Evidence gathered for the algebraic invariants across every suite.
#[derive(Default)]
struct Invariants {
    gap_runs: usize,
    worst_consistency: f64,
    support_violations: Vec<String>,
}

impl Invariants {
    fn consistency(&mut self, ratio: Option<f64>) {
        self.gap_runs += 1;
        let r = ratio.unwrap_or(f64::INFINITY);
        self.worst_consistency = self.worst_consistency.max(r);
    }

    fn support(&mut self, label: String, max_support: usize, m_star: usize) {
        if max_support > m_star {
            self.support_violations
                .push(format!("{label}: support {max_support} > m* {m_star}"));
        }
    }

    fn convergence(&mut self, results: &ConvergenceResults, m_star: usize) {
        for r in &results.runs {
            if r.algorithm == Algorithm::Gap {
                self.consistency(r.trace.max_consistency_ratio());
            }
            let label = format!("convergence {} seed {}", r.algorithm, r.seed);
            self.support(label, r.trace.max_support(), m_star);
        }
    }

    fn sweep(&mut self, results: &SweepResults) {
        for r in &results.runs {
            if r.algorithm == Algorithm::Gap {
                self.consistency(r.max_consistency_ratio);
            }
            let label = format!("{} {} K={} seed {}", results.name, r.algorithm, r.k, r.seed);
            self.support(label, r.max_support, r.m_star);
        }
    }
}

fn spec(kind: ExperimentKind) -> ExperimentSpec {
    let mut s = ExperimentSpec::defaults(kind);
    s.output_dir = std::env::temp_dir().join("gapcs-acceptance-unused");
    s
}

fn med_iters(results: &ConvergenceResults, alg: Algorithm) -> f64 {
    let iters: Vec<f64> = results
        .select(alg, 1.0, "noiseless")
        .iter()
        .map(|r| r.iterations_to_threshold().map_or(f64::INFINITY, |i| i as f64))
        .collect();
    median(&iters)
}

fn convergence_speed(inv: &mut Invariants) -> Verdict {
    let mut s = spec(ExperimentKind::Convergence);
    s.alphas = vec![1.0];
    s.snr_db = None;
    let results = run_convergence(&s).expect("convergence runs");
    inv.convergence(&results, s.m_star());
    let gap = results.select(Algorithm::Gap, 1.0, "noiseless");
    let ait = results.select(Algorithm::Ait, 1.0, "noiseless");
    let mut gap_not_slower = 0;
    for (g, a) in gap.iter().zip(&ait) {
        assert_eq!(g.seed, a.seed);
        let gi = g.iterations_to_threshold().unwrap_or(usize::MAX);
        let ai = a.iterations_to_threshold().unwrap_or(usize::MAX);
        if gi <= ai {
            gap_not_slower += 1;
        }
    }
    let (mg, ma) = (med_iters(&results, Algorithm::Gap), med_iters(&results, Algorithm::Ait));
    let share = gap_not_slower as f64 / gap.len() as f64;
    Verdict::new(
        mg <= 80.0 && ma <= 120.0 && share >= 0.9,
        format!("median iterations GAP {mg} AIT {ma}; GAP <= AIT in {gap_not_slower}/{} seeds", gap.len()),
    )
}

fn noisy_plateau(inv: &mut Invariants) -> Verdict {
    let s = spec(ExperimentKind::Convergence);
    let results = run_convergence(&s).expect("convergence runs");
    inv.convergence(&results, s.m_star());
    let mut pass = true;
    let mut detail = Vec::new();
    for &alpha in &s.alphas {
        let mut plateaus = [0.0; 2];
        for (slot, alg) in [Algorithm::Gap, Algorithm::Ait].into_iter().enumerate() {
            let runs = results.select(alg, alpha, "noisy");
            for r in &runs {
                let errs = r.trace.errors().expect("truth is tracked");
                let tail = &errs[errs.len().saturating_sub(10)..];
                let lo = tail.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = tail.iter().copied().fold(0.0, f64::max);
                let decayed = errs[errs.len() - 1] < errs[0];
                let flat = (hi - lo) <= 0.01 * lo;
                if !(decayed && flat) {
                    pass = false;
                    detail.push(format!("{alg} α={alpha} seed {} does not settle", r.seed));
                }
            }
            plateaus[slot] = median(&runs.iter().map(|r| r.plateau()).collect::<Vec<_>>());
        }
        pass &= plateaus[0] <= plateaus[1];
        detail.push(format!("α={alpha}: GAP {:.3e} AIT {:.3e}", plateaus[0], plateaus[1]));
    }
    Verdict::new(pass, detail.join("; "))
}

fn sweep_verdict(results: &SweepResults, expect: &[(usize, bool, bool)]) -> Verdict {
    let mut pass = true;
    let mut detail = Vec::new();
    for &(value, gap_ok, ait_ok) in expect {
        let g = results.point(Algorithm::Gap, value).expect("point swept");
        let a = results.point(Algorithm::Ait, value).expect("point swept");
        let ok = g.success == gap_ok && a.success == ait_ok;
        pass &= ok;
        detail.push(format!(
            "{value}: GAP {:.1e} AIT {:.1e}{}",
            g.median_final_err,
            a.median_final_err,
            if ok { "" } else { " (unexpected)" }
        ));
    }
    Verdict::new(pass, detail.join("; "))
}

fn mstar_sweep(inv: &mut Invariants) -> Verdict {
    let mut s = spec(ExperimentKind::MStarSweep);
    s.seeds = (0..5).collect();
    s.sweep_values = vec![20, 30, 40, 50, 60, 80, 90, 100];
    let results = run_mstar_sweep(&s).expect("sweep runs");
    inv.sweep(&results);
    let expect: Vec<_> = s
        .sweep_values
        .iter()
        .map(|&m| (m, true, m <= 60))
        .collect();
    sweep_verdict(&results, &expect)
}

fn k_sweep(inv: &mut Invariants) -> Verdict {
    let mut s = spec(ExperimentKind::KSweep);
    s.seeds = (0..5).collect();
    s.sweep_values = vec![15, 35, 40];
    let results = run_k_sweep(&s).expect("sweep runs");
    inv.sweep(&results);
    let v15 = sweep_verdict(&results, &[(15, true, true)]);
    let v35 = sweep_verdict(&results, &[(35, true, false)]);
    let g40 = results.point(Algorithm::Gap, 40).expect("point swept");
    Verdict::new(
        v15.pass && v35.pass && g40.success,
        format!("{}; {}; 40: GAP {:.1e}", v15.detail, v35.detail, g40.median_final_err),
    )
}

fn noise_estimation(inv: &mut Invariants) -> Verdict {
    let s = spec(ExperimentKind::NoiseEstimation);
    let results = run_noise_estimation(&s).expect("noise runs");
    for r in &results.runs {
        inv.consistency(r.max_consistency_ratio);
    }
    let mut pass = true;
    let mut detail = Vec::new();
    for (std, est, rel) in results.levels() {
        pass &= NoiseResults::level_passes(std, est, rel);
        detail.push(format!("σ={std:e}: est {est:.3e} rel err {rel:.3}"));
    }
    Verdict::new(pass, detail.join("; "))
}

fn rip_oracle() -> Verdict {
    let known = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]);
    let mut e = oracle::jacobi_eigenvalues(&known);
    e.sort_by(f64::total_cmp);
    if (e[0] - 1.0).abs() > 1e-14 || (e[1] - 3.0).abs() > 1e-14 {
        return Verdict::new(false, "oracle eigensolver self-check failed");
    }
    let mut worst: f64 = 0.0;
    let mut failures = Vec::new();
    for seed in 0..20 {
        let a = gen_sensing_matrix::<f64>(6, 10, MatrixKind::Gaussian, seed).unwrap();
        let op = SensingOperator::new(a.clone()).unwrap();
        for s in 1..=4 {
            let lib = rip_constant_exact(&op, s).unwrap();
            let reference = oracle::rip_brute_force(&a, s);
            worst = worst.max((lib - reference).abs());
        }
        let u = gen_sensing_matrix::<f64>(6, 6, MatrixKind::Gaussian, seed + 1000)
            .unwrap()
            .qr()
            .q();
        if !rip_invariance_check(&op, &u, 3).unwrap() {
            failures.push(format!("rotation invariance fails for seed {seed}"));
        }
        if !shared_spectrum_check(&op) {
            failures.push(format!("spectrum check fails for seed {seed}"));
        }
    }
    if worst > 1e-12 {
        failures.push(format!("oracle disagreement {worst:.2e}"));
    }
    Verdict::new(
        failures.is_empty(),
        if failures.is_empty() {
            format!("max |δ − oracle| = {worst:.2e} over s = 1..4")
        } else {
            failures.join("; ")
        },
    )
}

/// `√c·Q` where `Q` is an orthonormal basis of the complement of a `±1/√n` vector.
fn near_orthonormal_operator(n: usize, scale_sq: f64, seed: u64) -> SensingOperator<f64> {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut basis = gen_sensing_matrix::<f64>(n, n, MatrixKind::Gaussian, seed).unwrap();
    let inv = 1.0 / (n as f64).sqrt();
    for i in 0..n {
        basis[(i, 0)] = if rng.random::<bool>() { inv } else { -inv };
    }
    let q = basis.qr().q();
    let rows = q.columns(1, n - 1).transpose() * scale_sq.sqrt();
    SensingOperator::new(rows).unwrap()
}

fn certified_contraction(inv: &mut Invariants) -> (Verdict, usize) {
    let mut checked_steps = 0;
    let mut failures = Vec::new();
    let mut instances = 0;
    for seed in 0..10 {
        let op = Arc::new(near_orthonormal_operator(30, 1.034, seed));
        let delta = rip_constant_exact(&op, 2).unwrap();
        let inputs = TheoryInputs::new(delta, 1, 1, op.e_max(), op.e_min(), 1.0).unwrap();
        let report = evaluate(TheoremId::GapNoiseless, &inputs, DeltaSource::Exact);
        if !report.hypotheses_hold {
            continue;
        }
        instances += 1;
        for signal in 0..5 {
            let x: DVector<f64> = gen_sparse_signal(30, 1, 100 * seed + signal).unwrap();
            let problem = ProblemInstance::noiseless(op.clone(), x).unwrap();
            let config = SolverConfig::gap(1.0, 1)
                .with_max_iters(200)
                .tracking_truth()
                .without_iterates();
            let trace = run_solver(&problem, &config).unwrap();
            inv.consistency(trace.max_consistency_ratio());
            inv.support(format!("certified seed {seed}"), trace.max_support(), 1);
            let errs = trace.errors().unwrap();
            for t in 0..errs.len() - 1 {
                if errs[t] <= 1e-24 {
                    break;
                }
                checked_steps += 1;
                if errs[t + 1] > report.gamma * errs[t] {
                    failures.push(format!(
                        "seed {seed}/{signal} t={t}: {:.3e} > {:.3} × {:.3e}",
                        errs[t + 1],
                        report.gamma,
                        errs[t]
                    ));
                }
            }
        }
    }
    let pass = instances > 0 && failures.is_empty();
    let detail = if failures.is_empty() {
        format!("{instances} certified operators, {checked_steps} contraction steps")
    } else {
        failures.truncate(3);
        failures.join("; ")
    };
    (Verdict::new(pass, detail), instances)
}

fn endpoint_identities() -> Verdict {
    let mut rng = StdRng::seed_from_u64(7);
    let mut tuples = 0;
    let mut worst: f64 = 0.0;
    let mut attempts = 0;
    while tuples < 1000 && attempts < 1_000_000 {
        attempts += 1;
        let delta: f64 = rng.random_range(0.001..0.3);
        let m_star = rng.random_range(1..=20);
        let noisy = rng.random::<bool>();
        let e_max = (1.0 - delta) * rng.random_range(1.0..1.2);
        let inputs = TheoryInputs::new(delta, m_star, 1, e_max, e_max, 1.0).unwrap();
        let which = rng.random_range(0..3);
        let interval = match (which, noisy) {
            (0, false) => alpha_interval_gap_noiseless(&inputs),
            (0, true) => alpha_interval_gap_noisy(&inputs),
            (1, _) => alpha_interval_ait(&inputs, Branch::A, noisy),
            _ => alpha_interval_ait(&inputs, Branch::B, noisy),
        };
        let StepInterval::Open { low, high } = interval else {
            continue;
        };
        tuples += 1;
        for alpha in [low, high] {
            let at = inputs.with_alpha(alpha);
            let gamma: f64 = match (which, noisy) {
                (0, false) => gamma_gap_noiseless(&at).unwrap(),
                (0, true) => gamma_gap_noisy(&at).unwrap().0,
                (1, _) => gamma_ait(&at, Branch::A, noisy).unwrap(),
                _ => gamma_ait(&at, Branch::B, noisy).unwrap(),
            };
            worst = worst.max((gamma - 1.0).abs());
        }
    }
    Verdict::new(
        tuples == 1000 && worst <= 1e-9,
        format!("{tuples} feasible tuples, max |γ(endpoint) − 1| = {worst:.2e}"),
    )
}

fn theory_consistency(inv: &mut Invariants) -> Verdict {
    let (contraction, instances) = certified_contraction(inv);
    let endpoints = endpoint_identities();
    Verdict::new(
        contraction.pass && endpoints.pass,
        format!(
            "{}; {}{}",
            contraction.detail,
            endpoints.detail,
            if instances == 0 { " (no certifying instance)" } else { "" }
        ),
    )
}

fn rate_comparison() -> Verdict {
    let grid = gapcs_harness::experiments::grid(10);
    let mut ordered = 0;
    let mut worst_rel: f64 = 0.0;
    for &(delta, e_max, m_star) in &grid {
        let inputs = TheoryInputs::new(delta, m_star, 1, e_max, e_max, 1.0).unwrap();
        let lib = optimal_rates(&inputs).unwrap();
        let mut ok = true;
        for (noisy, g_lib, a_lib, b_lib) in [
            (false, lib.gamma1, lib.gamma3, lib.gamma4),
            (true, lib.gamma2, lib.gamma5, lib.gamma6),
        ] {
            let c = if noisy { 4 * m_star + 8 } else { 2 * m_star + 4 } as f64;
            let g = oracle::gap_rate_at_one(c, delta, e_max);
            let a = oracle::ait_rate_optimal(c, delta, e_max * e_max);
            let b = oracle::ait_rate_optimal(c, delta, e_max * (1.0 + delta));
            for (x, y) in [(g, g_lib), (a, a_lib), (b, b_lib)] {
                worst_rel = worst_rel.max((x - y).abs() / x.abs().max(1e-300));
            }
            ok &= g < a && g < b;
        }
        ok &= lib.gap_faster();
        ordered += ok as usize;
    }
    Verdict::new(
        ordered == grid.len() && worst_rel < 1e-12,
        format!("ordering holds at {ordered}/{} points; max relative gap to oracle {worst_rel:.1e}", grid.len()),
    )
}

fn image_cs(inv: &mut Invariants) -> Verdict {
    let s = spec(ExperimentKind::Image);
    let results = run_image(&s).expect("image runs");
    for r in results.runs.iter().filter(|r| r.algorithm == Algorithm::Gap) {
        inv.consistency(r.max_consistency_ratio);
    }
    let pairs = results.pairs();
    let wins = pairs.iter().filter(|p| p.2 >= p.3).count();
    let worst = pairs
        .iter()
        .map(|p| p.2 - p.3)
        .fold(f64::INFINITY, f64::min);
    Verdict::new(
        wins == pairs.len() && pairs.len() == 2 * s.seeds.len(),
        format!("GAP >= AIT in {wins}/{} runs; smallest margin {worst:.2} dB", pairs.len()),
    )
}

/// GAP and AIT coincide step for step when `AAᵀ = I`.
fn identity_gram_equality() -> Result<f64, String> {
    let q = gen_sensing_matrix::<f64>(60, 128, MatrixKind::Gaussian, 11)
        .unwrap()
        .transpose()
        .qr()
        .q()
        .transpose();
    let op = Arc::new(SensingOperator::new(q).unwrap());
    let mut worst: f64 = 0.0;
    for (seed, alpha) in [(1, 1.0), (2, 0.8), (3, 1.2)] {
        let x: DVector<f64> = gen_sparse_signal(128, 8, seed).unwrap();
        let problem = ProblemInstance::noiseless(op.clone(), x).unwrap();
        let g = run_solver(&problem, &SolverConfig::gap(alpha, 8).tracking_truth()).unwrap();
        let a = run_solver(&problem, &SolverConfig::ait(alpha, 8).tracking_truth()).unwrap();
        if g.records.len() != a.records.len() {
            return Err(format!("trace lengths differ for seed {seed}"));
        }
        for (rg, ra) in g.records.iter().zip(&a.records) {
            let (wg, wa) = (rg.w.as_ref().unwrap(), ra.w.as_ref().unwrap());
            worst = worst.max((wg - wa).norm() / wg.norm().max(1e-300));
        }
    }
    if worst <= 1e-10 {
        Ok(worst)
    } else {
        Err(format!("iterates differ by {worst:.2e}"))
    }
}

fn invariants(inv: &Invariants) -> Verdict {
    let equality = identity_gram_equality();
    let pass = inv.worst_consistency < CONSISTENCY_TOLERANCE
        && inv.support_violations.is_empty()
        && equality.is_ok();
    let mut detail = format!(
        "{} GAP runs, worst consistency {:.2e}; {} support violations",
        inv.gap_runs,
        inv.worst_consistency,
        inv.support_violations.len()
    );
    match equality {
        Ok(d) => detail.push_str(&format!("; identity-Gram traces agree to {d:.1e}")),
        Err(e) => detail.push_str(&format!("; {e}")),
    }
    Verdict::new(pass, detail)
}

fn main() {
    let mut inv = Invariants::default();
    let mut any_failed = false;
    let mut report = |n: usize, name: &str, budget: Duration, f: &mut dyn FnMut() -> Verdict| {
        let start = Instant::now();
        let v = f();
        let elapsed = start.elapsed();
        let in_time = elapsed <= budget;
        let pass = v.pass && in_time;
        any_failed |= !pass;
        println!(
            "criterion {n:>2} {}: {name} — {} [{:.1}s{}]",
            if pass { "PASS" } else { "FAIL" },
            v.detail,
            elapsed.as_secs_f64(),
            if in_time { "" } else { ", over budget" }
        );
    };
    let min = |m: u64| Duration::from_secs(60 * m);
    report(1, "convergence speed", min(1), &mut || convergence_speed(&mut inv));
    report(2, "noisy plateau ordering", min(2), &mut || noisy_plateau(&mut inv));
    report(3, "m* sweep", min(3), &mut || mstar_sweep(&mut inv));
    report(4, "K sweep", min(3), &mut || k_sweep(&mut inv));
    report(5, "noise estimation", min(2), &mut || noise_estimation(&mut inv));
    report(6, "RIP oracle equivalence", Duration::from_secs(10), &mut rip_oracle);
    report(7, "theory consistency", min(1), &mut || theory_consistency(&mut inv));
    report(8, "rate comparison", Duration::from_secs(5), &mut rate_comparison);
    report(9, "image CS", min(5), &mut || image_cs(&mut inv));
    report(10, "algebraic invariants", min(1), &mut || invariants(&inv));
    if any_failed {
        std::process::exit(1);
    }
}
