use std::path::Path;

use gapcs::{run_solver, Algorithm, IterateTrace, SolverConfig};

use super::{parallel_map, synthetic_problem, Noise, Outcome, ITERATION_THRESHOLD, PLATEAU_WINDOW};
use crate::output::{alpha_tag, num, opt_int, opt_num, write_csv};
use crate::spec::ExperimentSpec;
use crate::Result;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Condition {
    Noiseless,
    Noisy { snr_db: f64 },
}

impl Condition {
    pub fn name(self) -> &'static str {
        match self {
            Condition::Noiseless => "noiseless",
            Condition::Noisy { .. } => "noisy",
        }
    }

    fn noise(self) -> Noise {
        match self {
            Condition::Noiseless => Noise::None,
            Condition::Noisy { snr_db } => Noise::SnrDb(snr_db),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ConvergenceRun {
    pub algorithm: Algorithm,
    pub alpha: f64,
    pub condition: Condition,
    pub seed: u64,
    pub trace: IterateTrace<f64>,
}

impl ConvergenceRun {
    pub fn iterations_to_threshold(&self) -> Option<usize> {
        self.trace.iterations_to(ITERATION_THRESHOLD)
    }

    /// Mean `err_w` over the final records.
    pub fn plateau(&self) -> f64 {
        self.trace.plateau(PLATEAU_WINDOW).expect("truth is tracked")
    }

    /// Noiseless runs must reach the iteration threshold; no run may diverge.
    pub fn failed(&self) -> bool {
        self.trace.stop_reason == gapcs::StopReason::Diverged
            || (self.condition == Condition::Noiseless && self.iterations_to_threshold().is_none())
    }
}

#[derive(Clone, Debug)]
pub struct ConvergenceResults {
    pub runs: Vec<ConvergenceRun>,
}

pub fn run_convergence(spec: &ExperimentSpec) -> Result<ConvergenceResults> {
    let mut conditions = vec![Condition::Noiseless];
    if let Some(snr_db) = spec.snr_db {
        conditions.push(Condition::Noisy { snr_db });
    }
    let mut jobs = Vec::new();
    for &seed in &spec.seeds {
        for &condition in &conditions {
            for &alpha in &spec.alphas {
                for algorithm in [Algorithm::Gap, Algorithm::Ait] {
                    jobs.push((seed, condition, alpha, algorithm));
                }
            }
        }
    }
    let runs = parallel_map(spec.workers, jobs, |&(seed, condition, alpha, algorithm)| {
        let problem = synthetic_problem(spec, spec.k, seed, condition.noise())?;
        let config = SolverConfig::new(algorithm, alpha, spec.m_star())
            .with_max_iters(spec.max_iters)
            .tracking_truth()
            .without_iterates();
        Ok(ConvergenceRun {
            algorithm,
            alpha,
            condition,
            seed,
            trace: run_solver(&problem, &config)?,
        })
    })?;
    Ok(ConvergenceResults { runs })
}

impl ConvergenceResults {
    pub fn select(&self, algorithm: Algorithm, alpha: f64, condition: &str) -> Vec<&ConvergenceRun> {
        self.runs
            .iter()
            .filter(|r| r.algorithm == algorithm && r.alpha == alpha && r.condition.name() == condition)
            .collect()
    }

    pub fn write(&self, dir: &Path) -> Result<Outcome> {
        let mut outcome = Outcome::default();
        let mut keys: Vec<(Algorithm, f64, &str)> = Vec::new();
        for r in &self.runs {
            let key = (r.algorithm, r.alpha, r.condition.name());
            if !keys.contains(&key) {
                keys.push(key);
            }
        }
        for (algorithm, alpha, condition) in keys {
            let mut rows = Vec::new();
            for r in self.select(algorithm, alpha, condition) {
                for rec in &r.trace.records {
                    rows.push(vec![
                        r.seed.to_string(),
                        rec.iter.to_string(),
                        opt_num(rec.err_w),
                        opt_num(rec.err_theta),
                        num(rec.lambda),
                        rec.support.len().to_string(),
                    ]);
                }
            }
            let name = format!(
                "convergence_{}_{}_{}.csv",
                algorithm.name().to_lowercase(),
                alpha_tag(alpha),
                condition
            );
            outcome.files.push(write_csv(
                dir,
                &name,
                &["seed", "iter", "err_w", "err_theta", "lambda", "support_size"],
                &rows,
            )?);
        }

        let mut rows = Vec::new();
        for r in &self.runs {
            if r.failed() {
                outcome.failures.push(format!(
                    "{} alpha={} {} seed={}: {}",
                    r.algorithm,
                    r.alpha,
                    r.condition.name(),
                    r.seed,
                    r.trace.stop_reason.name()
                ));
            }
            rows.push(vec![
                r.algorithm.name().to_string(),
                num(r.alpha),
                r.condition.name().to_string(),
                r.seed.to_string(),
                r.trace.iterations_run.to_string(),
                r.trace.stop_reason.name().to_string(),
                opt_int(r.iterations_to_threshold()),
                opt_num(r.trace.final_error()),
                num(r.plateau()),
                opt_num(r.trace.max_consistency_ratio()),
                r.trace.max_support().to_string(),
                (!r.failed()).to_string(),
            ]);
        }
        outcome.files.push(write_csv(
            dir,
            "convergence_summary.csv",
            &[
                "algorithm",
                "alpha",
                "condition",
                "seed",
                "iterations",
                "stop_reason",
                "iters_to_1e-8",
                "final_err_w",
                "plateau_err_w",
                "max_consistency_ratio",
                "max_support",
                "success",
            ],
            &rows,
        )?);
        Ok(outcome)
    }
}
