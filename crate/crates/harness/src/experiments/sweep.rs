use std::path::Path;

use gapcs::{run_solver, Algorithm, SolverConfig, StopReason};

use super::{parallel_map, synthetic_problem, Noise, Outcome, NOISELESS_SUCCESS, NOISY_SUCCESS};
use crate::output::{median, num, opt_num, write_csv};
use crate::spec::ExperimentSpec;
use crate::Result;

#[derive(Clone, Debug)]
pub struct SweepRun {
    pub k: usize,
    pub m_star: usize,
    pub algorithm: Algorithm,
    pub alpha: f64,
    pub seed: u64,
    pub final_err: f64,
    pub iterations: usize,
    pub stop_reason: StopReason,
    pub max_consistency_ratio: Option<f64>,
    pub max_support: usize,
}

/// Median outcome over seeds at one sweep point.
#[derive(Clone, Debug)]
pub struct SweepPoint {
    pub k: usize,
    pub m_star: usize,
    pub algorithm: Algorithm,
    pub alpha: f64,
    pub median_final_err: f64,
    pub successes: usize,
    pub runs: usize,
    /// Median final error below the threshold.
    pub success: bool,
}

#[derive(Clone, Debug)]
pub struct SweepResults {
    /// `"m_star_sweep"` or `"k_sweep"`.
    pub name: &'static str,
    pub threshold: f64,
    pub runs: Vec<SweepRun>,
    pub points: Vec<SweepPoint>,
}

pub fn run_mstar_sweep(spec: &ExperimentSpec) -> Result<SweepResults> {
    let pairs = spec.sweep_values.iter().map(|&m| (spec.k, m)).collect();
    sweep(spec, "m_star_sweep", pairs)
}

/// Sweeps `K` with `m* = K`.
pub fn run_k_sweep(spec: &ExperimentSpec) -> Result<SweepResults> {
    let pairs = spec.sweep_values.iter().map(|&k| (k, k)).collect();
    sweep(spec, "k_sweep", pairs)
}

fn sweep(spec: &ExperimentSpec, name: &'static str, pairs: Vec<(usize, usize)>) -> Result<SweepResults> {
    let noise = spec.snr_db.map_or(Noise::None, Noise::SnrDb);
    let threshold = if noise == Noise::None {
        NOISELESS_SUCCESS
    } else {
        NOISY_SUCCESS
    };
    let mut jobs = Vec::new();
    for &(k, m_star) in &pairs {
        for &alpha in &spec.alphas {
            for algorithm in [Algorithm::Gap, Algorithm::Ait] {
                for &seed in &spec.seeds {
                    jobs.push((k, m_star, alpha, algorithm, seed));
                }
            }
        }
    }
    let runs = parallel_map(spec.workers, jobs, |&(k, m_star, alpha, algorithm, seed)| {
        let problem = synthetic_problem(spec, k, seed, noise)?;
        let config = SolverConfig::new(algorithm, alpha, m_star)
            .with_max_iters(spec.max_iters)
            .with_truth_stop(threshold)
            .without_iterates();
        let trace = run_solver(&problem, &config)?;
        Ok(SweepRun {
            k,
            m_star,
            algorithm,
            alpha,
            seed,
            final_err: trace.final_error().expect("truth is tracked"),
            iterations: trace.iterations_run,
            stop_reason: trace.stop_reason,
            max_consistency_ratio: trace.max_consistency_ratio(),
            max_support: trace.max_support(),
        })
    })?;

    let mut points = Vec::new();
    for chunk in runs.chunks(spec.seeds.len()) {
        let first = &chunk[0];
        let errs: Vec<f64> = chunk.iter().map(|r| r.final_err).collect();
        let med = median(&errs);
        points.push(SweepPoint {
            k: first.k,
            m_star: first.m_star,
            algorithm: first.algorithm,
            alpha: first.alpha,
            median_final_err: med,
            successes: errs.iter().filter(|&&e| e < threshold).count(),
            runs: chunk.len(),
            success: med < threshold,
        });
    }
    Ok(SweepResults {
        name,
        threshold,
        runs,
        points,
    })
}

impl SweepResults {
    pub fn point(&self, algorithm: Algorithm, value: usize) -> Option<&SweepPoint> {
        self.points.iter().find(|p| {
            p.algorithm == algorithm
                && if self.name == "k_sweep" {
                    p.k == value
                } else {
                    p.m_star == value
                }
        })
    }

    pub fn write(&self, dir: &Path) -> Result<Outcome> {
        let mut outcome = Outcome::default();
        let rows: Vec<Vec<String>> = self
            .runs
            .iter()
            .map(|r| {
                vec![
                    r.k.to_string(),
                    r.m_star.to_string(),
                    r.algorithm.name().to_string(),
                    num(r.alpha),
                    r.seed.to_string(),
                    num(r.final_err),
                    r.iterations.to_string(),
                    r.stop_reason.name().to_string(),
                    (r.final_err < self.threshold).to_string(),
                    opt_num(r.max_consistency_ratio),
                    r.max_support.to_string(),
                ]
            })
            .collect();
        outcome.files.push(write_csv(
            dir,
            &format!("{}.csv", self.name),
            &[
                "k",
                "m_star",
                "algorithm",
                "alpha",
                "seed",
                "final_err_w",
                "iterations",
                "stop_reason",
                "success",
                "max_consistency_ratio",
                "max_support",
            ],
            &rows,
        )?);

        let mut rows = Vec::new();
        for p in &self.points {
            let below_k = p.m_star < p.k;
            if !p.success {
                outcome.failures.push(format!(
                    "{} K={} m*={} alpha={}: median error {}{}",
                    p.algorithm,
                    p.k,
                    p.m_star,
                    p.alpha,
                    num(p.median_final_err),
                    if below_k { " (m* < K)" } else { "" }
                ));
            }
            rows.push(vec![
                p.k.to_string(),
                p.m_star.to_string(),
                p.algorithm.name().to_string(),
                num(p.alpha),
                num(p.median_final_err),
                p.successes.to_string(),
                p.runs.to_string(),
                p.success.to_string(),
                below_k.to_string(),
            ]);
        }
        outcome.files.push(write_csv(
            dir,
            &format!("{}_summary.csv", self.name),
            &[
                "k",
                "m_star",
                "algorithm",
                "alpha",
                "median_final_err_w",
                "successes",
                "runs",
                "success",
                "m_star_below_k",
            ],
            &rows,
        )?);
        Ok(outcome)
    }
}
