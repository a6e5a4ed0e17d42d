//! Experiment runners.
//!
//! Jobs are independent and run on a rayon pool of `spec.workers` threads;
//! results are collected in job order, so output files do not depend on
//! scheduling.

mod convergence;
mod image;
mod noise;
mod sweep;
mod theory_grid;

pub use convergence::{run_convergence, Condition, ConvergenceResults, ConvergenceRun};
pub use image::{run_image, ImageResults, ImageRun};
pub use noise::{run_noise_estimation, NoiseResults, NoiseRun};
pub use sweep::{run_k_sweep, run_mstar_sweep, SweepPoint, SweepResults, SweepRun};
pub use theory_grid::{grid, run_theory_grid, GridPoint, TheoryGridResults};

use std::path::PathBuf;
use std::sync::Arc;

use gapcs::synth::{add_noise, add_noise_std, gen_sensing_matrix, gen_sparse_signal};
use gapcs::{ProblemInstance, SensingOperator};
use rayon::prelude::*;

use crate::spec::{ExperimentKind, ExperimentSpec};
use crate::{HarnessError, Result};

/// Final squared error below which a noiseless run counts as a recovery.
pub const NOISELESS_SUCCESS: f64 = 1e-6;
/// Final squared error below which a noisy run counts as a recovery.
pub const NOISY_SUCCESS: f64 = 1e-1;
/// Error level for iteration counts in the convergence experiment.
pub const ITERATION_THRESHOLD: f64 = 1e-8;
/// Records averaged for the plateau error.
pub const PLATEAU_WINDOW: usize = 10;

/// Files written and the failure flags raised by one experiment.
#[derive(Debug, Default)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub failures: Vec<String>,
}

/// Noise added to the measurements.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Noise {
    None,
    SnrDb(f64),
    Std(f64),
}

/// Matrix, `K`-sparse signal and noise, all derived from `seed`.
pub fn synthetic_problem(
    spec: &ExperimentSpec,
    k: usize,
    seed: u64,
    noise: Noise,
) -> Result<ProblemInstance<f64>> {
    let a = gen_sensing_matrix(spec.m, spec.n, spec.matrix_kind, seed)?;
    let op = Arc::new(SensingOperator::new(a)?);
    let x = gen_sparse_signal(spec.n, k, seed)?;
    let clean = op.apply(&x)?;
    let noise = match noise {
        Noise::None => nalgebra::DVector::zeros(spec.m),
        Noise::SnrDb(snr) => add_noise(&clean, snr, seed)?.1,
        Noise::Std(std) => add_noise_std(&clean, std, seed)?.1,
    };
    Ok(ProblemInstance::new(op, x, noise)?)
}

/// Maps jobs to results on a pool of `workers` threads, preserving order.
pub(crate) fn parallel_map<J, R, F>(workers: usize, jobs: Vec<J>, f: F) -> Result<Vec<R>>
where
    J: Send + Sync,
    R: Send,
    F: Fn(&J) -> Result<R> + Send + Sync,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| HarnessError::Usage(format!("cannot start worker pool: {e}")))?;
    pool.install(|| jobs.par_iter().map(&f).collect())
}

/// Runs the experiment named by `spec.experiment` and writes its CSVs.
pub fn execute(spec: &ExperimentSpec) -> Result<Outcome> {
    spec.validate()?;
    let dir = &spec.output_dir;
    match spec.experiment {
        ExperimentKind::Convergence => run_convergence(spec)?.write(dir),
        ExperimentKind::MStarSweep => run_mstar_sweep(spec)?.write(dir),
        ExperimentKind::KSweep => run_k_sweep(spec)?.write(dir),
        ExperimentKind::NoiseEstimation => run_noise_estimation(spec)?.write(dir),
        ExperimentKind::TheoryGrid => run_theory_grid(spec)?.write(dir),
        ExperimentKind::Image => run_image(spec)?.write(dir),
    }
}
