use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use gapcs::imaging::{read_pgm, run_image_cs, synthetic_image, write_pgm, ImageCsSpec};
use gapcs::{Algorithm, StopReason};
use nalgebra::DMatrix;

use super::{parallel_map, Condition, Outcome};
use crate::output::{num, opt_num, write_csv};
use crate::spec::ExperimentSpec;
use crate::Result;

#[derive(Clone, Debug)]
pub struct ImageRun {
    pub algorithm: Algorithm,
    pub condition: Condition,
    pub seed: u64,
    pub m_star: usize,
    pub alpha_used: f64,
    pub psnr_trace: Vec<f64>,
    pub err_trace: Vec<f64>,
    pub stop_reason: StopReason,
    pub max_consistency_ratio: Option<f64>,
    pub reconstruction: DMatrix<f64>,
}

impl ImageRun {
    pub fn final_psnr(&self) -> f64 {
        *self.psnr_trace.last().expect("trace starts with the initial record")
    }
}

#[derive(Clone, Debug)]
pub struct ImageResults {
    pub reference: DMatrix<f64>,
    pub runs: Vec<ImageRun>,
}

pub fn load_or_synthesize(spec: &ExperimentSpec) -> Result<DMatrix<f64>> {
    match &spec.image {
        Some(path) => Ok(read_pgm(File::open(path)?)?),
        None => Ok(synthetic_image(spec.image_size, spec.image_size)),
    }
}

pub fn run_image(spec: &ExperimentSpec) -> Result<ImageResults> {
    let reference = load_or_synthesize(spec)?;
    let mut conditions = vec![Condition::Noiseless];
    if let Some(snr_db) = spec.snr_db {
        conditions.push(Condition::Noisy { snr_db });
    }
    let mut jobs = Vec::new();
    for &seed in &spec.seeds {
        for &condition in &conditions {
            for algorithm in [Algorithm::Gap, Algorithm::Ait] {
                jobs.push((seed, condition, algorithm));
            }
        }
    }
    let runs = parallel_map(spec.workers, jobs, |&(seed, condition, algorithm)| {
        let mut cs = ImageCsSpec::new(reference.clone(), algorithm, seed);
        cs.measurement_rate = spec.rate;
        cs.patch_size = spec.patch;
        cs.stride = spec.stride;
        cs.alpha = spec.alphas[0];
        cs.max_iters = spec.max_iters;
        cs.snr_db = match condition {
            Condition::Noiseless => None,
            Condition::Noisy { snr_db } => Some(snr_db),
        };
        let r = run_image_cs(&cs)?;
        Ok(ImageRun {
            algorithm,
            condition,
            seed,
            m_star: r.m_star,
            alpha_used: r.alpha_used,
            stop_reason: r.trace.stop_reason,
            max_consistency_ratio: r.trace.max_consistency_ratio(),
            psnr_trace: r.psnr_trace,
            err_trace: r.err_trace,
            reconstruction: r.reconstruction,
        })
    })?;
    Ok(ImageResults { reference, runs })
}

impl ImageResults {
    pub fn run(&self, algorithm: Algorithm, condition: &str, seed: u64) -> Option<&ImageRun> {
        self.runs
            .iter()
            .find(|r| r.algorithm == algorithm && r.condition.name() == condition && r.seed == seed)
    }

    /// `(condition, seed, GAP PSNR, AIT PSNR)` for every paired run.
    pub fn pairs(&self) -> Vec<(&'static str, u64, f64, f64)> {
        self.runs
            .iter()
            .filter(|r| r.algorithm == Algorithm::Gap)
            .filter_map(|g| {
                let a = self.run(Algorithm::Ait, g.condition.name(), g.seed)?;
                Some((g.condition.name(), g.seed, g.final_psnr(), a.final_psnr()))
            })
            .collect()
    }

    pub fn write(&self, dir: &Path) -> Result<Outcome> {
        let mut outcome = Outcome::default();
        let mut rows = Vec::new();
        for r in &self.runs {
            for (i, (p, e)) in r.psnr_trace.iter().zip(&r.err_trace).enumerate() {
                rows.push(vec![
                    r.algorithm.name().to_string(),
                    r.condition.name().to_string(),
                    r.seed.to_string(),
                    i.to_string(),
                    num(*p),
                    num(*e),
                ]);
            }
        }
        outcome.files.push(write_csv(
            dir,
            "image_trace.csv",
            &["algorithm", "condition", "seed", "iter", "psnr", "err_w"],
            &rows,
        )?);

        let rows: Vec<Vec<String>> = self
            .runs
            .iter()
            .map(|r| {
                vec![
                    r.algorithm.name().to_string(),
                    r.condition.name().to_string(),
                    r.seed.to_string(),
                    r.m_star.to_string(),
                    num(r.alpha_used),
                    num(r.final_psnr()),
                    (r.psnr_trace.len() - 1).to_string(),
                    r.stop_reason.name().to_string(),
                    opt_num(r.max_consistency_ratio),
                ]
            })
            .collect();
        outcome.files.push(write_csv(
            dir,
            "image_summary.csv",
            &[
                "algorithm",
                "condition",
                "seed",
                "m_star",
                "alpha",
                "final_psnr",
                "iterations",
                "stop_reason",
                "max_consistency_ratio",
            ],
            &rows,
        )?);
        for (condition, seed, gap, ait) in self.pairs() {
            if gap < ait {
                outcome.failures.push(format!(
                    "{condition} seed={seed}: GAP PSNR {gap:.3} below AIT PSNR {ait:.3}"
                ));
            }
        }

        let reference = dir.join("image_reference.pgm");
        write_pgm(&self.reference, BufWriter::new(File::create(&reference)?))?;
        outcome.files.push(reference);
        if let Some(first) = self.runs.first().map(|r| r.seed) {
            for r in self.runs.iter().filter(|r| r.seed == first) {
                let path = dir.join(format!(
                    "image_{}_{}_seed{}.pgm",
                    r.algorithm.name().to_lowercase(),
                    r.condition.name(),
                    r.seed
                ));
                write_pgm(&r.reconstruction, BufWriter::new(File::create(&path)?))?;
                outcome.files.push(path);
            }
        }
        Ok(outcome)
    }
}
