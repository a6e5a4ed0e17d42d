use std::fs;
use std::path::Path;

use gapcs::rip::{binomial, rip_constant_exact, rip_lower_bound_sampled, DEFAULT_SUBSET_CAP};
use gapcs::synth::stream_rng;
use gapcs::theory::{
    certify, optimal_rates, render_json_lines, render_text, DeltaEstimate, DeltaSource,
    OptimalRates,
};
use gapcs::{SolverConfig, TheoryInputs, TheoryReport};

use super::{synthetic_problem, Noise, Outcome};
use crate::output::{num, write_csv};
use crate::spec::ExperimentSpec;
use crate::Result;

const STREAM_DELTA_SAMPLING: u64 = 4;

#[derive(Clone, Debug)]
pub struct GridPoint {
    pub delta: f64,
    pub e_max: f64,
    pub m_star: usize,
    pub rates: OptimalRates<f64>,
}

#[derive(Clone, Debug)]
pub struct TheoryGridResults {
    pub points: Vec<GridPoint>,
    pub delta: DeltaEstimate<f64>,
    pub reports: Vec<TheoryReport<f64>>,
}

/// `δ = (i+½)/P`, `e_max = (1−δ)(1 + 2(j+1)/P)`, `m* = 1 + l·⌈100/P⌉`.
pub fn grid(points: usize) -> Vec<(f64, f64, usize)> {
    let p = points as f64;
    let step = 100usize.div_ceil(points);
    let mut out = Vec::with_capacity(points.pow(3));
    for i in 0..points {
        let delta = (i as f64 + 0.5) / p;
        for j in 0..points {
            let e_max = (1.0 - delta) * (1.0 + 2.0 * (j as f64 + 1.0) / p);
            for l in 0..points {
                out.push((delta, e_max, 1 + l * step));
            }
        }
    }
    out
}

/// `δ_{m*+K}` of the problem matrix: exact when enumeration is affordable,
/// otherwise a sampled lower bound.
pub fn delta_for(
    op: &gapcs::SensingOperator<f64>,
    s: usize,
    samples: usize,
    seed: u64,
) -> Result<DeltaEstimate<f64>> {
    let s = s.min(op.cols());
    if binomial(op.cols(), s) <= DEFAULT_SUBSET_CAP {
        return Ok(DeltaEstimate {
            value: rip_constant_exact(op, s)?,
            source: DeltaSource::Exact,
        });
    }
    let mut rng = stream_rng(seed, STREAM_DELTA_SAMPLING);
    Ok(DeltaEstimate {
        value: rip_lower_bound_sampled(op.entries(), s, samples, &mut rng)?,
        source: DeltaSource::SampledLowerBound,
    })
}

pub fn run_theory_grid(spec: &ExperimentSpec) -> Result<TheoryGridResults> {
    let mut points = Vec::new();
    for (delta, e_max, m_star) in grid(spec.grid_points) {
        let inputs = TheoryInputs::new(delta, m_star, 1, e_max, e_max, 1.0)?;
        points.push(GridPoint {
            delta,
            e_max,
            m_star,
            rates: optimal_rates(&inputs)?,
        });
    }

    let seed = spec.seeds[0];
    let noise = spec.snr_db.map_or(Noise::None, Noise::SnrDb);
    let problem = synthetic_problem(spec, spec.k, seed, noise)?;
    let delta = delta_for(&problem.operator, spec.m_star() + spec.k, spec.delta_samples, seed)?;
    let mut reports = Vec::new();
    for &alpha in &spec.alphas {
        for config in [
            SolverConfig::gap(alpha, spec.m_star()),
            SolverConfig::ait(alpha, spec.m_star()),
        ] {
            reports.extend(certify(&problem, &config, delta));
        }
    }
    Ok(TheoryGridResults {
        points,
        delta,
        reports,
    })
}

impl TheoryGridResults {
    pub fn write(&self, dir: &Path) -> Result<Outcome> {
        let mut outcome = Outcome::default();
        let mut rows = Vec::new();
        for p in &self.points {
            let r = &p.rates;
            let ok = r.gap_faster();
            if !ok {
                outcome.failures.push(format!(
                    "ordering violated at delta={} e_max={} m*={}",
                    num(p.delta),
                    num(p.e_max),
                    p.m_star
                ));
            }
            rows.push(vec![
                num(p.delta),
                num(p.e_max),
                p.m_star.to_string(),
                num(r.gamma1),
                num(r.gamma2),
                num(r.gamma3),
                num(r.gamma4),
                num(r.gamma5),
                num(r.gamma6),
                num(r.alpha_ait_a),
                num(r.alpha_ait_b),
                ok.to_string(),
            ]);
        }
        outcome.files.push(write_csv(
            dir,
            "theory_grid.csv",
            &[
                "delta", "e_max", "m_star", "gamma1", "gamma2", "gamma3", "gamma4", "gamma5",
                "gamma6", "alpha_ait_a", "alpha_ait_b", "gap_faster",
            ],
            &rows,
        )?);

        fs::create_dir_all(dir)?;
        let text = dir.join("theory_report.txt");
        fs::write(&text, render_text(&self.reports))?;
        let json = dir.join("theory_report.jsonl");
        fs::write(&json, render_json_lines(&self.reports))?;
        outcome.files.push(text);
        outcome.files.push(json);
        Ok(outcome)
    }
}
