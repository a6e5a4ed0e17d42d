use nalgebra::DVector;
use serde::Serialize;

use super::{Algorithm, Shrinkage, SoftThreshold, SolverConfig, DIVERGENCE_LIMIT};
#[cfg(test)]
use super::{ait_step, gap_step};
use crate::error::{dim_check, Error, Result};
use crate::operator::{ProblemInstance, SensingOperator};
use crate::scalar::{dist_sq, norm_sq, Real};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum StopReason {
    /// `‖w_{t+1} − w_t‖²` fell below `stop_epsilon`.
    StepTolerance,
    /// `‖w_t − x*‖²` fell below `truth_stop`.
    TruthTolerance,
    MaxIterations,
    Diverged,
}

impl StopReason {
    pub fn name(self) -> &'static str {
        match self {
            StopReason::StepTolerance => "step_tolerance",
            StopReason::TruthTolerance => "truth_tolerance",
            StopReason::MaxIterations => "max_iterations",
            StopReason::Diverged => "diverged",
        }
    }
}

/// State after iteration `iter`; record 0 is the zero initialization.
#[derive(Clone, Debug)]
pub struct IterationRecord<T: Real> {
    pub iter: usize,
    pub w: Option<DVector<T>>,
    pub theta: Option<DVector<T>>,
    pub lambda: T,
    pub err_w: Option<T>,
    pub err_theta: Option<T>,
    pub support: Vec<usize>,
    /// `‖w_t − w_{t−1}‖²`.
    pub step_change: T,
    /// GAP only: `‖A w_t − α y − (1−α) A θ_{t−1}‖`.
    pub consistency_residual: Option<T>,
}

#[derive(Clone, Debug)]
pub struct IterateTrace<T: Real> {
    pub algorithm: Algorithm,
    pub alpha: T,
    pub m_star: usize,
    pub records: Vec<IterationRecord<T>>,
    pub iterations_run: usize,
    pub converged: bool,
    pub stop_reason: StopReason,
    pub final_w: DVector<T>,
    pub final_theta: DVector<T>,
    /// θ from the iteration before `final_w`, i.e. the input of the last step.
    pub previous_theta: DVector<T>,
    /// `‖y‖`, the scale for consistency checks.
    pub measurement_norm: T,
}

impl<T: Real> IterateTrace<T> {
    /// `err_w` per record, if truth was tracked.
    pub fn errors(&self) -> Option<Vec<T>> {
        self.records.iter().map(|r| r.err_w).collect()
    }

    pub fn final_error(&self) -> Option<T> {
        self.records.last().and_then(|r| r.err_w)
    }

    /// First iteration whose `err_w` is strictly below `threshold`.
    pub fn iterations_to(&self, threshold: T) -> Option<usize> {
        self.records
            .iter()
            .find(|r| r.err_w.is_some_and(|e| e < threshold))
            .map(|r| r.iter)
    }

    /// Mean `err_w` over the last `count` records (fewer if the run is shorter).
    pub fn plateau(&self, count: usize) -> Option<T> {
        let errs = self.errors()?;
        let tail = &errs[errs.len().saturating_sub(count)..];
        let sum = tail.iter().fold(T::zero(), |acc, &e| acc + e);
        Some(sum / T::from_usize_lossy(tail.len()))
    }

    /// Largest `consistency_residual / ‖y‖` over the run.
    pub fn max_consistency_ratio(&self) -> Option<T> {
        let mut worst: Option<T> = None;
        for r in &self.records {
            if let Some(res) = r.consistency_residual {
                let ratio = if self.measurement_norm > T::zero() {
                    res / self.measurement_norm
                } else {
                    res
                };
                worst = Some(worst.map_or(ratio, |w| w.max(ratio)));
            }
        }
        worst
    }

    pub fn max_support(&self) -> usize {
        self.records.iter().map(|r| r.support.len()).max().unwrap_or(0)
    }
}

/// Runs the solver on a problem with the plain soft-threshold shrinkage.
pub fn run_solver<T: Real>(
    problem: &ProblemInstance<T>,
    config: &SolverConfig<T>,
) -> Result<IterateTrace<T>> {
    if config.m_star > problem.operator.cols() {
        return Err(Error::Domain(format!(
            "m_star {} exceeds signal length {}",
            config.m_star,
            problem.operator.cols()
        )));
    }
    let truth = config.track_truth.then_some(&problem.x_true);
    run_with(
        &problem.operator,
        &problem.y,
        truth,
        config,
        &SoftThreshold {
            m_star: config.m_star,
        },
    )
}

/// Runs the solver from `θ₀ = 0` with an arbitrary shrinkage.
pub fn run_with<T: Real, S: Shrinkage<T> + ?Sized>(
    op: &SensingOperator<T>,
    y: &DVector<T>,
    truth: Option<&DVector<T>>,
    config: &SolverConfig<T>,
    shrinkage: &S,
) -> Result<IterateTrace<T>> {
    config.validate()?;
    dim_check("measurements", op.rows(), y.len())?;
    if let Some(x) = truth {
        dim_check("truth", op.cols(), x.len())?;
    }
    let truth = if config.track_truth { truth } else { None };
    let n = op.cols();
    let alpha = config.alpha;
    let limit = T::lit(DIVERGENCE_LIMIT);

    let mut w = DVector::zeros(n);
    let mut theta = DVector::zeros(n);
    let mut previous_theta = DVector::zeros(n);
    let mut records = Vec::with_capacity(config.max_iters.min(4096) + 1);
    records.push(IterationRecord {
        iter: 0,
        w: config.keep_iterates.then(|| w.clone()),
        theta: config.keep_iterates.then(|| theta.clone()),
        lambda: T::zero(),
        err_w: truth.map(norm_sq),
        err_theta: truth.map(norm_sq),
        support: Vec::new(),
        step_change: T::zero(),
        consistency_residual: None,
    });

    let mut stop_reason = StopReason::MaxIterations;
    let mut iterations_run = 0;
    for t in 1..=config.max_iters {
        let a_theta = op.apply(&theta)?;
        let residual = y - &a_theta;
        let w_next = match config.algorithm {
            Algorithm::Gap => &theta + op.apply_pseudo_inverse(&residual)? * alpha,
            Algorithm::Ait => &theta + op.apply_adjoint(&residual)? * alpha,
        };
        let consistency_residual = match config.algorithm {
            Algorithm::Gap => {
                let lhs = op.apply(&w_next)?;
                let rhs = y * alpha + a_theta * (T::one() - alpha);
                Some((lhs - rhs).norm())
            }
            Algorithm::Ait => None,
        };
        let step_change = dist_sq(&w_next, &w);
        let shrunk = shrinkage.shrink(&w_next);
        let err_w = truth.map(|x| dist_sq(&w_next, x));
        let err_theta = truth.map(|x| dist_sq(&shrunk.theta, x));

        previous_theta = std::mem::replace(&mut theta, shrunk.theta);
        w = w_next;
        iterations_run = t;
        records.push(IterationRecord {
            iter: t,
            w: config.keep_iterates.then(|| w.clone()),
            theta: config.keep_iterates.then(|| theta.clone()),
            lambda: shrunk.lambda,
            err_w,
            err_theta,
            support: shrunk.support,
            step_change,
            consistency_residual,
        });

        let magnitude = err_w.unwrap_or_else(|| norm_sq(&w));
        if !magnitude.is_finite() || magnitude > limit || !step_change.is_finite() {
            stop_reason = StopReason::Diverged;
            break;
        }
        if let (Some(e), Some(stop)) = (err_w, config.truth_stop) {
            if e < stop {
                stop_reason = StopReason::TruthTolerance;
                break;
            }
        }
        if step_change < config.stop_epsilon {
            stop_reason = StopReason::StepTolerance;
            break;
        }
    }

    Ok(IterateTrace {
        algorithm: config.algorithm,
        alpha,
        m_star: shrinkage.budget(),
        records,
        iterations_run,
        converged: matches!(
            stop_reason,
            StopReason::StepTolerance | StopReason::TruthTolerance
        ),
        stop_reason,
        final_w: w,
        final_theta: theta,
        previous_theta,
        measurement_norm: y.norm(),
    })
}

#[cfg(test)]
type StepFn<T> = fn(&DVector<T>, &DVector<T>, T, &SensingOperator<T>) -> Result<DVector<T>>;

// Keep the standalone step functions and the loop in agreement.
#[cfg(test)]
fn step_fn<T: Real>(algorithm: Algorithm) -> StepFn<T> {
    match algorithm {
        Algorithm::Gap => gap_step,
        Algorithm::Ait => ait_step,
    }
}
